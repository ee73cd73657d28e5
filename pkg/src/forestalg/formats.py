"""Text formats for trees, automata, and update scripts.

Tree files: one node per line, ``<id> <parent-id|-> <label> <left-sibling-id|->``,
with `-` for "none".  Sibling order is reconstructed from the left-sibling
links, so line order does not matter; exactly one node may lack a parent.

Automaton files: sections introduced by keywords::

    states:   q0 q1 ...          (declaration order fixes the bit layout)
    alphabet: a b ...
    init:     <symbol> <state> ...
    delta:    <pre> <self> <post>
    q0:       <state>
    qF:       <state>
    select:   <state> ... (one selecting tuple per line; optional)

Update scripts: one update per line, ``relab|subdiv|insertL|insertR <id> <label>``
or ``delete <id>``.

Blank lines and `#` comments are ignored everywhere.
"""

from __future__ import annotations

from .automata import Nfsta, Nfta
from .errors import ParseError
from .trees import ForestOrContext, TreeNode, TreeUpdate


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def parse_tree(text: str) -> ForestOrContext:
    nodes: dict[int, TreeNode] = {}
    parent_of: dict[int, int | None] = {}
    leftsib_of: dict[int, int | None] = {}
    for no, line in _lines(text):
        parts = line.split()
        if len(parts) != 4:
            raise ParseError(f"line {no}: expected '<id> <parent> <label> <left-sibling>'")
        sid, sparent, label, sleft = parts
        try:
            nid = int(sid)
            pid = None if sparent == "-" else int(sparent)
            lid = None if sleft == "-" else int(sleft)
        except ValueError:
            raise ParseError(f"line {no}: ids must be integers or '-'") from None
        if nid in nodes:
            raise ParseError(f"line {no}: duplicate id {nid}")
        nodes[nid] = TreeNode(label, node_id=nid)
        parent_of[nid] = pid
        leftsib_of[nid] = lid
    if not nodes:
        raise ParseError("empty tree file")

    roots = [nid for nid, pid in parent_of.items() if pid is None]
    if len(roots) != 1:
        raise ParseError(f"expected exactly one root, found {len(roots)}")
    for nid, pid in parent_of.items():
        if pid is not None and pid not in nodes:
            raise ParseError(f"node {nid} has unknown parent {pid}")

    # order each sibling group by chaining left-sibling links
    groups: dict[int | None, dict[int | None, int]] = {}
    for nid in nodes:
        pid = parent_of[nid]
        g = groups.setdefault(pid, {})
        lid = leftsib_of[nid]
        if lid in g:
            raise ParseError(f"nodes {g[lid]} and {nid} claim the same left sibling")
        g[lid] = nid
    for pid, g in groups.items():
        if pid is not None:
            p = nodes[pid]
            cur = g.get(None)
            if cur is None:
                raise ParseError(f"children of {pid} have no first sibling")
            count = 0
            while cur is not None:
                child = nodes[cur]
                if leftsib_of[cur] is not None and parent_of.get(leftsib_of[cur]) != pid:
                    raise ParseError(f"node {cur}: left sibling has a different parent")
                child.parent = p
                p.children.append(child)
                count += 1
                cur = g.get(cur)
            if count != len(g):
                raise ParseError(f"sibling chain under {pid} is broken")
    if leftsib_of[roots[0]] is not None:
        raise ParseError("root has a left sibling")
    return ForestOrContext([nodes[roots[0]]])


def format_tree(t: ForestOrContext) -> str:
    if t.hole is not None:
        raise ParseError("contexts have no text form")
    out = []
    stack = [(r, None, None) for r in reversed(t.roots)]
    while stack:
        v, pid, lid = stack.pop()
        out.append(f"{v.id} {'-' if pid is None else pid} {v.label} {'-' if lid is None else lid}")
        prev = None
        kids = []
        for c in v.children:
            kids.append((c, v.id, prev))
            prev = c.id
        stack.extend(reversed(kids))
    return "\n".join(out) + "\n"


def parse_automaton(text: str) -> Nfta | Nfsta:
    states: list[str] = []
    alphabet: list[str] = []
    init: dict[str, list[str]] = {}
    delta: list[tuple[str, str, str]] = []
    q0 = qF = None
    select: list[tuple[str, ...]] = []
    for no, line in _lines(text):
        head, _, rest = line.partition(":")
        head = head.strip()
        parts = rest.split()
        if head == "states":
            states.extend(parts)
        elif head == "alphabet":
            alphabet.extend(parts)
        elif head == "init":
            if not parts:
                raise ParseError(f"line {no}: init needs a symbol")
            init.setdefault(parts[0], []).extend(parts[1:])
        elif head == "delta":
            if len(parts) != 3:
                raise ParseError(f"line {no}: delta needs three states")
            delta.append((parts[0], parts[1], parts[2]))
        elif head == "q0":
            if len(parts) != 1 or q0 is not None:
                raise ParseError(f"line {no}: q0 needs exactly one state, given once")
            q0 = parts[0]
        elif head == "qF":
            if len(parts) != 1 or qF is not None:
                raise ParseError(f"line {no}: qF needs exactly one state, given once")
            qF = parts[0]
        elif head == "select":
            select.append(tuple(parts))
        else:
            raise ParseError(f"line {no}: unknown section {head!r}")
    if q0 is None or qF is None:
        raise ParseError("automaton needs q0: and qF: lines")
    try:
        if select:
            return Nfsta(states, alphabet, init, delta, q0, qF, select)
        return Nfta(states, alphabet, init, delta, q0, qF)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def format_automaton(a: Nfta) -> str:
    out = [
        "states: " + " ".join(a.states),
        "alphabet: " + " ".join(a.alphabet),
    ]
    for sym in a.alphabet:
        qs = a.init.get(sym)
        if qs:
            out.append(f"init: {sym} " + " ".join(qs))
    for t in sorted(a.delta):
        out.append("delta: " + " ".join(t))
    out.append(f"q0: {a.q0}")
    out.append(f"qF: {a.qF}")
    if isinstance(a, Nfsta):
        for s in a.select:
            out.append("select: " + " ".join(s))
    return "\n".join(out) + "\n"


def parse_update(line: str, lineno: int = 0) -> TreeUpdate:
    parts = line.split()
    where = f"line {lineno}: " if lineno else ""
    if not parts:
        raise ParseError(where + "empty update")
    kind = parts[0]
    if kind == "delete":
        if len(parts) != 2:
            raise ParseError(where + "delete takes exactly one id")
        rest = parts[1:]
        label = None
    elif kind in ("relab", "subdiv", "insertL", "insertR"):
        if len(parts) != 3:
            raise ParseError(where + f"{kind} takes an id and a label")
        rest = parts[1:2]
        label = parts[2]
    else:
        raise ParseError(where + f"unknown update {kind!r}")
    try:
        target = int(rest[0])
    except ValueError:
        raise ParseError(where + "target id must be an integer") from None
    return TreeUpdate(kind, target, label)


def parse_updates(text: str) -> list[TreeUpdate]:
    return [parse_update(line, no) for no, line in _lines(text)]


def format_update(u: TreeUpdate) -> str:
    if u.kind == "delete":
        return f"delete {u.target}"
    return f"{u.kind} {u.target} {u.label}"
