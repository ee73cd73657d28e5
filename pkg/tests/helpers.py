"""Shared builders for the test suite: fixture subjects and automata,
random-instance generators, and explicit formula assembly."""

from __future__ import annotations

import random

from forestalg import trees
from forestalg.automata import Nfsta, Nfta
from forestalg.formula import Formula, FormulaNode
from forestalg.ops import LEAF
from forestalg.trees import ForestOrContext, TreeNode, TreeUpdate


# -- fixture automata and trees ---------------------------------------------

def cycle_automaton() -> Nfta:
    """Acceptance fixture: horizontal states move in two 2-cycles."""
    return Nfta(
        states=["q1", "q2", "q3", "q4", "q0", "qF"],
        alphabet="ab",
        init={"a": ["q1"], "b": ["q3"]},
        delta=[
            ("q1", "q1", "q2"), ("q1", "q2", "q2"),
            ("q2", "q3", "q1"), ("q2", "q4", "q1"),
            ("q3", "q1", "q4"), ("q3", "q2", "q4"),
            ("q4", "q3", "q3"), ("q4", "q4", "q3"),
            ("q0", "q1", "qF"), ("q0", "q2", "qF"),
        ],
        q0="q0",
        qF="qF",
    )


def nine_node_tree() -> ForestOrContext:
    """a(a(a,b), b, a, b(a,b)) with preorder ids 0..8; cycle_automaton accepts it."""
    t, l = trees.tree, trees.leaf
    return t("a", [
        t("a", [l("a", 2), l("b", 3)], node_id=1),
        l("b", 4),
        l("a", 5),
        t("b", [l("a", 7), l("b", 8)], node_id=6),
    ], node_id=0)


def path_pair_automaton() -> Nfsta:
    """Selection fixture: pairs of a-nodes connected by a path of b-nodes.

    Position 1 of a selected pair is the lower a-node (state q3), position 2
    the upper one (state q5); q7 marks b-nodes on the path and q1/q2 skip
    unrelated parts of the tree.
    """
    return Nfsta(
        states=["q1", "q2", "q3", "q4", "q5", "q6", "q7", "q0", "qF"],
        alphabet="ab",
        init={"a": ["q1", "q3", "q4"], "b": ["q1", "q6"]},
        delta=[(f"q{i}", "q1", f"q{i}") for i in range(1, 8)] + [
            ("q1", "q2", "q2"), ("q1", "q5", "q2"),
            ("q4", "q7", "q5"),
            ("q6", "q3", "q7"), ("q6", "q7", "q7"),
            ("q0", "q2", "qF"), ("q0", "q3", "qF"),
        ],
        q0="q0",
        qF="qF",
        select=[("q3", "q5")],
    )


def seven_node_tree() -> ForestOrContext:
    """b(a(b(b(a,a))), b) with preorder ids 0..6.

    Under path_pair_automaton the selected pairs are (4, 1) and (5, 1).
    """
    t, l = trees.tree, trees.leaf
    return t("b", [
        t("a", [
            t("b", [
                t("b", [l("a", 4), l("a", 5)], node_id=3),
            ], node_id=2),
        ], node_id=1),
        l("b", 6),
    ], node_id=0)


# -- random instances --------------------------------------------------------

def random_tree(rng: random.Random, n: int, labels: str = "ab") -> ForestOrContext:
    """Random-attachment tree with ids 0..n-1 (expected depth ~3 ln n)."""
    labs = [rng.choice(labels) for _ in range(n)]
    kids: list[list[int]] = [[] for _ in range(n)]
    for i in range(1, n):
        kids[rng.randrange(i)].append(i)

    def build(i: int) -> ForestOrContext:
        if kids[i]:
            return trees.tree(labs[i], [build(j) for j in kids[i]], node_id=i)
        return trees.leaf(labs[i], i)

    return build(0)


def random_forest(rng: random.Random, max_nodes: int, labels: str = "ab") -> ForestOrContext:
    """Random forest with 0..max_nodes nodes (possibly empty)."""
    n = rng.randint(0, max_nodes)
    all_nodes: list[TreeNode] = []
    roots: list[TreeNode] = []
    for i in range(n):
        v = TreeNode(rng.choice(labels))
        if i == 0 or rng.random() < 0.3:
            roots.append(v)
        else:
            p = all_nodes[rng.randrange(i)]
            v.parent = p
            p.children.append(v)
        all_nodes.append(v)
    return ForestOrContext(roots)


def random_context(rng: random.Random, max_nodes: int, labels: str = "ab") -> ForestOrContext:
    """Random context: a forest with a hole at a random position."""
    d = random_forest(rng, max_nodes, labels)
    hole = TreeNode(None)
    spots = [v for v in trees.nodes(d)]
    if not spots or rng.random() < 0.3:
        d.roots.insert(rng.randint(0, len(d.roots)), hole)
    else:
        p = rng.choice(spots)
        hole.parent = p
        p.children.insert(rng.randint(0, len(p.children)), hole)
    return ForestOrContext(d.roots, hole=hole)


def random_subject(rng: random.Random, max_nodes: int, labels: str = "ab") -> ForestOrContext:
    """Random forest or context with at most max_nodes labeled nodes."""
    if rng.random() < 0.5:
        return random_context(rng, max_nodes, labels)
    return random_forest(rng, max_nodes, labels)


def random_nfta(rng: random.Random, max_states: int, labels: str = "ab") -> Nfta:
    """Random automaton with 1..max_states states and random transitions.

    A couple of accepting transitions (q0, s, qF) are always included so a
    useful fraction of random instances accepts something.
    """
    nq = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(nq)]
    density = rng.choice([0.15, 0.3, 0.5])
    init = {
        a: [q for q in states if rng.random() < 0.5] or [rng.choice(states)]
        for a in labels
    }
    delta = [
        (p, s, q)
        for p in states for s in states for q in states
        if rng.random() < density
    ]
    q0, qF = rng.choice(states), rng.choice(states)
    delta += [(q0, rng.choice(states), qF) for _ in range(2)]
    return Nfta(states, labels, init, delta, q0, qF)


def random_nfsta(
    rng: random.Random,
    max_states: int,
    max_k: int = 2,
    max_select: int = 3,
    labels: str = "ab",
) -> Nfsta:
    """Random selecting automaton; k is drawn from 0..max_k (biased to 1)."""
    base = random_nfta(rng, max_states, labels)
    choices = [k for k in range(max_k + 1) for _ in (range(3) if k == 1 else range(1))]
    k = rng.choice(choices)
    select = [
        tuple(rng.choice(base.states) for _ in range(k))
        for _ in range(rng.randint(1, max_select))
    ]
    return Nfsta(base.states, labels, base.init, base.delta, base.q0, base.qF, select)


def random_update(rng: random.Random, t: ForestOrContext, min_nodes: int = 2) -> TreeUpdate:
    """One random update valid on the tree t (keeps at least min_nodes nodes)."""
    ids = []
    non_roots = []
    leaves = []
    for v in trees.nodes(t):
        ids.append(v.id)
        if v.parent is not None:
            non_roots.append(v.id)
            if not v.children:
                leaves.append(v.id)
    kinds = ["relab", "subdiv"] + (["insertL", "insertR"] if non_roots else [])
    if leaves and len(ids) > min_nodes:
        kinds.append("delete")
    kind = rng.choice(kinds)
    if kind == "delete":
        return TreeUpdate("delete", rng.choice(leaves))
    if kind in ("insertL", "insertR"):
        return TreeUpdate(kind, rng.choice(non_roots), rng.choice("ab"))
    return TreeUpdate(kind, rng.choice(ids), rng.choice("ab"))


def apply_both(engine, mirror: ForestOrContext, u: TreeUpdate) -> int | None:
    """Apply u to the engine and to the plain-tree mirror with the same new id."""
    new_id = engine.apply_update(u)
    trees.apply_update(mirror, u, new_id=new_id)
    return new_id


class UpdateFeed:
    """Random valid updates against a mirror tree, with O(1) bookkeeping.

    Unlike `random_update` this never walks the whole tree, so it can drive
    millions of steps on large trees.
    """

    KINDS = ("relab", "subdiv", "insertL", "insertR", "delete")

    def __init__(self, rng: random.Random, mirror: ForestOrContext, labels: str = "ab"):
        self.rng = rng
        self.t = mirror
        self.labels = labels
        self.by_id = {v.id: v for v in trees.nodes(mirror)}
        self.ids = list(self.by_id)
        self.pos = {vid: i for i, vid in enumerate(self.ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def _register(self, node: TreeNode) -> None:
        self.by_id[node.id] = node
        self.pos[node.id] = len(self.ids)
        self.ids.append(node.id)

    def _unregister(self, vid: int) -> None:
        del self.by_id[vid]
        i = self.pos.pop(vid)
        last = self.ids.pop()
        if last != vid:
            self.ids[i] = last
            self.pos[last] = i

    def draw(self) -> TreeUpdate:
        rng = self.rng
        n = len(self.ids)
        for _ in range(40):
            kind = rng.choice(self.KINDS)
            vid = self.ids[rng.randrange(n)]
            node = self.by_id[vid]
            if kind in ("insertL", "insertR", "delete") and node.parent is None:
                continue
            if kind == "delete":
                if node.children or n <= 2:
                    continue
                return TreeUpdate("delete", vid)
            return TreeUpdate(kind, vid, rng.choice(self.labels))
        return TreeUpdate("relab", self.ids[rng.randrange(n)], rng.choice(self.labels))

    def apply(self, u: TreeUpdate, new_id: int | None = None) -> TreeNode | None:
        node = trees.apply_update(self.t, u, new_id=new_id, index=self.by_id)
        if u.kind == "delete":
            self._unregister(u.target)
        elif node is not None:
            self._register(node)
        return node


def sigset_by_sets(aut: Nfta, d: ForestOrContext):
    """Signature set of a subject, recomputed with plain sets of index tuples.

    Follows the run definition directly (chained sibling relations, wrapped
    by the parent); shares no code or encodings with the bitset elements.
    """
    nq = aut.nq
    sx = aut.state_index
    nxt: dict[tuple[int, int], list[int]] = {}
    for p, s, n in aut.delta:
        nxt.setdefault((sx[p], sx[s]), []).append(sx[n])

    def wrap(label, chains, holed):
        inits = set(aut.init_indices(label))
        out = set()
        for entry in chains:
            (c1, s), h = entry if holed else (entry, None)
            if c1 not in inits:
                continue
            for p in range(nq):
                for n in nxt.get((p, s), ()):
                    out.add(((p, n), h) if holed else (p, n))
        return out

    def tree_val(v):
        if v.is_hole:
            return {((i, j), (i, j)) for i in range(nq) for j in range(nq)}, True
        if not v.children:
            return wrap(v.label, {(q, q) for q in range(nq)}, False), False
        fv, fh = forest_val(v.children)
        return wrap(v.label, fv, fh), fh

    def forest_val(seq):
        val = {(q, q) for q in range(nq)}
        holed = False
        for r in seq:
            rv, rh = tree_val(r)
            if rh:
                val = {((a, e), h) for (a, b) in val for ((c, e), h) in rv if b == c}
                holed = True
            elif holed:
                val = {((a, e), h) for ((a, b), h) in val for (c, e) in rv if b == c}
            else:
                val = {(a, e) for (a, b) in val for (c, e) in rv if b == c}
        return val, holed

    out, _ = forest_val(d.roots)
    return out


# -- explicit formula assembly ----------------------------------------------

def fleaf(label: str, holed: bool, subject: int) -> FormulaNode:
    n = FormulaNode(LEAF)
    n.label = label
    n.holed = holed
    n.subject = subject
    n.height = 0
    n.leaves = 1
    n.rml = n
    return n


def fnode(tag: int, left: FormulaNode, right: FormulaNode) -> FormulaNode:
    n = FormulaNode(tag)
    n.left = left
    n.right = right
    left.parent = n
    right.parent = n
    n.height = max(left.height, right.height) + 1
    n.leaves = left.leaves + right.leaves
    n.bal = right.height - left.height
    n.rml = right.rml
    return n


def formula_of(root: FormulaNode, root_subject: int) -> Formula:
    """Wrap an assembled parse tree into a Formula with live caches."""
    leaf_map = {}
    total = 0
    stack = [root]
    while stack:
        n = stack.pop()
        if n.tag == LEAF:
            leaf_map[n.subject] = n
        else:
            total += abs(n.bal)
            stack.append(n.left)
            stack.append(n.right)
    f = Formula(root, leaf_map, root_subject)
    f.total_balance = total
    f._caches_ready = True
    return f


def shape(n: FormulaNode):
    """Nested-tuple snapshot of a parse tree: leaves as (label, holed, id)."""
    if n.tag == LEAF:
        return (n.label, n.holed, n.subject)
    return (n.tag, shape(n.left), shape(n.right))


# -- algebra axioms ----------------------------------------------------------
#
# Each entry is (name, operand sorts, [(lhs, rhs), ...]) where lhs/rhs build
# one side of the law from an operations record `o` (fields chh/chv/cvh for
# the three concatenations, avv/avh for the two applications, eps/box for the
# neutral elements).  Instantiating `o` over different carriers lets one
# table drive both the free-algebra and the transition-algebra checks.

AXIOMS = [
    ("left and right units of forest concatenation", "F", [
        (lambda o, f: o.chh(o.eps(), f), lambda o, f: f),
        (lambda o, f: o.chh(f, o.eps()), lambda o, f: f),
    ]),
    ("units of mixed concatenation", "C", [
        (lambda o, c: o.chv(o.eps(), c), lambda o, c: c),
        (lambda o, c: o.cvh(c, o.eps()), lambda o, c: c),
    ]),
    ("units of context composition", "C", [
        (lambda o, c: o.avv(o.box(), c), lambda o, c: c),
        (lambda o, c: o.avv(c, o.box()), lambda o, c: c),
    ]),
    ("hole application is the identity on forests", "F", [
        (lambda o, f: o.avh(o.box(), f), lambda o, f: f),
    ]),
    ("forest concatenation is associative", "FFF", [
        (lambda o, f1, f2, f3: o.chh(o.chh(f1, f2), f3),
         lambda o, f1, f2, f3: o.chh(f1, o.chh(f2, f3))),
    ]),
    ("forest-forest-context concatenations associate", "FFC", [
        (lambda o, f1, f2, c1: o.chv(o.chh(f1, f2), c1),
         lambda o, f1, f2, c1: o.chv(f1, o.chv(f2, c1))),
    ]),
    ("context-forest-forest concatenations associate", "CFF", [
        (lambda o, c1, f1, f2: o.cvh(o.cvh(c1, f1), f2),
         lambda o, c1, f1, f2: o.cvh(c1, o.chh(f1, f2))),
    ]),
    ("forest-context-forest concatenations associate", "FCF", [
        (lambda o, f1, c1, f2: o.cvh(o.chv(f1, c1), f2),
         lambda o, f1, c1, f2: o.chv(f1, o.cvh(c1, f2))),
    ]),
    ("context composition is associative", "CCC", [
        (lambda o, c1, c2, c3: o.avv(o.avv(c1, c2), c3),
         lambda o, c1, c2, c3: o.avv(c1, o.avv(c2, c3))),
    ]),
    ("composition then application equals nested application", "CCF", [
        (lambda o, c1, c2, f1: o.avh(o.avv(c1, c2), f1),
         lambda o, c1, c2, f1: o.avh(c1, o.avh(c2, f1))),
    ]),
    ("application distributes over a leading forest", "FCF", [
        (lambda o, f1, c1, f2: o.avh(o.chv(f1, c1), f2),
         lambda o, f1, c1, f2: o.chh(f1, o.avh(c1, f2))),
    ]),
    ("composition distributes over a leading forest", "FCC", [
        (lambda o, f1, c1, c2: o.avv(o.chv(f1, c1), c2),
         lambda o, f1, c1, c2: o.chv(f1, o.avv(c1, c2))),
    ]),
    ("application distributes over a trailing forest", "CFF", [
        (lambda o, c1, f1, f2: o.avh(o.cvh(c1, f1), f2),
         lambda o, c1, f1, f2: o.chh(o.avh(c1, f2), f1)),
    ]),
    ("composition distributes over a trailing forest", "CFC", [
        (lambda o, c1, f1, c2: o.avv(o.cvh(c1, f1), c2),
         lambda o, c1, f1, c2: o.cvh(o.avv(c1, c2), f1)),
    ]),
]


class FreeOps:
    """Axiom operations over forests and contexts themselves."""

    @staticmethod
    def chh(x, y):
        return trees.concat(x, y)

    chv = cvh = chh

    @staticmethod
    def avv(x, y):
        return trees.apply(x, y)

    avh = avv

    @staticmethod
    def eps():
        return trees.empty()

    @staticmethod
    def box():
        return trees.box()


class BitsetOps:
    """Axiom operations over transition-algebra bitsets."""

    def __init__(self, nq: int, nm: int = 0):
        from forestalg import kernels, ops

        self.nq = nq
        self.nm = nm
        self._combine = kernels.combine
        self._hid = kernels.h_identity
        self._vid = kernels.v_identity
        self._ops = ops

    def chh(self, x, y):
        return self._combine(self._ops.C_HH, x, y, self.nq, self.nm)

    def chv(self, x, y):
        return self._combine(self._ops.C_HV, x, y, self.nq, self.nm)

    def cvh(self, x, y):
        return self._combine(self._ops.C_VH, x, y, self.nq, self.nm)

    def avv(self, x, y):
        return self._combine(self._ops.A_VV, x, y, self.nq, self.nm)

    def avh(self, x, y):
        return self._combine(self._ops.A_VH, x, y, self.nq, self.nm)

    def eps(self):
        return self._hid(self.nq, self.nm)

    def box(self):
        return self._vid(self.nq, self.nm)

    def rand(self, rng: random.Random, sort: str) -> int:
        width = self.nq * self.nq if sort == "F" else self.nq ** 4
        return rng.getrandbits(width << self.nm)


def check_axiom_free(rng: random.Random, sorts: str, sides, max_nodes: int = 4) -> None:
    """Assert one law on fresh random forests/contexts, comparing shapes and ids."""
    templates = [
        random_forest(rng, max_nodes) if s == "F" else random_context(rng, max_nodes)
        for s in sorts
    ]
    for lhs, rhs in sides:
        a = [trees.deep_copy(t) for t in templates]
        b = [trees.deep_copy(t) for t in templates]
        out_l = lhs(FreeOps, *a)
        out_r = rhs(FreeOps, *b)
        assert trees.equal_subjects(out_l, out_r, with_ids=True)


def check_axiom_bitset(rng: random.Random, sorts: str, sides, ops: BitsetOps) -> None:
    """Assert one law on uniformly random transition-algebra elements."""
    args = [ops.rand(rng, s) for s in sorts]
    for lhs, rhs in sides:
        assert lhs(ops, *args) == rhs(ops, *args)
