"""Independent reference implementations for testing.

Nothing here touches formulas, algebra elements, or the kernels: runs are
enumerated directly over the subject structure, acceptance and selection are
computed by explicit reachability DPs.  These are deliberately simple and
polynomial (or exhaustive with hard caps) so they can serve as ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

from .automata import Nfsta, Nfta
from .errors import TooLarge
from .trees import ForestOrContext, TreeNode, nodes, size


@dataclass(frozen=True)
class OracleConfig:
    max_nodes: int = 8  # cap for exhaustive run enumeration
    max_states: int = 5
    max_assignments: int = 200_000  # cap for per-tuple assignment search


# ---------------------------------------------------------------------------
# Exhaustive run enumeration (tiny subjects only)

def oracle_runs(aut: Nfta, d: ForestOrContext, cfg: OracleConfig | None = None):
    """All runs of the automaton over a forest or context.

    A run maps node id -> (pre, self, post) as state indices; the hole's self
    entry is None and its pre/post are unconstrained.  The pre-state of the
    leftmost root is also unconstrained.
    """
    cfg = cfg or OracleConfig()
    if size(d) > cfg.max_nodes:
        raise TooLarge(f"run enumeration capped at {cfg.max_nodes} nodes")
    if aut.nq > cfg.max_states:
        raise TooLarge(f"run enumeration capped at {cfg.max_states} states")
    sx = aut.state_index
    by_pre_self: dict[tuple[int, int], list[int]] = {}
    for p, s, n in aut.delta:
        by_pre_self.setdefault((sx[p], sx[s]), []).append(sx[n])

    def init_of(label):
        return aut.init_indices(label)

    def runs_tree(v: TreeNode, pre: int):
        if v.is_hole:
            for post in range(aut.nq):
                yield {v.id: (pre, None, post)}, post
            return
        if not v.children:
            for s in init_of(v.label):
                for post in by_pre_self.get((pre, s), ()):
                    yield {v.id: (pre, s, post)}, post
            return
        for first_pre in init_of(v.label):
            for frag, s in runs_forest(v.children, first_pre):
                for post in by_pre_self.get((pre, s), ()):
                    out = dict(frag)
                    out[v.id] = (pre, s, post)
                    yield out, post

    def runs_forest(seq: list[TreeNode], pre: int):
        if not seq:
            yield {}, pre
            return
        for frag1, p1 in runs_tree(seq[0], pre):
            for frag2, p2 in runs_forest(seq[1:], p1):
                out = dict(frag1)
                out.update(frag2)
                yield out, p2

    out = []
    for pre0 in range(aut.nq):
        for frag, post in runs_forest(d.roots, pre0):
            out.append((frag, pre0, post))
    return out


def oracle_sigset(aut: Nfta, d: ForestOrContext, cfg: OracleConfig | None = None):
    """Signature set of a subject from exhaustive run enumeration."""
    hole_id = d.hole.id if d.hole is not None else None
    sigs = set()
    for frag, pre0, post in oracle_runs(aut, d, cfg):
        if hole_id is None:
            sigs.add((pre0, post))
        else:
            hp, _, hn = frag[hole_id]
            sigs.add(((pre0, post), (hp, hn)))
    return frozenset(sigs)


def oracle_ext_sigset(aut: Nfsta, d: ForestOrContext, s: tuple[str, ...], cfg: OracleConfig | None = None):
    """Extended signature set: signatures with visited selection states."""
    qs = set(aut.tracked(s))
    hole_id = d.hole.id if d.hole is not None else None
    sigs = set()
    for frag, pre0, post in oracle_runs(aut, d, cfg):
        visited = frozenset(t[1] for t in frag.values() if t[1] is not None and t[1] in qs)
        if hole_id is None:
            sigs.add(((pre0, post), visited))
        else:
            hp, _, hn = frag[hole_id]
            sigs.add((((pre0, post), (hp, hn)), visited))
    return frozenset(sigs)


# ---------------------------------------------------------------------------
# Acceptance by reachability DP

class _Dp:
    """Shared bitmask machinery: possible self-states per node of a tree."""

    def __init__(self, aut: Nfta, t: ForestOrContext):
        if not t.is_tree:
            raise TooLarge("the acceptance oracle works on trees")
        self.aut = aut
        self.root = t.roots[0]
        sx = aut.state_index
        self.nq = aut.nq
        by_self: list[list[tuple[int, int]]] = [[] for _ in range(aut.nq)]
        for p, s, n in aut.delta:
            by_self[sx[s]].append((sx[p], sx[n]))
        self.by_self = by_self
        self.init_mask = {a: sum(1 << q for q in aut.init_indices(a)) for a in aut.alphabet}
        self.post: dict[int, list[TreeNode]] = {}
        # iterative postorder computing P (possible self-state masks)
        self.pmask: dict[int, int] = {}
        self.step: dict[int, list[int]] = {}  # node id -> per-pre post mask (unpinned)
        order = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(v.children)
        for v in reversed(order):
            self.pmask[v.id] = self._pm(v, {})
            self.step[v.id] = self._step_array(self.pmask[v.id], None)

    def _step_array(self, selfmask: int, pin: int | None) -> list[int]:
        arr = [0] * self.nq
        m = selfmask
        while m:
            low = m & -m
            s = low.bit_length() - 1
            m ^= low
            if pin is not None and s != pin:
                continue
            for p, n in self.by_self[s]:
                arr[p] |= 1 << n
        return arr

    def _fold(self, v: TreeNode, steps) -> int:
        cur = self.init_mask.get(v.label, 0)
        for c in v.children:
            arr = steps(c)
            nxt = 0
            m = cur
            while m:
                low = m & -m
                nxt |= arr[low.bit_length() - 1]
                m ^= low
            cur = nxt
            if not cur:
                break
        return cur

    def _pm(self, v: TreeNode, override) -> int:
        if not v.children:
            return self.init_mask.get(v.label, 0)
        return self._fold(v, lambda c: override.get(c.id) or self.step[c.id])

    def accept_mask(self) -> int:
        """Self-states s of the root such that (q0, s, qF) is a transition."""
        sx = self.aut.state_index
        out = 0
        for p, s, n in self.aut.delta:
            if p == self.aut.q0 and n == self.aut.qF:
                out |= 1 << sx[s]
        return out


def oracle_eval(aut: Nfta, t: ForestOrContext) -> bool:
    dp = _Dp(aut, t)
    return bool(dp.pmask[dp.root.id] & dp.accept_mask())


# ---------------------------------------------------------------------------
# Selection

def _feasible_states(dp: _Dp) -> dict[int, int]:
    """Per node: mask of self-states taken by the node in some accepting run."""
    good: dict[int, int] = {}
    root = dp.root
    good[root.id] = dp.pmask[root.id] & dp.accept_mask()
    stack = [root]
    while stack:
        v = stack.pop()
        gv = good[v.id]
        if not gv or not v.children:
            for c in v.children:
                good[c.id] = 0
                stack.append(c)
            continue
        m = len(v.children)
        pref = [0] * (m + 1)
        pref[0] = dp.init_mask.get(v.label, 0)
        for i, c in enumerate(v.children):
            arr = dp.step[c.id]
            cur = pref[i]
            nxt = 0
            while cur:
                low = cur & -cur
                nxt |= arr[low.bit_length() - 1]
                cur ^= low
            pref[i + 1] = nxt
        # suf[i][p]: final chain states reachable from p across children i+1..m
        suf = [None] * (m + 1)
        suf[m] = [1 << p for p in range(dp.nq)]
        for i in range(m - 1, -1, -1):
            arr = dp.step[v.children[i].id]
            nxt = suf[i + 1]
            row = [0] * dp.nq
            for p in range(dp.nq):
                a = arr[p]
                acc = 0
                while a:
                    low = a & -a
                    acc |= nxt[low.bit_length() - 1]
                    a ^= low
                row[p] = acc
            suf[i] = row
        for i, c in enumerate(v.children):
            feas = 0
            pm = dp.pmask[c.id]
            for s in range(dp.nq):
                if not (pm >> s) & 1:
                    continue
                ok = False
                for p, n in dp.by_self[s]:
                    if (pref[i] >> p) & 1 and suf[i + 1][n] & gv:
                        ok = True
                        break
                if ok:
                    feas |= 1 << s
            good[c.id] = feas
            stack.append(c)
    return good


def _check_pinned(dp: _Dp, pins: dict[int, int], node_by_id: dict[int, TreeNode]) -> bool:
    """Is there an accepting run taking self-state pins[v] at each pinned v?"""
    # recompute bottom-up along the closure of ancestors of pinned nodes
    depth: dict[int, int] = {}

    def depth_of(v: TreeNode) -> int:
        d = depth.get(v.id)
        if d is None:
            d = 0 if v.parent is None else depth_of(v.parent) + 1
            depth[v.id] = d
        return d

    spine: dict[int, TreeNode] = {}
    for vid in pins:
        v = node_by_id[vid]
        while v is not None and v.id not in spine:
            spine[v.id] = v
            v = v.parent
    override: dict[int, list[int]] = {}
    newp: dict[int, int] = {}
    for v in sorted(spine.values(), key=depth_of, reverse=True):
        pm = dp._pm(v, override)
        pin = pins.get(v.id)
        if pin is not None:
            pm &= 1 << pin
        if not pm:
            return False
        newp[v.id] = pm
        override[v.id] = dp._step_array(pm, pin)
    return bool(newp[dp.root.id] & dp.accept_mask())


def oracle_select(aut: Nfsta, t: ForestOrContext, cfg: OracleConfig | None = None) -> set[tuple[int, ...]]:
    """All selected node tuples: union over selecting tuples s of the
    assignments (v_1..v_k) for which some accepting run visits v_i in state
    s_i for every position i."""
    cfg = cfg or OracleConfig()
    dp = _Dp(aut, t)
    if aut.k == 0:
        return {()} if (aut.select and dp.pmask[dp.root.id] & dp.accept_mask()) else set()
    feas = _feasible_states(dp)
    node_by_id = {v.id: v for v in nodes(t)}
    sx = aut.state_index
    answers: set[tuple[int, ...]] = set()
    all_ids = [v.id for v in nodes(t)]
    for s in aut.select:
        qidx = [sx[q] for q in s]
        cands = []
        for qi in qidx:
            cands.append([vid for vid in all_ids if (feas[vid] >> qi) & 1])
        total = 1
        for c in cands:
            total *= len(c)
            if total > cfg.max_assignments:
                raise TooLarge("assignment search over configured cap")
        if total == 0:
            continue
        if aut.k == 1:
            # single position: the feasibility prefilter is already exact
            answers.update((vid,) for vid in cands[0])
            continue
        for combo in _product(cands):
            pins: dict[int, int] = {}
            ok = True
            for vid, qi in zip(combo, qidx):
                if pins.setdefault(vid, qi) != qi:
                    ok = False
                    break
            if not ok:
                continue
            if tuple(combo) in answers:
                continue
            if _check_pinned(dp, pins, node_by_id):
                answers.add(tuple(combo))
    return answers


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for rest in _product(lists[1:]):
            yield (head,) + rest
