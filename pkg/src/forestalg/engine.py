"""Automaton-annotated formulas: incremental evaluation and enumeration.

An Engine binds a formula to an automaton and keeps, at every formula node,
the transition-algebra element of the piece that node represents (plus one
extended element per selecting tuple).  Updates recompute elements only along
the touched paths, so acceptance stays a root lookup.  Enumeration sessions
walk the formula top-down, restricting the per-node relevant-signature sets,
and report answer tuples in the formula's left-to-right leaf order.
"""

from __future__ import annotations

from . import kernels
from .automata import Nfsta, Nfta
from .errors import KindMismatch, StaleSession
from .formula import Formula, construct
from .ops import LEAF
from .trees import ForestOrContext, TreeUpdate

_ABSENT = object()

# order classification of a formula node against the resume leaf
_GT = 0  # every leaf below is strictly after the resume leaf
_MIX = 1  # the resume leaf is below this node


class Engine:
    """Maintains algebra annotations of one formula under one automaton."""

    def __init__(self, aut: Nfta, subject):
        if isinstance(subject, Formula):
            f = subject
        elif isinstance(subject, ForestOrContext):
            f = construct(subject)
        else:
            raise TypeError("subject must be a tree or a formula")
        self.aut = aut
        self.sel = list(aut.select) if isinstance(aut, Nfsta) else []
        self.k = aut.k if isinstance(aut, Nfsta) else 0
        self.qs_list = [aut.tracked(s) for s in self.sel]
        self.nm_list = [len(qs) for qs in self.qs_list]
        # per selecting tuple: state index -> bit in the visited mask
        self.posbit = [{q: 1 << j for j, q in enumerate(qs)} for qs in self.qs_list]
        # per selecting tuple and position: required state index
        self.qidx_list = [[aut.state_index[q] for q in s] for s in self.sel]
        q0i, qFi = aut.state_index[aut.q0], aut.state_index[aut.qF]
        self._accept_bit = q0i * aut.nq + qFi
        self.root_target = [
            1 << (((q0i * aut.nq + qFi) << nm) | ((1 << nm) - 1))
            for nm in self.nm_list
        ]
        self.epoch = 0
        self.f = f
        f.cache_hook = self._recompute
        for v in self._postorder():
            self._recompute(v)

    # -- annotation maintenance -------------------------------------------

    def _postorder(self):
        out = []
        stack = [self.f.root]
        while stack:
            v = stack.pop()
            out.append(v)
            if v.tag != LEAF:
                stack.append(v.left)
                stack.append(v.right)
        return reversed(out)

    def _recompute(self, v) -> bool:
        """Refresh v's elements from its label or children; True if changed."""
        aut = self.aut
        if v.tag == LEAF:
            bits = aut.atom_bits(v.label, v.holed)
            ext = [aut.atom_bits(v.label, v.holed, qs) for qs in self.qs_list]
        else:
            le, ri, nq = v.left, v.right, aut.nq
            bits = kernels.combine(v.tag, le.elem, ri.elem, nq, 0)
            ext = [
                kernels.combine(v.tag, le.ext[i], ri.ext[i], nq, nm)
                for i, nm in enumerate(self.nm_list)
            ]
        changed = bits != v.elem or ext != v.ext
        v.elem = bits
        v.ext = ext
        return changed

    def audit_elements(self) -> list[str]:
        """Recompute every element from scratch and report mismatches."""
        problems = []
        for v in self._postorder():
            aut = self.aut
            if v.tag == LEAF:
                want = aut.atom_bits(v.label, v.holed)
                wext = [aut.atom_bits(v.label, v.holed, qs) for qs in self.qs_list]
            else:
                want = kernels.combine(v.tag, v.left.elem, v.right.elem, aut.nq, 0)
                wext = [
                    kernels.combine(v.tag, v.left.ext[i], v.right.ext[i], aut.nq, nm)
                    for i, nm in enumerate(self.nm_list)
                ]
            if v.elem != want:
                problems.append(f"stale element at node for subject {v.subject}")
            if v.ext != wext:
                problems.append(f"stale extended element at node for subject {v.subject}")
        return problems

    # -- queries -----------------------------------------------------------

    def is_accepted(self) -> bool:
        return bool((self.f.root.elem >> self._accept_bit) & 1)

    def leaf_order(self) -> list[int]:
        """Subject ids in the current formula leaf order (the answer order)."""
        return self.f.leaf_order()

    def node_ids(self) -> list[int]:
        """Ids of the current tree's nodes, in no particular order."""
        return list(self.f._leaves)

    def apply_update(self, u: TreeUpdate) -> int | None:
        new_id = self.f.apply_update(u)
        self.epoch += 1
        return new_id

    def enum_start(self) -> "EnumSession":
        if not isinstance(self.aut, Nfsta):
            raise KindMismatch("enumeration needs a selecting automaton")
        return EnumSession(self)

    def next_answer(self, sess: "EnumSession"):
        return sess.next_answer()


def annotate(aut: Nfta, subject) -> Engine:
    """Build an Engine for a tree (constructing its formula) or a formula."""
    return Engine(aut, subject)


class EnumSession:
    """One enumeration pass over the current answers, in leaf order.

    The session never mutates the engine: restricted per-node signature sets
    are kept in a session-local override map with one undo trail per answer
    position, so several sessions may run between updates.
    """

    def __init__(self, engine: Engine):
        self.engine = engine
        self.epoch = engine.epoch
        self.k = engine.k
        self.prefix: list[int] = []  # chosen subject ids
        self._leaves: list = []  # their formula leaves
        self._alive = [list(range(len(engine.sel)))]
        self._over: dict[tuple[int, int], int] = {}
        self._trails: list[list] = []
        self._started = False
        self._exhausted = False
        self.complete_calls = 0  # nodes visited by the last complete()
        self.max_complete_calls = 0
        self.height_at_start = engine.f.root.height

    # -- bookkeeping -------------------------------------------------------

    def _check(self):
        if self.epoch != self.engine.epoch:
            raise StaleSession("the tree changed; start a new session")

    def _r1(self, v, si: int) -> int:
        return self._over.get((id(v), si), v.ext[si])

    def _push_level(self, leaf, alive_next: list[int]):
        """Record the next answer position: pin the leaf and redo its path."""
        eng = self.engine
        nq = eng.aut.nq
        j = len(self.prefix)
        trail = []
        for si in alive_next:
            nm = eng.nm_list[si]
            pb = eng.posbit[si][eng.qidx_list[si][j]]
            key = (id(leaf), si)
            trail.append((key, self._over.get(key, _ABSENT)))
            self._over[key] = kernels.restrict_mask(self._r1(leaf, si), nm, pb)
            a = leaf.parent
            while a is not None:
                bits = kernels.combine(
                    a.tag, self._r1(a.left, si), self._r1(a.right, si), nq, nm)
                key = (id(a), si)
                trail.append((key, self._over.get(key, _ABSENT)))
                self._over[key] = bits
                a = a.parent
        self._trails.append(trail)
        self._alive.append(alive_next)
        self.prefix.append(leaf.subject)
        self._leaves.append(leaf)

    def _pop_level(self):
        for key, old in reversed(self._trails.pop()):
            if old is _ABSENT:
                del self._over[key]
            else:
                self._over[key] = old
        self._alive.pop()
        self.prefix.pop()
        self._leaves.pop()

    # -- the descent -------------------------------------------------------

    def _root_r2(self, alive):
        eng = self.engine
        out = []
        for si in alive:
            z = self._r1(eng.f.root, si) & eng.root_target[si]
            if z:
                out.append((si, z))
        return out

    def _complete_step(self, u: int | None):
        """Extend the prefix with the least valid node after u; None if none.

        Walks the formula left to right; at each visited node the relevant
        top-down signature set is filtered from the parent's, and subtrees
        that cannot contain a valid node after u are skipped.
        """
        eng = self.engine
        f = eng.f
        nq = eng.aut.nq
        j = len(self.prefix)
        alive = self._alive[j]
        calls = 0
        found = None
        if alive:
            qpos = {si: eng.posbit[si][eng.qidx_list[si][j]] for si in alive}
            if u is None:
                uleaf = None
                upath = ()
            else:
                uleaf = f.leaf_for(u)
                upath = set()
                a = uleaf
                while a is not None:
                    upath.add(id(a))
                    a = a.parent
            root = f.root
            rel0 = _MIX if uleaf is not None else _GT
            # frame: [node, rel, parent_frame, is_left, r2]
            stack = []
            if uleaf is None or root.rml is not uleaf:
                stack.append([root, rel0, None, False, None])
            while stack:
                fr = stack.pop()
                node, rel, parent, is_left = fr[0], fr[1], fr[2], fr[3]
                calls += 1
                if parent is None:
                    r2 = self._root_r2(alive)
                else:
                    sib = parent[0].right if is_left else parent[0].left
                    tag = parent[0].tag
                    r2 = []
                    for si, pz in parent[4]:
                        z = kernels.filter_child(
                            tag, is_left, self._r1(node, si),
                            self._r1(sib, si), pz, nq, eng.nm_list[si])
                        if z:
                            r2.append((si, z))
                if node.tag == LEAF:
                    valid = []
                    for si, z in r2:
                        if kernels.restrict_mask(z, eng.nm_list[si], qpos[si]):
                            valid.append(si)
                    if valid:
                        found = (node, valid)
                        break
                    continue
                keep = []
                for si, z in r2:
                    if kernels.mask_union(z, eng.nm_list[si]) & qpos[si]:
                        keep.append((si, z))
                if not keep:
                    continue
                fr[4] = keep
                lc, rc = node.left, node.right
                if rel == _GT:
                    stack.append([rc, _GT, fr, False, None])
                    stack.append([lc, _GT, fr, True, None])
                elif id(lc) in upath:
                    stack.append([rc, _GT, fr, False, None])
                    if lc.rml is not uleaf:
                        stack.append([lc, _MIX, fr, True, None])
                else:
                    if rc.rml is not uleaf:
                        stack.append([rc, _MIX, fr, False, None])
        self.complete_calls = calls
        if calls > self.max_complete_calls:
            self.max_complete_calls = calls
        if found is None:
            return None
        leaf, valid = found
        self._push_level(leaf, valid)
        return tuple(self.prefix)

    # -- public operations -------------------------------------------------

    def complete(self, a, u: int | None):
        """Least extension of the incomplete answer a with a node after u."""
        self._check()
        a = list(a)
        if len(a) >= self.k:
            raise ValueError("answer already complete")
        if a != self.prefix:
            self._sync(a)
        return self._complete_step(u)

    def _sync(self, a: list[int]):
        keep = 0
        while keep < len(a) and keep < len(self.prefix) and a[keep] == self.prefix[keep]:
            keep += 1
        while len(self.prefix) > keep:
            self._pop_level()
        eng = self.engine
        for v in a[keep:]:
            leaf = eng.f.leaf_for(v)
            j = len(self.prefix)
            r2 = self._r2_path(leaf, self._alive[j])
            valid = []
            for si, z in r2:
                pb = eng.posbit[si][eng.qidx_list[si][j]]
                if kernels.restrict_mask(z, eng.nm_list[si], pb):
                    valid.append(si)
            self._push_level(leaf, valid)

    def _r2_path(self, target, alive):
        """Top-down relevant set at one node, filtering along its root path."""
        eng = self.engine
        nq = eng.aut.nq
        path = []
        a = target
        while a.parent is not None:
            path.append(a)
            a = a.parent
        r2 = self._root_r2(alive)
        for node in reversed(path):
            parent = node.parent
            is_left = parent.left is node
            sib = parent.right if is_left else parent.left
            nxt = []
            for si, pz in r2:
                z = kernels.filter_child(
                    parent.tag, is_left, self._r1(node, si),
                    self._r1(sib, si), pz, nq, eng.nm_list[si])
                if z:
                    nxt.append((si, z))
            r2 = nxt
        return r2

    def next_answer(self):
        """The next answer tuple in leaf order, or None when exhausted."""
        self._check()
        if self._exhausted:
            return None
        if self.k == 0:
            self._exhausted = True
            if self.engine.sel and self.engine.is_accepted():
                return ()
            return None
        if not self._started:
            self._started = True
            u = None
        else:
            u = self.prefix[-1]
            self._pop_level()
        while True:
            ext = self._complete_step(u)
            if ext is None:
                if not self.prefix:
                    self._exhausted = True
                    return None
                u = self.prefix[-1]
                self._pop_level()
                continue
            if len(self.prefix) == self.k:
                return ext
            u = None

    def __iter__(self):
        while True:
            a = self.next_answer()
            if a is None:
                return
            yield a


# ---------------------------------------------------------------------------
# Definitional recursions, used to cross-check the session's cached values.

def compute_R1(eng: Engine, v, a, si: int) -> int:
    """Bottom-up relevant set at v under the incomplete answer a (by definition)."""
    pins: dict[int, list[int]] = {}
    for j, vid in enumerate(a):
        pins.setdefault(id(eng.f.leaf_for(vid)), []).append(eng.qidx_list[si][j])
    nm = eng.nm_list[si]

    def rec(w):
        if w.tag == LEAF:
            bits = eng.aut.atom_bits(w.label, w.holed, eng.qs_list[si])
            for q in pins.get(id(w), ()):
                bits = kernels.restrict_mask(bits, nm, eng.posbit[si][q])
            return bits
        return kernels.combine(w.tag, rec(w.left), rec(w.right), eng.aut.nq, nm)

    return rec(v)


def compute_R2(eng: Engine, v, a, si: int) -> int:
    """Top-down relevant set at v under the incomplete answer a (by definition)."""
    nm = eng.nm_list[si]
    path = []
    w = v
    while w.parent is not None:
        path.append(w)
        w = w.parent
    z = compute_R1(eng, eng.f.root, a, si) & eng.root_target[si]
    for node in reversed(path):
        parent = node.parent
        is_left = parent.left is node
        sib = parent.right if is_left else parent.left
        z = kernels.filter_child(
            parent.tag, is_left, compute_R1(eng, node, a, si),
            compute_R1(eng, sib, a, si), z, eng.aut.nq, nm)
    return z
