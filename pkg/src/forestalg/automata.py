"""Stepwise tree automata and their (extended) transition algebras.

An automaton runs over unranked forests by threading a horizontal state
through each sibling sequence: a run gives every node a pre-state, a
self-state and a post-state, where

- the first child's pre-state is in Init(label(parent)),
- each later sibling's pre-state is the previous sibling's post-state,
- a leaf's self-state is in Init(label),
- an inner node's self-state is the post-state of its last child,
- (pre, self, post) is a transition for every node.

A forest's signature is (pre of first root, post of last root); a context
additionally exposes (pre, post) at the hole, whose transition is
unconstrained.  Algebra elements are the signature sets, bitset-encoded as
ints (see `_pykernels` for the layout); extended elements additionally track
which states of a selecting tuple the run visits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import kernels
from .errors import KindMismatch, UnknownSymbol
from .ops import A_VH, A_VV, C_HH, C_HV, C_VH, IN_KINDS, KIND_H, KIND_V, OUT_KIND
from .trees import ForestOrContext, TreeNode


class Nfta:
    """Nondeterministic stepwise forest automaton.

    States and symbols are strings; the declaration order of `states` fixes
    the bit layout of algebra elements.
    """

    def __init__(self, states, alphabet, init, delta, q0, qF):
        self.states = tuple(states)
        self.alphabet = tuple(alphabet)
        if len(set(self.states)) != len(self.states):
            raise ValueError("duplicate state")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("duplicate symbol")
        self.state_index = {q: i for i, q in enumerate(self.states)}
        for q in (q0, qF):
            if q not in self.state_index:
                raise ValueError(f"unknown state {q!r}")
        self.q0 = q0
        self.qF = qF
        self.init = {}
        for a, qs in dict(init).items():
            if a not in set(self.alphabet):
                raise ValueError(f"init for unknown symbol {a!r}")
            qs = tuple(qs)
            for q in qs:
                if q not in self.state_index:
                    raise ValueError(f"unknown state {q!r} in init({a!r})")
            self.init[a] = tuple(dict.fromkeys(qs))
        self.delta = frozenset(tuple(t) for t in delta)
        for t in self.delta:
            if len(t) != 3 or any(q not in self.state_index for q in t):
                raise ValueError(f"bad transition {t!r}")
        self.nq = len(self.states)
        # transitions grouped by self-state index, as (pre, post) index pairs
        self._by_self: dict[int, list[tuple[int, int]]] = {}
        for p, s, n in self.delta:
            self._by_self.setdefault(self.state_index[s], []).append(
                (self.state_index[p], self.state_index[n])
            )
        self._atom_cache: dict[tuple[str, bool, tuple[int, ...]], int] = {}

    def init_indices(self, label: str) -> tuple[int, ...]:
        if label not in self.init:
            if label not in set(self.alphabet):
                raise UnknownSymbol(label)
            return ()
        return tuple(self.state_index[q] for q in self.init[label])

    def atom_bits(self, label: str, holed: bool, qs: tuple[int, ...] = ()) -> int:
        """Bitset for one subject leaf; qs are the tracked selection states."""
        key = (label, holed, qs)
        bits = self._atom_cache.get(key)
        if bits is None:
            bits = self._build_atom(label, holed, qs)
            self._atom_cache[key] = bits
        return bits

    def _build_atom(self, label: str, holed: bool, qs: tuple[int, ...]) -> int:
        nq = self.nq
        nm = len(qs)
        mpos = {q: 1 << j for j, q in enumerate(qs)}
        inits = self.init_indices(label)
        out = 0
        if not holed:
            # single a-node: self in Init(a), any (pre, post) transition on it
            for s in inits:
                r = mpos.get(s, 0)
                for p, n in self._by_self.get(s, ()):
                    out |= 1 << (((p * nq + n) << nm) | r)
            return out
        # a-node directly above the hole: the hole is the only child, so the
        # node's self-state equals the hole's post-state, and the hole's
        # pre-state starts the child sequence.
        nq2 = nq * nq
        for s, pairs in self._by_self.items():
            r = mpos.get(s, 0)
            for p, n in pairs:
                outer = p * nq + n
                for h1 in inits:
                    out |= 1 << (((outer * nq2 + (h1 * nq + s)) << nm) | r)
        return out


class Nfsta(Nfta):
    """Nfta plus a finite set of selecting k-tuples of states."""

    def __init__(self, states, alphabet, init, delta, q0, qF, select):
        super().__init__(states, alphabet, init, delta, q0, qF)
        tuples = [tuple(s) for s in select]
        if tuples:
            k = len(tuples[0])
            if any(len(s) != k for s in tuples):
                raise ValueError("selecting tuples must share one arity")
        else:
            k = 0
        for s in tuples:
            for q in s:
                if q not in self.state_index:
                    raise ValueError(f"unknown state {q!r} in selecting tuple")
        self.select = tuple(dict.fromkeys(tuples))
        self.k = k

    def tracked(self, s: tuple[str, ...]) -> tuple[int, ...]:
        """Sorted distinct state indices of a selecting tuple."""
        return tuple(sorted({self.state_index[q] for q in s}))


@dataclass(frozen=True)
class AlgebraElement:
    """A set of forest (H) or context (V) signatures of one automaton."""

    kind: str  # KIND_H or KIND_V
    nq: int
    bits: int

    def entries(self):
        nq, nq2 = self.nq, self.nq * self.nq
        out = []
        e = self.bits
        while e:
            low = e & -e
            i = low.bit_length() - 1
            e ^= low
            if self.kind == KIND_H:
                out.append(divmod(i, nq))
            else:
                outer, hole = divmod(i, nq2)
                out.append((divmod(outer, nq), divmod(hole, nq)))
        return out

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"AlgebraElement({self.kind}, {self.entries()!r})"


@dataclass(frozen=True)
class ExtendedElement:
    """Signatures with visited selection states, for one selecting tuple."""

    kind: str
    nq: int
    qs: tuple[int, ...] = field(default=())
    bits: int = 0

    @property
    def nm(self) -> int:
        return len(self.qs)

    def entries(self):
        nq, nq2, nm = self.nq, self.nq * self.nq, len(self.qs)
        mask = (1 << nm) - 1
        out = []
        e = self.bits
        while e:
            low = e & -e
            i = low.bit_length() - 1
            e ^= low
            r = i & mask
            sig = i >> nm
            visited = frozenset(self.qs[j] for j in range(nm) if (r >> j) & 1)
            if self.kind == KIND_H:
                out.append((divmod(sig, nq), visited))
            else:
                outer, hole = divmod(sig, nq2)
                out.append(((divmod(outer, nq), divmod(hole, nq)), visited))
        return out


def ta_atomic(aut: Nfta, label: str, holed: bool) -> AlgebraElement:
    kind = KIND_V if holed else KIND_H
    return AlgebraElement(kind, aut.nq, aut.atom_bits(label, holed))


def ta_identity(aut: Nfta, kind: str) -> AlgebraElement:
    bits = kernels.h_identity(aut.nq, 0) if kind == KIND_H else kernels.v_identity(aut.nq, 0)
    return AlgebraElement(kind, aut.nq, bits)


def ta_combine(op: int, x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    want = IN_KINDS[op]
    if (x.kind, y.kind) != want:
        raise KindMismatch(f"operation {op} needs sorts {want}, got ({x.kind}, {y.kind})")
    if x.nq != y.nq:
        raise KindMismatch("elements of different automata")
    return AlgebraElement(OUT_KIND[op], x.nq, kernels.combine(op, x.bits, y.bits, x.nq, 0))


def is_accepting_signature(aut: Nfta, x: AlgebraElement) -> bool:
    """Whether the signature (q0, qF) is present (forest elements only)."""
    if x.kind != KIND_H:
        raise KindMismatch("acceptance is defined on forest elements")
    i = aut.state_index[aut.q0] * aut.nq + aut.state_index[aut.qF]
    return bool((x.bits >> i) & 1)


def eta_atomic(aut: Nfsta, label: str, holed: bool, s: tuple[str, ...]) -> ExtendedElement:
    qs = aut.tracked(s)
    kind = KIND_V if holed else KIND_H
    return ExtendedElement(kind, aut.nq, qs, aut.atom_bits(label, holed, qs))


def eta_identity(aut: Nfsta, kind: str, s: tuple[str, ...]) -> ExtendedElement:
    qs = aut.tracked(s)
    nm = len(qs)
    bits = kernels.h_identity(aut.nq, nm) if kind == KIND_H else kernels.v_identity(aut.nq, nm)
    return ExtendedElement(kind, aut.nq, qs, bits)


def eta_combine(op: int, x: ExtendedElement, y: ExtendedElement) -> ExtendedElement:
    want = IN_KINDS[op]
    if (x.kind, y.kind) != want:
        raise KindMismatch(f"operation {op} needs sorts {want}, got ({x.kind}, {y.kind})")
    if x.nq != y.nq or x.qs != y.qs:
        raise KindMismatch("elements track different automata or tuples")
    return ExtendedElement(OUT_KIND[op], x.nq, x.qs, kernels.combine(op, x.bits, y.bits, x.nq, x.nm))


def eval_subject(aut: Nfta, d: ForestOrContext) -> AlgebraElement:
    """Algebra value of a forest/context by structural recursion."""
    bits, kind = _eval_forest(aut, d.roots, ())
    return AlgebraElement(kind, aut.nq, bits)


def eval_subject_ext(aut: Nfsta, d: ForestOrContext, s: tuple[str, ...]) -> ExtendedElement:
    qs = aut.tracked(s)
    bits, kind = _eval_forest(aut, d.roots, qs)
    return ExtendedElement(kind, aut.nq, qs, bits)


def _eval_forest(aut: Nfta, roots: list[TreeNode], qs: tuple[int, ...]) -> tuple[int, str]:
    nq, nm = aut.nq, len(qs)
    bits = kernels.h_identity(nq, nm)
    kind = KIND_H
    for r in roots:
        cb, ck = _eval_tree(aut, r, qs)
        if kind == KIND_H:
            op = C_HH if ck == KIND_H else C_HV
        else:
            if ck == KIND_V:
                raise KindMismatch("subject has two holes")
            op = C_VH
        bits = kernels.combine(op, bits, cb, nq, nm)
        kind = OUT_KIND[op]
    return bits, kind


def _eval_tree(aut: Nfta, v: TreeNode, qs: tuple[int, ...]) -> tuple[int, str]:
    if v.is_hole:
        return kernels.v_identity(aut.nq, len(qs)), KIND_V
    if not v.children:
        return aut.atom_bits(v.label, False, qs), KIND_H
    fb, fk = _eval_forest(aut, v.children, qs)
    top = aut.atom_bits(v.label, True, qs)
    op = A_VH if fk == KIND_H else A_VV
    return kernels.combine(op, top, fb, aut.nq, len(qs)), OUT_KIND[op]
