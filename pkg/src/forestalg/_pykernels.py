"""Pure-Python transition-algebra kernels on bitset-encoded elements.

Elements are Python ints.  With nq automaton states and nm visited-mask bits
(nm = 0 for plain elements), the bit layouts are:

- forest entry  (q1, q2, r):            bit ((q1*nq + q2) << nm) | r
- context entry ((q1,q2), (q3,q4), r):  bit ((((q1*nq+q2)*nq+q3)*nq+q4) << nm) | r

where r is the set of visited selection states.  Joins are the trivial
nested-loop products over the stored entries; no join reordering happens.

The compiled module `_ckernels` implements the same interface.
"""

from .ops import A_VH, A_VV, C_HH, C_HV, C_VH


def _bits(e):
    while e:
        low = e & -e
        yield low.bit_length() - 1
        e ^= low


def h_identity(nq: int, nm: int) -> int:
    out = 0
    for q in range(nq):
        out |= 1 << ((q * nq + q) << nm)
    return out


def v_identity(nq: int, nm: int) -> int:
    out = 0
    nq2 = nq * nq
    for p in range(nq2):
        out |= 1 << ((p * nq2 + p) << nm)
    return out


def concat_hh(a: int, b: int, nq: int, nm: int) -> int:
    if not a or not b:
        return 0
    mask = (1 << nm) - 1
    grouped: dict[int, list[tuple[int, int]]] = {}
    for i in _bits(b):
        sig = i >> nm
        q2, q3 = divmod(sig, nq)
        grouped.setdefault(q2, []).append((q3, i & mask))
    out = 0
    for i in _bits(a):
        sig = i >> nm
        q1, q2 = divmod(sig, nq)
        lst = grouped.get(q2)
        if lst:
            ra = i & mask
            base = q1 * nq
            for q3, rb in lst:
                out |= 1 << (((base + q3) << nm) | (ra | rb))
    return out


def concat_hv(a: int, b: int, nq: int, nm: int) -> int:
    # forest (q1,q2) ++ context ((q2,q3),h) -> ((q1,q3),h)
    if not a or not b:
        return 0
    mask = (1 << nm) - 1
    nq2 = nq * nq
    grouped: dict[int, list[tuple[int, int, int]]] = {}
    for i in _bits(b):
        sig = i >> nm
        outer, hole = divmod(sig, nq2)
        q2, q3 = divmod(outer, nq)
        grouped.setdefault(q2, []).append((q3, hole, i & mask))
    out = 0
    for i in _bits(a):
        sig = i >> nm
        q1, q2 = divmod(sig, nq)
        lst = grouped.get(q2)
        if lst:
            ra = i & mask
            for q3, hole, rb in lst:
                out |= 1 << ((((q1 * nq + q3) * nq2 + hole) << nm) | (ra | rb))
    return out


def concat_vh(a: int, b: int, nq: int, nm: int) -> int:
    # context ((q1,q2),h) ++ forest (q2,q5) -> ((q1,q5),h)
    if not a or not b:
        return 0
    mask = (1 << nm) - 1
    nq2 = nq * nq
    grouped: dict[int, list[tuple[int, int]]] = {}
    for i in _bits(b):
        sig = i >> nm
        q2, q5 = divmod(sig, nq)
        grouped.setdefault(q2, []).append((q5, i & mask))
    out = 0
    for i in _bits(a):
        sig = i >> nm
        outer, hole = divmod(sig, nq2)
        q1, q2 = divmod(outer, nq)
        lst = grouped.get(q2)
        if lst:
            ra = i & mask
            for q5, rb in lst:
                out |= 1 << ((((q1 * nq + q5) * nq2 + hole) << nm) | (ra | rb))
    return out


def apply_vv(a: int, b: int, nq: int, nm: int) -> int:
    # context (o,h1) . context (h1,h2) -> (o,h2)
    if not a or not b:
        return 0
    mask = (1 << nm) - 1
    nq2 = nq * nq
    grouped: dict[int, list[tuple[int, int]]] = {}
    for i in _bits(b):
        sig = i >> nm
        o2, h2 = divmod(sig, nq2)
        grouped.setdefault(o2, []).append((h2, i & mask))
    out = 0
    for i in _bits(a):
        sig = i >> nm
        o1, h1 = divmod(sig, nq2)
        lst = grouped.get(h1)
        if lst:
            ra = i & mask
            for h2, rb in lst:
                out |= 1 << (((o1 * nq2 + h2) << nm) | (ra | rb))
    return out


def apply_vh(a: int, b: int, nq: int, nm: int) -> int:
    # context (o,h) . forest h -> forest o
    if not a or not b:
        return 0
    mask = (1 << nm) - 1
    nq2 = nq * nq
    grouped: dict[int, list[int]] = {}
    for i in _bits(b):
        grouped.setdefault(i >> nm, []).append(i & mask)
    out = 0
    for i in _bits(a):
        sig = i >> nm
        o, h = divmod(sig, nq2)
        lst = grouped.get(h)
        if lst:
            ra = i & mask
            for rb in lst:
                out |= 1 << ((o << nm) | (ra | rb))
    return out


def combine(op: int, a: int, b: int, nq: int, nm: int) -> int:
    if op == C_HH:
        return concat_hh(a, b, nq, nm)
    if op == C_HV:
        return concat_hv(a, b, nq, nm)
    if op == C_VH:
        return concat_vh(a, b, nq, nm)
    if op == A_VV:
        return apply_vv(a, b, nq, nm)
    if op == A_VH:
        return apply_vh(a, b, nq, nm)
    raise ValueError(f"unknown operation code {op}")


def restrict_mask(e: int, nm: int, r: int) -> int:
    """Keep entries whose visited-mask equals r exactly."""
    mask = (1 << nm) - 1
    out = 0
    for i in _bits(e):
        if i & mask == r:
            out |= 1 << i
    return out


def mask_union(e: int, nm: int) -> int:
    mask = (1 << nm) - 1
    out = 0
    for i in _bits(e):
        out |= i & mask
        if out == mask:
            break
    return out


def drop_mask(e: int, nm: int) -> int:
    """Project away visited-masks (result uses the nm=0 layout)."""
    out = 0
    for i in _bits(e):
        out |= 1 << (i >> nm)
    return out


def _join_sig(op: int, left: int, right: int, nq: int, nq2: int) -> int:
    """Signature index of joining two single entries, or -1 on mismatch."""
    if op == C_HH:
        q1, q2 = divmod(left, nq)
        q2b, q3 = divmod(right, nq)
        return q1 * nq + q3 if q2 == q2b else -1
    if op == C_HV:
        q1, q2 = divmod(left, nq)
        outer, hole = divmod(right, nq2)
        q2b, q3 = divmod(outer, nq)
        return (q1 * nq + q3) * nq2 + hole if q2 == q2b else -1
    if op == C_VH:
        outer, hole = divmod(left, nq2)
        q1, q2 = divmod(outer, nq)
        q2b, q5 = divmod(right, nq)
        return (q1 * nq + q5) * nq2 + hole if q2 == q2b else -1
    if op == A_VV:
        o1, h1 = divmod(left, nq2)
        o2, h2 = divmod(right, nq2)
        return o1 * nq2 + h2 if h1 == o2 else -1
    # A_VH
    outer, hole = divmod(left, nq2)
    return outer if hole == right else -1


def filter_child(op: int, left_side: bool, xe: int, ye: int, ze: int, nq: int, nm: int) -> int:
    """Semijoin: entries x of xe such that joining {x} with some entry of the
    sibling element ye (xe on the left iff left_side) hits the parent set ze."""
    if not xe or not ye or not ze:
        return 0
    mask = (1 << nm) - 1
    nq2 = nq * nq
    ys = [(i >> nm, i & mask) for i in _bits(ye)]
    out = 0
    for i in _bits(xe):
        xsig = i >> nm
        xr = i & mask
        for ysig, yr in ys:
            if left_side:
                z = _join_sig(op, xsig, ysig, nq, nq2)
            else:
                z = _join_sig(op, ysig, xsig, nq, nq2)
            if z >= 0 and (ze >> ((z << nm) | (xr | yr))) & 1:
                out |= 1 << i
                break
    return out
