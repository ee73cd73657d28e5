# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled transition-algebra kernels.

Same interface and bit layout as `_pykernels` (see there for the layout
documentation).  Elements are decoded from Python ints into C arrays of
(join key, contribution, visited mask) triples, joined with counting-sort
buckets, and packed back.  Every join writes the output bit at
((part_a + part_b) << nm) | (r_a | r_b), with the per-operation split of a
signature into key and contribution done in `_adecomp`/`_bdecomp`.
"""

from libc.stdlib cimport free, malloc
from libc.string cimport memset

from .ops import A_VH, A_VV, C_HH, C_HV, C_VH

cdef int _C_HH = C_HH
cdef int _C_HV = C_HV
cdef int _C_VH = C_VH
cdef int _A_VV = A_VV
cdef int _A_VH = A_VH


cdef long* _collect(object e, Py_ssize_t* n) except? NULL:
    """Set-bit positions of a nonnegative Python int, as a malloc'd array."""
    cdef bytes raw = e.to_bytes((e.bit_length() + 7) // 8 or 1, "little")
    cdef const unsigned char* p = raw
    cdef Py_ssize_t nbytes = len(raw)
    cdef Py_ssize_t cnt = 0, i, k = 0
    cdef unsigned int byte
    cdef int bit
    for i in range(nbytes):
        byte = p[i]
        while byte:
            byte &= byte - 1
            cnt += 1
    cdef long* out = <long*> malloc((cnt if cnt else 1) * sizeof(long))
    if out == NULL:
        raise MemoryError()
    for i in range(nbytes):
        byte = p[i]
        bit = 0
        while byte:
            if byte & 1:
                out[k] = i * 8 + bit
                k += 1
            byte >>= 1
            bit += 1
    n[0] = cnt
    return out


cdef void _adecomp(int op, long* idx, Py_ssize_t n, int nq, int nm,
                   long* key, long* part, long* r):
    cdef long i, sig, outer
    cdef long mask = (1 << nm) - 1
    cdef long nq2 = nq * nq
    cdef Py_ssize_t t
    for t in range(n):
        i = idx[t]
        sig = i >> nm
        r[t] = i & mask
        if op == _C_HH:
            key[t] = sig % nq
            part[t] = (sig // nq) * nq
        elif op == _C_HV:
            key[t] = sig % nq
            part[t] = (sig // nq) * nq * nq2
        elif op == _C_VH:
            outer = sig // nq2
            key[t] = outer % nq
            part[t] = (outer // nq) * nq * nq2 + sig % nq2
        elif op == _A_VV:
            key[t] = sig % nq2
            part[t] = (sig // nq2) * nq2
        else:  # A_VH
            key[t] = sig % nq2
            part[t] = sig // nq2


cdef void _bdecomp(int op, long* idx, Py_ssize_t n, int nq, int nm,
                   long* key, long* part, long* r):
    cdef long i, sig, outer
    cdef long mask = (1 << nm) - 1
    cdef long nq2 = nq * nq
    cdef Py_ssize_t t
    for t in range(n):
        i = idx[t]
        sig = i >> nm
        r[t] = i & mask
        if op == _C_HH:
            key[t] = sig // nq
            part[t] = sig % nq
        elif op == _C_HV:
            outer = sig // nq2
            key[t] = outer // nq
            part[t] = (outer % nq) * nq2 + sig % nq2
        elif op == _C_VH:
            key[t] = sig // nq
            part[t] = (sig % nq) * nq2
        elif op == _A_VV:
            key[t] = sig // nq2
            part[t] = sig % nq2
        else:  # A_VH
            key[t] = sig
            part[t] = 0


cdef inline long _key_range(int op, long nq):
    if op == _C_HH or op == _C_HV or op == _C_VH:
        return nq
    return nq * nq


cdef inline long _out_width(int op, long nq, int nm):
    if op == _C_HH or op == _A_VH:
        return (nq * nq) << nm
    return (nq * nq * nq * nq) << nm


cdef inline long _side_width(int op, bint left, long nq, int nm):
    """Bit width of the left (or right) operand's layout."""
    cdef bint is_v
    if left:
        is_v = op == _C_VH or op == _A_VV or op == _A_VH
    else:
        is_v = op == _C_HV or op == _A_VV
    if is_v:
        return (nq * nq * nq * nq) << nm
    return (nq * nq) << nm


def combine(int op, a, b, int nq, int nm):
    if op != _C_HH and op != _C_HV and op != _C_VH and op != _A_VV and op != _A_VH:
        raise ValueError(f"unknown operation code {op}")
    if a == 0 or b == 0:
        return 0
    cdef Py_ssize_t na = 0, nb = 0, t, u
    cdef long* aidx = _collect(a, &na)
    cdef long* bidx = _collect(b, &nb)
    cdef long K = _key_range(op, nq)
    cdef long width = _out_width(op, nq, nm)
    cdef Py_ssize_t obytes = (width + 7) // 8
    cdef long* akey = <long*> malloc(3 * (na or 1) * sizeof(long))
    cdef long* bkey = <long*> malloc(3 * (nb or 1) * sizeof(long))
    cdef Py_ssize_t* off = <Py_ssize_t*> malloc((K + 2) * sizeof(Py_ssize_t))
    cdef long* bs = <long*> malloc(2 * (nb or 1) * sizeof(long))
    cdef unsigned char* buf = <unsigned char*> malloc(obytes)
    if akey == NULL or bkey == NULL or off == NULL or bs == NULL or buf == NULL:
        free(aidx); free(bidx); free(akey); free(bkey); free(off); free(bs); free(buf)
        raise MemoryError()
    cdef long* apart = akey + na
    cdef long* ar = akey + 2 * na
    cdef long* bpart = bkey + nb
    cdef long* br = bkey + 2 * nb
    cdef long* bps = bs
    cdef long* brs = bs + nb
    cdef long j, k
    cdef Py_ssize_t pos
    try:
        memset(buf, 0, obytes)
        _adecomp(op, aidx, na, nq, nm, akey, apart, ar)
        _bdecomp(op, bidx, nb, nq, nm, bkey, bpart, br)
        memset(off, 0, (K + 2) * sizeof(Py_ssize_t))
        for t in range(nb):
            off[bkey[t] + 2] += 1
        for k in range(K):
            off[k + 2] += off[k + 1]
        for t in range(nb):  # off[key+1] advances to become the start offsets
            pos = off[bkey[t] + 1]
            bps[pos] = bpart[t]
            brs[pos] = br[t]
            off[bkey[t] + 1] = pos + 1
        for t in range(na):
            k = akey[t]
            for u in range(off[k], off[k + 1]):
                j = ((apart[t] + bps[u]) << nm) | (ar[t] | brs[u])
                buf[j >> 3] |= 1 << (j & 7)
        return int.from_bytes(buf[:obytes], "little")
    finally:
        free(aidx); free(bidx); free(akey); free(bkey); free(off); free(bs); free(buf)


def concat_hh(a, b, int nq, int nm):
    return combine(_C_HH, a, b, nq, nm)


def concat_hv(a, b, int nq, int nm):
    return combine(_C_HV, a, b, nq, nm)


def concat_vh(a, b, int nq, int nm):
    return combine(_C_VH, a, b, nq, nm)


def apply_vv(a, b, int nq, int nm):
    return combine(_A_VV, a, b, nq, nm)


def apply_vh(a, b, int nq, int nm):
    return combine(_A_VH, a, b, nq, nm)


def h_identity(int nq, int nm):
    cdef long width = (nq * nq) << nm
    cdef Py_ssize_t obytes = (width + 7) // 8
    cdef unsigned char* buf = <unsigned char*> malloc(obytes)
    if buf == NULL:
        raise MemoryError()
    cdef long q, j
    try:
        memset(buf, 0, obytes)
        for q in range(nq):
            j = (q * nq + q) << nm
            buf[j >> 3] |= 1 << (j & 7)
        return int.from_bytes(buf[:obytes], "little")
    finally:
        free(buf)


def v_identity(int nq, int nm):
    cdef long nq2 = nq * nq
    cdef long width = (nq2 * nq2) << nm
    cdef Py_ssize_t obytes = (width + 7) // 8
    cdef unsigned char* buf = <unsigned char*> malloc(obytes)
    if buf == NULL:
        raise MemoryError()
    cdef long p, j
    try:
        memset(buf, 0, obytes)
        for p in range(nq2):
            j = (p * nq2 + p) << nm
            buf[j >> 3] |= 1 << (j & 7)
        return int.from_bytes(buf[:obytes], "little")
    finally:
        free(buf)


def restrict_mask(e, int nm, long r):
    """Keep entries whose visited-mask equals r exactly."""
    if e == 0:
        return 0
    cdef Py_ssize_t n = 0, t
    cdef long* idx = _collect(e, &n)
    cdef long mask = (1 << nm) - 1
    cdef Py_ssize_t obytes = (idx[n - 1] >> 3) + 1 if n else 1
    cdef unsigned char* buf = <unsigned char*> malloc(obytes)
    if buf == NULL:
        free(idx)
        raise MemoryError()
    cdef long i
    try:
        memset(buf, 0, obytes)
        for t in range(n):
            i = idx[t]
            if (i & mask) == r:
                buf[i >> 3] |= 1 << (i & 7)
        return int.from_bytes(buf[:obytes], "little")
    finally:
        free(idx); free(buf)


def mask_union(e, int nm):
    if e == 0:
        return 0
    cdef Py_ssize_t n = 0, t
    cdef long* idx = _collect(e, &n)
    cdef long mask = (1 << nm) - 1
    cdef long out = 0
    for t in range(n):
        out |= idx[t] & mask
        if out == mask:
            break
    free(idx)
    return out


def drop_mask(e, int nm):
    """Project away visited-masks (result uses the nm=0 layout)."""
    if e == 0:
        return 0
    cdef Py_ssize_t n = 0, t
    cdef long* idx = _collect(e, &n)
    cdef Py_ssize_t obytes = ((idx[n - 1] >> nm) >> 3) + 1 if n else 1
    cdef unsigned char* buf = <unsigned char*> malloc(obytes)
    if buf == NULL:
        free(idx)
        raise MemoryError()
    cdef long j
    try:
        memset(buf, 0, obytes)
        for t in range(n):
            j = idx[t] >> nm
            buf[j >> 3] |= 1 << (j & 7)
        return int.from_bytes(buf[:obytes], "little")
    finally:
        free(idx); free(buf)


def filter_child(int op, bint left_side, xe, ye, ze, int nq, int nm):
    """Semijoin: entries x of xe such that joining {x} with some entry of the
    sibling element ye (xe on the left iff left_side) hits the parent set ze."""
    if xe == 0 or ye == 0 or ze == 0:
        return 0
    cdef Py_ssize_t nx = 0, ny = 0, t, u
    cdef long* xidx = _collect(xe, &nx)
    cdef long* yidx = _collect(ye, &ny)
    cdef bytes zraw = ze.to_bytes((ze.bit_length() + 7) // 8, "little")
    cdef const unsigned char* zp = zraw
    cdef Py_ssize_t zbytes = len(zraw)
    cdef long K = _key_range(op, nq)
    cdef long width = _side_width(op, left_side, nq, nm)
    cdef Py_ssize_t obytes = (width + 7) // 8
    cdef long* xkey = <long*> malloc(3 * (nx or 1) * sizeof(long))
    cdef long* ykey = <long*> malloc(3 * (ny or 1) * sizeof(long))
    cdef Py_ssize_t* off = <Py_ssize_t*> malloc((K + 2) * sizeof(Py_ssize_t))
    cdef long* ys = <long*> malloc(2 * (ny or 1) * sizeof(long))
    cdef unsigned char* buf = <unsigned char*> malloc(obytes)
    if xkey == NULL or ykey == NULL or off == NULL or ys == NULL or buf == NULL:
        free(xidx); free(yidx); free(xkey); free(ykey); free(off); free(ys); free(buf)
        raise MemoryError()
    cdef long* xpart = xkey + nx
    cdef long* xr = xkey + 2 * nx
    cdef long* ypart = ykey + ny
    cdef long* yr = ykey + 2 * ny
    cdef long* yps = ys
    cdef long* yrs = ys + ny
    cdef long j, k
    cdef Py_ssize_t pos
    try:
        memset(buf, 0, obytes)
        if left_side:
            _adecomp(op, xidx, nx, nq, nm, xkey, xpart, xr)
            _bdecomp(op, yidx, ny, nq, nm, ykey, ypart, yr)
        else:
            _bdecomp(op, xidx, nx, nq, nm, xkey, xpart, xr)
            _adecomp(op, yidx, ny, nq, nm, ykey, ypart, yr)
        memset(off, 0, (K + 2) * sizeof(Py_ssize_t))
        for t in range(ny):
            off[ykey[t] + 2] += 1
        for k in range(K):
            off[k + 2] += off[k + 1]
        for t in range(ny):
            pos = off[ykey[t] + 1]
            yps[pos] = ypart[t]
            yrs[pos] = yr[t]
            off[ykey[t] + 1] = pos + 1
        for t in range(nx):
            k = xkey[t]
            for u in range(off[k], off[k + 1]):
                j = ((xpart[t] + yps[u]) << nm) | (xr[t] | yrs[u])
                if (j >> 3) < zbytes and (zp[j >> 3] >> (j & 7)) & 1:
                    j = xidx[t]
                    buf[j >> 3] |= 1 << (j & 7)
                    break
        return int.from_bytes(buf[:obytes], "little")
    finally:
        free(xidx); free(yidx); free(xkey); free(ykey); free(off); free(ys); free(buf)
