"""Kernel backend selection.

Imports the compiled C kernels when available, falling back to the
pure-Python implementation.  Set FORESTALG_KERNELS=py or =c to force a
backend (forcing `c` raises if the extension is not built).
"""

import os

_forced = os.environ.get("FORESTALG_KERNELS", "").strip().lower()

if _forced == "py":
    from . import _pykernels as _impl
elif _forced == "c":
    from . import _ckernels as _impl  # type: ignore[attr-defined]
elif _forced == "":
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernels as _impl
else:
    raise ValueError(f"FORESTALG_KERNELS must be 'py' or 'c', not {_forced!r}")

BACKEND = "c" if _impl.__name__.endswith("_ckernels") else "py"

h_identity = _impl.h_identity
v_identity = _impl.v_identity
concat_hh = _impl.concat_hh
concat_hv = _impl.concat_hv
concat_vh = _impl.concat_vh
apply_vv = _impl.apply_vv
apply_vh = _impl.apply_vh
combine = _impl.combine
restrict_mask = _impl.restrict_mask
mask_union = _impl.mask_union
drop_mask = _impl.drop_mask
filter_child = _impl.filter_child


def get_backend(name: str):
    """Return the kernel module for an explicit backend name ('py' or 'c')."""
    if name == "py":
        from . import _pykernels

        return _pykernels
    if name == "c":
        from . import _ckernels  # type: ignore[attr-defined]

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def set_backend(name: str) -> str:
    """Rebind the exported kernel functions to a backend; returns the old name."""
    global _impl, BACKEND
    global h_identity, v_identity, concat_hh, concat_hv, concat_vh
    global apply_vv, apply_vh, combine, restrict_mask, mask_union, drop_mask
    global filter_child
    old = BACKEND
    _impl = get_backend(name)
    BACKEND = name
    h_identity = _impl.h_identity
    v_identity = _impl.v_identity
    concat_hh = _impl.concat_hh
    concat_hv = _impl.concat_hv
    concat_vh = _impl.concat_vh
    apply_vv = _impl.apply_vv
    apply_vh = _impl.apply_vh
    combine = _impl.combine
    restrict_mask = _impl.restrict_mask
    mask_union = _impl.mask_union
    drop_mask = _impl.drop_mask
    filter_child = _impl.filter_child
    return old
