"""Shared numeric codes for parse-node tags / algebra operations.

The five binary operations of the two-sorted algebra, plus the leaf tag used
by parse trees.  Output sorts: concat of two forests and apply-to-forest give
forests (H); everything else gives a context (V).
"""

LEAF = 0  # parse-tree leaf: one subject node, plain (H) or holed (V)
C_HH = 1  # forest ++ forest            -> forest
C_HV = 2  # forest ++ context           -> context
C_VH = 3  # context ++ forest           -> context
A_VV = 4  # context . context           -> context
A_VH = 5  # context . forest            -> forest

CONCAT_TAGS = (C_HH, C_HV, C_VH)
APPLY_TAGS = (A_VV, A_VH)

KIND_H = "H"
KIND_V = "V"

# Output sort per operation, and (left, right) operand sorts.
OUT_KIND = {C_HH: KIND_H, C_HV: KIND_V, C_VH: KIND_V, A_VV: KIND_V, A_VH: KIND_H}
IN_KINDS = {
    C_HH: (KIND_H, KIND_H),
    C_HV: (KIND_H, KIND_V),
    C_VH: (KIND_V, KIND_H),
    A_VV: (KIND_V, KIND_V),
    A_VH: (KIND_V, KIND_H),
}

OP_NAMES = {C_HH: "concat_hh", C_HV: "concat_hv", C_VH: "concat_vh", A_VV: "apply_vv", A_VH: "apply_vh"}
OP_BY_NAME = {v: k for k, v in OP_NAMES.items()}
