"""Balanced parse trees ("formulas") over the forest algebra.

A formula is a binary tree whose leaves stand for single subject nodes —
plain `a` (a one-node forest) or holed `a_box` (the context a(hole)) — and
whose inner nodes apply one of the five algebra operations.  Evaluating the
formula yields the represented forest/context; here every formula represents
a tree (single root, no free hole at the top).

The structure is kept logarithmically shallow under local subject updates by
AVL-style single and double rotations that rewrite the parse tree using the
algebra axioms only, so the represented subject never changes.  Balance of an
inner node is height(right) - height(left); a rotation either reduces the
node's height by one ("height-reducing") or preserves it while shifting
imbalance ("height-preserving").

Cached per node: height, leaf count, rightmost leaf, balance.  The sum of
absolute balances over the whole formula is maintained incrementally; delete
uses it to decide when further repair attempts are worthwhile.
"""

from __future__ import annotations

from . import trees
from .errors import BadTarget, EmptyTree, KindMismatch, NoRotation
from .ops import A_VH, A_VV, C_HH, C_HV, C_VH, IN_KINDS, KIND_H, KIND_V, LEAF, OUT_KIND
from .trees import ForestOrContext, TreeUpdate


class FormulaNode:
    __slots__ = (
        "tag", "left", "right", "parent",
        "height", "leaves", "bal", "rml",
        "label", "holed", "subject",
        "elem", "ext",
    )

    def __init__(self, tag: int):
        self.tag = tag
        self.left = None
        self.right = None
        self.parent = None
        self.height = 0
        self.leaves = 0
        self.bal = 0
        self.rml = None
        self.label = None
        self.holed = False
        self.subject = -1
        self.elem = None
        self.ext = None

    @property
    def kind(self) -> str:
        if self.tag == LEAF:
            return KIND_V if self.holed else KIND_H
        return OUT_KIND[self.tag]

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        if self.tag == LEAF:
            return f"<leaf {self.label}{'_box' if self.holed else ''} #{self.subject}>"
        return f"<node tag={self.tag} h={self.height}>"


# Rotation tag tables, derived from the algebra axioms.  An a-side rotation
# acts at v with inner left child w, a b-side rotation at v with inner right
# child w; the value maps are (tag v, tag w) -> (rotation id, tag v', tag w').
#
# Shapes:  1a/2a   v(w(x1,x2),x3) -> v'(x1, w'(x2,x3))
#          3a/3b   v(w(x1,x2),x3) -> v'(w'(x1,x3), x2)
#          1b/2b   v(x1, w(x2,x3)) -> v'(w'(x1,x2), x3)
_A_TABLE = {
    (C_HH, C_HH): ("1a", C_HH, C_HH),
    (C_VH, C_VH): ("1a", C_VH, C_HH),
    (C_VH, C_HV): ("1a", C_HV, C_VH),
    (C_HV, C_HH): ("1a", C_HV, C_HV),
    (A_VV, A_VV): ("1a", A_VV, A_VV),
    (A_VH, A_VV): ("1a", A_VH, A_VH),
    (A_VH, C_HV): ("2a", C_HH, A_VH),
    (A_VV, C_HV): ("2a", C_HV, A_VV),
    (A_VH, C_VH): ("3a", C_HH, A_VH),
    (A_VV, C_VH): ("3a", C_VH, A_VV),
    (C_HH, A_VH): ("3b", A_VH, C_VH),
    (C_VH, A_VV): ("3b", A_VV, C_VH),
}
_B_TABLE = {
    (C_HH, C_HH): ("1b", C_HH, C_HH),
    (C_VH, C_HH): ("1b", C_VH, C_VH),
    (C_HV, C_VH): ("1b", C_VH, C_HV),
    (C_HV, C_HV): ("1b", C_HV, C_HH),
    (A_VV, A_VV): ("1b", A_VV, A_VV),
    (A_VH, A_VH): ("1b", A_VH, A_VV),
    (C_HH, A_VH): ("2b", A_VH, C_HV),
    (C_HV, A_VV): ("2b", A_VV, C_HV),
}

_CONCATS = (C_HH, C_HV, C_VH)
_APPLIES = (A_VV, A_VH)


class Formula:
    """A balanced formula representing one subject tree, updatable in place."""

    def __init__(self, root: FormulaNode, leaf_map: dict[int, FormulaNode], root_subject: int):
        self.root = root
        self._leaves = leaf_map
        self.root_subject = root_subject
        self.total_balance = 0
        self.rotation_count = 0
        self.cache_hook = None  # called with each node whose caches were refreshed
        self.rotation_hook = None  # called with (rotation id, v, returned w nodes)
        self._caches_ready = False

    # -- basic accessors ---------------------------------------------------

    @property
    def height(self) -> int:
        return self.root.height

    @property
    def size(self) -> int:
        return len(self._leaves)

    def leaf_for(self, subject_id: int) -> FormulaNode:
        leaf = self._leaves.get(subject_id)
        if leaf is None:
            raise BadTarget(f"no node with id {subject_id}")
        return leaf

    def leaf_order(self) -> list[int]:
        """Subject ids in left-to-right formula leaf order.

        This order is total but update-dependent: splices and rotations may
        place leaves differently from the represented tree's document order.
        """
        out = []
        stack = [self.root]
        while stack:
            n = stack.pop()
            if n.tag == LEAF:
                out.append(n.subject)
            else:
                stack.append(n.right)
                stack.append(n.left)
        return out

    def inner_nodes(self):
        stack = [self.root]
        while stack:
            n = stack.pop()
            if n.tag != LEAF:
                yield n
                stack.append(n.right)
                stack.append(n.left)

    # -- cache maintenance -------------------------------------------------

    def _fix_node(self, v: FormulaNode) -> None:
        l, r = v.left, v.right
        lh, rh = l.height, r.height
        v.height = (lh if lh >= rh else rh) + 1
        nb = rh - lh
        if self._caches_ready:
            ob = v.bal
            self.total_balance += (nb if nb >= 0 else -nb) - (ob if ob >= 0 else -ob)
            v.bal = nb
            v.leaves = l.leaves + r.leaves
            v.rml = r.rml
        else:
            v.bal = nb
        if self.cache_hook is not None:
            self.cache_hook(v)

    def _propagate(self, v: FormulaNode | None) -> None:
        """Refresh caches upward, stopping once nothing the parent reads changed."""
        while v is not None:
            oh, orml = v.height, v.rml
            self._fix_node(v)
            if v.height == oh and v.rml is orml:
                break
            v = v.parent

    def _refresh_path(self, v: FormulaNode | None) -> None:
        """Refresh caches from v all the way to the root (no early stop)."""
        while v is not None:
            self._fix_node(v)
            v = v.parent

    def _deep_child(self, v: FormulaNode) -> FormulaNode | None:
        b = v.bal
        if b > 0:
            return v.right
        if b < 0:
            return v.left
        return None

    def _replace(self, old: FormulaNode, new: FormulaNode) -> None:
        p = old.parent
        new.parent = p
        if p is None:
            self.root = new
        elif p.left is old:
            p.left = new
        else:
            p.right = new

    # -- rotations ---------------------------------------------------------

    def _single_hr(self, v: FormulaNode):
        b = v.bal
        if b <= -2:
            row = _A_TABLE.get((v.tag, v.left.tag))
            if row is not None:
                rid = row[0]
                wb = v.left.bal
                if (rid in ("1a", "2a") and wb < 0) or (rid in ("3a", "3b") and wb > 0):
                    return (rid, True)
        elif b >= 2:
            row = _B_TABLE.get((v.tag, v.right.tag))
            if row is not None and v.right.bal > 0:
                return (row[0], True)
        return None

    def _hp_apply(self, v: FormulaNode):
        """Height-preserving rotation at an apply-node leaning left."""
        if v.tag not in _APPLIES or v.bal > -2:
            return None
        row = _A_TABLE.get((v.tag, v.left.tag))
        if row is None:
            return None
        rid = row[0]
        wb = v.left.bal
        if rid in ("1a", "2a"):
            return (rid, False) if wb > 0 else None
        if rid == "3a":
            return (rid, False) if wb < 0 else None
        return None

    def _double(self, v: FormulaNode):
        """Double rotation at three consecutive concat-nodes with alternating lean."""
        if v.tag not in _CONCATS:
            return None
        b = v.bal
        if b <= -2:
            w = v.left
            if w.tag in _CONCATS and w.bal >= 1 and w.right.tag in _CONCATS:
                return ("4a", True)
        elif b >= 2:
            w = v.right
            if w.tag in _CONCATS and w.bal <= -1 and w.left.tag in _CONCATS:
                return ("4b", True)
        return None

    def _rotation_descriptor(self, v: FormulaNode):
        if v.tag == LEAF:
            return None
        return self._single_hr(v) or self._hp_apply(v) or self._double(v)

    def _hr_descriptor(self, v: FormulaNode):
        if v.tag == LEAF:
            return None
        return self._single_hr(v) or self._double(v)

    def _simple_descriptor(self, v: FormulaNode):
        if v.tag == LEAF:
            return None
        return self._single_hr(v) or self._hp_apply(v)

    def rotation_possible(self, v: FormulaNode) -> str | None:
        """Id of the unique rotation applicable at v, or None."""
        d = self._rotation_descriptor(v)
        return d[0] if d is not None else None

    def do_rotation(self, v: FormulaNode) -> FormulaNode:
        """Apply the unique rotation at v; returns the rearranged inner node
        whose subexpression changed (the only node that may have gone yellow)."""
        d = self._rotation_descriptor(v)
        if d is None:
            raise NoRotation(f"no rotation applies at {v!r}")
        return self._apply_rotation(v, d)

    def _apply_single(self, v: FormulaNode, row, propagate: bool = True) -> FormulaNode:
        rid, tv, tw = row
        if rid in ("1b", "2b"):
            w = v.right
            a, b, c = v.left, w.left, w.right
            v.left = w
            v.right = c
            c.parent = v
            w.left = a
            a.parent = w
            w.right = b
            b.parent = w
        else:
            w = v.left
            a, b, c = w.left, w.right, v.right
            if rid in ("1a", "2a"):
                v.left = a
                a.parent = v
                v.right = w
                w.left = b
                b.parent = w
                w.right = c
                c.parent = w
            else:  # 3a / 3b
                v.right = b
                b.parent = v
                w.right = c
                c.parent = w
        v.tag = tv
        w.tag = tw
        self._fix_node(w)
        self._fix_node(v)
        if propagate:
            self._propagate(v.parent)
        return w

    def _double_return(self, wa: FormulaNode, wb: FormulaNode, designated: FormulaNode) -> FormulaNode:
        if self._caches_ready:
            ga = wa.leaves ** 10 >= 1 << wa.height
            gb = wb.leaves ** 10 >= 1 << wb.height
            if ga != gb:
                return wb if ga else wa
        return designated

    def _apply_rotation(self, v: FormulaNode, d) -> FormulaNode:
        rid = d[0]
        if rid == "4a":
            w = v.left
            w1 = self._apply_single(w, _B_TABLE[(w.tag, w.right.tag)], propagate=False)
            w2 = self._apply_single(v, _A_TABLE[(v.tag, v.left.tag)])
            ret = self._double_return(w1, w2, designated=w2)
            ws = (w1, w2)
        elif rid == "4b":
            w = v.right
            w2 = self._apply_single(w, _A_TABLE[(w.tag, w.left.tag)], propagate=False)
            w1 = self._apply_single(v, _B_TABLE[(v.tag, v.right.tag)])
            ret = self._double_return(w1, w2, designated=w1)
            ws = (w1, w2)
        else:
            if rid in ("1b", "2b"):
                ret = self._apply_single(v, _B_TABLE[(v.tag, v.right.tag)])
            else:
                ret = self._apply_single(v, _A_TABLE[(v.tag, v.left.tag)])
            ws = (ret,)
        self.rotation_count += 1
        if self.rotation_hook is not None:
            self.rotation_hook(rid, v, ws)
        return ret

    # -- repair walks ------------------------------------------------------

    def _optimize_upwards(self, v: FormulaNode | None) -> None:
        """Restore balance after one leaf insertion (construction phase walk)."""
        while v is not None:
            d = self._hr_descriptor(v)
            if d is not None:
                self._apply_rotation(v, d)
                return
            if v.tag in _APPLIES and v.bal <= -7:
                while True:
                    d = self._hp_apply(v)
                    if d is None:
                        break
                    v = self._apply_rotation(v, d)
                continue
            p = v.parent
            v = p if (p is not None and self._deep_child(p) is v) else None

    def try_reduce_height(self, v: FormulaNode) -> None:
        """Chase the imbalance below v and rotate where possible."""
        while True:
            b = v.bal
            if b <= -2 or b >= 2:
                d = self._simple_descriptor(v)
                if d is not None:
                    v = self._apply_rotation(v, d)
                else:
                    v = v.left if b < 0 else v.right
                continue
            u, d = self._scan_up(v)
            if d is None:
                return
            v = self._apply_rotation(u, d)

    def _scan_up(self, v: FormulaNode):
        """Nearest ancestor with a rotation among the (at most 8) ancestors
        whose long path passes through v."""
        cur = v
        for _ in range(8):
            p = cur.parent
            if p is None or self._deep_child(p) is not cur:
                break
            d = self._rotation_descriptor(p)
            if d is not None:
                return p, d
            cur = p
        return None, None

    # -- splices -----------------------------------------------------------

    def _new_leaf(self, label: str, holed: bool, subject: int) -> FormulaNode:
        n = FormulaNode(LEAF)
        n.label = label
        n.holed = holed
        n.subject = subject
        n.height = 0
        n.leaves = 1
        n.rml = n
        return n

    def _splice_subdiv(self, target: FormulaNode, label: str, new_subject: int):
        was_holed = target.holed
        new_leaf = self._new_leaf(label, was_holed, new_subject)
        inner = FormulaNode(A_VV if was_holed else A_VH)
        self._replace(target, inner)
        target.holed = True
        inner.left = target
        target.parent = inner
        inner.right = new_leaf
        new_leaf.parent = inner
        self._leaves[new_subject] = new_leaf
        if self.cache_hook is not None:
            self.cache_hook(target)
            self.cache_hook(new_leaf)
        return new_leaf, inner

    def _splice_sibling(self, target: FormulaNode, label: str, new_subject: int, right: bool):
        new_leaf = self._new_leaf(label, False, new_subject)
        if right:
            tag = C_VH if target.holed else C_HH
            l, r = target, new_leaf
        else:
            tag = C_HV if target.holed else C_HH
            l, r = new_leaf, target
        inner = FormulaNode(tag)
        self._replace(target, inner)
        inner.left = l
        l.parent = inner
        inner.right = r
        r.parent = inner
        self._leaves[new_subject] = new_leaf
        if self.cache_hook is not None:
            self.cache_hook(new_leaf)
        return new_leaf, inner

    # -- public update operations -----------------------------------------

    def insert(self, u: TreeUpdate) -> FormulaNode:
        """Apply a subdiv/insertL/insertR update; returns the new leaf."""
        target = self.leaf_for(u.target)
        if u.kind == "subdiv":
            new_leaf, inner = self._splice_subdiv(target, u.label, trees.fresh_id())
        else:
            if u.target == self.root_subject:
                raise BadTarget("cannot insert a sibling of the root")
            new_leaf, inner = self._splice_sibling(
                target, u.label, trees.fresh_id(), right=(u.kind == "insertR")
            )
        self._refresh_path(inner)
        v = inner
        while v is not None:
            d = self._rotation_descriptor(v)
            if d is not None:
                hr = d[1]
                v = self._apply_rotation(v, d)
                if hr:
                    break
            else:
                p = v.parent
                v = p if (p is not None and self._deep_child(p) is v) else None
        else:
            return new_leaf
        self.try_reduce_height(v)
        return new_leaf

    def relabel(self, u: TreeUpdate) -> None:
        leaf = self.leaf_for(u.target)
        leaf.label = u.label
        if self.cache_hook is not None:
            changed = self.cache_hook(leaf)
            v = leaf.parent
            while changed and v is not None:
                changed = self.cache_hook(v)
                v = v.parent

    def remove(self, leaf: FormulaNode) -> None:
        """Delete the subject leaf represented by this plain formula leaf."""
        if leaf.tag != LEAF or leaf.holed:
            raise BadTarget("only leaves of the tree can be deleted")
        parent = leaf.parent
        if parent is None:
            raise EmptyTree("cannot delete the last node of a tree")
        b0 = self.total_balance
        snap: dict[int, int] = {}
        a = parent.parent
        while a is not None:
            snap[id(a)] = a.height
            a = a.parent

        self.total_balance -= parent.bal if parent.bal >= 0 else -parent.bal
        if parent.tag in _CONCATS:
            v = parent.right if parent.left is leaf else parent.left
            self._replace(parent, v)
        else:
            if parent.tag != A_VH or parent.right is not leaf:
                raise BadTarget("malformed formula around the deleted leaf")
            v = parent.left
            self._replace(parent, v)
            self._retype_hole_path(v)
        del self._leaves[leaf.subject]
        leaf.parent = None
        parent.left = parent.right = None

        if v.parent is not None:
            self._refresh_path(v.parent)
        while v is not self.root:
            v = v.parent
            if v.height >= snap[id(v)] and (b0 - self.total_balance) < 20 * self.root.height:
                self.try_reduce_height(v)

    def _retype_hole_path(self, top: FormulaNode) -> None:
        """Plug the hole of a context subformula with the empty forest."""
        path = []
        n = top
        while n.tag != LEAF:
            path.append(n)
            if n.tag == C_VH:
                n = n.left
            elif n.tag in (C_HV, A_VV):
                n = n.right
            else:
                raise BadTarget("malformed context subformula")
        n.holed = False
        for p in path:
            p.tag = C_HH if p.tag in (C_VH, C_HV) else A_VH
        if self.cache_hook is not None:
            self.cache_hook(n)
            for p in reversed(path):
                self.cache_hook(p)

    def apply_update(self, u: TreeUpdate) -> int | None:
        """Apply one tree update to the formula; returns the new node id, if any."""
        if u.kind == "relab":
            self.relabel(u)
            return None
        if u.kind == "delete":
            self.remove(self.leaf_for(u.target))
            return None
        return self.insert(u).subject

    # -- auditing ----------------------------------------------------------

    def audit_invariants(self, strong: bool = False) -> list[str]:
        """Recheck structure, caches, colors and the delete-slack condition.

        Returns human-readable issue strings; an empty list means all checks
        passed.  With strong=True every node must be green, otherwise yellow
        nodes are allowed when they satisfy the delete-slack condition.
        """
        issues: list[str] = []
        if self.root.parent is not None:
            issues.append("root has a parent")
        if self.root.kind != KIND_H:
            issues.append("root is not forest-sorted")
        if self.root.tag == C_HH:
            issues.append("root concatenates two forests (not a tree)")

        seen_leaves: dict[int, FormulaNode] = {}
        total_b = 0
        # iterative postorder: (node, stage)
        stack = [(self.root, 0)]
        info: dict[int, tuple[int, int, FormulaNode, int]] = {}  # id -> (h, leaves, rml, bal-sum)
        while stack:
            n, stage = stack.pop()
            if n.tag == LEAF:
                if n.label is None:
                    issues.append("leaf without label")
                if n.subject in seen_leaves:
                    issues.append(f"subject id {n.subject} appears twice")
                seen_leaves[n.subject] = n
                if (n.height, n.leaves, n.bal, n.rml) != (0, 1, 0, n):
                    issues.append(f"bad caches on leaf {n.subject}")
                info[id(n)] = (0, 1, n, 0)
                continue
            if stage == 0:
                stack.append((n, 1))
                for c in (n.left, n.right):
                    if c is None:
                        issues.append("inner node missing a child")
                    elif c.parent is not n:
                        issues.append("broken parent link")
                    else:
                        stack.append((c, 0))
                continue
            lh, ll, _, lb = info.pop(id(n.left))
            rh, rl, rr, rb = info.pop(id(n.right))
            if IN_KINDS[n.tag] != (n.left.kind, n.right.kind):
                issues.append(f"operand sorts do not match tag {n.tag}")
            h = max(lh, rh) + 1
            leaves = ll + rl
            bal = rh - lh
            bsum = lb + rb + abs(bal)
            if n.height != h:
                issues.append(f"height cache off at tag {n.tag}: {n.height} != {h}")
            if n.leaves != leaves:
                issues.append(f"leaf-count cache off: {n.leaves} != {leaves}")
            if n.bal != bal:
                issues.append(f"balance cache off: {n.bal} != {bal}")
            if n.rml is not rr:
                issues.append("rightmost-leaf cache off")
            total_b += abs(bal)
            green = leaves**10 >= 1 << h
            if not green:
                yellow = leaves**10 >= 1 << (h - 1)
                if not yellow:
                    issues.append(f"red node: height {h} with {leaves} leaves")
                elif strong:
                    issues.append(f"yellow node under strong audit: height {h}, {leaves} leaves")
                else:
                    # exact integer form of: 2^(h/10) - leaves <= (h*leaves - bsum) / (20h)
                    rhs = 21 * h * leaves - bsum
                    if rhs < 0 or (1 << h) * (20 * h) ** 10 > rhs**10:
                        issues.append(
                            f"delete-slack violated: height {h}, {leaves} leaves, balance sum {bsum}"
                        )
            info[id(n)] = (h, leaves, rr, bsum)
        if set(seen_leaves) != set(self._leaves):
            issues.append("leaf index does not match the formula's leaves")
        else:
            for sid, leaf in seen_leaves.items():
                if self._leaves[sid] is not leaf:
                    issues.append(f"leaf index points at the wrong node for {sid}")
        if self._caches_ready and total_b != self.total_balance:
            issues.append(f"total balance counter off: {self.total_balance} != {total_b}")
        if self.root_subject not in seen_leaves:
            issues.append("root subject id is not a leaf")
        return issues


# ---------------------------------------------------------------------------
# Construction and evaluation


def construct(t: ForestOrContext) -> Formula:
    """Build a balanced formula for a tree in linear time."""
    if not t.is_tree:
        raise KindMismatch("construct needs a tree (single root, no hole)")
    root = t.roots[0]
    froot = FormulaNode(LEAF)
    froot.label = root.label
    froot.holed = False
    froot.subject = root.id
    froot.height = 0
    froot.leaves = 1
    froot.rml = froot
    f = Formula(froot, {root.id: froot}, root.id)

    # preorder: (subject node, parent id, left-sibling id or None)
    stack = []

    def push_children(v):
        prev = None
        items = []
        for c in v.children:
            items.append((c, v.id, prev))
            prev = c.id
        stack.extend(reversed(items))

    push_children(root)
    while stack:
        v, pid, sid = stack.pop()
        if sid is None:
            target = f._leaves[pid]
            _leaf, inner = f._splice_subdiv(target, v.label, v.id)
        else:
            target = f._leaves[sid]
            _leaf, inner = f._splice_sibling(target, v.label, v.id, right=True)
        f._propagate(inner)
        f._optimize_upwards(inner)
        push_children(v)

    _bulk_fill(f)
    _optimize_all(f)
    return f


def _bulk_fill(f: Formula) -> None:
    """One postorder pass filling leaf-count / rightmost-leaf caches."""
    total = 0
    stack = [(f.root, 0)]
    while stack:
        n, stage = stack.pop()
        if n.tag == LEAF:
            n.leaves = 1
            n.rml = n
            continue
        if stage == 0:
            stack.append((n, 1))
            stack.append((n.left, 0))
            stack.append((n.right, 0))
        else:
            n.leaves = n.left.leaves + n.right.leaves
            n.rml = n.right.rml
            total += n.bal if n.bal >= 0 else -n.bal
    f.total_balance = total
    f._caches_ready = True


def _optimize_all(f: Formula) -> None:
    """Postorder sweep applying every available rotation."""
    stack = [(f.root, 0)]
    while stack:
        n, stage = stack.pop()
        if n.tag == LEAF:
            continue
        if stage == 0:
            stack.append((n, 1))
            stack.append((n.left, 0))
            stack.append((n.right, 0))
        else:
            _do_all_rotations(f, n)


def _do_all_rotations(f: Formula, v: FormulaNode) -> None:
    while True:
        d = f._rotation_descriptor(v)
        if d is None:
            return
        f._apply_rotation(v, d)
        if v.left.tag != LEAF:
            _do_all_rotations(f, v.left)
        if v.right.tag != LEAF:
            _do_all_rotations(f, v.right)


def represented_tree(f: Formula) -> ForestOrContext:
    """Evaluate the formula back into a fresh subject structure (same ids)."""
    stack = [(f.root, 0)]
    vals: dict[int, ForestOrContext] = {}
    while stack:
        n, stage = stack.pop()
        if n.tag == LEAF:
            if n.holed:
                vals[id(n)] = trees.tree(n.label, [trees.box()], node_id=n.subject)
            else:
                vals[id(n)] = trees.leaf(n.label, node_id=n.subject)
            continue
        if stage == 0:
            stack.append((n, 1))
            stack.append((n.left, 0))
            stack.append((n.right, 0))
        else:
            lv = vals.pop(id(n.left))
            rv = vals.pop(id(n.right))
            if n.tag in _CONCATS:
                vals[id(n)] = trees.concat(lv, rv)
            else:
                vals[id(n)] = trees.apply(lv, rv)
    return vals[id(f.root)]
