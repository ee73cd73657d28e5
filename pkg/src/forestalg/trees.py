"""Unranked forests and contexts, and the five local tree updates.

A subject is a forest (sequence of unranked trees) or a context (a forest in
which exactly one leaf is a hole).  Nodes carry integer ids that are unique per
process and never reused; all update operations address nodes by id.

concat/apply follow the two-sorted algebra:

- concat(d1, d2): horizontal composition; defined unless both are contexts.
- apply(c, d):    vertical composition; substitutes d for the hole of c.

Both reuse the operand node objects (the operands are consumed); use deep_copy
first when the originals must survive.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BadTarget, EmptyTree, KindMismatch


class _IdGen:
    """Process-wide monotone id source; ids are never reused."""

    __slots__ = ("_next",)

    def __init__(self) -> None:
        self._next = 0

    def __call__(self) -> int:
        v = self._next
        self._next = v + 1
        return v

    def ensure_above(self, n: int) -> None:
        if n >= self._next:
            self._next = n + 1


fresh_id = _IdGen()


class TreeNode:
    """One node of a subject; ``label is None`` marks the hole of a context."""

    __slots__ = ("id", "label", "children", "parent")

    def __init__(self, label: str | None, node_id: int | None = None):
        if node_id is None:
            node_id = fresh_id()
        else:
            fresh_id.ensure_above(node_id)
        self.id = node_id
        self.label = label
        self.children: list[TreeNode] = []
        self.parent: TreeNode | None = None

    @property
    def is_hole(self) -> bool:
        return self.label is None

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"TreeNode({self.label!r}, id={self.id})"


class ForestOrContext:
    """A forest (hole is None) or a context (hole points at its hole leaf)."""

    __slots__ = ("roots", "hole")

    def __init__(self, roots: list[TreeNode], hole: TreeNode | None = None):
        self.roots = roots
        self.hole = hole

    @property
    def is_context(self) -> bool:
        return self.hole is not None

    @property
    def is_tree(self) -> bool:
        return self.hole is None and len(self.roots) == 1

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        kind = "context" if self.is_context else "forest"
        return f"<{kind} roots={len(self.roots)}>"


def empty() -> ForestOrContext:
    return ForestOrContext([])


def box() -> ForestOrContext:
    """The trivial context: a single hole."""
    h = TreeNode(None)
    return ForestOrContext([h], hole=h)


def leaf(label: str, node_id: int | None = None) -> ForestOrContext:
    return ForestOrContext([TreeNode(label, node_id)])


def tree(label: str, children: list[ForestOrContext], node_id: int | None = None) -> ForestOrContext:
    """Single-root subject with the given child forests/contexts in order."""
    root = TreeNode(label, node_id)
    hole = None
    for d in children:
        if d.hole is not None:
            if hole is not None:
                raise KindMismatch("more than one hole")
            hole = d.hole
        for r in d.roots:
            r.parent = root
        root.children.extend(d.roots)
    return ForestOrContext([root], hole=hole)


def concat(d1: ForestOrContext, d2: ForestOrContext) -> ForestOrContext:
    """Horizontal composition; at most one operand may be a context."""
    if d1.hole is not None and d2.hole is not None:
        raise KindMismatch("cannot concatenate two contexts")
    return ForestOrContext(d1.roots + d2.roots, hole=d1.hole or d2.hole)


def apply(c: ForestOrContext, d: ForestOrContext) -> ForestOrContext:
    """Vertical composition: substitute d for the hole of context c."""
    if c.hole is None:
        raise KindMismatch("apply needs a context as first operand")
    h = c.hole
    if h.parent is None:
        i = c.roots.index(h)
        roots = c.roots[:i] + d.roots + c.roots[i + 1 :]
        for r in d.roots:
            r.parent = None
        return ForestOrContext(roots, hole=d.hole)
    p = h.parent
    i = p.children.index(h)
    p.children[i : i + 1] = d.roots
    for r in d.roots:
        r.parent = p
    return ForestOrContext(c.roots, hole=d.hole)


def nodes(d: ForestOrContext):
    """All nodes in document order (preorder, left to right), holes included."""
    stack = list(reversed(d.roots))
    while stack:
        v = stack.pop()
        yield v
        stack.extend(reversed(v.children))


def size(d: ForestOrContext) -> int:
    """Number of labeled nodes (the hole does not count)."""
    return sum(1 for v in nodes(d) if not v.is_hole)


def node_index(d: ForestOrContext) -> dict[int, TreeNode]:
    return {v.id: v for v in nodes(d) if not v.is_hole}


def deep_copy(d: ForestOrContext) -> ForestOrContext:
    """Structural snapshot keeping node ids (holes get fresh ids)."""
    hole = None
    roots: list[TreeNode] = []
    # stack of (original, copied parent or None)
    stack = [(r, None) for r in reversed(d.roots)]
    while stack:
        v, parent = stack.pop()
        c = TreeNode(v.label, v.id if v.label is not None else None)
        if v.label is None:
            hole = c
        c.parent = parent
        if parent is None:
            roots.append(c)
        else:
            parent.children.append(c)
        stack.extend((ch, c) for ch in reversed(v.children))
    return ForestOrContext(roots, hole=hole)


def equal_subjects(a: ForestOrContext, b: ForestOrContext, with_ids: bool = True) -> bool:
    """Structural equality: shapes, labels, hole positions, and (optionally) ids.

    Hole ids are never compared; holes have no stable identity.
    """
    if len(a.roots) != len(b.roots):
        return False
    stack = list(zip(a.roots, b.roots))
    while stack:
        x, y = stack.pop()
        if x.label != y.label:
            return False
        if with_ids and x.label is not None and x.id != y.id:
            return False
        if len(x.children) != len(y.children):
            return False
        stack.extend(zip(x.children, y.children))
    return True


# ---------------------------------------------------------------------------
# Updates


@dataclass(frozen=True)
class TreeUpdate:
    """One local update; ``label`` is None for delete."""

    kind: str  # relab | subdiv | insertL | insertR | delete
    target: int
    label: str | None = None

    KINDS = ("relab", "subdiv", "insertL", "insertR", "delete")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise BadTarget(f"unknown update kind {self.kind!r}")
        needs_label = self.kind != "delete"
        if needs_label and not self.label:
            raise BadTarget(f"{self.kind} needs a label")
        if not needs_label and self.label is not None:
            raise BadTarget("delete takes no label")


def apply_update(
    t: ForestOrContext,
    u: TreeUpdate,
    new_id: int | None = None,
    index: dict[int, TreeNode] | None = None,
) -> TreeNode | None:
    """Apply one update to a tree in place; returns the created node, if any.

    The subject must be a tree (single root, no hole) and stays one: inserting
    siblings of the root and deleting the last node are rejected.  new_id, if
    given, becomes the id of the created node (to mirror an update already
    applied elsewhere).  Callers that maintain their own id index can pass it
    to avoid the full traversal that building one costs.
    """
    if not t.is_tree:
        raise BadTarget("updates apply to trees")
    idx = node_index(t) if index is None else index
    v = idx.get(u.target)
    if v is None:
        raise BadTarget(f"no node with id {u.target}")

    if u.kind == "relab":
        v.label = u.label
        return None

    if u.kind == "subdiv":
        w = TreeNode(u.label, node_id=new_id)
        w.children = v.children
        for c in w.children:
            c.parent = w
        v.children = [w]
        w.parent = v
        return w

    if u.kind in ("insertL", "insertR"):
        if v.parent is None:
            raise BadTarget("cannot insert a sibling of the root")
        w = TreeNode(u.label, node_id=new_id)
        p = v.parent
        i = p.children.index(v)
        if u.kind == "insertR":
            i += 1
        p.children.insert(i, w)
        w.parent = p
        return w

    # delete
    if v.children:
        raise BadTarget("only leaves can be deleted")
    if v.parent is None:
        raise EmptyTree("cannot delete the last node of a tree")
    v.parent.children.remove(v)
    v.parent = None
    return None
