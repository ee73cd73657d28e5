"""Deterministic workload generators shared by the CLI and the benchmarks.

Randomness comes from a fixed 64-bit linear congruential generator so that
benchmark inputs are reproducible across runs and languages:

    x_{i+1} = (1664525 * x_i + 1013904223) mod 2^64
"""

from __future__ import annotations

from .automata import Nfsta
from .errors import BadTarget
from .trees import ForestOrContext, TreeNode, TreeUpdate


class Lcg:
    """The documented benchmark generator; not for cryptographic use."""

    __slots__ = ("state",)
    MUL = 1664525
    ADD = 1013904223
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next(self) -> int:
        self.state = (self.MUL * self.state + self.ADD) & self.MASK
        return self.state

    def below(self, n: int) -> int:
        return (self.next() >> 16) % n


def random_tree(g: Lcg, n: int) -> ForestOrContext:
    """Random attachment tree with n nodes labeled a/b, ids 0..n-1."""
    nodes = [TreeNode("a" if g.next() & 1 else "b", node_id=0)]
    for i in range(1, n):
        v = TreeNode("a" if g.next() & 1 else "b", node_id=i)
        p = nodes[g.below(i)]
        v.parent = p
        p.children.append(v)
        nodes.append(v)
    return ForestOrContext([nodes[0]])


def marking_automaton() -> Nfsta:
    """Marks one a-node per run: answers are the markable nodes (k = 1)."""
    return Nfsta(
        states=["u", "m", "q0", "qF"],
        alphabet=["a", "b"],
        init={"a": ["u", "m"], "b": ["u"]},
        delta=[
            ("u", "u", "u"), ("u", "m", "u"), ("m", "u", "m"),
            ("q0", "u", "qF"), ("q0", "m", "qF"),
        ],
        q0="q0",
        qF="qF",
        select=[("m",)],
    )


_KINDS = ("relab", "insertR", "subdiv", "delete")


def bench_update(g: Lcg, step: int, ids: list[int], labels=("a", "b")) -> TreeUpdate:
    """The step-th update of the benchmark stream over the current id list.

    Kinds cycle deterministically; targets are drawn from ids.  Updates that
    are invalid for their target (deleting an inner node, inserting a sibling
    of the root) are applied as relabelings instead, by the driver.
    """
    kind = _KINDS[step % 4]
    target = ids[g.below(len(ids))]
    label = labels[g.next() & 1]
    return TreeUpdate(kind, target, None if kind == "delete" else label)


def apply_bench_update(engine, u: TreeUpdate, ids: list[int], pos: dict[int, int]):
    """Apply u to an engine, falling back to relabeling on invalid targets.

    ids/pos form an O(1)-delete mirror of the current node ids.  Returns the
    update actually applied.
    """
    try:
        new_id = engine.apply_update(u)
    except BadTarget:
        u = TreeUpdate("relab", u.target, "a")
        engine.apply_update(u)
        return u
    if u.kind == "delete":
        last = ids[-1]
        i = pos.pop(u.target)
        if last != u.target:
            ids[i] = last
            pos[last] = i
        ids.pop()
    elif new_id is not None:
        pos[new_id] = len(ids)
        ids.append(new_id)
    return u
