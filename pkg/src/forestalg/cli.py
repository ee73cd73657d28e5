"""Command-line front end.

Subcommands: ``eval`` (acceptance), ``enum`` (answer enumeration, optionally
re-run after each scripted update), ``update-stream`` (incremental acceptance
per update), ``check`` (randomized self-test against the reference oracles),
and ``bench`` (scaling measurements).  Exit codes: 0 ok, 1 usage, 2 parse or
input error, 3 check failure.
"""

from __future__ import annotations

import argparse
import math
import random
import sys
import time

from . import formats, kernels, oracle, trees
from ._workloads import Lcg, apply_bench_update, bench_update, marking_automaton, random_tree
from .automata import Nfsta
from .engine import annotate
from .errors import ForestAlgError, ParseError


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def _read(path: str, what: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _Usage(f"cannot read {what} file: {exc}") from None


def _load(args, need_select=False):
    t = formats.parse_tree(_read(args.tree, "tree"))
    aut = formats.parse_automaton(_read(args.automaton, "automaton"))
    if need_select and (not isinstance(aut, Nfsta) or aut.k < 1):
        raise _Usage("enumeration needs a selecting automaton with k >= 1")
    return t, aut


def _stream_answers(eng, limit):
    sess = eng.enum_start()
    count = 0
    while limit is None or count < limit:
        a = sess.next_answer()
        if a is None:
            break
        print("\t".join(str(v) for v in a))
        count += 1
    print(f"#count {count}")


def cmd_eval(args) -> int:
    t, aut = _load(args)
    eng = annotate(aut, t)
    print("accepted: " + ("true" if eng.is_accepted() else "false"))
    return 0


def cmd_enum(args) -> int:
    t, aut = _load(args, need_select=True)
    eng = annotate(aut, t)
    updates = formats.parse_updates(_read(args.updates, "updates")) if args.updates else []
    _stream_answers(eng, args.limit)
    for u in updates:
        new_id = eng.apply_update(u)
        if new_id is not None:
            print(f"#new {new_id}")
        print("#update applied")
        _stream_answers(eng, args.limit)
    return 0


def cmd_update_stream(args) -> int:
    t, aut = _load(args)
    eng = annotate(aut, t)
    updates = formats.parse_updates(_read(args.updates, "updates"))
    print("accepted: " + ("true" if eng.is_accepted() else "false"))
    for u in updates:
        new_id = eng.apply_update(u)
        if new_id is not None:
            print(f"#new {new_id}")
        print("accepted: " + ("true" if eng.is_accepted() else "false"))
    return 0


# -- randomized self-test ----------------------------------------------------

def _random_instance(rng, max_nodes, max_states):
    n = rng.randint(2, max_nodes)
    labels = [rng.choice("ab") for _ in range(n)]
    kids = [[] for _ in range(n)]
    for i in range(1, n):
        kids[rng.randrange(i)].append(i)

    def build(i):
        return trees.tree(labels[i], [build(j) for j in kids[i]]) if kids[i] else trees.leaf(labels[i])

    t = build(0)
    nq = rng.randint(2, max_states)
    states = [f"s{i}" for i in range(nq)]
    init = {a: [q for q in states if rng.random() < 0.5] for a in "ab"}
    delta = [tr for tr in ((p, s, q) for p in states for s in states for q in states)
             if rng.random() < 0.3]
    k = rng.choice([0, 1, 1, 2])
    sel = [tuple(rng.choice(states) for _ in range(k)) for _ in range(rng.randint(1, 2))]
    aut = Nfsta(states, "ab", init, delta, rng.choice(states), rng.choice(states), sel)
    return t, aut


def _verify(eng, aut, t):
    if eng.is_accepted() != oracle.oracle_eval(aut, t):
        return "acceptance disagrees with the oracle"
    got = list(eng.enum_start())
    want = oracle.oracle_select(aut, t)
    if set(got) != want:
        return f"answer set mismatch: engine {sorted(got)} oracle {sorted(want)}"
    if len(got) != len(set(got)):
        return "duplicate answers"
    pos = {vid: i for i, vid in enumerate(eng.leaf_order())}
    keys = [tuple(pos[v] for v in a) for a in got]
    if keys != sorted(keys):
        return "answers out of order"
    problems = eng.f.audit_invariants() + eng.audit_elements()
    if problems:
        return "; ".join(problems)
    return None


def _one_update(rng, t):
    ids = [v.id for v in trees.nodes(t)]
    non_roots = [v.id for v in trees.nodes(t) if v.parent is not None]
    leaves = [v.id for v in trees.nodes(t)
              if not v.children and v.parent is not None]
    kinds = ["relab", "subdiv"] + (["insertL", "insertR"] if non_roots else [])
    if leaves and len(ids) > 2:
        kinds.append("delete")
    kind = rng.choice(kinds)
    if kind == "delete":
        return trees.TreeUpdate("delete", rng.choice(leaves))
    if kind in ("insertL", "insertR"):
        return trees.TreeUpdate(kind, rng.choice(non_roots), rng.choice("ab"))
    return trees.TreeUpdate(kind, rng.choice(ids), rng.choice("ab"))


def _dump_failure(trial, step, msg, t0, aut, updates):
    print(f"check failed at trial {trial}, update step {step}: {msg}", file=sys.stderr)
    print("--- tree ---", file=sys.stderr)
    print(formats.format_tree(t0), end="", file=sys.stderr)
    print("--- automaton ---", file=sys.stderr)
    print(formats.format_automaton(aut), end="", file=sys.stderr)
    print("--- updates applied before the failure ---", file=sys.stderr)
    for u in updates:
        print(formats.format_update(u), file=sys.stderr)


def cmd_check(args) -> int:
    rng = random.Random(args.seed)
    n_steps = 3
    for trial in range(args.trials):
        t0, aut = _random_instance(rng, args.max_nodes, args.max_states)
        t = trees.deep_copy(t0)
        applied = []
        try:
            eng = annotate(aut, trees.deep_copy(t0))
            for step in range(n_steps + 1):
                msg = _verify(eng, aut, t)
                if msg is not None:
                    _dump_failure(trial, step, msg, t0, aut, applied)
                    return 3
                if step == n_steps:
                    break
                u = _one_update(rng, t)
                new_id = eng.apply_update(u)
                trees.apply_update(t, u, new_id=new_id)
                applied.append(u)
        except oracle.TooLarge as exc:
            print(f"check aborted at trial {trial}: {exc} "
                  f"(max_nodes={args.max_nodes}, max_states={args.max_states})",
                  file=sys.stderr)
            return 3
    print(f"ok: {args.trials} trials")
    return 0


# -- benchmark ---------------------------------------------------------------

def _percentile(samples, frac):
    ordered = sorted(samples)
    return ordered[min(len(ordered) - 1, int(frac * len(ordered)))]


def _bench_one(n: int, seed: int, n_updates: int, n_answers: int):
    g = Lcg(seed ^ n)
    t = random_tree(g, n)
    aut = marking_automaton()
    t0 = time.perf_counter_ns()
    eng = annotate(aut, t)
    build_ns = time.perf_counter_ns() - t0
    del t
    ids = eng.node_ids()
    pos = {vid: i for i, vid in enumerate(ids)}
    upd = []
    for step in range(n_updates):
        u = bench_update(g, step, ids)
        t0 = time.perf_counter_ns()
        apply_bench_update(eng, u, ids, pos)
        upd.append(time.perf_counter_ns() - t0)
    delays = []
    sess = eng.enum_start()
    while len(delays) < n_answers:
        t0 = time.perf_counter_ns()
        a = sess.next_answer()
        delays.append(time.perf_counter_ns() - t0)
        if a is None:
            delays.pop()
            break
    mean_upd = sum(upd) / len(upd) if upd else 0.0
    mean_delay = sum(delays) / len(delays) if delays else 0.0
    n_cur = len(ids)
    row = (f"{n},{build_ns},{mean_upd:.0f},{mean_delay:.0f},"
           f"{eng.f.root.height},{10 * math.log2(n_cur):.2f}")
    extra = (f"# n={n} n_current={n_cur} answers={len(delays)} "
             f"update_p95_ns={_percentile(upd, 0.95) if upd else 0} "
             f"delay_p95_ns={_percentile(delays, 0.95) if delays else 0}")
    return row, extra


def cmd_bench(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s]
    except ValueError:
        raise _Usage("sizes must be a comma-separated list of integers") from None
    if not sizes or sizes != sorted(sizes):
        raise _Usage("sizes must be ascending")
    backends = [kernels.BACKEND] if args.kernels is None else (
        ["py", "c"] if args.kernels == "both" else [args.kernels])
    old = kernels.BACKEND
    try:
        for backend in backends:
            kernels.set_backend(backend)
            print(f"# backend {backend}")
            print("n,build_ns,update_ns,delay_ns,height,bound10log2")
            for n in sizes:
                row, extra = _bench_one(n, args.seed, args.updates, args.answers)
                print(row)
                print(extra, file=sys.stderr)
    finally:
        kernels.set_backend(old)
    return 0


# -- entry point -------------------------------------------------------------

def _build_parser() -> _Parser:
    p = _Parser(prog="forestalg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--tree", required=True, help="tree file")
        sp.add_argument("--automaton", required=True, help="automaton file")

    sp = sub.add_parser("eval", help="print whether the tree is accepted")
    common(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("enum", help="enumerate answer tuples")
    common(sp)
    sp.add_argument("--updates", help="update script; re-enumerates after each update")
    sp.add_argument("--limit", type=int, help="print at most this many answers per pass")
    sp.set_defaults(func=cmd_enum)

    sp = sub.add_parser("update-stream", help="re-evaluate acceptance after each update")
    common(sp)
    sp.add_argument("--updates", required=True, help="update script")
    sp.set_defaults(func=cmd_update_stream)

    sp = sub.add_parser("check", help="randomized self-test against the oracles")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--max-nodes", type=int, default=24)
    sp.add_argument("--max-states", type=int, default=4)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("bench", help="measure build/update/delay scaling")
    sp.add_argument("--sizes", default=",".join(str(1 << k) for k in range(10, 21)))
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--updates", type=int, default=1000)
    sp.add_argument("--answers", type=int, default=1000)
    sp.add_argument("--kernels", choices=["py", "c", "both"],
                    help="kernel backend (default: the active one)")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except ForestAlgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
