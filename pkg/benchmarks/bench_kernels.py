#!/usr/bin/env python3
"""Benchmark the compiled simulation kernels against the pure-Python ones.

Times one long path of each kernel entry point (single chain, coupled
pair, explicit graph) on both backends, checks that the traces agree bit
for bit, and prints a throughput table.

Usage:
    python benchmarks/bench_kernels.py [--events N] [--repeats K]
"""

from __future__ import annotations

import argparse
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from newswarn import (
    DegreeModel,
    ModelParams,
    StopRule,
    WarningPolicy,
    coupled_simulate,
    load_edge_list,
    network_simulate,
    simulate,
)
from newswarn._backend import get_backend


def _reference_params() -> ModelParams:
    return ModelParams(
        wake_rate=0.1,
        alpha_fake=0.9,
        alpha_real=0.45,
        eta=0.3,
        degree_model=DegreeModel.constant(30),
    )


def _synthetic_graph(n_nodes: int, seed: int):
    """A heavy-tailed directed graph written and re-read through the ingest path."""
    rng = np.random.default_rng(seed)
    out_deg = np.clip(rng.lognormal(2.5, 0.8, size=n_nodes).astype(np.int64), 1, 200)
    src = np.repeat(np.arange(n_nodes, dtype=np.int64), out_deg)
    dst = rng.integers(0, n_nodes, size=src.size, dtype=np.int64)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "edges.txt"
        np.savetxt(path, np.column_stack([src, dst]), fmt="%d")
        return load_edge_list(path)


def _time_call(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def _check_identical(a, b, label: str) -> None:
    for field in ("t", "waker_is_x", "tag_fake", "offspring", "x", "y"):
        if not np.array_equal(getattr(a, field), getattr(b, field)):
            raise AssertionError(f"{label}: backends disagree on field {field!r}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--events", type=int, default=200_000,
                    help="events per benchmark path (default 200000)")
    ap.add_argument("--repeats", type=int, default=3,
                    help="timed repetitions, best is reported (default 3)")
    ap.add_argument("--seed", type=int, default=1729)
    ap.add_argument("--network-nodes", type=int, default=10_000,
                    help="nodes in the synthetic graph (default 10000)")
    args = ap.parse_args(argv)

    try:
        get_backend("compiled")
    except ImportError:
        print("compiled kernels are not built in this install; nothing to compare",
              file=sys.stderr)
        return 1

    params = _reference_params()
    stop = StopRule(max_events=args.events)
    strong = WarningPolicy(w=1.0, b=0.5, epsilon=0.05)
    weak = WarningPolicy(w=0.6, b=1.5, epsilon=0.05)
    graph = _synthetic_graph(args.network_nodes, seed=args.seed + 1)
    init = (4, 96)

    cases = {
        "chain": lambda be: simulate(
            params, strong, stop, seed=args.seed, init=init, backend=be),
        "coupled": lambda be: coupled_simulate(
            params, strong, weak, stop, seed=args.seed, init=init, backend=be),
        "network": lambda be: network_simulate(
            graph, params, strong, stop, seed=args.seed, init=init, backend=be),
    }

    print(f"{args.events} events per path, best of {args.repeats} runs\n")
    print(f"{'kernel':<10} {'compiled':>12} {'python':>12} {'speedup':>9}   events/s (compiled)")
    for name, run in cases.items():
        out_c = run("compiled")
        out_p = run("python")
        if name == "coupled":
            _check_identical(out_c.strong, out_p.strong, name)
            _check_identical(out_c.weak, out_p.weak, name)
        else:
            _check_identical(out_c, out_p, name)
        t_c = _time_call(lambda: run("compiled"), args.repeats)
        t_p = _time_call(lambda: run("python"), args.repeats)
        n_events = out_c.strong.t.size if name == "coupled" else out_c.t.size
        print(f"{name:<10} {t_c * 1e3:>10.1f}ms {t_p * 1e3:>10.1f}ms "
              f"{t_p / t_c:>8.1f}x   {n_events / t_c:>12,.0f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
