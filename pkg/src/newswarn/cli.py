"""Command line front end.

Subcommands: ``solve`` (limit fractions), ``simulate`` (Monte Carlo),
``optimize`` (policy design), ``ode`` (mean-field flow), ``couple``
(shared-randomness policy comparison), ``ingest`` (edge-list graphs).
Results are printed as JSON (or written with --out); exit codes are 0 on
success, 2 for input/validation errors, 3 for infeasible design budgets,
4 for runtime invariant violations.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from ._backend import backend_name
from .errors import (
    ConstraintViolation,
    CurveUndefinedError,
    DegenerateSensitivityError,
    InfeasibleError,
    InputError,
    InvariantViolation,
    RegimeViolation,
    UnsupportedConfiguration,
)
from .fixed_point import limit_summary, performance
from .network import (
    degree_stats,
    load_cache,
    load_edge_list,
    network_simulate,
    save_cache,
    subsample,
)
from .ode import attractor_sweep, integrate
from .optimizer import DesignProblem, feasibility, optimize, sweep
from .params import ScenarioPair, load_scenario, parse_overrides, validate_regime
from .simulate import StopRule, monte_carlo, simulate
from .network import SocialGraph

DEFAULT_SEED = 1729
_CACHE_MAGIC = b"NWSGRAPH"

_INPUT_ERRORS = (
    InputError,
    RegimeViolation,
    ConstraintViolation,
    CurveUndefinedError,
    DegenerateSensitivityError,
    UnsupportedConfiguration,
)


def _emit(payload: dict, out_path=None) -> None:
    text = json.dumps(payload, indent=2)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _load(args):
    overrides = parse_overrides(args.set or [])
    return load_scenario(args.scenario, overrides)


def _resolve_news(loaded, which: str):
    if isinstance(loaded, ScenarioPair):
        params = loaded.fake if which == "fake" else loaded.real
        return params, loaded.policy
    params, policy = loaded
    return params, policy


def _parse_init(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise InputError(f"--init must be 'X,Y', got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise InputError(f"--init must contain two integers, got {text!r}") from None


def _load_graph(path) -> SocialGraph:
    with open(path, "rb") as fh:
        head = fh.read(len(_CACHE_MAGIC))
    if head == _CACHE_MAGIC:
        return load_cache(path)
    return load_edge_list(path)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    loaded = _load(args)
    if isinstance(loaded, ScenarioPair):
        validate_regime(loaded, strict=not args.lax)
        perf = performance(loaded)
        payload = {
            "fake": limit_summary(loaded.fake, loaded.policy).as_dict(),
            "real": limit_summary(loaded.real, loaded.policy).as_dict(),
            "psi1": perf.psi1,
            "psi2": perf.psi2,
        }
    else:
        params, policy = loaded
        payload = limit_summary(params, policy).as_dict()
    _emit(payload, args.out)
    return 0


def cmd_simulate(args) -> int:
    loaded = _load(args)
    params, policy = _resolve_news(loaded, args.news)
    events = args.events
    if events is None and args.horizon is None:
        events = 100_000
    stop = StopRule(max_events=events, horizon=args.horizon)
    init = _parse_init(args.init)
    graph = _load_graph(args.graph) if args.graph else None
    prediction = limit_summary(params, policy)

    if args.paths == 1:
        if graph is None:
            trace = simulate(params, policy, stop, args.seed, init=init,
                             backend=args.backend)
        else:
            trace = network_simulate(graph, params, policy, stop, args.seed,
                                     init=init, backend=args.backend)
        if args.trace_out:
            trace.to_csv(args.trace_out)
        payload = {
            "mode": trace.mode,
            "backend": backend_name() if args.backend in (None, "auto") else args.backend,
            "n_events": trace.n_events,
            "survived": trace.survived,
            "extinction_epoch": trace.extinction_epoch,
            "final_time": float(trace.t[-1]),
            "terminal_beta": trace.terminal_beta,
            "terminal_psi": trace.terminal_psi,
            "x_final": int(trace.x[-1]),
            "y_final": int(trace.y[-1]),
            "seed": list(trace.seed[:1]) + [list(trace.seed[1])],
            "prediction": prediction.as_dict(),
        }
    else:
        if args.trace_out:
            raise InputError("--trace-out requires --paths 1")
        summary = monte_carlo(params, policy, args.paths, stop, args.seed,
                              init=init, graph=graph, backend=args.backend)
        payload = summary.as_dict()
        payload["prediction"] = prediction.as_dict()
    _emit(payload, args.out)
    return 0


def cmd_optimize(args) -> int:
    loaded = _load(args)
    if not isinstance(loaded, ScenarioPair):
        raise InputError("optimize needs a scenario with fake.* and real.* sections")

    if args.budget_range:
        try:
            lo, hi, step = (float(v) for v in args.budget_range.split(":"))
        except ValueError:
            raise InputError(
                f"--budget-range must be 'lo:hi:step', got {args.budget_range!r}"
            ) from None
        rows = []
        for c in np.arange(lo, hi + step / 2, step):
            try:
                problem = DesignProblem(loaded, float(c))
                result = optimize(problem, w0=args.w0)
            except InfeasibleError as exc:
                print(f"budget {c:.6g} infeasible: {exc}", file=sys.stderr)
                continue
            rows.append([f"{c:.10g}", f"{result.w_star:.10g}",
                         f"{result.b_star:.10g}", f"{result.psi1:.10g}"])
        if args.out:
            _write_csv(args.out, ["budget", "w_star", "b_star", "psi1"], rows)
        else:
            print("budget,w_star,b_star,psi1")
            for row in rows:
                print(",".join(row))
        return 0

    if args.budget is None:
        raise InputError("optimize needs --budget or --budget-range")
    problem = DesignProblem(loaded, args.budget)
    report = feasibility(problem)
    result = optimize(problem, w0=args.w0)
    if args.sweep_out:
        points = sweep(problem, n_points=args.sweep_points)
        _write_csv(
            args.sweep_out,
            ["w", "b", "psi1", "psi2", "baseline"],
            [[p.w, "" if p.b is None else p.b, p.psi1, p.psi2, int(p.baseline)]
             for p in points],
        )
    payload = result.as_dict()
    payload["feasible_psi2_range"] = [report.psi2_low, report.psi2_high]
    _emit(payload, args.out)
    return 0


def cmd_ode(args) -> int:
    loaded = _load(args)
    params, policy = _resolve_news(loaded, args.news)
    limits = limit_summary(params, policy)

    if args.sweep_delta is not None:
        report = attractor_sweep(params, policy, delta=args.sweep_delta,
                                 grid_n=args.sweep_grid, horizon=args.horizon,
                                 step=args.step)
        _emit({
            "all_converged": report.all_converged,
            "max_terminal_distance": report.max_terminal_distance,
            "tolerance": report.tolerance,
            "n_failures": len(report.failures),
            "attractor": {"psi_star": limits.psi_star, "theta_star": limits.theta_star},
        }, args.out)
        return 0

    if args.psi0 is None:
        raise InputError("ode needs --psi0 (with --beta0 or --theta0), or --sweep-delta")
    if (args.beta0 is None) == (args.theta0 is None):
        raise InputError("give exactly one of --beta0 or --theta0")
    theta0 = args.theta0 if args.theta0 is not None else args.beta0 * args.psi0
    traj = integrate((args.psi0, theta0), params, policy,
                     horizon=args.horizon, step=args.step)
    if args.trace_out:
        _write_csv(
            args.trace_out,
            ["t", "psi", "theta", "beta"],
            zip(traj.t, traj.psi, traj.theta, traj.beta),
        )
    final = traj.final
    _emit({
        "final": {"t": final.t, "psi": final.psi, "theta": final.theta,
                  "beta": float(traj.beta[-1])},
        "absorbed": traj.absorbed,
        "attractor": {"psi_star": limits.psi_star, "theta_star": limits.theta_star,
                      "beta_star": limits.beta_star},
        "distance": max(abs(final.psi - limits.psi_star),
                        abs(final.theta - limits.theta_star)),
    }, args.out)
    return 0


def cmd_couple(args) -> int:
    loaded = _load(args)
    params, policy = _resolve_news(loaded, args.news)
    from .params import WarningPolicy
    from .simulate import coupled_simulate

    strong = WarningPolicy(w=args.w1, b=args.b1, epsilon=policy.epsilon)
    weak = WarningPolicy(w=args.w2, b=args.b2, epsilon=policy.epsilon)
    events = args.events
    if events is None and args.horizon is None:
        events = 10_000
    stop = StopRule(max_events=events, horizon=args.horizon)
    pair = coupled_simulate(params, strong, weak, stop, args.seed,
                            init=_parse_init(args.init), backend=args.backend)
    _emit({
        "n_events": pair.strong.n_events,
        "survived": pair.strong.survived,
        "strong": {"w": strong.w, "b": strong.b,
                   "terminal_beta": pair.strong.terminal_beta,
                   "x_final": int(pair.strong.x[-1])},
        "weak": {"w": weak.w, "b": weak.b,
                 "terminal_beta": pair.weak.terminal_beta,
                 "x_final": int(pair.weak.x[-1])},
        "dominance": "held",
    }, args.out)
    return 0


def cmd_ingest(args) -> int:
    graph = _load_graph(args.edges)
    if args.subsample:
        graph = subsample(graph, args.subsample, args.seed)
    stats = degree_stats(graph)
    if args.cache_out:
        save_cache(graph, args.cache_out)
    payload = stats.as_dict()
    payload.update({
        "input_edges": graph.input_edges,
        "dropped_self_loops": graph.dropped_self_loops,
        "dropped_duplicates": graph.dropped_duplicates,
    })
    _emit(payload, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newswarn",
        description="Simulate and design warning-controlled news propagation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario file (key=value or JSON)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a scenario key (repeatable)")
        p.add_argument("--out", help="write JSON/CSV output here instead of stdout")

    p = sub.add_parser("solve", help="limit fractions and design metrics")
    common(p)
    p.add_argument("--lax", action="store_true",
                   help="downgrade regime violations to warnings")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="simulate event chains")
    common(p)
    p.add_argument("--news", choices=["fake", "real"], default="fake")
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--events", type=int, default=None,
                   help="event budget (default 100000 when no horizon)")
    p.add_argument("--horizon", type=float, default=None, help="time horizon")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--init", default="0,1", metavar="X,Y",
                   help="initial fake-tagged,real-tagged counts")
    p.add_argument("--graph", help="edge list or cache: run on this graph")
    p.add_argument("--backend", choices=["auto", "compiled", "python"], default="auto")
    p.add_argument("--trace-out", help="write the event trace CSV (single path only)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="design the warning policy")
    common(p)
    p.add_argument("--budget", type=float, help="false-alarm budget")
    p.add_argument("--budget-range", metavar="LO:HI:STEP",
                   help="optimal metric curve over budgets (CSV)")
    p.add_argument("--w0", type=float, default=None, help="descent start weight")
    p.add_argument("--sweep-out", help="write the constraint-curve sweep CSV")
    p.add_argument("--sweep-points", type=int, default=50)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("ode", help="mean-field flow of the per-event averages")
    common(p)
    p.add_argument("--news", choices=["fake", "real"], default="fake")
    p.add_argument("--psi0", type=float, default=None)
    p.add_argument("--theta0", type=float, default=None)
    p.add_argument("--beta0", type=float, default=None)
    p.add_argument("--horizon", type=float, default=50.0)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--sweep-delta", type=float, default=None,
                   help="run an attractor sweep with this lattice half-width")
    p.add_argument("--sweep-grid", type=int, default=10)
    p.add_argument("--trace-out", help="write the trajectory CSV")
    p.set_defaults(func=cmd_ode)

    p = sub.add_parser("couple", help="compare two policies on one randomness source")
    common(p)
    p.add_argument("--news", choices=["fake", "real"], default="fake")
    p.add_argument("--w1", type=float, required=True, help="strong policy weight")
    p.add_argument("--b1", type=float, required=True, help="strong policy ramp")
    p.add_argument("--w2", type=float, required=True, help="weak policy weight")
    p.add_argument("--b2", type=float, required=True, help="weak policy ramp")
    p.add_argument("--events", type=int, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--init", default="0,1", metavar="X,Y")
    p.add_argument("--backend", choices=["auto", "compiled", "python"], default="auto")
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("ingest", help="parse, cache, and summarize a social graph")
    p.add_argument("--edges", required=True, help="edge list or cache file")
    p.add_argument("--out", help="write the stats JSON here")
    p.add_argument("--cache-out", help="write a binary adjacency cache")
    p.add_argument("--subsample", type=int, default=None, metavar="K",
                   help="uniform node-induced subgraph with K nodes")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_ingest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
