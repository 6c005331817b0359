"""Command-line entry point: ``qutritghz <command> [options]``.

Exit status: 0 success, 2 invalid configuration, 3 numerical failure,
4 output could not be written. Reports are JSON; ``--csv PATH``
additionally writes the per-setting table. When ``--output`` is omitted
and ``QUTRITGHZ_OUTPUT_DIR`` is set, the report goes to
``$QUTRITGHZ_OUTPUT_DIR/<command>.json``; otherwise to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from qutritghz import __version__, bell, optics, stats, witness
from qutritghz.measurement import probability_table, sample_counts, split_shots
from qutritghz.qudit import DensityMatrix, fidelity_with_pure
from qutritghz.seesaw import SeesawConfig, seesaw_optimize
from qutritghz.states import damped_ghz, ghz_state

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_OUTPUT = 4
OUTPUT_ENV = "QUTRITGHZ_OUTPUT_DIR"
MAX_TOTAL_DIM = 81


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _build_state(args, n: int, d: int):
    """State for witness/bell runs: isotropic GHZ, damped GHZ, or the optics output."""
    _require(n >= 2 and d >= 2, "need n >= 2 and d >= 2")
    _require(d**n <= MAX_TOTAL_DIM, f"total dimension {d**n} exceeds {MAX_TOTAL_DIM}")
    _require(0 <= args.visibility <= 1, "visibility must lie in [0, 1]")
    if getattr(args, "overlaps", None):
        s = _floats(args.overlaps)
        _require(len(s) == 3, "--overlaps takes s_bc,s_bd,s_cd")
        _require(d == 3 and n in (3, 4), "optics states exist for n = 3 (triggered) or 4, d = 3")
        res = optics.simulate_postselected(overlaps=optics.PhotonOverlap.from_triple(*s))
        state = res.state
        if n == 3:
            state, _ = optics.trigger_to_three(state)
    elif getattr(args, "damping", None):
        vals = _floats(args.damping)
        _require(len(vals) == d * (d - 1) // 2, f"--damping needs {d * (d - 1) // 2} values (upper triangle)")
        lam = np.eye(d)
        lam[np.triu_indices(d, 1)] = vals
        lam = lam + np.triu(lam, 1).T
        state = damped_ghz(n, d, lam)
    else:
        state = ghz_state(n, d).projector()
    if args.visibility < 1:
        # isotropic noise on top of whichever state was built
        total = d**n
        v = args.visibility
        state = DensityMatrix(state.dims, v * state.matrix + (1 - v) * np.eye(total) / total)
    return state


def _sample(args, pt):
    _require(args.seed is not None, "--seed is required when sampling counts")
    _require(args.shots_total > 0, "--shots-total must be positive")
    return sample_counts(pt, split_shots(pt.settings(), args.shots_total), args.seed)


def cmd_witness(args) -> dict:
    n, d = args.n, args.d
    if args.critical_visibility:
        v = witness.critical_visibility_witness(n, d)
        return {"n": n, "d": d, "critical_visibility": v, "threshold": witness.WITNESS_THRESHOLD}
    state = _build_state(args, n, d)
    pt = probability_table(state, witness.witness_settings(n))
    report = {
        "ghz_fidelity": fidelity_with_pure(state, ghz_state(n, d)),
        "biseparable_fidelity_bound": witness.BISEPARABLE_FIDELITY,
    }
    exact = witness.witness_W(state, n, d)
    report["exact"] = exact.to_dict()
    if args.shots_total and not args.exact:
        counts = _sample(args, pt)
        result = witness.witness_from_counts(counts)
        est = stats.stderr_witness(counts)
        query = stats.PValueQuery(min(result.W, 2.0), witness.WITNESS_THRESHOLD, 2.0, est.n)
        report["estimate"] = result.to_dict()
        report["stderr"] = est.stderr
        report["p_value"] = query.report(sigma=est.stderr if est.stderr > 0 else None)
        report["_table"] = counts
    else:
        report["_table"] = pt
    return report


def _functional(args) -> bell.BellFunctional:
    if args.functional in (None, "default"):
        return bell.default_functional()
    try:
        return bell.load_functional(args.functional)
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_bell(args) -> dict:
    f = _functional(args)
    chain = f.bounds or bell.BoundChain(bell.REFERENCE_LHV, dict(bell.REFERENCE_DIM_BOUNDS), 9.0)
    state = _build_state(args, f.n, f.scenario.k)
    pt = bell.bell_table(state, f)
    report = {"exact_value": bell.bell_value(f, pt), "chain": chain.to_dict()}
    value = report["exact_value"]
    if args.shots_total and not args.exact:
        counts = _sample(args, pt)
        est = stats.stderr_bell(f, counts)
        value = est.value
        report.update(estimate=est.value, stderr=est.stderr, N=est.n)
        report["p_values"] = {
            name: stats.PValueQuery(min(value, chain.algebraic_max), b, chain.algebraic_max, est.n).report(
                sigma=est.stderr if est.stderr > 0 else None
            )
            for name, b in chain.tiers()
        }
        report["_table"] = counts
    else:
        report["_table"] = pt
    report["value"] = value
    report["tier"] = bell.classify_violation(value, chain)
    return report


def cmd_seesaw(args) -> dict:
    f = _functional(args)
    dims = tuple(_ints(args.dims))
    _require(len(dims) == f.n and min(dims) >= 2, f"--dims needs {f.n} entries >= 2")
    cfg = SeesawConfig(
        restarts=args.restarts, max_sweeps=args.max_sweeps, tol=args.tol, seed=args.seed, workers=args.workers
    )
    res = seesaw_optimize(f, dims, cfg)
    out = res.to_dict()
    key = tuple(sorted(dims))
    if f.bounds is not None and key in f.bounds.dim_bounds:
        ref = f.bounds.dim_bounds[key]
        out["reference_bound"] = ref
        out["difference"] = res.best_value - ref
    return out


def cmd_lhv(args) -> dict:
    f = _functional(args)
    value, strategy = bell.lhv_max_bruteforce(f, workers=args.workers)
    return {"lhv_max": value, "strategy": [list(s) for s in strategy]}


def cmd_pvalue(args) -> dict:
    query = stats.PValueQuery(args.observed, args.bound, args.scale, args.counts)
    return query.report(sigma=args.sigma)


def cmd_optics(args) -> dict:
    if args.config:
        kwargs = optics.load_circuit(Path(args.config).read_text())
    else:
        overlaps = optics.PhotonOverlap.from_triple(*_floats(args.overlaps)) if args.overlaps else None
        kwargs = {"overlaps": overlaps, "trigger": args.trigger}
        if args.phases:
            kwargs["phases"] = _floats(args.phases)
    if args.trigger:
        kwargs["trigger"] = True
    return optics.run_circuit(**kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qutritghz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output", help="write the JSON report here")
        p.add_argument("--csv", help="also write the per-setting table as CSV")
        return p

    def state_opts(p):
        p.add_argument("--visibility", type=float, default=1.0)
        p.add_argument("--damping", help="branch damping factors, upper triangle, comma separated")
        p.add_argument("--overlaps", help="optics state from overlaps s_bc,s_bd,s_cd")
        p.add_argument("--shots-total", type=int, default=0)
        p.add_argument("--seed", type=int)
        p.add_argument("--exact", action="store_true", help="skip sampling")

    p = common(sub.add_parser("witness", help="two-basis GHZ witness"))
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--critical-visibility", action="store_true")
    state_opts(p)
    p.set_defaults(func=cmd_witness)

    p = common(sub.add_parser("bell", help="Bell value and violation tier"))
    p.add_argument("--functional", default="default")
    state_opts(p)
    p.set_defaults(func=cmd_bell)

    p = common(sub.add_parser("seesaw", help="dimension-restricted see-saw lower bound"))
    p.add_argument("--functional", default="default")
    p.add_argument("--dims", required=True)
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--max-sweeps", type=int, default=300)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_seesaw)

    p = common(sub.add_parser("lhv", help="exact local-hidden-variable bound"))
    p.add_argument("--functional", default="default")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_lhv)

    p = common(sub.add_parser("pvalue", help="Chernoff p-value"))
    p.add_argument("--observed", type=float, required=True)
    p.add_argument("--bound", type=float, required=True)
    p.add_argument("--scale", type=float, required=True)
    p.add_argument("--counts", type=int, required=True)
    p.add_argument("--sigma", type=float)
    p.set_defaults(func=cmd_pvalue)

    p = common(sub.add_parser("optics", help="path-identity circuit simulation"))
    p.add_argument("--overlaps", help="s_bc,s_bd,s_cd")
    p.add_argument("--phases", help="one phase per surviving branch")
    p.add_argument("--trigger", action="store_true")
    p.add_argument("--config", help="JSON circuit description")
    p.set_defaults(func=cmd_optics)
    return parser


def _manifest(args, elapsed: float) -> dict:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    return {
        "command": args.command,
        "config": config,
        "seed": config.get("seed"),
        "versions": {
            "qutritghz": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "wall_time_s": elapsed,
    }


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    start = time.perf_counter()
    try:
        report = args.func(args)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    table = report.pop("_table", None)
    report["manifest"] = _manifest(args, time.perf_counter() - start)
    text = json.dumps(report, indent=2, default=_json_default)
    out = args.output
    if out is None and os.environ.get(OUTPUT_ENV):
        out = str(Path(os.environ[OUTPUT_ENV]) / f"{args.command}.json")
    try:
        if out:
            Path(out).write_text(text + "\n")
        else:
            print(text)
        if args.csv:
            if table is None:
                raise ConfigError(f"command {args.command!r} has no table to write")
            Path(args.csv).write_text(table.to_csv())
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
