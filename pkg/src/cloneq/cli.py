"""Command-line entry point: ``cloneq <command> [options]``.

Exit codes: 0 success, 1 input error, 2 basis search did not converge,
3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from .ensembles import eigenstate_ensemble, ensemble_from_bases, is_prime, load_observable_set, mub_bases
from .errors import CloneqError, ConvergenceWarning
from .optimal import (
    SWEEP_COLUMNS,
    BasisOptConfig,
    fopt_mub,
    mr_fidelity_bounds,
    optimal_cloning_fidelity,
    qc_upper_bound,
    sweep,
)
from .qubit import BlochPair, qubit_optimal_cloner
from .verify import run_checks

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_VERIFY = 0, 1, 2, 3


class InputError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.12g}"


def _round(obj):
    """Round every float in a JSON-able structure to 12 significant digits."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def worker_count() -> int:
    raw = os.environ.get("CLONEQ_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise InputError(f"CLONEQ_THREADS={raw!r} is not an integer")
    return os.cpu_count() or 1


def parse_int_list(text: str, primes_only_in_ranges: bool = False) -> list[int]:
    """``"2,3,5"``, ``"7"`` or an inclusive range ``"2..11"``."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split("..", 1))
            vals = list(range(lo, hi + 1))
            return [v for v in vals if is_prime(v)] if primes_only_in_ranges else vals
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot parse integer list {text!r}")


def parse_vector(text: str, name: str, normalise: bool) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise InputError(f"{name}: expected three comma-separated reals, got {text!r}")
    if v.shape != (3,):
        raise InputError(f"{name}: expected three components, got {v.size}")
    if normalise:
        n = np.linalg.norm(v)
        if n == 0:
            raise InputError(f"{name} is the zero vector")
        v = v / n
    return v


def _config(args) -> BasisOptConfig:
    return BasisOptConfig(restarts=args.restarts, seed=args.seed, workers=worker_count())


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _table(rows: list[tuple[str, object]]) -> str:
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k:<{width}}  {fmt(v) if not isinstance(v, str) else v}\n" for k, v in rows)


def cmd_compute(args) -> int:
    if not args.input:
        raise InputError("compute needs --input")
    try:
        obs = load_observable_set(args.input, tol=args.tol)
    except FileNotFoundError:
        raise InputError(f"{args.input}: no such file")
    except ValueError as exc:
        raise InputError(f"{args.input}: {exc}")
    ens = eigenstate_ensemble(obs, tol=args.tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        rep = optimal_cloning_fidelity(ens, _config(args))
    diag = rep.diagnostics
    sys.stdout.write(_table([
        ("N", rep.N), ("d", rep.d), ("A_opt", rep.A_opt), ("q_opt", rep.params_opt.q),
        ("p_opt", rep.params_opt.p), ("F_opt", rep.F_opt), ("Q_c", rep.Q_c), ("G", rep.G),
        ("bound_Qc", rep.bound_Qc), ("bound_Q", rep.bound_Q), ("q_branch", diag["q_branch"]),
        ("best_start", diag["best_start"]), ("converged", str(diag["converged"]).lower()),
        ("restarts_converged", sum(r["converged"] for r in diag["restarts"])),
    ]))
    text = json.dumps(_round(rep.to_dict()), indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write("\n" + text)
    if not rep.converged:
        print("warning: basis search did not converge; values are best found", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_qubit(args) -> int:
    if not args.bloch_a or not args.bloch_b:
        raise InputError("qubit needs --bloch-a and --bloch-b")
    a = parse_vector(args.bloch_a, "--bloch-a", args.normalize)
    b = parse_vector(args.bloch_b, "--bloch-b", args.normalize)
    try:
        pair = BlochPair(a, b)
    except CloneqError as exc:
        raise InputError(f"{exc} (pass --normalize to rescale)")
    sol = qubit_optimal_cloner(pair)

    def vec(v):
        return "none" if v is None else ",".join(fmt(x) for x in v)

    rows = [
        ("a.b", pair.overlap), ("A_opt", sol.A_opt), ("G", sol.G), ("q_opt", sol.q_opt),
        ("p_opt", sol.p_opt), ("F_opt", sol.F_opt), ("Q_c", sol.Q_c),
        ("r_plus", vec(sol.r_plus)), ("r_minus", vec(sol.r_minus)), ("r_opt", vec(sol.r_opt)),
        ("degenerate_direction", str(sol.degenerate_direction).lower()),
    ]
    code = EXIT_OK
    if args.check:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            rep = optimal_cloning_fidelity(eigenstate_ensemble(pair.observables()), _config(args))
        rows += [("pipeline_Q_c", rep.Q_c), ("pipeline_deviation", abs(rep.Q_c - sol.Q_c))]
        if not rep.converged:
            code = EXIT_CONVERGENCE
    _emit(_table(rows), args.output)
    return code


def cmd_mub(args) -> int:
    d = args.d if args.d is not None else 2
    n = args.n if args.n is not None else 2
    if d < 2 or n < 1:
        raise InputError("need d >= 2 and n >= 1")
    if n > d + 1:
        raise InputError(f"at most d+1={d + 1} MUBs exist in dimension {d}")
    f, q = fopt_mub(n, d)
    f_mr, q_bound = mr_fidelity_bounds(n, d)
    rows = [("N", n), ("d", d), ("A_opt", n + d - 1), ("q_opt", q), ("F_opt", f), ("Q_c", 1 - f),
            ("bound_Qc", qc_upper_bound(n, d)), ("F_mr", f_mr), ("Q_bound", q_bound)]
    code = EXIT_OK
    if args.construct:
        if not is_prime(d):
            raise InputError(f"d={d} is not prime; MUB construction needs prime d")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            rep = optimal_cloning_fidelity(ensemble_from_bases(mub_bases(d, n)), _config(args))
        rows += [("pipeline_A_opt", rep.A_opt), ("pipeline_F_opt", rep.F_opt),
                 ("pipeline_deviation", abs(rep.F_opt - f))]
        if not rep.converged:
            code = EXIT_CONVERGENCE
    _emit(_table(rows), args.output)
    return code


def _write_csv(rows: list[dict], path: str | None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([fmt(r[c]) for c in SWEEP_COLUMNS])
    _emit(buf.getvalue(), path)


def _run_sweep(mode, values, fixed, args) -> int:
    if args.construct:
        ds = values if mode == "vary_d" else [fixed]
        bad = [d for d in ds if not is_prime(d)]
        if bad:
            raise InputError(f"non-prime d {bad}: MUB construction needs prime d")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        rows = sweep(mode, values, fixed, construct=args.construct, cfg=_config(args))
    _write_csv(rows, args.output)
    return EXIT_OK


def cmd_sweep_d(args) -> int:
    n = args.n if args.n is not None else "2"
    try:
        n = int(n)
    except ValueError:
        raise InputError("--n must be a single integer for sweep-d")
    ds = parse_int_list(args.d if args.d is not None else "2..11", primes_only_in_ranges=True)
    if not ds or min(ds) < 2:
        raise InputError("dimensions must be >= 2")
    too_big = [d for d in ds if n > d + 1]
    if too_big:
        raise InputError(f"N={n} exceeds d+1 for d in {too_big}")
    return _run_sweep("vary_d", ds, n, args)


def cmd_sweep_n(args) -> int:
    try:
        d = int(args.d) if args.d is not None else 11
    except ValueError:
        raise InputError("--d must be a single integer for sweep-n")
    if d < 2:
        raise InputError("d must be >= 2")
    n_text = args.n if args.n is not None else str(d + 1)
    ns = parse_int_list(n_text) if (".." in n_text or "," in n_text) else list(range(2, int(n_text) + 1))
    if not ns or min(ns) < 1:
        raise InputError("N values must be >= 1")
    if max(ns) > d + 1:
        raise InputError(f"at most d+1={d + 1} MUBs exist in dimension {d}")
    return _run_sweep("vary_N", ns, d, args)


def cmd_verify(args) -> int:
    results = run_checks(args.level, seed=args.seed)
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{status}  {r.name:<{width}}  deviation={r.deviation:.3e}  "
                     f"tol={r.tolerance:.1e}  ({r.seconds:.2f}s)\n")
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed\n")
    _emit("".join(lines), args.output)
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="write the result here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for random restarts")
    common.add_argument("--restarts", type=int, default=32, help="Haar-random restarts")
    common.add_argument("--tol", type=float, default=1e-9, help="Hermiticity tolerance")

    parser = argparse.ArgumentParser(
        prog="cloneq",
        description="Cloning-based incompatibility of quantum observables.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt_cls = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("compute", parents=[common], formatter_class=fmt_cls,
                       help="Q_c for observables in a JSON file")
    p.add_argument("--input", help="observable-set JSON")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("qubit", parents=[common], formatter_class=fmt_cls,
                       help="closed-form optimal cloner for two qubit observables")
    p.add_argument("--bloch-a", help="Bloch vector, e.g. 0,0,1")
    p.add_argument("--bloch-b", help="Bloch vector, e.g. 1,0,0")
    p.add_argument("--normalize", action="store_true", help="rescale vectors to unit length")
    p.add_argument("--check", action="store_true", help="also run the numerical pipeline")
    p.set_defaults(func=cmd_qubit)

    p = sub.add_parser("mub", parents=[common], formatter_class=fmt_cls,
                       help="optimal cloning of N MUBs in dimension d")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--construct", action="store_true",
                   help="build the MUBs (prime d) and run the numerical pipeline too")
    p.set_defaults(func=cmd_mub)

    p = sub.add_parser("sweep-d", parents=[common], formatter_class=fmt_cls,
                       help="CSV of Q_c against dimension for N MUBs")
    p.add_argument("--n", default="2", help="number of MUBs")
    p.add_argument("--d", default="2..11", help="dimensions: list, or range (primes only)")
    p.add_argument("--construct", action="store_true")
    p.set_defaults(func=cmd_sweep_d)

    p = sub.add_parser("sweep-n", parents=[common], formatter_class=fmt_cls,
                       help="CSV of Q_c against the number of MUBs in dimension d")
    p.add_argument("--d", default="11", help="dimension")
    p.add_argument("--n", default=None, help="largest N (rows 2..N), or a list/range")
    p.add_argument("--construct", action="store_true")
    p.set_defaults(func=cmd_sweep_n)

    p = sub.add_parser("verify", parents=[common], formatter_class=fmt_cls,
                       help="run the oracle cross-checks")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.restarts < 1:
        print("error: --restarts must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    if args.output and not Path(args.output).resolve().parent.is_dir():
        print(f"error: directory for --output {args.output} does not exist", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, CloneqError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
