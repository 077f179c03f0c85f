"""Command-line interface: ``gr24 <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 numerical failure,
3 input/output or usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (best_lp_lower_bound, delta_grid,
                     hypersingular_lower_bound, lower_bound_constant, lp_bound_details,
                     LPBoundParams, psi_hat_00, riesz_lower_bound_asymptote)
from .energy import (EnergyKind, continuous_energy, continuous_energy_quadrature,
                     discrete_energy, dpp_asymptotic_constant_result, dpp_energy_asymptote,
                     expected_dpp_energy_result, hypersingular_leading_coefficient, W_LOG)
from .errors import (DegenerateStep, DivergentSeries, Gr24Error, InvalidParameter,
                     MalformedPointSet, OutOfRange, QuadratureFailure, RejectionBudgetExceeded,
                     Singular, SlowConvergence)
from .kernel import integer_kernel_at_one, kernel_dim, kernel_eval, kernel_eval_brute
from .optimizer import OptimizerConfig, minimize_energy
from .pointset import read_points, timestamp, write_points
from .quadrature import QuadratureSpec
from .sampling import RandomStream, SamplerSpec, map_ordered

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_NUMERIC = 2
EXIT_USAGE = 3

NUMERIC_ERRORS = (QuadratureFailure, SlowConvergence, DivergentSeries, Singular,
                  DegenerateStep, RejectionBudgetExceeded)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _manifest(command, params, seed=None) -> dict:
    return {
        "command": command,
        "parameters": params,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": timestamp(),
    }


def _kind_from_args(args) -> EnergyKind:
    if args.kind == "log":
        return EnergyKind.log()
    if args.s is None:
        raise UsageError("--s is required for --kind riesz")
    return EnergyKind.riesz(args.s)


def _quad_from_args(args) -> QuadratureSpec:
    return QuadratureSpec(
        base_rule_order=args.order,
        max_depth=args.max_depth,
        abs_tol=args.abs_tol,
        rel_tol=args.rel_tol,
        max_cells=args.max_cells,
    )


def _emit(text, out=None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_constants(args) -> int:
    kind = _kind_from_args(args)
    quad = _quad_from_args(args)
    report = {"kind": str(kind)}
    if kind.is_log:
        report["W"] = W_LOG
        report["W_quadrature"] = continuous_energy_quadrature(kind, quad).value
    elif kind.s < 4:
        report["W"] = continuous_energy(kind, quad)
        q = continuous_energy_quadrature(kind, quad)
        report["W_quadrature"] = q.value
        report["W_quadrature_err"] = q.err_estimate
    else:
        report["leading"] = hypersingular_leading_coefficient()
    if kind.is_log or kind.s <= 4:
        c = dpp_asymptotic_constant_result(kind, quad)
        report["C"] = c.value
        report["C_err"] = c.err_estimate
    if kind.is_log or kind.s < 4:
        report["C_lower"] = lower_bound_constant(kind.s_code)
    if args.json:
        _emit(json.dumps(report, indent=1) + "\n")
    else:
        lines = [f"{key:>18s}  {_fmt(val)}" for key, val in report.items()]
        _emit("\n".join(lines) + "\n")
    return EXIT_OK


def kernel_check(k_max: int, samples: int = 1000, seed: int = 0, perturb: float = 0.0):
    """Closed-form kernel against the partition sum; returns (passed, rows)."""
    rng = np.random.Generator(np.random.Philox(seed))
    x = rng.uniform(-1.0, 1.0, samples)
    y = rng.uniform(-1.0, 1.0, samples)
    rows = []
    ok = True
    for k in range(1, k_max + 1):
        N = kernel_dim(k)
        closed = kernel_eval(k, (x, y)) + perturb * N
        brute = kernel_eval_brute(k, (x, y))
        dev = float(np.max(np.abs(closed - brute)) / N)
        at_one = kernel_eval(k, (1.0, 1.0)) + perturb * N
        exact_one = integer_kernel_at_one(k) == N
        passed = dev <= 1e-9 and abs(at_one - N) <= 1e-9 * N and exact_one
        ok = ok and passed
        rows.append((k, N, dev, at_one, passed))
    return ok, rows


def cmd_kernel_check(args) -> int:
    if not 1 <= args.k_max <= 10:
        raise UsageError("--k-max must lie in [1, 10]")
    ok, rows = kernel_check(args.k_max, args.samples, args.seed, args.perturb)
    text = _csv_text(["k", "N", "max_rel_dev", "K_at_1_1", "pass"], rows)
    _emit(text)
    worst = max(r[2] for r in rows)
    print(f"{'PASS' if ok else 'FAIL'} worst relative deviation {worst:.3e}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_sample(args) -> int:
    if args.dpp:
        if args.k is None:
            raise UsageError("--dpp needs --k")
        spec = SamplerSpec("dpp", args.k)
    else:
        if args.n is None:
            raise UsageError("--uniform needs --n")
        spec = SamplerSpec("uniform", args.n)
    if args.m < 1:
        raise UsageError("--m must be positive")
    stream = RandomStream(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ext = "csv" if args.format == "csv" else "json"

    def one(m):
        return spec.draw(stream.substream(m))

    configs = map_ordered(one, range(args.m))
    params = {"sampler": spec.kind, "k" if spec.kind == "dpp" else "N": spec.size, "m": args.m}
    for m, P in enumerate(configs):
        meta = _manifest("sample", params, args.seed)
        meta.update({"sampler": spec.kind, "replication": m, "n_points": len(P)})
        meta["k" if spec.kind == "dpp" else "N"] = spec.size
        write_points(out / f"sample_{m:04d}.{ext}", P, meta, fmt=ext)
    print(f"wrote {args.m} configurations of {spec.n_points} points to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_energy(args) -> int:
    kind = _kind_from_args(args)
    if args.expected:
        if args.k is None:
            raise UsageError("--expected needs --k")
        res = expected_dpp_energy_result(args.k, kind, _quad_from_args(args))
        value, err = res.value, res.err_estimate
    else:
        if not args.file:
            raise UsageError("a point-set file is required unless --expected is given")
        P, _ = read_points(args.file)
        value, err = discrete_energy(P, kind), 0.0
    if args.json:
        _emit(json.dumps({"kind": str(kind), "energy": value, "err_estimate": err}) + "\n")
    else:
        _emit(_fmt(value) + "\n")
    return EXIT_OK


def cmd_bounds(args) -> int:
    N, s = args.n, args.s
    if N < 2:
        raise UsageError("--n must be at least 2")
    if not 0 <= s <= 4:
        raise UsageError("--s must lie in [0, 4]")
    if args.delta_min is not None or args.delta_max is not None:
        lo = args.delta_min if args.delta_min is not None else N ** -0.5 / 30
        hi = args.delta_max if args.delta_max is not None else N ** -0.5 * 30
        grid = np.geomspace(lo, hi, args.delta_points)
    else:
        grid = delta_grid(N, args.delta_points)
    quad = _quad_from_args(args)
    rows = []
    if s == 4:
        for d in grid:
            g00 = psi_hat_00(float(d))
            rows.append((N, s, float(d), g00, 1.0 / d**2, hypersingular_lower_bound(N, float(d))))
        asym = 0.25 * N * N * math.log(N) + (math.log(2.0) / 2.0 - 1.0) * N * N
    else:
        params = [LPBoundParams(s, None, float(d)) for d in grid]
        results = map_ordered(lambda p: lp_bound_details(N, p, quad), params)
        for r in results:
            rows.append((N, s, r.delta, r.g00, r.g11, r.bound))
        asym = riesz_lower_bound_asymptote(N, s)
    best = max(rows, key=lambda r: r[5])
    rows.append((N, s, "best", best[3], best[4], best[5]))
    rows.append((N, s, "asymptotic", "", "", asym))
    _emit(_csv_text(["N", "s", "delta", "g00", "g11", "bound"], rows), args.out)
    return EXIT_OK


def _ensemble_degree(N):
    for k in range(1, 7):
        if kernel_dim(k) == N:
            return k
    return None


def cmd_minimize(args) -> int:
    kind = _kind_from_args(args)
    opt = OptimizerConfig(max_iters=args.max_iters, initial_step=args.initial_step,
                          grad_tol=args.grad_tol, restarts=args.restarts)
    res = minimize_energy(args.n, kind, opt, RandomStream(args.seed))
    summary = {
        "energy": res.energy,
        "iters": res.iters,
        "grad_norm": res.grad_norm,
        "converged": res.converged,
        "seed": args.seed,
        "N": args.n,
        "kind": str(kind),
    }
    k = _ensemble_degree(args.n)
    if k is not None and (kind.is_log or kind.s <= 4):
        quad = _quad_from_args(args)
        upper = expected_dpp_energy_result(k, kind, quad).value
        if kind.is_log or kind.s < 4:
            lower = best_lp_lower_bound(args.n, kind.s_code, quad=quad)[0].bound
        else:
            lower = hypersingular_lower_bound(args.n)
        summary["sandwich"] = {
            "k": k,
            "lower_bound": lower,
            "expected_dpp_energy": upper,
            "holds": bool(lower <= res.energy <= upper),
        }
    if args.out:
        meta = _manifest("minimize", {"N": args.n, "kind": str(kind), "restarts": args.restarts,
                                      "max_iters": args.max_iters}, args.seed)
        meta.update({"energy": res.energy})
        write_points(args.out, res.config, meta)
        Path(str(args.out) + ".summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    _emit(json.dumps(summary, indent=1) + "\n")
    if "sandwich" in summary and not summary["sandwich"]["holds"]:
        return EXIT_VERIFY
    return EXIT_OK


REPORT_HELP = """\
report columns:
  k                 degree of the harmonic ensemble
  N                 number of points d_k
  expected_energy   exact expected energy of the ensemble (quadrature)
  asymptote         two-term asymptote at N
  lower_bound       best LP lower bound over the delta grid (hypersingular bound for s=4)
  next_order        Riesz s<4: (W N^2 - E)/N^(1+s/4); log: (E - W N^2 + N log N / 4)/N;
                    s=4: E/(N^2 log N)
For the log kernel a trailing comment line gives the least-squares constant c
in E = W N^2 - N log N / 4 + c N over the reported rows.
"""


def report_rows(k_values, kind, quad):
    def one(k):
        N = kernel_dim(k)
        E = expected_dpp_energy_result(k, kind, quad).value
        asym = dpp_energy_asymptote(N, kind, quad)
        if kind.is_log:
            lower = best_lp_lower_bound(N, 0.0, quad=quad)[0].bound
            nxt = (E - W_LOG * N * N + 0.25 * N * math.log(N)) / N
        elif kind.s < 4:
            lower = best_lp_lower_bound(N, kind.s, quad=quad)[0].bound
            nxt = (continuous_energy(kind, quad) * N * N - E) / N ** (1.0 + kind.s / 4.0)
        else:
            lower = hypersingular_lower_bound(N)
            nxt = E / (N * N * math.log(N))
        return (k, N, E, asym, lower, nxt)

    return map_ordered(one, k_values)


def fit_log_constant(rows) -> float:
    """Least-squares c in ``E - W N^2 + N log N / 4 = c N``."""
    N = np.array([r[1] for r in rows], dtype=float)
    E = np.array([r[2] for r in rows], dtype=float)
    resid = E - W_LOG * N * N + 0.25 * N * np.log(N)
    return float(np.dot(resid, N) / np.dot(N, N))


def cmd_report(args) -> int:
    kind = _kind_from_args(args)
    if not 1 <= args.k_min <= args.k_max <= 6:
        raise UsageError("k range must satisfy 1 <= k-min <= k-max <= 6")
    if not kind.is_log and kind.s > 4:
        raise UsageError("report supports s <= 4")
    quad = _quad_from_args(args)
    rows = report_rows(range(args.k_min, args.k_max + 1), kind, quad)
    text = _csv_text(["k", "N", "expected_energy", "asymptote", "lower_bound", "next_order"], rows)
    if kind.is_log:
        text += f"# fitted_constant={_fmt(fit_log_constant(rows))}\n"
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_kind(p, required=True):
    p.add_argument("--kind", choices=["riesz", "log"], default="riesz",
                   help="pair kernel (default riesz)")
    p.add_argument("--s", type=float, default=None, help="Riesz exponent")


def _add_quad(p):
    d = QuadratureSpec()
    g = p.add_argument_group("quadrature")
    g.add_argument("--order", type=int, default=d.base_rule_order, help="Gauss-Legendre points per axis")
    g.add_argument("--max-depth", type=int, default=d.max_depth, help="corner refinement levels")
    g.add_argument("--abs-tol", type=float, default=d.abs_tol)
    g.add_argument("--rel-tol", type=float, default=d.rel_tol)
    g.add_argument("--max-cells", type=int, default=d.max_cells)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gr24", description="Energies, bounds and sampling on Gr(2,4).")
    parser.add_argument("--version", action="version", version=f"gr24 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("constants", help="continuous energy, next-order and lower-bound constants")
    _add_kind(p)
    _add_quad(p)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("kernel-check", help="closed-form kernel against the partition sum")
    p.add_argument("--k-max", type=int, default=8)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_kernel_check)

    p = sub.add_parser("sample", help="write sampled configurations")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--uniform", action="store_true", help="N independent uniform planes")
    which.add_argument("--dpp", action="store_true", help="harmonic ensemble of degree k")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int, default=1, help="number of configurations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="samples", help="output directory")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("energy", help="discrete energy of a point-set file")
    p.add_argument("file", nargs="?")
    _add_kind(p)
    p.add_argument("--expected", action="store_true", help="exact expected energy of the ensemble")
    p.add_argument("--k", type=int)
    p.add_argument("--json", action="store_true")
    _add_quad(p)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("bounds", help="LP lower-bound table over a delta grid (CSV)",
                       description="Columns: N, s, delta, g00, g11, bound. s=0 is the log kernel; "
                                   "s=4 gives the hypersingular bound.")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--delta-min", type=float)
    p.add_argument("--delta-max", type=float)
    p.add_argument("--delta-points", type=int, default=20)
    p.add_argument("--out")
    _add_quad(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("minimize", help="minimize the discrete energy of N points")
    p.add_argument("--n", type=int, required=True)
    _add_kind(p)
    d = OptimizerConfig()
    p.add_argument("--max-iters", type=int, default=d.max_iters)
    p.add_argument("--restarts", type=int, default=d.restarts)
    p.add_argument("--initial-step", type=float, default=d.initial_step)
    p.add_argument("--grad-tol", type=float, default=d.grad_tol)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="point-set file for the best configuration")
    _add_quad(p)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("report", help="trend table over ensemble degrees (CSV)",
                       epilog=REPORT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_kind(p)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--out")
    _add_quad(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidParameter, OutOfRange) as exc:
        print(f"gr24: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MalformedPointSet, OSError) as exc:
        print(f"gr24: input/output error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        print(f"gr24: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Gr24Error as exc:
        print(f"gr24: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
