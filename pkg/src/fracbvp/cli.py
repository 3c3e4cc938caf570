"""Command-line interface.

Subcommands::

    fracbvp constants FILE...     structural constants (and Phi with a boyd_wong block)
    fracbvp check FILE...         run every configured certificate
    fracbvp solve FILE            Picard solve, residuals, CSV export
    fracbvp reproduce {1,2,3}     rerun a built-in reference problem against published values

Exit codes: 0 success / affirmed, 1 inconclusive, 2 input error,
3 solver did not converge.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from fracbvp import __version__
from fracbvp.certify import (
    DEFAULT_BOX,
    DEFAULT_SEED,
    LipschitzEstimate,
    check_banach,
    check_boyd_wong,
    check_leray_schauder,
    estimate_lipschitz,
)
from fracbvp.exprlang import ExprError
from fracbvp.fracops import QuadratureConfig
from fracbvp.model import compute_phi, structural_constants
from fracbvp.presets import get_preset
from fracbvp.problemfile import ProblemFile, ProblemFileError, SolverSettings, load_problem_file
from fracbvp.solver import picard_solve

EXIT_OK = 0
EXIT_INCONCLUSIVE = 1
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3

SEED_ENV = "FRACBVP_SEED"
_DIGITS = 9


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.{_DIGITS}g}"
    return str(value)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"error: {SEED_ENV} must be an integer, got {raw!r}") from None


def _write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, allow_nan=True) + "\n", encoding="utf-8")


def _quad(settings: SolverSettings, args) -> QuadratureConfig:
    nodes = args.nodes if getattr(args, "nodes", None) is not None else settings.n_nodes
    over = args.oversample if getattr(args, "oversample", None) is not None else settings.oversample
    return QuadratureConfig(nodes, over)


def _banach_certificate(pf: ProblemFile, quad, args, lines):
    L = pf.banach.get("L")
    if L is None:
        estimate = estimate_lipschitz(pf.problem.f, x_box=args.box, pair_samples=args.samples,
                                      seed=args.seed)
        lines.append(f"  sampled Lipschitz estimate: {_fmt(estimate.value)} "
                     f"({estimate.samples} pairs, seed {args.seed})")
        if not estimate.value > 0:
            lines.append("  sampled Lipschitz estimate is zero; using machine epsilon")
            estimate = LipschitzEstimate(2.0**-52, "sampled", estimate.samples, estimate.notes)
    else:
        estimate = LipschitzEstimate.user(L)
    cert = check_banach(pf.problem, estimate, quad)
    rho = cert.quantities.get("rho")
    if estimate.method == "sampled" and rho is not None and rho > max(abs(b) for b in args.box):
        lines.append(f"  warning: radius rho = {_fmt(rho)} exceeds the sampling box {list(args.box)}")
    return cert


# --------------------------------------------------------------------------
# commands (each returns (exit code, text, report dict))


def _constants_one(path, args):
    pf = load_problem_file(path)
    quad = _quad(pf.solver, args)
    consts = structural_constants(pf.problem)
    report = {"file": str(path), **consts.as_dict()}
    names = [("Delta1", consts.delta1), ("Delta2", consts.delta2), ("Delta3", consts.delta3),
             ("Theta", consts.theta), ("Omega", consts.omega)]
    if pf.boyd_wong is not None:
        phi = compute_phi(pf.problem, pf.boyd_wong["g"], quad)
        report["phi"] = phi
        names.append(("Phi", phi))
    lines = [f"{path}:"] + [f"  {name:<7s}= {_fmt(v)}" for name, v in names]
    return EXIT_OK, "\n".join(lines), report


def _check_one(path, args):
    pf = load_problem_file(path)
    if not pf.has_certificates:
        raise ProblemFileError("certificates",
                               "no certificate block; add banach, boyd_wong or leray_schauder")
    quad = _quad(pf.solver, args)
    lines = [f"{path}: (seed {args.seed})"]
    certs = []
    if pf.banach is not None:
        certs.append(_banach_certificate(pf, quad, args, lines))
    if pf.boyd_wong is not None:
        certs.append(check_boyd_wong(pf.problem, pf.boyd_wong["g"], quad,
                                     h2_samples=args.samples, x_box=args.box, seed=args.seed))
    if pf.leray_schauder is not None:
        certs.append(check_leray_schauder(pf.problem, pf.leray_schauder["p"],
                                          pf.leray_schauder["psi"], quad,
                                          x_box=args.box, seed=args.seed))
    for cert in certs:
        lines.append(f"  {cert.kind.value}: {cert.verdict.value}")
        for name, value in cert.quantities.items():
            lines.append(f"    {name} = {_fmt(value)}")
        for note in cert.notes:
            lines.append(f"    note: {note}")
    code = EXIT_OK if any(c.affirmed for c in certs) else EXIT_INCONCLUSIVE
    report = {"file": str(path), "seed": args.seed,
              "certificates": [c.to_dict() for c in certs]}
    return code, "\n".join(lines), report


def _run_batch(func, args) -> int:
    def guarded(path):
        try:
            return func(path, args)
        except (ProblemFileError, ExprError, ValueError) as exc:
            return EXIT_INPUT, f"{path}: error: {exc}", {"file": str(path), "error": str(exc)}

    if args.jobs > 1 and len(args.files) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(guarded, args.files))
    else:
        results = [guarded(p) for p in args.files]

    for code, text, _ in results:
        print(text, file=sys.stderr if code == EXIT_INPUT else sys.stdout)
    if args.out:
        reports = [r for _, _, r in results]
        _write_json(args.out, reports[0] if len(reports) == 1 else reports)
    codes = [c for c, _, _ in results]
    if EXIT_INPUT in codes:
        return EXIT_INPUT
    return max(codes)


def cmd_constants(args) -> int:
    return _run_batch(_constants_one, args)


def cmd_check(args) -> int:
    return _run_batch(_check_one, args)


def _write_csv(path, x) -> None:
    rows = ["t,x"]
    rows.extend(f"{t!r},{v!r}" for t, v in zip(x.nodes.tolist(), x.values.tolist()))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")


def cmd_solve(args) -> int:
    try:
        pf = load_problem_file(args.file)
        settings = pf.solver
        quad = _quad(settings, args)
        tol = args.tol if args.tol is not None else settings.tol
        max_iter = args.max_iter if args.max_iter is not None else settings.max_iter
        if not tol > 0 or max_iter < 1:
            raise ValueError("--tol must be positive and --max-iter >= 1")
        lines = []
        cert = _banach_certificate(pf, quad, args, lines) if pf.banach is not None else None
    except (ProblemFileError, ExprError, ValueError) as exc:
        print(f"{args.file}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    start = time.perf_counter()
    sol = picard_solve(pf.problem, quad, tol=tol, max_iter=max_iter, certificate=cert)
    elapsed = time.perf_counter() - start
    tr = sol.trace
    print(f"{args.file}: n_nodes={quad.n_nodes} oversample={quad.oversample} tol={tol:g}")
    for line in lines:
        print(line)
    status = "converged" if tr.converged else "NOT converged"
    print(f"  {status} after {tr.iterates} iterations ({elapsed:.3f} s), "
          f"final step {_fmt(tr.final_delta)}")
    if tr.observed_ratios:
        print(f"  observed contraction ratio: last {_fmt(tr.observed_ratios[-1])}, "
              f"max {_fmt(max(tr.observed_ratios))}")
    if cert is not None:
        print(f"  banach: {cert.verdict.value}, L*Theta = {_fmt(cert.quantities['L_theta'])}")
    if sol.a_priori_bound is not None:
        print(f"  a-priori error bound: {_fmt(sol.a_priori_bound)}")
    for name, value in sol.residuals.as_dict().items():
        print(f"  {name} = {_fmt(value)}")
    if args.out:
        _write_csv(args.out, sol.x)
        print(f"  wrote {args.out}")
    if args.report:
        report = {"file": str(args.file), "solution": sol.to_dict()}
        if cert is not None:
            report["certificate"] = cert.to_dict()
        _write_json(args.report, report)
    if not tr.converged:
        deltas = ", ".join(_fmt(d) for d in tr.sup_deltas[-3:])
        print(f"  trace tail: {deltas}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def reproduce(example_id: int, quad: QuadratureConfig | None = None) -> list[dict]:
    """Recompute a built-in problem and compare with its published values."""
    preset = get_preset(example_id)
    quad = quad or QuadratureConfig()
    p = preset.problem()
    consts = structural_constants(p)
    computed = {"delta1": consts.delta1, "delta2": consts.delta2,
                "delta3": consts.delta3, "theta": consts.theta}
    if preset.lipschitz is not None:
        cert = check_banach(p, float(preset.lipschitz), quad)
        computed["L_theta"] = cert.quantities["L_theta"]
    if preset.p is not None:
        cert = check_leray_schauder(p, preset.p, preset.psi, quad)
        computed["M_threshold"] = cert.quantities.get("M_threshold", float("nan"))
    if preset.g is not None:
        computed["phi"] = compute_phi(p, preset.g, quad)

    rows = []
    for name, (published, tol) in preset.published.items():
        value = computed[name]
        diff = abs(value - published)
        rows.append({"name": name, "computed": value, "published": published,
                     "abs_diff": diff, "tolerance": tol, "pass": bool(diff <= tol)})
    return rows


def cmd_reproduce(args) -> int:
    try:
        defaults = SolverSettings()
        quad = QuadratureConfig(args.nodes or defaults.n_nodes,
                                args.oversample or defaults.oversample)
        rows = reproduce(args.example, quad)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"example {args.example}:")
    for r in rows:
        mark = "PASS" if r["pass"] else "FAIL"
        print(f"  {mark} {r['name']:<12s} computed {_fmt(r['computed']):>14s}  "
              f"published {_fmt(r['published']):>14s}  |diff| {r['abs_diff']:.2e} "
              f"<= {r['tolerance']:.0e}")
    if args.out:
        _write_json(args.out, {"example": args.example, "rows": rows})
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_INCONCLUSIVE


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracbvp",
        description="Certificates and Picard solver for nonlocal Caputo boundary value problems.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def grid_flags(p):
        p.add_argument("--nodes", type=int, help="solver grid nodes (overrides the file)")
        p.add_argument("--oversample", type=int, help="quadrature refinement factor")

    def sampling_flags(p):
        p.add_argument("--seed", type=int, default=None,
                       help=f"sampling seed (default ${SEED_ENV} or {DEFAULT_SEED})")
        p.add_argument("--box", type=float, nargs=2, default=DEFAULT_BOX, metavar=("LO", "HI"),
                       help="x range for sampled hypothesis audits")
        p.add_argument("--samples", type=int, default=100_000,
                       help="sample count for Lipschitz / log-bound audits")

    p = sub.add_parser("constants", help="print structural constants")
    p.add_argument("files", nargs="+", metavar="FILE")
    grid_flags(p)
    p.add_argument("--out", help="write a JSON report")
    p.add_argument("--jobs", type=int, default=1, help="files processed in parallel")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("check", help="run the configured certificates")
    p.add_argument("files", nargs="+", metavar="FILE")
    grid_flags(p)
    sampling_flags(p)
    p.add_argument("--out", help="write a JSON report")
    p.add_argument("--jobs", type=int, default=1, help="files processed in parallel")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="solve by Picard iteration")
    p.add_argument("file", metavar="FILE")
    grid_flags(p)
    sampling_flags(p)
    p.add_argument("--tol", type=float, help="stop when the sup-norm step is <= TOL")
    p.add_argument("--max-iter", type=int, dest="max_iter", help="iteration cap")
    p.add_argument("--out", help="write the solution as CSV (t,x)")
    p.add_argument("--report", help="write a JSON report")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reproduce", help="rerun a built-in reference problem")
    p.add_argument("example", type=int, choices=(1, 2, 3))
    grid_flags(p)
    p.add_argument("--out", help="write a JSON report")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors are input errors
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "seed", 0) is None:
        args.seed = _default_seed()
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
