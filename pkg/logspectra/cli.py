"""Command-line entry point: ``python -m logspectra <command>``.

Exit codes: 0 on success, 1 when a check fails, 2 on invalid input or a
numerical failure.
"""
import argparse
import csv
import json
import logging
import sys
from typing import Sequence

import numpy as np

from .config import get_settings
from .constants import constant_set
from .fem import assemble, load_matrix, mesh_for, save_matrix
from .forms import delta_split, elementary_slacks, energy_s, expansion_residuals
from .harness import bound_checks, load_config, run_sweep, write_outputs
from .models import BumpKind, Method
from .operators import evaluate_request
from .schemas import OpEvalRequest
from .spectra import solve_generalized
from .testlab import make_bump, make_domain

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2
DELTA_SPLIT_TOL = 1e-8


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _floats(raw: str) -> list[float]:
    try:
        return [float(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {raw!r}") from exc


def _print_json(payload: object) -> None:
    print(json.dumps(payload, indent=2))


def cmd_constants(args: argparse.Namespace) -> int:
    result = constant_set(args.dim, args.s)
    if args.json:
        _print_json(result.model_dump(include={"c_frac", "c_log", "rho", "omega", "kappa_riesz", "kappa_form"}))
    else:
        for key, value in result.model_dump().items():
            print(f"{key}: {value}")
    return EXIT_OK


def cmd_opeval(args: argparse.Namespace) -> int:
    op = args.op
    method = Method.spatial
    if op == "symbol":
        op, method = ("log" if args.symbol == "log" else "frac"), Method.fourier
    req = OpEvalRequest(
        op=op,
        method=method,
        bump=args.bump,
        center=args.center,
        radius=args.radius,
        s=args.s,
        at=args.at,
        tol=args.tol,
    )
    result = evaluate_request(req)
    print(f"value: {result.value!r}")
    print(f"est_error: {result.est_error!r}")
    return EXIT_OK


def _random_bump(rng: np.random.Generator, kind: BumpKind) -> object:
    return make_bump(kind, float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.5, 1.0)))


def _delta_split_rows(rng: np.random.Generator) -> list[list]:
    kinds = [BumpKind.smooth, BumpKind.polynomial, BumpKind.smooth]
    pairs = [(_random_bump(rng, a), _random_bump(rng, b)) for a, b in zip(kinds, kinds[1:] + kinds[:1])]
    rows = []
    for index, (u, v) in enumerate(pairs):
        for s in (0.05, 0.25):
            energy = energy_s(u, v, s).value
            for delta in (0.1, 0.3, 0.9):
                split = delta_split(u, v, s, delta)
                rows.append([f"pair{index + 1}", s, delta, DELTA_SPLIT_TOL - abs(split.reconstruct() - energy)])
    return rows


def _elementary_rows(rng: np.random.Generator) -> list[list]:
    r = 10.0 ** rng.uniform(-3.0, 3.0, size=1000)
    rows = []
    for s in (0.01, 0.05, 0.1, 0.2, 0.25):
        first, second = elementary_slacks(r, s)
        rows.append(["first-order", s, "", float(first.min())])
        rows.append(["second-order", s, "", float(second.min())])
    return rows


def _expansion_rows(rng: np.random.Generator) -> list[list]:
    kinds = [BumpKind.smooth, BumpKind.polynomial, BumpKind.smooth, BumpKind.polynomial, BumpKind.smooth]
    rows = []
    for index, kind in enumerate(kinds):
        u = _random_bump(rng, kind)
        for s in (0.01, 0.05, 0.1):
            first, second = expansion_residuals(u, s)
            rows.append([f"bump{index + 1}", s, "", min(first, second)])
    return rows


FORM_CHECKS = {"delta-split": _delta_split_rows, "elementary": _elementary_rows, "expansion": _expansion_rows}
# alternative names accepted by --check
FORM_CHECK_ALIASES = {"lemma22": "elementary", "lemma23": "expansion"}


def cmd_forms(args: argparse.Namespace) -> int:
    check = FORM_CHECK_ALIASES.get(args.check, args.check)
    rows = FORM_CHECKS[check](np.random.default_rng(args.seed))
    writer = csv.writer(sys.stdout)
    writer.writerow(["case", "s", "delta", "slack"])
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    passed = all(row[3] >= 0.0 for row in rows)
    print(f"{args.check}: {'pass' if passed else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_assemble(args: argparse.Namespace) -> int:
    with open(args.domain, encoding="utf-8") as f:
        domain = make_domain(json.load(f))
    matrix = assemble(mesh_for(domain, args.n), args.kind, args.s, args.tol)
    path = save_matrix(matrix, args.out)
    logger.info("wrote %s matrix of size %d to %s", matrix.kind.value, matrix.size, path)
    return EXIT_OK


def cmd_spectrum(args: argparse.Namespace) -> int:
    spectrum = solve_generalized(load_matrix(args.A), load_matrix(args.M), args.k)
    if args.json:
        _print_json(spectrum.to_dict())
    else:
        for index, (value, residual) in enumerate(zip(spectrum.eigenvalues, spectrum.residuals), start=1):
            print(f"{index}\t{value!r}\t{residual:.3e}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    report = run_sweep(load_config(args.config), workers=args.workers)
    write_outputs(report, args.out)
    for check in report.checks:
        if not check.passed:
            logger.warning("check failed: %s %s", check.name, check.detail)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_bounds(args: argparse.Namespace) -> int:
    report = bound_checks(args.dim, args.s, n=args.n, refine=not args.no_refine)
    _print_json(report.model_dump(mode="json"))
    return EXIT_OK if all(check.passed for check in report.checks) else EXIT_FAILED


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("logspectra.main:app", host=args.host, port=args.port, reload=args.reload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="logspectra", description="Fractional and logarithmic Laplacian toolkit.")
    parser.add_argument("--log-level", default=settings.log_level, help="Logging level (default: LOG_LEVEL).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="Print the normalization constants.")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("opeval", help="Evaluate an operator on a bump at one point.")
    p.add_argument("--op", choices=["frac", "log", "symbol"], default="frac")
    p.add_argument("--symbol", choices=["power", "log"], default="power", help="Symbol used with --op symbol.")
    p.add_argument("--bump", choices=[k.value for k in BumpKind], default=BumpKind.smooth.value)
    p.add_argument("--center", type=_floats, default=[0.0])
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--s", type=float, default=0.25)
    p.add_argument("--at", type=_floats, default=[0.0])
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_opeval)

    p = sub.add_parser("forms", help="Run a quadratic-form check and print the slack table.")
    p.add_argument("--check", choices=sorted([*FORM_CHECKS, *FORM_CHECK_ALIASES]), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_forms)

    p = sub.add_parser("assemble", help="Assemble a Galerkin matrix into an NLFM file.")
    p.add_argument("--domain", required=True, help="Domain JSON file.")
    p.add_argument("--kind", choices=["frac", "log", "mass"], required=True)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("spectrum", help="Solve A v = lambda M v for NLFM matrices.")
    p.add_argument("--A", dest="A", required=True)
    p.add_argument("--M", dest="M", required=True)
    p.add_argument("-k", type=int, default=4)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="Run the s-sweep and write CSV/JSON outputs.")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=settings.output_dir)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="Tabulate ball bounds and run the Galerkin comparisons.")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--s", type=_floats, default=settings.s_grid)
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--no-refine", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("serve", help="Serve the HTTP API with uvicorn.")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--reload", action="store_true")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
