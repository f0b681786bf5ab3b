# tools/fzeta/__main__.py

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Any

from loguru import logger

from engine.config import get_settings, override_settings, paths
from engine.embed import CantorDust
from engine.errors import FractalZetaError, InvalidInput
from engine.logging_config import configure_logging
from engine.merozeta import classify_fractality, eval_expr, poles_csv, poles_in_window, principal_part
from engine.rfd import box_dimension_fit, log_grid, tube_function_numeric, tube_samples_csv, tube_samples_from_csv
from engine.geometry import parse_geometry
from engine.serialize import pretty_json
from engine.sprays import SpraySpec, catalog_example, catalog_expression, catalog_names, catalog_window, declared_dimension
from engine.types import OutputRecord, Window, cpair

from .manifest import build_manifest, write_manifest, write_output
from .suites import SUITES, run_suite


def _print_json(payload: Any) -> None:
    sys.stdout.write(pretty_json(payload))


def _complex_arg(text: str) -> complex:
    try:
        re_part, _, im_part = text.partition(",")
        return complex(float(re_part), float(im_part or 0.0))
    except ValueError as exc:
        raise InvalidInput(f"complex values are written RE,IM: {text!r}") from exc


def _declared_D(name: str) -> float:
    ex = catalog_example(name)
    if isinstance(ex, SpraySpec):
        return declared_dimension(ex)
    if isinstance(ex, CantorDust):
        return ex.D
    reals = [p.real for p in ex.rational_pole_points()]
    return max(reals) if reals else float("nan")


def _poles(name: str, window: Window):
    expr = catalog_expression(name)
    if isinstance(expr, CantorDust):
        return expr.poles_in_window(window)
    return poles_in_window(expr, window)


def cmd_dims(args: argparse.Namespace) -> list[OutputRecord]:
    if args.list:
        _print_json(catalog_names())
        return []
    if not args.example:
        raise InvalidInput("dims needs --example or --list")
    window = Window.parse(args.window) if args.window else catalog_window(args.example)
    dims = _poles(args.example, window)
    outputs = []
    if args.csv:
        outputs.append(write_output(Path(args.csv), poles_csv(dims)))
    _print_json(
        {
            "example": args.example,
            "window": [window.re_min, window.re_max, window.im_max],
            "D": _declared_D(args.example),
            "dims": [d.model_dump(mode="json") for d in dims],
        }
    )
    return outputs


def cmd_eval(args: argparse.Namespace) -> list[OutputRecord]:
    s = _complex_arg(args.s)
    expr = catalog_expression(args.example)
    value = expr(s) if isinstance(expr, CantorDust) else eval_expr(expr, s)
    _print_json({"example": args.example, "s": cpair(s), "value": cpair(value)})
    return []


def cmd_tube(args: argparse.Namespace) -> list[OutputRecord]:
    r = parse_geometry(args.geometry)
    samples = tube_function_numeric(r, log_grid(args.tmin, args.tmax, args.points), samples=args.samples)
    if args.out:
        out = Path(args.out)
    else:
        paths.ensure_runtime_dirs()
        out = paths.OUTPUT_DIR / f"tube-{r.kind}.csv"
    record = write_output(out, tube_samples_csv(samples))
    _print_json({"geometry": r.label, "method": samples.method, "rows": len(samples.t), "out": record.model_dump()})
    return [record]


def cmd_fit(args: argparse.Namespace) -> list[OutputRecord]:
    samples = tube_samples_from_csv(Path(args.input))
    t_range = (args.tmin, args.tmax) if args.tmin is not None and args.tmax is not None else None
    fit = box_dimension_fit(samples, args.N, t_range=t_range)
    _print_json(fit.model_dump(mode="json"))
    return []


def cmd_residue(args: argparse.Namespace) -> list[OutputRecord]:
    w = _complex_arg(args.at)
    expr = catalog_expression(args.example)
    if isinstance(expr, CantorDust):
        payload = {
            "example": args.example,
            "re": w.real,
            "im": w.imag,
            "order": 1,
            "principal_part": [cpair(expr.residue(w))],
        }
    else:
        dim = principal_part(expr, w)
        payload = {"example": args.example, **dim.model_dump(mode="json")}
    _print_json(payload)
    return []


def cmd_classify(args: argparse.Namespace) -> list[OutputRecord]:
    window = Window.parse(args.window) if args.window else catalog_window(args.example)
    expr = catalog_expression(args.example)
    result = expr.classify(window) if isinstance(expr, CantorDust) else classify_fractality(expr, window)
    sys.stdout.write(result.render() + "\n")
    return []


def cmd_verify(args: argparse.Namespace) -> list[OutputRecord]:
    reports = run_suite(args.suite)
    _print_json([r.model_dump(mode="json") for r in reports])
    args.failed = not all(r.passed for r in reports)
    return []


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fz",
        description="Fractal zeta functions, complex dimensions and relative fractal drums",
    )
    parser.add_argument("--seed", type=int, default=None, help="Monte Carlo seed")
    parser.add_argument("--threads", type=int, default=None, help="Monte Carlo worker threads")
    parser.add_argument("--tol", type=float, default=None, help="Relative quadrature tolerance")
    parser.add_argument("--manifest", default=None, help="Write a run manifest to this path")
    parser.add_argument("--log-level", default=None, help="Override FZ_LOG_LEVEL")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dims", help="Complex dimensions of a catalog example in a window")
    p.add_argument("--example", default=None)
    p.add_argument("--window", default=None, help="a:b:H meaning Re in [a,b], |Im| <= H")
    p.add_argument("--list", action="store_true", help="List catalog names")
    p.add_argument("--csv", default=None, help="Also write the pole list as CSV")
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("eval", help="Evaluate the distance zeta function of an example")
    p.add_argument("--example", required=True)
    p.add_argument("--s", required=True, help="RE,IM")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("tube", help="Sample the tube function of a geometry to CSV")
    p.add_argument("--geometry", required=True, help="kind[:key=value,...]")
    p.add_argument("--tmin", type=float, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--points", type=int, default=60)
    p.add_argument("--samples", type=int, default=None, help="Monte Carlo points")
    p.add_argument("--out", default=None, help="CSV path (default: FZ_OUTPUT_DIR/tube-KIND.csv)")
    p.set_defaults(func=cmd_tube)

    p = sub.add_parser("fit", help="Box-dimension fit of a tube CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--tmin", type=float, default=None)
    p.add_argument("--tmax", type=float, default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("residue", help="Principal part at a pole")
    p.add_argument("--example", required=True)
    p.add_argument("--at", required=True, help="RE,IM")
    p.set_defaults(func=cmd_residue)

    p = sub.add_parser("classify", help="Fractality class of an example")
    p.add_argument("--example", required=True)
    p.add_argument("--window", default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="Run invariant suites")
    p.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    p.set_defaults(func=cmd_verify)
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    updates: dict[str, Any] = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.threads is not None:
        updates["threads"] = args.threads
    if args.tol is not None:
        updates["quad_epsrel"] = args.tol
    return updates


_VALUE_FLAGS = ("--window", "--s", "--at")


def _glue_values(argv: list[str]) -> list[str]:
    """Join `--window -1:3:30` into `--window=-1:3:30`; argparse reads a leading `-` as an option."""
    out: list[str] = []
    it = iter(argv)
    for token in it:
        if token in _VALUE_FLAGS:
            value = next(it, None)
            out.append(token if value is None else f"{token}={value}")
        else:
            out.append(token)
    return out


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _glue_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    configure_logging(args.log_level)
    args.failed = False
    started = time.perf_counter()
    try:
        with override_settings(**_overrides(args)):
            outputs = args.func(args)
            seed = get_settings().seed
    except FractalZetaError as exc:
        sys.stderr.write(pretty_json(exc.to_dict()))
        logger.bind(command=args.command, error=type(exc).__name__).debug("command failed")
        return exc.exit_code

    if args.manifest:
        params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest", "failed")}
        write_manifest(
            Path(args.manifest),
            build_manifest(args.command, params, seed, time.perf_counter() - started, outputs),
        )
    return 4 if args.failed else 0


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
