"""
membrane-scaling command line interface.
"""
import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from .clement import clement_table
from .config import Settings, load_sweep_config
from .constructions import construction_summary, udelta_profile
from .energy import evaluate_full, reduced_energy
from .errors import ConfigError, InvariantViolation, MembraneError
from .grid import Grid1D, SampledField
from .minimizer import minimize, standard_starts
from .models import MinimizeOptions, Params
from .potential import builtin_well, well_names
from .report import emit_report, summarize
from .seminorm import interpolation_report
from .storage import load_field, save_field, save_frame, save_json
from .sweep import classify, default_constants, run_sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def _floats(text: str) -> list[float]:
    return [float(item) for item in text.split(",") if item.strip()]


def _ints(text: str) -> list[int]:
    return [int(item) for item in text.split(",") if item.strip()]


def _add_params(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--b", type=float, default=1.0, help="Exchange weight b")
    parser.add_argument("--sigma", type=float, default=1.0, help="Surface tension")
    parser.add_argument("--kappa", type=float, default=1.0, help="Bending rigidity")
    parser.add_argument("--lambda", dest="lambda_", type=float, default=1.0, help="Coupling strength")
    parser.add_argument("--well", choices=well_names(), default=None)
    parser.add_argument(
        "--degenerate", action="store_true", help="Allow kappa = 0 or b = 0 (construction probes)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="membrane-scaling",
        description="Numerical lab for the coupled membrane energy F(u, h)",
    )
    parser.add_argument(
        "--config",
        type=Path,
        default=None,
        help="Sweep file for `sweep`; a MEMBRANE_* settings file for the other commands",
    )
    parser.add_argument("--out", type=Path, default=None, help="Output directory")
    parser.add_argument("--grid-n", type=int, default=None, help="Grid resolution N")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--log-level", default=None)
    commands = parser.add_subparsers(dest="command", required=True)

    evaluate = commands.add_parser("evaluate", help="Energy of an x,u,h CSV")
    evaluate.add_argument("input", type=Path)
    _add_params(evaluate)

    run = commands.add_parser("minimize", help="Multi-start minimization at one parameter point")
    _add_params(run)
    run.add_argument("--random-starts", type=int, default=3)
    run.add_argument("--max-iters", type=int, default=None)

    construct = commands.add_parser("construct", help="Sample a named construction")
    construct.add_argument(
        "kind", choices=["flat", "single_transition", "oscillatory", "udelta", "mollified_step"]
    )
    construct.add_argument("--n", type=int, default=None)
    construct.add_argument("--epsilon", type=float, default=None)
    construct.add_argument("--delta", type=float, default=None)
    _add_params(construct)

    interpolate = commands.add_parser("interpolate", help="H^s / Modica–Mortola ratios of u_delta")
    interpolate.add_argument("--s", type=float, required=True)
    interpolate.add_argument("--deltas", type=_floats, default=[0.2, 0.1, 0.05, 0.02, 0.01])
    interpolate.add_argument("--well", choices=well_names(), default=None)

    clement = commands.add_parser("clement", help="Clément decomposition rows for u_delta")
    clement.add_argument("--d", type=int, choices=[1, 2], default=1)
    clement.add_argument("--l", dest="ls", type=_ints, default=[8, 16, 32])
    clement.add_argument("--m", dest="ms", type=_floats, default=[4.0, 8.0, 16.0])
    clement.add_argument("--deltas", type=_floats, default=[0.1, 0.05, 0.02])
    clement.add_argument("--quad-order", type=int, default=4)
    clement.add_argument("--well", choices=well_names(), default=None)

    sweep = commands.add_parser("sweep", help="Run a sweep file and write its report")
    sweep.add_argument("--config", type=Path, default=argparse.SUPPRESS, help="Sweep file")

    classify_cmd = commands.add_parser("classify", help="Regime of one parameter point")
    _add_params(classify_cmd)
    classify_cmd.add_argument("--c-small", type=float, default=None)
    classify_cmd.add_argument("--c-big", type=float, default=None)
    return parser


def _params(args: argparse.Namespace) -> Params:
    return Params(
        b=args.b, sigma=args.sigma, kappa=args.kappa, degenerate=args.degenerate, **{"lambda": args.lambda_}
    )


def _print(data) -> None:
    print(json.dumps(data, sort_keys=True, indent=2))


def _evaluate(args, settings: Settings) -> int:
    x, u_values, h_values = load_field(args.input)
    grid = Grid1D(n_samples=len(x))
    u = SampledField(grid=grid, values=u_values)
    h = SampledField(grid=grid, values=h_values)
    p = _params(args)
    w = builtin_well(args.well or settings.well)
    breakdown = evaluate_full(u, h, p, w)
    _print({"breakdown": breakdown.model_dump(), "reduced_energy": reduced_energy(u, p, w)})
    return EXIT_OK


def _minimize(args, settings: Settings) -> int:
    p = _params(args)
    w = builtin_well(args.well or settings.well)
    opts = MinimizeOptions(
        grid_n=settings.grid_n,
        max_iters=args.max_iters or settings.max_iters,
        tol_grad=settings.tol_grad,
        starts=standard_starts(p, w, seed=settings.seed, random_starts=args.random_starts),
        workers=settings.workers,
    )
    result = minimize(p, w, opts)
    record = {
        "params": p.model_dump(by_alias=True),
        "best_energy": result.best_energy,
        "young_bound": p.young_bound,
        "per_start": [outcome.model_dump() for outcome in result.per_start],
    }
    save_json(settings.out_dir / "minimize.json", record)
    save_field(settings.out_dir / "minimize_field.csv", result.best_u, result.best_h)
    print(f"best energy {result.best_energy:.10g} ({result.converged_starts}/{len(result.per_start)} starts converged)")
    return EXIT_OK


def _construct(args, settings: Settings) -> int:
    p = _params(args)
    w = builtin_well(args.well or settings.well)
    grid = Grid1D(n_samples=settings.grid_n)
    u, h, summary = construction_summary(
        args.kind, p, w, grid, n=args.n, epsilon=args.epsilon, delta=args.delta
    )
    save_field(settings.out_dir / f"{args.kind}.csv", u, h)
    save_json(settings.out_dir / f"{args.kind}.json", summary.model_dump())
    _print(summary.model_dump())
    return EXIT_OK


def _interpolate(args, settings: Settings) -> int:
    w = builtin_well(args.well or settings.well)
    needed = 64.0 / min(args.deltas)
    n = max(settings.grid_n, 2 ** math.ceil(math.log2(needed)))
    grid = Grid1D(n_samples=n)
    report = interpolation_report(lambda delta: udelta_profile(delta, grid), args.s, args.deltas, w)
    save_json(settings.out_dir / f"interpolation_s{args.s:g}.json", report.model_dump())
    _print({"normalization": report.normalization, **report.model_dump()})
    return EXIT_OK


def _clement(args, settings: Settings) -> int:
    w = builtin_well(args.well or settings.well)
    rows = clement_table(args.d, args.ls, args.ms, args.deltas, w, quad_order=args.quad_order)
    frame = pd.DataFrame.from_records([row.model_dump() for row in rows])
    path = save_frame(settings.out_dir / f"clement_d{args.d}.csv", frame)
    print(frame.to_string(index=False))
    logger.info("Wrote %s", path)
    return EXIT_OK


def _sweep(args, settings: Settings) -> int:
    if args.config is None:
        raise ConfigError("sweep needs --config <file>")
    config = load_sweep_config(
        args.config, grid_n=args.grid_n, seed=args.seed, workers=args.workers
    )
    results = run_sweep(config)
    emit_report(results, settings.out_dir, axis=config.axis)
    summary = summarize(results, config.axis)
    print(f"📊 {summary['points']} points: {summary['regime_counts']}")
    for name, fit in summary["slopes"].items():
        if fit is not None:
            print(f"  - {name}: slope {fit['slope']:.4f} (R² {fit['r2']:.4f})")
    if summary["invariant_violation_count"]:
        for problem in summary["invariant_violations"]:
            print(f"  ❌ {problem}")
        return EXIT_INVARIANT
    return EXIT_OK


def _classify(args, settings: Settings) -> int:
    p = _params(args)
    w = builtin_well(args.well or settings.well)
    if args.c_small is None or args.c_big is None:
        c_small, c_big = default_constants(w)
        c_small = args.c_small if args.c_small is not None else c_small
        c_big = args.c_big if args.c_big is not None else c_big
    else:
        c_small, c_big = args.c_small, args.c_big
    _print(classify(p, w, c_small, c_big).model_dump())
    return EXIT_OK


COMMANDS = {
    "evaluate": _evaluate,
    "minimize": _minimize,
    "construct": _construct,
    "interpolate": _interpolate,
    "clement": _clement,
    "sweep": _sweep,
    "classify": _classify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "grid_n": args.grid_n,
        "seed": args.seed,
        "workers": args.workers,
        "out_dir": args.out,
        "log_level": args.log_level,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.config is not None and args.command != "sweep":
        if not args.config.is_file():
            print(f"❌ Config error: {args.config}: config file not found", file=sys.stderr)
            return EXIT_CONFIG
        overrides["_env_file"] = args.config
    try:
        settings = Settings(**overrides)
    except ValidationError as e:
        print(f"❌ Invalid settings: {e}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(
        level=settings.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )

    try:
        code = COMMANDS[args.command](args, settings)
    except ConfigError as e:
        print(f"❌ Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as e:
        print(f"❌ Invariant violated: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (MembraneError, ValidationError) as e:
        print(f"❌ {args.command} failed: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if code == EXIT_OK:
        print(f"✅ {args.command} completed")
    return code


if __name__ == "__main__":
    sys.exit(main())
