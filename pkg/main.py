#!/usr/bin/env python3
"""
nc-kondratiev - command line tools for the non-commutative Kondratiev algebra.

Subcommands:
- mul, norm, invert, apply, dm: series arithmetic and Wick calculus over series JSON files
- vage-const, vage-check: Hilbert-Schmidt constants and a seeded audit of the product bound
- simulate, realize, observable: linear systems with series-valued matrices
- blowup-demo: white-noise norms of truncated products that grow without bound

Exit codes: 0 ok, 2 usage or unreadable input, 3 domain error, 4 property violation.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from calculus import PowerSeriesSpec, apply_series, derivation, wick_inverse
from config import Config
from exceptions import NcKondratievError, PropertyViolation
from linsys import impulse, is_observable_expectation, kernel_trivial_check, simulate, transfer_taylor
from models import (
    CliConfig,
    ImpulseResponseModel,
    SeriesModel,
    SimulationModel,
    SystemModel,
    TrajectoryModel,
    dump_json,
    load_json,
    matrix_from_model,
    matrix_to_model,
    series_from_model,
    series_to_model,
    system_from_model,
)
from quantization import EmbeddingSpec, hs_norm_embedding, vage_bound, vage_constant
from series import TruncationPolicy, norm_p, random_series, white_noise_blowup_demo, wick_mul

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_PROPERTY = 4

logger = logging.getLogger(__name__)


def setup_logging(level: str, log_file: str = "") -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def _emit(text: str, cfg: CliConfig) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_series(path: str):
    return series_from_model(load_json(path, SeriesModel))


def cmd_mul(args, cfg: CliConfig) -> int:
    product = wick_mul(_load_series(args.f), _load_series(args.g), cfg.deterministic)
    _emit(dump_json(series_to_model(product)), cfg)
    return EXIT_OK


def cmd_norm(args, cfg: CliConfig) -> int:
    _emit(f"{norm_p(_load_series(args.f), args.p):.17g}", cfg)
    return EXIT_OK


def cmd_invert(args, cfg: CliConfig) -> int:
    inverse = wick_inverse(_load_series(args.f), cfg.zero_expectation_tol, cfg.deterministic)
    _emit(dump_json(series_to_model(inverse)), cfg)
    return EXIT_OK


def _parse_coeffs(text: str) -> List[complex]:
    try:
        return [complex(part.strip().replace(" ", "")) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse coefficients {text!r}") from None


def _build_phi(args) -> PowerSeriesSpec:
    if args.phi == "exp":
        phi = PowerSeriesSpec.exponential(args.K)
    elif args.phi == "geometric":
        phi = PowerSeriesSpec.geometric(args.K)
    else:
        if not args.coeffs:
            raise argparse.ArgumentTypeError("--phi poly needs --coeffs")
        phi = PowerSeriesSpec.polynomial(_parse_coeffs(args.coeffs))
    if args.radius is not None:
        phi = PowerSeriesSpec(coeffs=phi.coeffs, radius=args.radius)
    return phi


def cmd_apply(args, cfg: CliConfig) -> int:
    phi = _build_phi(args)
    result = apply_series(phi, _load_series(args.f), force=args.force, deterministic=cfg.deterministic)
    _emit(dump_json(series_to_model(result)), cfg)
    return EXIT_OK


def cmd_dm(args, cfg: CliConfig) -> int:
    _emit(dump_json(series_to_model(derivation(args.m, _load_series(args.f)))), cfg)
    return EXIT_OK


def cmd_vage_const(args, cfg: CliConfig) -> int:
    spec = EmbeddingSpec.from_kondratiev(q=args.q, p=args.p)
    table = pd.DataFrame(
        [{"q-p": spec.gap, "hs_norm_T": hs_norm_embedding(spec), "B": vage_constant(spec)}]
    )
    _emit(table.to_string(index=False, float_format=lambda v: f"{v:.15g}"), cfg)
    return EXIT_OK


def cmd_vage_check(args, cfg: CliConfig) -> int:
    if args.q < args.p + 2:
        logger.error(f"vage-check needs q >= p + 2, got p={args.p}, q={args.q}")
        return EXIT_USAGE
    if args.trials < 0:
        logger.error(f"--trials must be >= 0, got {args.trials}")
        return EXIT_USAGE
    rng = np.random.default_rng(cfg.seed)
    trunc = TruncationPolicy(max_len=cfg.trunc_len, max_letter=cfg.max_letter)
    bound = vage_constant(EmbeddingSpec.from_kondratiev(q=args.q, p=args.p))
    left, right, violations = [], [], 0
    for _ in range(args.trials):
        f = random_series(rng, trunc)
        g = random_series(rng, trunc)
        audit = vage_bound(f, g, args.p, args.q)
        left.append(audit.left_ratio)
        right.append(audit.right_ratio)
        if not audit.holds:
            violations += 1
    summary = pd.DataFrame(
        [{
            "p": args.p,
            "q": args.q,
            "trials": args.trials,
            "max_ratio_fg": max(left, default=0.0),
            "max_ratio_gf": max(right, default=0.0),
            "bound": bound,
            "violations": violations,
        }]
    )
    _emit(summary.to_string(index=False, float_format=lambda v: f"{v:.10g}"), cfg)
    if violations:
        raise PropertyViolation(f"{violations} of {args.trials} pairs exceed B_{args.q - args.p} = {bound}")
    return EXIT_OK


def cmd_simulate(args, cfg: CliConfig) -> int:
    model = load_json(args.file, SimulationModel)
    h = [matrix_from_model(m) for m in model.h]
    u = [matrix_from_model(m) for m in model.u]
    steps = args.steps if args.steps is not None else max(len(h), len(u))
    y = simulate(h, u, steps, cfg.deterministic)
    _emit(dump_json(TrajectoryModel(y=[matrix_to_model(m) for m in y])), cfg)
    return EXIT_OK


def cmd_realize(args, cfg: CliConfig) -> int:
    system = system_from_model(load_json(args.file, SystemModel))
    h = transfer_taylor(system, args.K, cfg.deterministic)
    if args.check_impulse:
        y = simulate(h, impulse(system.q_in, args.K + 1, system.D.trunc), args.K + 1, cfg.deterministic)
        if y != h:
            raise PropertyViolation("impulse response differs from the transfer coefficients")
    _emit(dump_json(ImpulseResponseModel(h=[matrix_to_model(m) for m in h])), cfg)
    return EXIT_OK


def cmd_observable(args, cfg: CliConfig) -> int:
    system = system_from_model(load_json(args.file, SystemModel))
    steps = system.n_states if args.strong else args.steps
    observable = is_observable_expectation(system.C, system.A, steps, rank_rtol=cfg.rank_rtol)
    lines = [f"expectation pair observable (steps={steps}): {str(observable).lower()}"]
    if not observable:
        lines.append("kernel recursion: not applicable")
        _emit("\n".join(lines), cfg)
        logger.error(f"(E[C], E[A]) does not have full column rank for steps={steps}")
        return EXIT_DOMAIN
    kernel = kernel_trivial_check(
        system.C, system.A, steps, residual_tol=cfg.residual_tol, rank_rtol=cfg.rank_rtol, seed=cfg.seed
    )
    lines.append(f"kernel recursion trivial: {str(kernel).lower()}")
    _emit("\n".join(lines), cfg)
    if not kernel:
        raise PropertyViolation("the kernel recursion failed although E[O] has full column rank")
    return EXIT_OK


def cmd_blowup_demo(args, cfg: CliConfig) -> int:
    norms = white_noise_blowup_demo(args.steps)
    table = pd.DataFrame({"N": range(1, args.steps + 1), "norm_0": norms})
    _emit(table.to_string(index=False, float_format=lambda v: f"{v:.10g}"), cfg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help='Seed for randomized checks')
    common.add_argument('--deterministic', action='store_true', default=None, help='Canonical summation order')
    common.add_argument('--trunc-len', type=int, default=None, help='Maximum word length for generated series')
    common.add_argument('--max-letter', type=int, default=None, help='Largest letter for generated series')
    common.add_argument('--zero-tol', type=float, default=None, help='|E[f]| below this is treated as zero')
    common.add_argument('--rank-rtol', type=float, default=None, help='Relative threshold for numerical rank')
    common.add_argument('--residual-tol', type=float, default=None, help='Kernel recursion residual tolerance')
    common.add_argument('--out', default=None, help='Write the result here instead of stdout')
    common.add_argument('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR')

    parser = argparse.ArgumentParser(prog='nc-kondratiev', description='Non-commutative Kondratiev algebra tools')
    parser.add_argument('--config-dump', action='store_true', help='Print the effective configuration and exit')
    sub = parser.add_subparsers(dest='command')

    p = sub.add_parser('mul', parents=[common], help='Wick product f (x) g')
    p.add_argument('f')
    p.add_argument('g')
    p.set_defaults(handler=cmd_mul)

    p = sub.add_parser('norm', parents=[common], help='Weighted norm ||f||_p')
    p.add_argument('f')
    p.add_argument('--p', type=int, default=0)
    p.set_defaults(handler=cmd_norm)

    p = sub.add_parser('invert', parents=[common], help='Wick inverse')
    p.add_argument('f')
    p.set_defaults(handler=cmd_invert)

    p = sub.add_parser('apply', parents=[common], help='Power series of f in the Wick algebra')
    p.add_argument('f')
    p.add_argument('--phi', choices=['exp', 'geometric', 'poly'], default='exp')
    p.add_argument('--coeffs', default=None, help='Comma-separated coefficients phi_0,phi_1,... for poly')
    p.add_argument('--K', type=int, default=20, help='Number of scalar terms for exp and geometric')
    p.add_argument('--radius', type=float, default=None, help='Radius of convergence of phi')
    p.add_argument('--force', action='store_true', help='Evaluate even when |E[f]| >= R/B_2')
    p.set_defaults(handler=cmd_apply)

    p = sub.add_parser('dm', parents=[common], help='Letter derivation D_m')
    p.add_argument('f')
    p.add_argument('--m', type=int, required=True)
    p.set_defaults(handler=cmd_dm)

    p = sub.add_parser('vage-const', parents=[common], help='Hilbert-Schmidt constant B_{q-p}')
    p.add_argument('--p', type=int, default=0)
    p.add_argument('--q', type=int, default=2)
    p.set_defaults(handler=cmd_vage_const)

    p = sub.add_parser('vage-check', parents=[common], help='Seeded audit of the Wick product bound')
    p.add_argument('--p', type=int, default=0)
    p.add_argument('--q', type=int, default=2)
    p.add_argument('--trials', type=int, default=1000)
    p.set_defaults(handler=cmd_vage_check)

    p = sub.add_parser('simulate', parents=[common], help='y_n = sum h_m (x) u_{n-m}')
    p.add_argument('file')
    p.add_argument('--steps', type=int, default=None)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser('realize', parents=[common], help='Taylor coefficients of D + zC(I-zA)^-1 B')
    p.add_argument('file')
    p.add_argument('--K', type=int, default=4)
    p.add_argument('--check-impulse', action='store_true', help='Cross-check against the simulated impulse response')
    p.set_defaults(handler=cmd_realize)

    p = sub.add_parser('observable', parents=[common], help='Observability of (C, A)')
    p.add_argument('file')
    p.add_argument('--steps', type=int, default=2)
    p.add_argument('--strong', action='store_true', help='Use steps = N')
    p.set_defaults(handler=cmd_observable)

    p = sub.add_parser('blowup-demo', parents=[common], help='White-noise norms of truncated products')
    p.add_argument('--steps', type=int, default=10)
    p.set_defaults(handler=cmd_blowup_demo)

    return parser


def _pick(value, default):
    return default if value is None else value


def build_config(args) -> CliConfig:
    return CliConfig(
        seed=_pick(getattr(args, 'seed', None), Config.SEED),
        deterministic=_pick(getattr(args, 'deterministic', None), Config.DETERMINISTIC),
        trunc_len=_pick(getattr(args, 'trunc_len', None), Config.TRUNC_LEN),
        max_letter=_pick(getattr(args, 'max_letter', None), Config.MAX_LETTER),
        zero_expectation_tol=_pick(getattr(args, 'zero_tol', None), Config.ZERO_EXPECTATION_TOL),
        rank_rtol=_pick(getattr(args, 'rank_rtol', None), Config.RANK_RTOL),
        residual_tol=_pick(getattr(args, 'residual_tol', None), Config.RESIDUAL_TOL),
        output=getattr(args, 'out', None),
        log_level=_pick(getattr(args, 'log_level', None), Config.LOG_LEVEL),
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = build_config(args)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    except ValidationError as e:
        print(f"Invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(cfg.log_level, Config.LOG_FILE)

    if args.config_dump:
        print(cfg.model_dump_json(indent=2))
        return EXIT_OK
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE

    try:
        return args.handler(args, cfg)
    except (OSError, ValidationError, json.JSONDecodeError, argparse.ArgumentTypeError) as e:
        logger.error(f"Invalid input for {args.command}: {e}")
        return EXIT_USAGE
    except PropertyViolation as e:
        logger.error(f"Property violation: {e}")
        return EXIT_PROPERTY
    except NcKondratievError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
