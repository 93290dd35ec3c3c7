#!/usr/bin/env python3
"""Command-line front-end: run a configured scan or the limits-check suite.

    python app.py run --config templates/figure_4a.json --out fig4a.csv
    python app.py check --format json
"""
import argparse
import json
import logging
import sys
from typing import List, Optional

import pandas as pd

from config import SCALAR_FIELDS, RunConfig
from src import __version__
from src.analyzers.friction_scanner import FrictionScanner
from src.analyzers.limits_checker import LimitsChecker
from src.core.composite import SystemSpec
from src.core.errors import (
    ConfigError,
    DivisionByZeroVal,
    ExportFailure,
    NoCoolingPoint,
    NonConvergent,
    RegimeError,
    SingularDenominator,
    UnsupportedRegime,
)
from src.core.scatterer import CONSTANT, Polarizability
from src.core.singlebs import averaging_bandwidth
from src.utils.export_utils import ExportManager
from src.utils.parallel import resolve_threads

logger = logging.getLogger("optomech")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_REGIME = 3
EXIT_IO = 4

REGIME_ERRORS = (UnsupportedRegime, NonConvergent, SingularDenominator, NoCoolingPoint, DivisionByZeroVal)
DOPPLER_PHASE_LIMIT = 0.1

_FLAG_TYPES = {"mode": str, "figure": str, "kind": str, "seed": int}


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optomech", description="1D transfer-matrix opto-mechanics")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", help="output file; standard output when omitted")
        p.add_argument("--format", choices=["csv", "json", "xlsx"], help="output format")
        p.add_argument("--threads", type=int, help="worker threads (default: $OPTOMECH_THREADS or 1)")
        p.add_argument("--log-level", default="INFO", help="DEBUG, INFO, WARNING or ERROR")

    run = sub.add_parser("run", help="run one configured scan")
    run.add_argument("--config", required=True, help="JSON run configuration")
    common(run)
    overrides = run.add_argument_group("field overrides")
    for name in SCALAR_FIELDS:
        overrides.add_argument(f"--{name}", dest=name, type=_FLAG_TYPES.get(name, float), default=None)

    check = sub.add_parser("check", help="run the full limits-check suite")
    check.add_argument("--seed", type=int, default=0)
    common(check)
    return parser


def build_spec(cfg: RunConfig) -> SystemSpec:
    zeta = cfg.zeta_complex if cfg.zeta_imag else cfg.zeta
    r_fixed = cfg.r_complex if cfg.r_fixed_imag else cfg.r_fixed
    return SystemSpec(zeta=zeta, r_fixed=r_fixed, k0L=cfg.k0L, x=cfg.x,
                      flux=cfg.flux, eps=cfg.eps, k0=cfg.k0)


def build_polarizability(cfg: RunConfig) -> Polarizability:
    if cfg.kind == CONSTANT:
        return Polarizability.constant(cfg.zeta_complex)
    return Polarizability.two_level_atom(cfg.gamma, cfg.detuning, cfg.cross_section_ratio)


def compute(cfg: RunConfig, threads: int) -> pd.DataFrame:
    """Dispatch on cfg.mode; core regime failures come out as RegimeError."""
    try:
        spec = build_spec(cfg)
    except ValueError as e:
        raise ConfigError("system", str(e))
    scanner = FrictionScanner(spec, threads)
    try:
        if cfg.mode == "single-bs":
            return scanner.single_bs_scan(build_polarizability(cfg), cfg.b0, cfg.c0, cfg.grid.points())
        if cfg.mode == "composite-scan":
            return scanner.composite_scan(cfg.grid.points())
        if cfg.mode == "max-friction-vs-zeta":
            return scanner.max_friction_vs_zeta(cfg.zeta_points())[["zeta", "k0x_max", "beta_max"]]
        if cfg.mode == "temperature-vs-zeta":
            return scanner.temperature_vs_zeta(cfg.zeta_points())
        if cfg.mode == "figure":
            return scanner.figure(cfg.figure, cfg.zetas)
        return LimitsChecker(seed=cfg.seed, k0L=cfg.k0L, threads=threads).run()
    except REGIME_ERRORS as e:
        raise RegimeError(f"{type(e).__name__}: {e}") from e


def emit(df: pd.DataFrame, cfg: RunConfig) -> None:
    exporter = ExportManager(cfg.to_dict())
    fmt = cfg.output.format
    if cfg.output.path:
        exporter.export_df(df, cfg.output.path, fmt)
    elif fmt == "json":
        sys.stdout.write(json.dumps(exporter.to_json_report(df), indent=2) + "\n")
    elif fmt == "csv":
        sys.stdout.write(exporter.to_csv_text(df))
    else:
        raise ConfigError("output.path", "xlsx output needs a file path")


def _run(args: argparse.Namespace) -> int:
    try:
        cfg = RunConfig.load(args.config)
        cfg.override({name: getattr(args, name) for name in SCALAR_FIELDS})
        if args.out:
            cfg.output.path = args.out
        if args.format:
            cfg.output.format = args.format
        cfg.validate()
        threads = resolve_threads(args.threads)
    except OSError as e:
        logger.error("cannot read configuration: %s", e)
        return EXIT_IO
    except ValueError as e:
        logger.error("configuration error: %s", e)
        return EXIT_CONFIG

    # half the Doppler bandwidth times the mirror delay L/c is v/c * k0L
    bandwidth, window = averaging_bandwidth(cfg.k0, cfg.eps)
    doppler_phase = 0.5 * bandwidth * cfg.k0L / cfg.k0
    if doppler_phase > DOPPLER_PHASE_LIMIT:
        logger.warning("v/c * k0L = %.3g exceeds %.1f (averaging window %.3g); "
                       "the time-averaged force is outside its validity range",
                       doppler_phase, DOPPLER_PHASE_LIMIT, window)

    logger.info("mode=%s threads=%d", cfg.mode, threads)
    try:
        df = compute(cfg, threads)
        emit(df, cfg)
    except ConfigError as e:
        logger.error("configuration error: %s", e)
        return EXIT_CONFIG
    except RegimeError as e:
        logger.error("regime error: %s", e)
        return EXIT_REGIME
    except ExportFailure as e:
        logger.error("%s", e)
        return EXIT_IO

    if cfg.mode == "limits-check" and not df["passed"].all():
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _check(args: argparse.Namespace) -> int:
    cfg = RunConfig(mode="limits-check", seed=args.seed)
    cfg.output.path = args.out
    cfg.output.format = args.format or "json"
    try:
        threads = resolve_threads(args.threads)
    except ValueError as e:
        logger.error("configuration error: %s", e)
        return EXIT_CONFIG
    report = LimitsChecker(seed=cfg.seed, k0L=cfg.k0L, threads=threads).run()
    try:
        emit(report, cfg)
    except ConfigError as e:
        logger.error("configuration error: %s", e)
        return EXIT_CONFIG
    except ExportFailure as e:
        logger.error("%s", e)
        return EXIT_IO
    return EXIT_OK if report["passed"].all() else EXIT_CHECK_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    if args.command == "run":
        return _run(args)
    return _check(args)


if __name__ == "__main__":
    sys.exit(main())
