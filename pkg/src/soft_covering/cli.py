"""``softcover`` command line: exponent queries, second-order plans, sweeps and Gaussian mixtures.

Every subcommand prints a JSON report on stdout; ``simulate`` and ``gaussian``
also write CSV/JSON artifacts under ``--out``. Exit codes: 0 success,
2 invalid parameters, 3 resource caps, 1 internal check failures.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv

from . import __version__
from .errors import ConfigError, SoftCoverError
from .exponents import LOG_BASE_NOTE, MU_N_NOTE, gamma_delta, second_order_plan
from .gaussian import (
    emit_density_grid,
    gaussian_mutual_information,
    mixture_tv,
    optimize_codewords,
    rate_is_sufficient,
    sample_gaussian_codebook,
)
from .info_measures import info_profile
from .models.config import RunConfig, load_run_config
from .montecarlo import SweepResult, run_sweep

logger = logging.getLogger(__name__)

THREADS_ENV = "SOFTCOVER_THREADS"
LOG_LEVEL_ENV = "SOFTCOVER_LOG_LEVEL"
BOUNDARY_NOTE = "the exponent supremum is attained only in the limit alpha -> infinity"
VACUOUS_NOTE = "the failure probability bound is vacuous (>= 1) at this blocklength"


def _paper_notes(*notes: str) -> list[str]:
    """Interpretation notes for JSON outputs; the mu_n reading always leads."""
    return list(dict.fromkeys((MU_N_NOTE, *notes)))


def _float_list(value: str) -> list[float]:
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {value!r}") from e


def _channel_arg(value: str) -> str | dict[str, Any]:
    """Shorthand string, inline JSON mapping, or a path to a YAML/JSON channel file."""
    if value.lstrip().startswith("{"):
        try:
            return yaml.safe_load(value)
        except yaml.YAMLError as e:
            raise argparse.ArgumentTypeError(f"malformed inline channel {value!r}: {e}") from e
    path = Path(value)
    if path.is_file():
        try:
            with open(path, encoding="utf-8") as f:
                return yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            raise argparse.ArgumentTypeError(f"cannot read channel file {path}: {e}") from e
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML or JSON run configuration")
    common.add_argument("--seed", type=int, help="64-bit master seed")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory for artifacts")
    common.add_argument("--threads", type=int, help=f"worker threads (default: ${THREADS_ENV} or all cores)")
    common.add_argument("--log-level", help=f"logging level (default: ${LOG_LEVEL_ENV} or WARNING)")

    channel = argparse.ArgumentParser(add_help=False)
    channel.add_argument("--channel", type=_channel_arg, help="bsc:p, bec:p, noiseless:k, JSON or a file")
    channel.add_argument("--input-dist", type=_float_list, help="input distribution, comma separated")

    second = argparse.ArgumentParser(add_help=False)
    second.add_argument("--epsilon", type=float, help="TV target in (0, 1)")
    second.add_argument("--c", type=float, help="log n coefficient of the rate (> 2)")
    second.add_argument("--d", type=float, help="good-set coefficient (< c - 1)")
    second.add_argument("--r", type=float, help="slack coefficient in (0, c - d - 1)")

    parser = argparse.ArgumentParser(prog="softcover", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    exponent = sub.add_parser("exponent", parents=[common, channel], help="exponent and fixed-rate failure bound")
    exponent.add_argument("--rate", type=float, help="codebook rate in bits")
    exponent.add_argument("--delta", type=float, help="slack in (0, R - I)")
    exponent.add_argument("--n", type=int, help="blocklength for the TV threshold and failure bound")

    plan = sub.add_parser("second-order", parents=[common, channel, second], help="second-order rate plan")
    plan.add_argument("--n", type=int, help="blocklength")

    simulate = sub.add_parser("simulate", parents=[common, channel, second], help="Monte Carlo sweep")
    simulate.add_argument("--rate", type=float, help="fixed codebook rate in bits")
    simulate.add_argument("--delta", type=float, help="slack for the fixed-rate bounds")
    simulate.add_argument("--n-list", type=int, nargs="+", help="ascending blocklengths")
    simulate.add_argument("--trials", type=int, help="codebooks per blocklength")
    simulate.add_argument("--second-order", action="store_true", default=None, help="use second-order rates")
    simulate.add_argument("--epsilon-override", type=float, help="fixed typicality slack")
    simulate.add_argument("--thresholds", type=_float_list, help="extra TV tail thresholds")
    simulate.add_argument("--max-codewords", type=int, help="codebook size cap")
    simulate.add_argument("--max-outputs", type=int, help="|Y|^n cap")

    gauss = sub.add_parser("gaussian", parents=[common], help="Gaussian mixture soft covering")
    gauss.add_argument("--snr", type=float, help="input to noise variance ratio")
    gauss.add_argument("--dim", type=int, choices=(1, 2), help="dimension")
    gauss.add_argument("--b", type=int, help="codewords per dimension")
    gauss.add_argument("--noise-var", type=float, help="noise variance")
    gauss.add_argument("--grid-points", type=int, help="quadrature points per axis")
    gauss.add_argument("--optimize", action="store_true", default=None, help="run the pattern search")
    gauss.add_argument("--max-iters", type=int, help="pattern search sweeps")
    gauss.add_argument("--tol", type=float, help="pattern search step tolerance")
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    values = vars(args)
    return {name: values[name] for name in RunConfig.model_fields if name in values}


def _resolve_threads(cfg: RunConfig) -> int | None:
    if cfg.threads is not None:
        return cfg.threads
    raw = os.getenv(THREADS_ENV)
    if not raw:
        return None
    try:
        threads = int(raw)
    except ValueError as e:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from e
    if threads < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return threads


def _jsonable(value: Any) -> Any:
    """Replace non-finite floats with strings so the output is strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(v) for v in value]
    return value


def _dump_json(payload: dict[str, Any]) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True)


def _require(cfg: RunConfig, *names: str) -> None:
    missing = [name for name in names if getattr(cfg, name) is None]
    if missing:
        raise ConfigError(f"missing required parameter(s): {', '.join(missing)}")


def cmd_exponent(cfg: RunConfig, out: Path) -> dict[str, Any]:
    _require(cfg, "rate", "delta")
    qx, ch = cfg.resolve_channel()
    result = gamma_delta(qx, ch, cfg.rate, cfg.delta, n=cfg.n)
    notes = []
    if result.alpha_star == "boundary":
        notes.append(BOUNDARY_NOTE)
    if result.vacuous:
        notes.append(VACUOUS_NOTE)
    return {
        "rate_bits": result.rate_bits,
        "delta": result.delta,
        "mutual_info_bits": result.mutual_info_bits,
        "gamma_delta": result.gamma_delta,
        "alpha_star": result.alpha_star,
        "epsilon_star": result.epsilon_star,
        "beta": result.beta,
        "n": result.n,
        "tv_threshold": result.tv_threshold,
        "failure_prob_log": result.failure_log,
        "vacuous": result.vacuous,
        "paper_notes": _paper_notes(*notes),
    }


def cmd_second_order(cfg: RunConfig, out: Path) -> dict[str, Any]:
    _require(cfg, "epsilon", "n")
    qx, ch = cfg.resolve_channel()
    plan = second_order_plan(
        info_profile(qx, ch), cfg.epsilon, cfg.n, cfg.c, cfg.d, cfg.r, output_size=ch.output.size
    )
    notes = [LOG_BASE_NOTE]
    if plan.vacuous:
        notes.append(VACUOUS_NOTE)
    return {**plan.model_dump(), "paper_notes": _paper_notes(*notes)}


def _write_sweep_csv(result: SweepResult, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["n", "trial", "seed", "tv", "p2_mass", "d1_max", "pos_part_d1"])
        for rec in result.records:
            rep = rec.report
            writer.writerow(
                [rec.n, rec.trial, rec.seed]
                + [repr(v) for v in (rep.tv, rep.p2_mass, rep.d1_max, rep.pos_part_d1)]
            )


def cmd_simulate(cfg: RunConfig, out: Path) -> dict[str, Any]:
    trial_cfg = cfg.trial_config()
    result = run_sweep(trial_cfg, threads=_resolve_threads(cfg))
    violations = result.consistency_violations()
    for line in violations:
        logger.warning("empirical tail above theorem bound: %s", line)

    out.mkdir(parents=True, exist_ok=True)
    _write_sweep_csv(result, out / "sweep.csv")
    summary = {
        "config": cfg.model_dump(mode="json", exclude={"threads"}),
        "per_n": [s.model_dump(exclude={"tvs"}) for s in result.per_n],
        "fit": result.fit.model_dump() if result.fit else None,
        "fit_note": result.fit_note,
        "consistency_violations": violations,
        "paper_notes": _paper_notes(*result.notes),
    }
    (out / "summary.json").write_text(_dump_json(summary) + "\n", encoding="utf-8")
    return summary


def cmd_gaussian(cfg: RunConfig, out: Path) -> dict[str, Any]:
    setup = cfg.gaussian_setup()
    codewords = sample_gaussian_codebook(setup)
    initial_tv = mixture_tv(codewords, setup)
    if cfg.optimize:
        codewords = optimize_codewords(codewords, setup, cfg.max_iters, cfg.tol)
    tv = mixture_tv(codewords, setup)
    grid = emit_density_grid(codewords, setup)

    out.mkdir(parents=True, exist_ok=True)
    with open(out / "density_grid.csv", "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        if setup.dim == 1:
            writer.writerow(["x", "mixture", "target"])
            for row in zip(grid.axis, grid.mixture, grid.target):
                writer.writerow([repr(float(v)) for v in row])
        else:
            writer.writerow(["x", "y", "mixture"])
            for i, x in enumerate(grid.axis):
                for j, y in enumerate(grid.axis):
                    writer.writerow([repr(float(x)), repr(float(y)), repr(float(grid.mixture[i, j]))])
    with open(out / "codewords.csv", "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["x", "y"][: setup.dim])
        for point in grid.codewords:
            writer.writerow([repr(float(v)) for v in point])

    mi = gaussian_mutual_information(setup.snr)
    notes = []
    if not rate_is_sufficient(setup):
        notes.append(f"log2(b) = {math.log2(setup.b):.4g} bits does not exceed I = {mi:.4g} bits")
    report = {
        "tv": tv,
        "initial_tv": initial_tv,
        "seed": setup.seed,
        "optimized": bool(cfg.optimize),
        "snr": setup.snr,
        "dim": setup.dim,
        "b": setup.b,
        "noise_var": setup.noise_var,
        "mutual_information_bits": mi,
        "rate_bits": math.log2(setup.b),
        "paper_notes": _paper_notes(*notes),
    }
    (out / "tv.json").write_text(_dump_json(report) + "\n", encoding="utf-8")
    return report


COMMANDS: dict[str, Callable[[RunConfig, Path], dict[str, Any]]] = {
    "exponent": cmd_exponent,
    "second-order": cmd_second_order,
    "simulate": cmd_simulate,
    "gaussian": cmd_gaussian,
}


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    level = (args.log_level or os.getenv(LOG_LEVEL_ENV) or "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_run_config(args.config, _overrides(args))
        payload = COMMANDS[args.command](cfg, args.out)
    except SoftCoverError as e:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"error [{e.code}]: {e.message}", file=sys.stderr)
        return e.exit_code
    print(_dump_json(payload))
    return 0


if __name__ == "__main__":
    sys.exit(main())
