from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import get_logger
from .config import Receiver, Scheme, SimConfig
from .errors import SimulationError
from .feedback import Labeling
from .harness import BerPoint, emit_csv, run_sweep
from .report import compare_report
from .scenarios import SCENARIOS, Scenario, build_scenario

logger = get_logger(__name__)


def parse_snr(text: str) -> list[float]:
    """`start:step:stop` (stop included) or a comma separated list."""
    try:
        if ":" in text:
            start, step, stop = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise argparse.ArgumentTypeError(
                    f"SNR range {text!r} needs step > 0 and stop >= start"
                )
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [float(start + i * step) for i in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Bad SNR list {text!r}: {e}") from e


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError(f"Expected on or off, got {text!r}")
    return text == "on"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdstc",
        description="BER sweeps of randomized distributed space-time coding "
        "over amplify-and-forward relays",
    )
    parser.add_argument("--config", type=Path, help="JSON file of settings")
    parser.add_argument(
        "--scheme",
        nargs="+",
        choices=[s.value for s in Scheme],
        help="one sweep per scheme",
    )
    parser.add_argument("--scenario", choices=list(SCENARIOS))
    parser.add_argument("--snr", type=parse_snr, dest="snr_db_list")
    parser.add_argument("--antennas", type=int)
    parser.add_argument("--relays", type=int)
    parser.add_argument("--direct-link", type=_on_off)
    parser.add_argument("--pilots", type=int)
    parser.add_argument("--payload", type=int)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--mu", type=float)
    parser.add_argument("--feedback-bits", type=int)
    parser.add_argument("--feedback-error-prob", type=float)
    parser.add_argument("--perfect-feedback", action="store_true", default=None)
    parser.add_argument("--labeling", choices=[label.value for label in Labeling])
    parser.add_argument("--receiver", choices=[r.value for r in Receiver])
    parser.add_argument("--min-bit-errors", type=int)
    parser.add_argument("--min-trials", type=int)
    parser.add_argument("--max-trials", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--seed", type=int, dest="master_seed")
    parser.add_argument("--output", type=Path, help="CSV path, stdout if omitted")
    parser.add_argument("--report", type=Path, help="comparison report path")
    return parser


_OVERRIDES = (
    "snr_db_list",
    "antennas",
    "relays",
    "direct_link",
    "pilots",
    "payload",
    "beta",
    "mu",
    "feedback_bits",
    "feedback_error_prob",
    "perfect_feedback",
    "labeling",
    "receiver",
    "min_bit_errors",
    "min_trials",
    "max_trials",
    "workers",
    "master_seed",
)


def sweeps_from_args(args: argparse.Namespace) -> Scenario:
    base = SimConfig.from_json(args.config) if args.config else SimConfig()
    overrides = {
        name: getattr(args, name)
        for name in _OVERRIDES
        if getattr(args, name) is not None
    }
    base = base.clone(**overrides)

    if args.scenario:
        return build_scenario(args.scenario, base)

    schemes = args.scheme or [base.scheme.value]
    return [(scheme, base.clone(scheme=scheme)) for scheme in schemes]


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        sweeps = sweeps_from_args(args)
        for _, config in sweeps:
            config.validate()

        results: dict[str, list[BerPoint]] = {}
        for label, config in sweeps:
            results[label] = run_sweep(config)

        # Rows carry the sweep label; for plain runs it is the scheme name
        points = [
            replace(p, scheme=label) for label, _ in sweeps for p in results[label]
        ]
        emit_csv(points, args.output if args.output else sys.stdout)

        if args.report:
            text = compare_report(results)
            try:
                args.report.write_text(text, encoding="utf-8")
            except OSError as e:
                raise OSError(f"Cannot write report to {args.report}: {e}") from e
    except SimulationError as e:
        logger.error("%s", e)
        return 1
    except OSError as e:
        logger.error("%s", e)
        return 1

    return 0
