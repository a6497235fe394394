"""Monte Carlo BER sweeps.

Every trial gets its own seed, derived from (master seed, scheme, SNR index,
trial index, attempt), so results do not depend on the order trials run in.
Trials of an SNR point run in fixed-size batches; the stopping rule is only
checked between batches, which keeps the trial count of a point identical
whether the batch runs in one process or many.
"""

from __future__ import annotations

from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np
import pandas as pd

from . import get_logger
from .channel import NoiseModel
from .config import Scheme, SimConfig
from .errors import DivergenceError, SweepAbortedError
from .schemes import TrialStreams, make_transceiver

logger = get_logger(__name__, indent=True)

CSV_COLUMNS = ["scheme", "snr_db", "bits_sent", "bit_errors", "ber", "config_hash"]

# Re-draws of one trial before the sweep gives up on it
MAX_ATTEMPTS = 10


@dataclass(frozen=True)
class BerPoint:
    scheme: str
    snr_db: float
    bits_sent: int
    bit_errors: int
    config_hash: str
    failed_trials: int = 0
    trials: int = 0

    def __post_init__(self) -> None:
        if self.bits_sent < 1 or not 0 <= self.bit_errors <= self.bits_sent:
            raise ValueError(
                f"Inconsistent counts: {self.bit_errors} errors "
                f"in {self.bits_sent} bits"
            )

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_sent

    @property
    def stderr(self) -> float:
        """Binomial standard error of `ber`."""
        return float(np.sqrt(self.ber * (1 - self.ber) / self.bits_sent))

    def __str__(self) -> str:
        return (
            f"{self.scheme} @ {self.snr_db:g} dB: BER {self.ber:.4e} "
            f"({self.bit_errors}/{self.bits_sent}, {self.failed_trials} re-drawn)"
        )


@dataclass(frozen=True)
class TrialOutcome:
    bits_sent: int
    bit_errors: int
    failures: int = 0


def trial_seed(
    master_seed: int,
    scheme: Scheme,
    snr_index: int,
    trial_index: int,
    attempt: int = 0,
) -> np.random.SeedSequence:
    scheme_index = list(Scheme).index(Scheme(scheme))
    return np.random.SeedSequence(
        [master_seed, scheme_index, snr_index, trial_index, attempt]
    )


def run_trial(
    config: SimConfig, snr_db: float, seed: np.random.SeedSequence
) -> tuple[int, int]:
    """One coherence block end to end; counts cover the payload only."""
    transceiver = make_transceiver(config, NoiseModel.from_snr_db(snr_db))
    result = transceiver.run_block(TrialStreams.from_seed(seed))
    logger.debug("%d errors in %d bits", result.bit_errors, result.bits_sent)
    return result.bits_sent, result.bit_errors


def _run_with_retries(
    config: SimConfig, snr_db: float, snr_index: int, trial_index: int
) -> TrialOutcome:
    for attempt in range(MAX_ATTEMPTS):
        seed = trial_seed(
            config.master_seed, config.scheme, snr_index, trial_index, attempt
        )
        try:
            sent, errors = run_trial(config, snr_db, seed)
        except DivergenceError as e:
            logger.warning("Trial %d re-drawn: %s", trial_index, e)
            continue
        return TrialOutcome(sent, errors, attempt)

    raise SweepAbortedError(
        f"Trial {trial_index} at {snr_db:g} dB diverged on all {MAX_ATTEMPTS} attempts"
    )


def _stop(config: SimConfig, trials: int, bit_errors: int) -> bool:
    if trials >= config.max_trials:
        return True
    return trials >= config.min_trials and bit_errors >= config.min_bit_errors


def run_point(
    config: SimConfig,
    snr_index: int,
    executor: Executor | None = None,
    config_hash: str | None = None,
) -> BerPoint:
    snr_db = config.snr_db_list[snr_index]
    trials = sent = errors = failures = 0

    while not _stop(config, trials, errors):
        batch = range(trials, min(trials + config.batch_size, config.max_trials))
        task = partial(_run_with_retries, config, snr_db, snr_index)
        outcomes: Iterable[TrialOutcome]
        if executor is None:
            outcomes = map(task, batch)
        else:
            outcomes = executor.map(task, batch)

        for outcome in outcomes:
            sent += outcome.bits_sent
            errors += outcome.bit_errors
            failures += outcome.failures
        trials = batch.stop

    point = BerPoint(
        scheme=config.scheme.value,
        snr_db=snr_db,
        bits_sent=sent,
        bit_errors=errors,
        config_hash=config_hash or config.digest(),
        failed_trials=failures,
        trials=trials,
    )

    if failures > config.failure_cap * trials:
        logger.error("Aborting: %s", point)
        raise SweepAbortedError(
            f"{failures} diverged trials in {trials} at {snr_db:g} dB exceed "
            f"the cap of {config.failure_cap:.2%}"
        )
    if point.ber > 0.5 + 3 * point.stderr:
        logger.error("Aborting: %s", point)
        raise SweepAbortedError(f"BER above one half: {point}")

    return point


def run_sweep(config: SimConfig) -> list[BerPoint]:
    config.validate()
    config_hash = config.digest()
    logger.info(
        "Sweep %s over %d SNR points (config %s)",
        config.scheme.value,
        len(config.snr_db_list),
        config_hash,
    )

    points = []
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            for i in range(len(config.snr_db_list)):
                points.append(run_point(config, i, executor, config_hash))
                logger.info("%s", points[-1])
    else:
        for i in range(len(config.snr_db_list)):
            points.append(run_point(config, i, None, config_hash))
            logger.info("%s", points[-1])

    logger.info("Sweep %s done", config.scheme.value)
    return points


def format_ber(ber: float) -> str:
    """Positional notation with six significant digits."""
    return np.format_float_positional(
        ber, precision=6, unique=False, fractional=False, trim="-"
    )


def points_frame(points: Sequence[BerPoint]) -> pd.DataFrame:
    rows = [
        {
            "scheme": p.scheme,
            "snr_db": p.snr_db,
            "bits_sent": p.bits_sent,
            "bit_errors": p.bit_errors,
            "ber": format_ber(p.ber),
            "config_hash": p.config_hash,
        }
        for p in points
    ]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def emit_csv(points: Sequence[BerPoint], destination: str | Path | IO[str]) -> None:
    frame = points_frame(points)
    if not isinstance(destination, (str, Path)):
        frame.to_csv(destination, index=False, lineterminator="\n")
        return

    try:
        frame.to_csv(destination, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as e:
        raise OSError(f"Cannot write CSV to {destination}: {e}") from e
