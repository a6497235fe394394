"""Side-by-side comparison of BER sweeps."""

from __future__ import annotations

from io import StringIO
from itertools import permutations
from typing import Mapping, Sequence

import numpy as np
from rich import box
from rich.console import Console
from rich.table import Table

from .errors import InputError
from .harness import BerPoint

TARGET_BERS = (1e-2, 1e-3)
NOT_REACHED = "not reached"


def _log_ber(point: BerPoint) -> float:
    # A point without errors is placed at half an error
    ber = point.ber if point.bit_errors else 0.5 / point.bits_sent
    return float(np.log10(ber))


def crossing_snr(points: Sequence[BerPoint], target: float) -> float | None:
    """SNR at which the curve first falls to `target`, interpolated linearly in
    log10(BER). None if it never does within the grid, or starts below it."""
    points = sorted(points, key=lambda p: p.snr_db)
    log_target = np.log10(target)
    for lo, hi in zip(points, points[1:]):
        y0, y1 = _log_ber(lo), _log_ber(hi)
        if y0 >= log_target >= y1:
            if y0 == y1:
                return lo.snr_db
            slope = (hi.snr_db - lo.snr_db) / (y1 - y0)
            return lo.snr_db + (log_target - y0) * slope
    return None


def snr_gains(
    sweeps: Mapping[str, Sequence[BerPoint]], target: float
) -> dict[tuple[str, str], float | None]:
    """Gain of the first label over the second: how much less SNR it needs to
    reach `target`. None where either curve does not reach it."""
    crossings = {
        label: crossing_snr(points, target) for label, points in sweeps.items()
    }
    gains: dict[tuple[str, str], float | None] = {}
    for a, b in permutations(sweeps, 2):
        ca, cb = crossings[a], crossings[b]
        gains[a, b] = None if ca is None or cb is None else cb - ca
    return gains


def _common_grid(sweeps: Mapping[str, Sequence[BerPoint]]) -> list[float]:
    grids = [{p.snr_db for p in points} for points in sweeps.values()]
    common = set.intersection(*grids)
    if not common:
        raise InputError(f"Sweeps {', '.join(sweeps)} share no SNR point")
    return sorted(common)


def compare_report(
    sweeps: Mapping[str, Sequence[BerPoint]], *, width: int = 100
) -> str:
    if not sweeps:
        raise InputError("Nothing to compare")

    grid = _common_grid(sweeps)
    on_grid = {
        label: [p for p in points if p.snr_db in grid]
        for label, points in sweeps.items()
    }

    table = Table(title="BER", box=box.ASCII)
    table.add_column("SNR (dB)", justify="right")
    for label in sweeps:
        table.add_column(label, justify="right")

    by_snr = {label: {p.snr_db: p for p in points} for label, points in on_grid.items()}
    for snr in grid:
        bers = (f"{by_snr[label][snr].ber:.3e}" for label in sweeps)
        table.add_row(f"{snr:g}", *bers)

    console = Console(file=StringIO(), width=width, color_system=None)
    console.print(table)

    if len(sweeps) > 1:
        gains = Table(title="SNR gain (dB) of row over column", box=box.ASCII)
        gains.add_column("BER")
        gains.add_column("scheme")
        for label in sweeps:
            gains.add_column(label, justify="right")
        for target in TARGET_BERS:
            measured = snr_gains(on_grid, target)
            for a in sweeps:
                cells = []
                for b in sweeps:
                    if a == b:
                        cells.append("-")
                    elif (gain := measured[a, b]) is None:
                        cells.append(NOT_REACHED)
                    else:
                        cells.append(f"{gain:+.2f}")
                gains.add_row(f"{target:.0e}", a, *cells)
        console.print(gains)

    return console.file.getvalue()  # type: ignore[attr-defined]
