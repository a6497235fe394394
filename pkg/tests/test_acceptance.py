"""Statistical reproductions of the published BER comparisons.

These take minutes and are deselected by default; run them with
`pytest -m slow`.
"""

import io

import numpy as np
import pytest

from rdstc.config import SimConfig
from rdstc.harness import BerPoint, emit_csv, run_sweep
from rdstc.report import snr_gains

pytestmark = pytest.mark.slow

GRID = [float(s) for s in range(0, 17, 2)]


def within(lower: BerPoint, upper: BerPoint, k: float = 2.0) -> bool:
    """lower.ber <= upper.ber up to k combined standard errors."""
    return lower.ber <= upper.ber + k * np.hypot(lower.stderr, upper.stderr)


@pytest.fixture(scope="module")
def base() -> SimConfig:
    return SimConfig(
        snr_db_list=GRID,
        min_bit_errors=200,
        min_trials=500,
        max_trials=5000,
        master_seed=2024,
        workers=4,
    )


@pytest.fixture(scope="module")
def scheme_sweeps(base) -> dict[str, list[BerPoint]]:
    return {
        scheme: run_sweep(base.clone(scheme=scheme))
        for scheme in ("sm", "stc-af", "rstc", "alrrmo")
    }


class TestSchemeOrdering:
    def test_ordering(self, scheme_sweeps) -> None:
        for i, snr in enumerate(GRID):
            if snr < 6:
                continue
            alrrmo = scheme_sweeps["alrrmo"][i]
            rstc = scheme_sweeps["rstc"][i]
            stc_af = scheme_sweeps["stc-af"][i]
            sm = scheme_sweeps["sm"][i]
            assert within(alrrmo, rstc)
            assert within(rstc, stc_af)
            for point in (alrrmo, rstc, stc_af):
                assert within(point, sm)

    def test_gains(self, scheme_sweeps) -> None:
        gains = snr_gains(scheme_sweeps, 1e-2)
        for other in ("rstc", "stc-af"):
            gain = gains["alrrmo", other]
            assert gain is not None and 0.5 <= gain <= 5.0


class TestDeterminism:
    def test_rerun_gives_identical_csv(self, base, scheme_sweeps) -> None:
        def csv_bytes(sweeps) -> bytes:
            out = io.StringIO()
            emit_csv([p for points in sweeps.values() for p in points], out)
            return out.getvalue().encode()

        rerun = {
            scheme: run_sweep(base.clone(scheme=scheme, workers=1))
            for scheme in scheme_sweeps
        }
        assert csv_bytes(rerun) == csv_bytes(scheme_sweeps)


class TestFeedback:
    def test_degradation(self, base) -> None:
        perfect = run_sweep(base.clone(scheme="alrrmo", perfect_feedback=True))
        quantized = run_sweep(
            base.clone(scheme="alrrmo", feedback_bits=4, feedback_error_prob=1e-3)
        )
        gain = snr_gains({"perfect": perfect, "quantized": quantized}, 1e-2)
        shift = gain["perfect", "quantized"]
        assert shift is not None and shift <= 2.0

    def test_more_bits_help(self, base) -> None:
        fixed = base.clone(
            scheme="alrrmo", snr_db_list=[15.0], feedback_error_prob=1e-3
        )
        points = [run_sweep(fixed.clone(feedback_bits=b))[0] for b in range(1, 6)]
        for coarse, fine in zip(points, points[1:]):
            assert within(fine, coarse)

        (perfect,) = run_sweep(fixed.clone(perfect_feedback=True))
        assert abs(points[-1].ber - perfect.ber) <= 2 * np.hypot(
            points[-1].stderr, perfect.stderr
        )

    def test_errors_hurt(self, base) -> None:
        fixed = base.clone(scheme="alrrmo", snr_db_list=[15.0], feedback_bits=4)
        points = [
            run_sweep(fixed.clone(feedback_error_prob=p))[0]
            for p in (0.0, 1e-3, 1e-2, 1e-1)
        ]
        for clean, noisy in zip(points, points[1:]):
            assert within(clean, noisy)
