"""Named experiment families: each maps to a labeled list of sweep configs
that are run side by side and compared."""

from __future__ import annotations

from typing import Callable

from .config import Scheme, SimConfig
from .errors import InputError

Scenario = list[tuple[str, SimConfig]]

SCHEME_ORDER = (Scheme.SM, Scheme.STC_AF, Scheme.RSTC_FIXED, Scheme.ALRRMO)


def scheme_comparison(base: SimConfig) -> Scenario:
    out = []
    for direct_link in (False, True):
        suffix = "direct" if direct_link else "relay-only"
        for scheme in SCHEME_ORDER:
            if scheme is Scheme.SM and not direct_link:
                continue
            config = base.clone(scheme=scheme, direct_link=direct_link)
            out.append((f"{scheme.value}/{suffix}", config))
    return out


def feedback_comparison(base: SimConfig) -> Scenario:
    return [
        ("perfect", base.clone(scheme=Scheme.ALRRMO, perfect_feedback=True)),
        (
            "b=4,p=1e-3",
            base.clone(
                scheme=Scheme.ALRRMO,
                perfect_feedback=False,
                feedback_bits=4,
                feedback_error_prob=1e-3,
            ),
        ),
    ]


def quantization_bits(base: SimConfig) -> Scenario:
    fixed = base.clone(
        scheme=Scheme.ALRRMO, snr_db_list=[15.0, 30.0], feedback_error_prob=1e-3
    )
    out = [
        (f"b={b}", fixed.clone(feedback_bits=b, perfect_feedback=False))
        for b in range(1, 7)
    ]
    out.append(("perfect", fixed.clone(perfect_feedback=True)))
    return out


def error_probability(base: SimConfig) -> Scenario:
    return [
        (
            f"p={p:g}",
            base.clone(
                scheme=Scheme.ALRRMO,
                perfect_feedback=False,
                feedback_bits=4,
                feedback_error_prob=p,
            ),
        )
        for p in (0.0, 1e-3, 1e-2, 1e-1)
    ]


SCENARIOS: dict[str, Callable[[SimConfig], Scenario]] = {
    "schemes": scheme_comparison,
    "feedback": feedback_comparison,
    "bits": quantization_bits,
    "error-prob": error_probability,
}


def build_scenario(name: str, base: SimConfig) -> Scenario:
    try:
        return SCENARIOS[name](base)
    except KeyError as e:
        raise InputError(
            f"Unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}"
        ) from e
