from __future__ import annotations

import hashlib
import json
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from . import get_logger
from .errors import InputError
from .feedback import Labeling, default_clip_range
from .stc_relay import code_for, default_budget

logger = get_logger(__name__)


class Scheme(str, Enum):
    SM = "sm"
    STC_AF = "stc-af"
    RSTC_FIXED = "rstc"
    ALRRMO = "alrrmo"
    JOINT_MMSE = "mmse"

    @property
    def uses_relays(self) -> bool:
        return self is not Scheme.SM

    @property
    def uses_feedback(self) -> bool:
        return self in (Scheme.ALRRMO, Scheme.JOINT_MMSE)


class Receiver(str, Enum):
    ADAPTIVE = "adaptive"
    MMSE = "mmse"


FIELDS = (
    "scheme",
    "antennas",
    "relays",
    "direct_link",
    "snr_db_list",
    "min_trials",
    "max_trials",
    "min_bit_errors",
    "batch_size",
    "pilots",
    "payload",
    "beta",
    "mu",
    "feedback_bits",
    "feedback_error_prob",
    "perfect_feedback",
    "labeling",
    "clip_range",
    "p_r",
    "receiver",
    "decision_directed",
    "closed_form_iterations",
    "master_seed",
    "workers",
    "failure_cap",
)

# Fields that cannot change any simulated number
_RESULT_NEUTRAL = ("workers",)

_FEEDBACK_FIELDS = (
    "feedback_bits",
    "feedback_error_prob",
    "perfect_feedback",
    "labeling",
    "clip_range",
)

_default_config: SimConfig | None = None


class SimConfig:
    """Layered simulation settings.

    A layer only stores what it sets; everything else is looked up through
    `parent`, ending at the module default. `clone()` adds a layer, which is
    how a JSON file is put over the defaults and command-line flags over the
    file. `clip_range` and `p_r` stay None at the default layer and are then
    derived from the antenna and relay counts.
    """

    def __init__(
        self,
        *,
        parent: SimConfig | None = None,
        scheme: Scheme | str | None = None,
        antennas: int | None = None,
        relays: int | None = None,
        direct_link: bool | None = None,
        snr_db_list: list[float] | None = None,
        min_trials: int | None = None,
        max_trials: int | None = None,
        min_bit_errors: int | None = None,
        batch_size: int | None = None,
        pilots: int | None = None,
        payload: int | None = None,
        beta: float | None = None,
        mu: float | None = None,
        feedback_bits: int | None = None,
        feedback_error_prob: float | None = None,
        perfect_feedback: bool | None = None,
        labeling: Labeling | str | None = None,
        clip_range: float | None = None,
        p_r: float | None = None,
        receiver: Receiver | str | None = None,
        decision_directed: bool | None = None,
        closed_form_iterations: int | None = None,
        master_seed: int | None = None,
        workers: int | None = None,
        failure_cap: float | None = None,
    ) -> None:
        if parent is None:
            parent = _default_config

        self._parent = parent

        self._scheme = Scheme(scheme) if scheme is not None else None
        self._antennas = antennas
        self._relays = relays
        self._direct_link = direct_link
        self._snr_db_list = (
            [float(s) for s in snr_db_list] if snr_db_list is not None else None
        )
        self._min_trials = min_trials
        self._max_trials = max_trials
        self._min_bit_errors = min_bit_errors
        self._batch_size = batch_size
        self._pilots = pilots
        self._payload = payload
        self._beta = beta
        self._mu = mu
        self._feedback_bits = feedback_bits
        self._feedback_error_prob = feedback_error_prob
        self._perfect_feedback = perfect_feedback
        self._labeling = Labeling(labeling) if labeling is not None else None
        self._clip_range = clip_range
        self._p_r = p_r
        self._receiver = Receiver(receiver) if receiver is not None else None
        self._decision_directed = decision_directed
        self._closed_form_iterations = closed_form_iterations
        self._master_seed = master_seed
        self._workers = workers
        self._failure_cap = failure_cap

    def _attr(self, attr_name: str) -> Any:
        attr = getattr(self, attr_name)
        if attr is not None or self._parent is None:
            return attr

        return self._parent._attr(attr_name)  # pylint: disable=protected-access

    def is_set(self, name: str) -> bool:
        """Whether a layer above the module default sets `name`."""
        layer: SimConfig | None = self
        while layer is not None and layer is not _default_config:
            if getattr(layer, f"_{name}") is not None:
                return True
            layer = layer._parent
        return False

    @property
    def scheme(self) -> Scheme:
        return self._attr("_scheme")

    @property
    def antennas(self) -> int:
        return self._attr("_antennas")

    @property
    def relays(self) -> int:
        return self._attr("_relays")

    @property
    def direct_link(self) -> bool:
        return self._attr("_direct_link")

    @property
    def snr_db_list(self) -> list[float]:
        return list(self._attr("_snr_db_list"))

    @property
    def min_trials(self) -> int:
        return self._attr("_min_trials")

    @property
    def max_trials(self) -> int:
        return self._attr("_max_trials")

    @property
    def min_bit_errors(self) -> int:
        return self._attr("_min_bit_errors")

    @property
    def batch_size(self) -> int:
        return self._attr("_batch_size")

    @property
    def pilots(self) -> int:
        return self._attr("_pilots")

    @property
    def payload(self) -> int:
        return self._attr("_payload")

    @property
    def beta(self) -> float:
        return self._attr("_beta")

    @property
    def mu(self) -> float:
        return self._attr("_mu")

    @property
    def feedback_bits(self) -> int:
        return self._attr("_feedback_bits")

    @property
    def feedback_error_prob(self) -> float:
        return self._attr("_feedback_error_prob")

    @property
    def perfect_feedback(self) -> bool:
        return self._attr("_perfect_feedback")

    @property
    def labeling(self) -> Labeling:
        return self._attr("_labeling")

    @property
    def slots(self) -> int:
        return code_for(self.antennas).t

    @property
    def p_r(self) -> float:
        p_r = self._attr("_p_r")
        if p_r is None:
            return default_budget(self.antennas, self.slots)
        return p_r

    @property
    def clip_range(self) -> float:
        clip_range = self._attr("_clip_range")
        if clip_range is None:
            return default_clip_range(self.p_r, self.relays, self.antennas, self.slots)
        return clip_range

    @property
    def receiver(self) -> Receiver:
        return self._attr("_receiver")

    @property
    def decision_directed(self) -> bool:
        return self._attr("_decision_directed")

    @property
    def closed_form_iterations(self) -> int:
        return self._attr("_closed_form_iterations")

    @property
    def master_seed(self) -> int:
        return self._attr("_master_seed")

    @property
    def workers(self) -> int:
        return self._attr("_workers")

    @property
    def failure_cap(self) -> float:
        return self._attr("_failure_cap")

    def clone(self, **kwargs) -> SimConfig:
        return SimConfig(parent=self, **kwargs)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for name in FIELDS:
            value = self._attr(f"_{name}")
            if isinstance(value, Enum):
                value = value.value
            out[name] = value
        return out

    def digest(self) -> str:
        settings = {k: v for k, v in self.to_dict().items() if k not in _RESULT_NEUTRAL}
        canonical = json.dumps(settings, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]

    @classmethod
    def from_json(cls, path: str | Path, parent: SimConfig | None = None) -> SimConfig:
        path = Path(path)
        try:
            settings = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise OSError(f"Cannot read config file {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise InputError(f"Config file {path} is not valid JSON: {e}") from e

        if not isinstance(settings, dict):
            raise InputError(f"Config file {path} must hold a JSON object")
        unknown = sorted(set(settings) - set(FIELDS))
        if unknown:
            raise InputError(f"Unknown settings in {path}: {', '.join(unknown)}")

        try:
            return cls(parent=parent, **settings)
        except ValueError as e:
            raise InputError(f"Invalid value in {path}: {e}") from e

    def validate(self) -> SimConfig:
        counts = (
            "antennas",
            "relays",
            "min_trials",
            "max_trials",
            "min_bit_errors",
            "batch_size",
            "pilots",
            "payload",
            "feedback_bits",
            "closed_form_iterations",
            "workers",
        )
        for name in counts:
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise InputError(f"{name} must be a positive integer, got {value!r}")

        if self.min_trials > self.max_trials:
            raise InputError(
                f"min_trials ({self.min_trials}) exceeds max_trials ({self.max_trials})"
            )

        snrs = self.snr_db_list
        if not snrs or not all(np.isfinite(snrs)):
            raise InputError(f"SNR list must be non-empty and finite: {snrs}")

        for name in ("beta", "mu"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise InputError(f"Step size {name} must be finite and >= 0: {value}")

        if not 0 <= self.feedback_error_prob <= 1:
            raise InputError(
                "Feedback error probability must be in [0, 1]: "
                f"{self.feedback_error_prob}"
            )
        if not 0 <= self.failure_cap < 1:
            raise InputError(f"failure_cap must be in [0, 1): {self.failure_cap}")
        if not isinstance(self.master_seed, (int, np.integer)) or self.master_seed < 0:
            raise InputError(
                f"master_seed must be a non-negative integer: {self.master_seed}"
            )

        if self.scheme.uses_relays:
            code_for(self.antennas)
            if not self.p_r > 0:
                raise InputError(f"Relay power budget must be positive: {self.p_r}")
            if not self.clip_range > 0:
                raise InputError(f"Clip range must be positive: {self.clip_range}")
        elif not self.direct_link:
            raise InputError("Spatial multiplexing needs the direct link")

        self._notice_ignored()
        return self

    def _notice_ignored(self) -> None:
        ignored = []
        if not self.scheme.uses_feedback:
            ignored += [f for f in _FEEDBACK_FIELDS if self.is_set(f)]
        if self.scheme is not Scheme.ALRRMO and self.is_set("mu"):
            ignored.append("mu")
        if self.scheme is Scheme.SM:
            ignored += [f for f in ("relays", "receiver", "pilots") if self.is_set(f)]
        if ignored:
            logger.info(
                "Scheme %s ignores: %s", self.scheme.value, ", ".join(ignored)
            )

    def __str__(self) -> str:
        return str(self.to_dict())


_default_config = SimConfig(
    scheme=Scheme.ALRRMO,
    antennas=2,
    relays=1,
    direct_link=True,
    snr_db_list=[float(s) for s in range(0, 17, 2)],
    min_trials=2000,
    max_trials=10000,
    min_bit_errors=200,
    batch_size=100,
    pilots=200,
    payload=200,
    beta=0.05,
    mu=0.01,
    feedback_bits=4,
    feedback_error_prob=0.0,
    perfect_feedback=False,
    labeling=Labeling.NATURAL,
    receiver=Receiver.ADAPTIVE,
    decision_directed=False,
    closed_form_iterations=4,
    master_seed=0,
    workers=1,
    failure_cap=0.01,
)


def default_config() -> SimConfig:
    assert _default_config is not None
    return _default_config


def set_default_config(config: SimConfig) -> None:
    global _default_config
    _default_config = config
