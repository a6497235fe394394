from __future__ import annotations

import numpy as np


class SimulationError(Exception):
    pass


class InputError(SimulationError, ValueError):
    """A caller handed an operation something it cannot work with."""


class UnsupportedConfigurationError(InputError):
    pass


class MalformedPacketError(InputError):
    pass


class SingularMatrixError(SimulationError, np.linalg.LinAlgError):
    pass


class ConstraintInfeasibleError(SimulationError):
    pass


class DegenerateCodeError(SimulationError):
    pass


class DivergenceError(SimulationError):
    """Raised by the adaptive trainer when the running error power blows up.

    Attributes:
        - iteration: pilot index at which the detector fired
        - error_power: running average of sum_j |e_j|^2 at that point
        - baseline: the initial running average it is compared against
    """

    def __init__(self, iteration: int, error_power: float, baseline: float) -> None:
        super().__init__(
            f"Adaptation diverged at pilot {iteration}: running error power "
            f"{error_power:.4g} exceeds 10x the initial {baseline:.4g}"
        )
        self.iteration = iteration
        self.error_power = error_power
        self.baseline = baseline


class SweepAbortedError(SimulationError):
    pass
