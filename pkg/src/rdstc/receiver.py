"""Joint linear MMSE receiver and randomized-code design.

Two ways of choosing the receive filters w_j and the relay matrices R_k:

- closed form, from the analytic second-order statistics of the block
  (`mmse_filters`, `rstc_closed_form`, alternated by `joint_mmse_design`)
- stochastic gradient on pilots, `alrrmo_train`, which alternates an LMS step
  on the filters with a gradient step on R_k followed by renormalization to
  the relay power budget

The code parameters are the real and imaginary parts of every entry of every
R_k. With the destination front end, a slot either sees R_k or conj(R_k), so
the received vector is real-linear (not complex-linear) in R_k; gradients are
taken with respect to conj(R_k) in the Wirtinger sense.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from . import VERBOSE, get_logger
from .channel import NoiseModel
from .errors import ConstraintInfeasibleError, DivergenceError, InputError
from .modem import hard_detect
from .numerics import ComplexMat, as_complex, hermitian_solve
from .stc_relay import EquivalentChannel, Link, RandomizedCode, normalize_code

logger = get_logger(__name__)

__all__ = [
    "AdaptState",
    "ClosedFormSolution",
    "CorrelationPair",
    "DivergenceMonitor",
    "FilterBank",
    "JointDesign",
    "alrrmo_train",
    "analytic_correlations",
    "code_gradient",
    "detect_symbols",
    "joint_mmse_design",
    "mmse_filter",
    "mmse_filters",
    "mmse_value",
    "normalize_code",
    "rstc_closed_form",
    "sg_step_code",
    "sg_step_filter",
    "total_mse",
    "track_decisions",
]

LAMBDA_MAX = 1e12
BISECTION_MAX_ITER = 200
NEGATIVE_MSE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FilterBank:
    """The N receive filters as the columns of an (L, N) matrix."""

    weights: ComplexMat

    def __post_init__(self) -> None:
        weights = as_complex(self.weights)
        if weights.ndim != 2:
            raise InputError(f"Filter bank must be (L, N), got {weights.shape}")
        object.__setattr__(self, "weights", weights)

    @property
    def length(self) -> int:
        return self.weights.shape[0]

    @property
    def n(self) -> int:
        return self.weights.shape[1]

    def w(self, j: int) -> ComplexMat:
        return self.weights[:, j]

    def estimate(self, r: ComplexMat) -> ComplexMat:
        """w_j^H r for every j; r may carry a trailing batch axis."""
        r = as_complex(r)
        if r.shape[0] != self.length:
            raise InputError(
                f"Received vector has {r.shape[0]} entries, "
                f"filters expect {self.length}"
            )
        return self.weights.conj().T @ r

    @classmethod
    def zeros(cls, length: int, n: int) -> FilterBank:
        return cls(np.zeros((length, n), dtype=np.complex128))

    @classmethod
    def matched(cls, eq: EquivalentChannel) -> FilterBank:
        """w_j = d_j / ||d_j||^2, zero where d_j vanishes."""
        power = np.sum(np.abs(eq.d) ** 2, axis=0)
        scale = np.divide(1.0, power, out=np.zeros_like(power), where=power > 0)
        return cls(eq.d * scale)


@dataclass(frozen=True, eq=False)
class CorrelationPair:
    """E[r r^H] and the columns p_j = E[r s_j*]."""

    rrr: ComplexMat
    p: ComplexMat
    sigma_s2: float = 1.0

    def p_j(self, j: int) -> ComplexMat:
        return self.p[:, j]


def analytic_correlations(
    eq: EquivalentChannel, noise: NoiseModel, sigma_s2: float = 1.0
) -> CorrelationPair:
    rrr = sigma_s2 * eq.d @ eq.d.conj().T + eq.noise_covariance(noise)
    return CorrelationPair(rrr=rrr, p=sigma_s2 * eq.d, sigma_s2=sigma_s2)


def mmse_filter(corr: CorrelationPair, j: int) -> ComplexMat:
    return hermitian_solve(corr.rrr, corr.p_j(j))


def mmse_filters(corr: CorrelationPair) -> FilterBank:
    return FilterBank(hermitian_solve(corr.rrr, corr.p))


def mmse_value(corr: CorrelationPair, w, j: int) -> float:
    w = as_complex(w)
    p = corr.p_j(j)
    cross = np.vdot(w, p)
    value = corr.sigma_s2 - 2 * cross.real + np.vdot(w, corr.rrr @ w).real
    if value < -NEGATIVE_MSE_TOL:
        logger.warning("Negative MSE %.3g for symbol %d clamped to zero", value, j)
    return max(float(value), 0.0)


def total_mse(corr: CorrelationPair, filters: FilterBank) -> float:
    return sum(mmse_value(corr, filters.w(j), j) for j in range(filters.n))


def _code_from_params(x: np.ndarray, template: RandomizedCode) -> RandomizedCode:
    n_r, n = template.n_r, template.n
    parts = x.reshape(n_r, 2, n * n)
    r = (parts[:, 0] + 1j * parts[:, 1]).reshape(n_r, n, n)
    return RandomizedCode(r, template.p_r, template.structure)


def _code_regressor(
    eq: EquivalentChannel,
    filters: FilterBank,
    j: int,
    s: ComplexMat,
    relay_noise: ComplexMat,
) -> ComplexMat:
    """Coefficients of the real code parameters in w_j^H r.

    The relay part of w_j^H r equals `beta @ x` for the parameter vector x
    laid out per relay as [Re vec(R_k), Im vec(R_k)] (row-major vec).
    """
    n = eq.n
    beta = np.zeros((eq.n_r, 2, n * n), dtype=np.complex128)
    for t, conj in enumerate(eq.structure.conjugated):
        w_t = filters.weights[eq.slot_rows(t), j]
        for k in range(eq.n_r):
            a = eq.g_eq[k, t].conj().T @ w_t
            u = eq.c[k, t] @ s + eq.c_noise[k, t] @ relay_noise[k]
            coeff = np.kron(a.conj(), u)
            beta[k, 0] += coeff
            beta[k, 1] += (-1j if conj else 1j) * coeff
    return beta.reshape(-1)


@dataclass(frozen=True)
class ClosedFormSolution:
    code: RandomizedCode
    multiplier: float
    active: bool


def closed_form_solution(
    eq: EquivalentChannel,
    filters: FilterBank,
    noise: NoiseModel,
    p_r: float,
    template: RandomizedCode,
    sigma_s2: float = 1.0,
) -> ClosedFormSolution:
    """Minimizes sum_j E|s_j - w_j^H r|^2 over the code for fixed filters.

    The cost is a convex quadratic in the real code parameters,
    `const - 2 b^T x + x^T Q x`, minimized subject to the equivalent trace not
    exceeding `p_r`. The stationary point is `(Q + lambda I) x = b`; lambda is
    zero when the unconstrained minimizer is feasible and is otherwise found
    by bisection so the trace meets the budget.
    """
    if not eq.relay_link:
        raise InputError("The randomized code only acts through the relay link")

    n, n_r = eq.n, eq.n_r
    size = 2 * n * n * n_r
    q = np.zeros((size, size))
    b = np.zeros(size)

    zero_relay = np.zeros((n_r, n), dtype=np.complex128)
    direct = filters.weights[:n] if eq.direct_link else None

    # s and the relay noise are white and mutually independent, so the
    # expectations split into one term per unit input.
    for m in range(n):
        s = np.zeros(n, dtype=np.complex128)
        s[m] = 1
        leak = direct.conj().T @ (eq.h_eq @ s) if direct is not None else np.zeros(n)
        for j in range(filters.n):
            beta = _code_regressor(eq, filters, j, s, zero_relay)
            kappa = s[j] - leak[j]
            q += sigma_s2 * np.real(np.outer(beta.conj(), beta))
            b += sigma_s2 * np.real(beta.conj() * kappa)

    if noise.sigma2 > 0:
        zero_s = np.zeros(n, dtype=np.complex128)
        for k in range(n_r):
            for m in range(n):
                relay_noise = zero_relay.copy()
                relay_noise[k, m] = 1
                for j in range(filters.n):
                    beta = _code_regressor(eq, filters, j, zero_s, relay_noise)
                    q += noise.sigma2 * np.real(np.outer(beta.conj(), beta))

    budget = RandomizedCode(template.r, p_r, template.structure)

    def solve(lam: float) -> np.ndarray:
        return hermitian_solve(q + lam * np.eye(size), b).real

    def excess(lam: float) -> float:
        return _code_from_params(solve(lam), budget).equivalent_trace() - p_r

    if excess(0.0) <= 0:
        logger.debug("Power constraint inactive, multiplier 0")
        return ClosedFormSolution(_code_from_params(solve(0.0), budget), 0.0, False)

    if excess(LAMBDA_MAX) > 0:
        raise ConstraintInfeasibleError(
            f"No multiplier in [0, {LAMBDA_MAX:g}] meets the power budget {p_r:g}"
        )

    try:
        lam = scipy.optimize.bisect(
            excess,
            0.0,
            LAMBDA_MAX,
            xtol=1e-15,
            rtol=1e-12,
            maxiter=BISECTION_MAX_ITER,
        )
    except RuntimeError as e:
        raise ConstraintInfeasibleError(f"Multiplier search failed: {e}") from e

    logger.debug("Multiplier %.6g", lam)
    # The bisection leaves a relative trace error far below 1e-8; the final
    # rescale puts the trace on the budget.
    code = normalize_code(_code_from_params(solve(lam), budget))
    return ClosedFormSolution(code, float(lam), True)


def rstc_closed_form(
    eq: EquivalentChannel,
    filters: FilterBank,
    noise: NoiseModel,
    p_r: float,
    template: RandomizedCode | None = None,
) -> RandomizedCode:
    if template is None:
        template = RandomizedCode.identity(eq.n_r, p_r, eq.structure)
    return closed_form_solution(eq, filters, noise, p_r, template).code


@dataclass(frozen=True, eq=False)
class JointDesign:
    filters: FilterBank
    code: RandomizedCode
    history: list[float] = field(default_factory=list)


def joint_mmse_design(
    link: Link, code: RandomizedCode, iterations: int, sigma_s2: float = 1.0
) -> JointDesign:
    """Alternates Wiener filters and the closed-form code.

    `history` holds the total MSE after every half step; it never increases.
    """
    if iterations < 1:
        raise InputError(f"Need at least one iteration, got {iterations}")

    history = []
    for i in range(iterations):
        corr = analytic_correlations(link.equivalent(code), link.noise, sigma_s2)
        filters = mmse_filters(corr)
        history.append(total_mse(corr, filters))

        eq = link.equivalent(code)
        code = closed_form_solution(
            eq, filters, link.noise, code.p_r, code, sigma_s2
        ).code
        corr = analytic_correlations(link.equivalent(code), link.noise, sigma_s2)
        history.append(total_mse(corr, filters))
        logger.debug("Iteration %d: MSE %.6g -> %.6g", i, history[-2], history[-1])

    corr = analytic_correlations(link.equivalent(code), link.noise, sigma_s2)
    filters = mmse_filters(corr)
    history.append(total_mse(corr, filters))
    return JointDesign(filters, code, history)


@dataclass
class AdaptState:
    """State of the stochastic gradient recursions for one coherence block."""

    filters: FilterBank
    code: RandomizedCode
    beta: float = 0.05
    mu: float = 0.01
    iteration: int = 0

    def __post_init__(self) -> None:
        for name in ("beta", "mu"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise InputError(f"Step size {name} must be finite and >= 0: {value}")


def _errors(filters: FilterBank, r: ComplexMat, s_ref) -> ComplexMat:
    return as_complex(s_ref) - filters.estimate(r)


def sg_step_filter(state: AdaptState, r, s_ref) -> FilterBank:
    """One LMS step: w_j <- w_j + beta conj(e_j) r."""
    r = as_complex(r)
    e = _errors(state.filters, r, s_ref)
    return FilterBank(state.filters.weights + state.beta * np.outer(r, e.conj()))


def code_gradient(filters: FilterBank, r, s_ref, eq: EquivalentChannel) -> ComplexMat:
    """Gradient of sum_j |e_j|^2 with respect to conj(R_k), shape (n_r, N, N).

    The relay input is taken noise free, `c[k, t] @ s_ref`, since the
    destination never observes the relay noise.
    """
    s_ref = as_complex(s_ref)
    e = _errors(filters, as_complex(r), s_ref)
    grad = np.zeros((eq.n_r, eq.n, eq.n), dtype=np.complex128)
    if not eq.relay_link:
        return grad

    for t, conj in enumerate(eq.structure.conjugated):
        weighted = filters.weights[eq.slot_rows(t)] @ e
        for k in range(eq.n_r):
            a = eq.g_eq[k, t].conj().T @ weighted
            u = eq.c[k, t] @ s_ref
            if conj:
                grad[k] -= np.outer(a.conj(), u)
            else:
                grad[k] -= np.outer(a, u.conj())
    return grad


def sg_step_code(state: AdaptState, r, s_ref, eq: EquivalentChannel) -> RandomizedCode:
    if state.mu == 0:
        return state.code

    grad = code_gradient(state.filters, r, s_ref, eq)
    code = state.code
    stepped = RandomizedCode(code.r - state.mu * grad, code.p_r, code.structure)
    return normalize_code(stepped)


class DivergenceMonitor:
    """Running average of the error power with a 10x blow-up detector.

    The first `warmup` samples set the baseline; afterwards an exponential
    average is compared against it.
    """

    def __init__(
        self, *, warmup: int = 10, smoothing: float = 0.05, limit: float = 10.0
    ):
        self.warmup = warmup
        self.smoothing = smoothing
        self.limit = limit
        self._samples: list[float] = []
        self.baseline: float | None = None
        self.average: float | None = None

    def update(self, iteration: int, power: float) -> None:
        if not np.isfinite(power):
            raise DivergenceError(iteration, power, self.baseline or 0.0)

        if self.baseline is None:
            self._samples.append(power)
            if len(self._samples) == self.warmup:
                self.baseline = self.average = float(np.mean(self._samples))
            return

        assert self.average is not None
        self.average += self.smoothing * (power - self.average)
        if self.average > self.limit * max(self.baseline, 1e-12):
            raise DivergenceError(iteration, self.average, self.baseline)


def alrrmo_train(state: AdaptState, link: Link, pilots) -> AdaptState:
    """Runs the joint recursions over a pilot preamble.

    `pilots` is an (N, P) array of known symbol vectors. Each pilot is sent
    again over `link` under the current code, so the code gradient always
    sees the matrix the relay is using.
    """
    pilots = as_complex(pilots)
    if pilots.ndim != 2 or pilots.shape[1] < 1:
        raise InputError(f"Pilots must be an (N, P) array with P >= 1: {pilots.shape}")

    monitor = DivergenceMonitor()
    adapt_code = state.mu > 0 and link.relay_link

    for i in range(pilots.shape[1]):
        s = pilots[:, i]
        r = link.transmit(state.code, s)
        e = _errors(state.filters, r, s)
        power = float(np.sum(np.abs(e) ** 2))
        monitor.update(i, power)

        code = state.code
        if adapt_code:
            code = sg_step_code(state, r, s, link.equivalent(state.code))
        state.filters = sg_step_filter(state, r, s)
        state.code = code
        state.iteration += 1

        if logger.isEnabledFor(VERBOSE):
            logger.verbose(
                "pilot %d: |e|^2 %.4g, trace %.6g", i, power, code.equivalent_trace()
            )

    return state


def detect_symbols(filters: FilterBank, r) -> ComplexMat:
    return hard_detect(filters.estimate(r))


def track_decisions(state: AdaptState, r_block) -> ComplexMat:
    """Decision-directed detection of an (L, B) block of received vectors.

    Each decision is fed back as the reference for a filter-only LMS step
    before the next vector is detected.
    """
    r_block = as_complex(r_block)
    decisions = np.empty((state.filters.n, r_block.shape[1]), dtype=np.complex128)
    for i in range(r_block.shape[1]):
        r = r_block[:, i]
        decisions[:, i] = detect_symbols(state.filters, r)
        state.filters = sg_step_filter(state, r, decisions[:, i])
        state.iteration += 1
    return decisions
