"""Feed-forward displacement receivers for BPSK discrimination.

The displacement feed-forward receiver (DFFRE) splits the signal into N
weak copies. Each copy is displaced by an amplitude beta_j whose sign is
steered by a switch: every time the PNR(M) detector counts at or above
the click threshold, the switch flips, and the final switch position is
the decision. The correct-decision probability after step j obeys a
scalar recursion

    P(j) = max_beta_j [ P(j-1) * Q0(rate_minus) + (1 - P(j-1)) * Q1(rate_plus) ]

with per-step greedy maximization of beta_j; Q0/Q1 are the
below/at-or-above-threshold probabilities and rate_minus (rate_plus) is
the detected mean photon number of a copy whose displacement opposes
(reinforces) the signal.

The hybrid feed-forward receiver (HFFRE) first taps a fraction 1 - tau
of the signal, measures it with the homodyne-like difference scheme, and
uses the sign of the difference outcome to choose the sign of the first
displacement. That only changes the starting value of the same
recursion; tau and the HL local-oscillator amplitude z are optimized on
a grid that always contains tau = 1, where the DFFRE is recovered
exactly.

Detector imperfections (efficiency eta, dark counts nu, visibility xi)
enter through the detected rates; with dark counts or reduced visibility
the click threshold n_th is optimized exhaustively as well. Everything
is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .baselines import helstrom_bound, sql_error
from .optimize import GridSearchSpec, ScalarSearchSpec, maximize_grid, maximize_scalar, scan_discrete
from .photostatistics import DetectorModel, hl_difference_pmf, q_off, q_on, q_thresh

__all__ = [
    "Receiver",
    "FeedForwardConfig",
    "ReceiverParams",
    "EvalResult",
    "StepRates",
    "step_rates",
    "step_correct_prob",
    "correct_probability_trace",
    "dffre_error",
    "hffre_error",
    "hffre_error_at",
    "switch_conditional_traces",
    "saturation_dark",
    "saturation_visibility",
    "ratio",
    "gain",
]

BETA_COARSE_POINTS = 64
BETA_TOL = 1e-7
BETA_MARGIN = 5.0
TAU_Z_POINTS = 41
TAU_Z_ROUNDS = 4
TAU_Z_SHRINK = 8.0


class Receiver(Enum):
    DFFRE = "dffre"
    HFFRE = "hffre"


@dataclass(frozen=True)
class FeedForwardConfig:
    """Number of copies, detector model and receiver flavour of one evaluation."""

    n_copies: int
    model: DetectorModel
    receiver: Receiver = Receiver.DFFRE

    def __post_init__(self) -> None:
        if not isinstance(self.n_copies, int) or self.n_copies < 1:
            raise ValueError(f"n_copies must be an integer >= 1, got {self.n_copies!r}")
        if not isinstance(self.model, DetectorModel):
            raise ValueError("model must be a DetectorModel")
        if not isinstance(self.receiver, Receiver):
            raise ValueError("receiver must be a Receiver")


@dataclass(frozen=True)
class ReceiverParams:
    """Free parameters of one receiver evaluation.

    For the DFFRE tau is fixed at 1 and z is unused (reported as 0).
    """

    tau: float
    z: float
    betas: tuple[float, ...]
    n_th: int


@dataclass(frozen=True)
class EvalResult:
    """Error probability with the optimizing parameters and derived metrics.

    ``per_step_correct`` is the correct-decision trace (initial value
    plus one entry per copy); the error probability is one minus its
    last entry. ``ratio`` is relative to the Helstrom bound, ``gain``
    relative to the SQL (positive gain means the SQL is beaten).
    """

    p_err: float
    params: ReceiverParams
    per_step_correct: tuple[float, ...]
    ratio: float
    gain: float


class StepRates(NamedTuple):
    """Mean photon numbers of a displaced copy, before detector effects."""

    lambda_plus: float
    lambda_minus: float


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0.0:
        raise ValueError(f"alpha must be finite and >= 0, got {alpha!r}")
    return alpha


def step_rates(beta: float, amplitude: float, n_copies: int, xi: float = 1.0) -> StepRates:
    """Rates of one displaced copy: amplitude^2/N + beta^2 +- 2 xi beta amplitude / sqrt(N).

    ``amplitude`` is the total signal amplitude feeding the splitter
    (alpha for the DFFRE, sqrt(tau) * alpha for the HFFRE); each copy
    carries amplitude / sqrt(N). With xi = 1 the rates reduce to
    |beta +- amplitude / sqrt(N)|^2.
    """
    if beta < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta!r}")
    base = amplitude * amplitude / n_copies + beta * beta
    cross = 2.0 * xi * amplitude / math.sqrt(n_copies) * beta
    return StepRates(base + cross, base - cross)


def _step_objective(
    p_prev: float, amplitude: float, n_copies: int, model: DetectorModel, n_th: int
) -> Callable[[float], float]:
    """Correct-decision probability after one more copy, as a function of beta."""
    a2n = amplitude * amplitude / n_copies
    cross_coef = 2.0 * model.xi * amplitude / math.sqrt(n_copies)
    eta, nu = model.eta, model.nu
    q_prev = 1.0 - p_prev
    if n_th == 1:
        def objective(beta: float) -> float:
            base = a2n + beta * beta
            cross = cross_coef * beta
            rate_minus = eta * (base - cross) + nu
            rate_plus = eta * (base + cross) + nu
            return p_prev * math.exp(-rate_minus) - q_prev * math.expm1(-rate_plus)
    else:
        def objective(beta: float) -> float:
            base = a2n + beta * beta
            cross = cross_coef * beta
            q0, _ = q_thresh(eta * (base - cross) + nu, n_th)
            _, q1 = q_thresh(eta * (base + cross) + nu, n_th)
            return p_prev * q0 + q_prev * q1
    return objective


def _negated_step_error(
    e_prev: float, amplitude: float, n_copies: int, model: DetectorModel, n_th: int
) -> Callable[[float], float]:
    """Negated error probability after one more copy, as a function of beta.

    Identical algebra to the correct-probability bracket, rearranged as
    e' = (1 - e) Q1(rate_minus) + e Q0(rate_plus) so error probabilities
    far below the double-precision resolution of 1 - P stay accurate.
    Returned negated so the maximizers can be reused for minimization.
    """
    a2n = amplitude * amplitude / n_copies
    cross_coef = 2.0 * model.xi * amplitude / math.sqrt(n_copies)
    eta, nu = model.eta, model.nu
    p_prev = 1.0 - e_prev
    if n_th == 1:
        def objective(beta: float) -> float:
            base = a2n + beta * beta
            cross = cross_coef * beta
            false_flip = -math.expm1(-(eta * (base - cross) + nu))
            missed_flip = math.exp(-(eta * (base + cross) + nu))
            return -(p_prev * false_flip + e_prev * missed_flip)
    else:
        def objective(beta: float) -> float:
            base = a2n + beta * beta
            cross = cross_coef * beta
            _, false_flip = q_thresh(eta * (base - cross) + nu, n_th)
            missed_flip, _ = q_thresh(eta * (base + cross) + nu, n_th)
            return -(p_prev * false_flip + e_prev * missed_flip)
    return objective


def step_correct_prob(
    p_prev: float,
    beta: float,
    amplitude: float,
    n_copies: int,
    model: DetectorModel,
    n_th: int = 1,
) -> float:
    """One step of the correct-decision recursion at a fixed displacement."""
    if not 0.0 <= p_prev <= 1.0:
        raise ValueError(f"p_prev must be in [0, 1], got {p_prev!r}")
    if beta < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta!r}")
    if n_copies < 1:
        raise ValueError("n_copies must be >= 1")
    q_thresh(0.0, n_th, model.resolution)  # validates the threshold range
    return _step_objective(p_prev, amplitude, n_copies, model, n_th)(beta)


def correct_probability_trace(
    alpha: float,
    betas: Sequence[float],
    model: DetectorModel,
    n_th: int = 1,
    p_initial: float = 0.5,
    amplitude: float | None = None,
) -> tuple[float, ...]:
    """Correct-decision trace for a fixed displacement sequence (no optimization)."""
    alpha = _check_alpha(alpha)
    if amplitude is None:
        amplitude = alpha
    n = len(betas)
    if n < 1:
        raise ValueError("betas must contain at least one amplitude")
    trace = [float(p_initial)]
    for beta in betas:
        trace.append(step_correct_prob(trace[-1], float(beta), amplitude, n, model, n_th))
    return tuple(trace)


def _optimized_recursion(
    amplitude: float, n_copies: int, model: DetectorModel, n_th: int, e_initial: float
) -> tuple[list[float], tuple[float, ...]]:
    """Greedy per-step displacement optimization in error space.

    Returns (error trace e_0..e_N, betas).
    """
    spec = ScalarSearchSpec(
        lo=0.0,
        hi=amplitude / math.sqrt(n_copies) + BETA_MARGIN,
        coarse_points=BETA_COARSE_POINTS,
        tol=BETA_TOL,
    )
    errors = [e_initial]
    betas: list[float] = []
    for _ in range(n_copies):
        objective = _negated_step_error(errors[-1], amplitude, n_copies, model, n_th)
        beta, negated = maximize_scalar(objective, spec)
        betas.append(beta)
        errors.append(-negated)
    return errors, tuple(betas)


def _threshold_candidates(model: DetectorModel) -> list[int]:
    # The click threshold only matters once dark counts or a visibility
    # reduction break the on/off optimality of the ideal rule.
    if model.nu > 0.0 or model.xi < 1.0:
        return list(range(1, model.resolution + 1))
    return [1]


def _degenerate_result(n_copies: int) -> EvalResult:
    params = ReceiverParams(tau=1.0, z=0.0, betas=(0.0,) * n_copies, n_th=1)
    trace = (0.5,) * (n_copies + 1)
    return EvalResult(p_err=0.5, params=params, per_step_correct=trace,
                      ratio=ratio(0.5, 0.0), gain=gain(0.5, 0.0))


def dffre_error(alpha: float, cfg: FeedForwardConfig) -> EvalResult:
    """Optimized displacement feed-forward receiver error probability."""
    alpha = _check_alpha(alpha)
    if cfg.receiver is not Receiver.DFFRE:
        raise ValueError("cfg.receiver must be Receiver.DFFRE")
    if alpha == 0.0:
        return _degenerate_result(cfg.n_copies)

    cache: dict[int, tuple[list[float], tuple[float, ...]]] = {}

    def negated_error(n_th: int) -> float:
        cache[n_th] = _optimized_recursion(alpha, cfg.n_copies, cfg.model, n_th, 0.5)
        return -cache[n_th][0][-1]

    n_th, negated = scan_discrete(negated_error, _threshold_candidates(cfg.model))
    errors, betas = cache[n_th]
    p_err = -negated
    params = ReceiverParams(tau=1.0, z=0.0, betas=betas, n_th=n_th)
    trace = tuple(1.0 - e for e in errors)
    return EvalResult(p_err=p_err, params=params, per_step_correct=trace,
                      ratio=ratio(p_err, alpha), gain=gain(p_err, alpha))


def _hybrid_initial_error(alpha: float, tau: float, z: float, model: DetectorModel) -> float:
    """Probability that the HL pre-measurement starts the switch on the wrong side.

    The reflected amplitudes are -sqrt(1-tau) * (-+ alpha) for the two
    hypotheses; a nonnegative difference outcome selects the positive
    first displacement (ties go with inferring "0"), so the wrong-side
    masses are Delta >= 0 under "+alpha" and Delta < 0 under "-alpha".
    """
    reflected = math.sqrt(max(0.0, 1.0 - tau)) * alpha
    pmf_r1 = hl_difference_pmf(-reflected, z, model)  # hypothesis "+alpha"
    pmf_r0 = hl_difference_pmf(reflected, z, model)   # hypothesis "-alpha"
    return 0.5 * (pmf_r1.mass_nonnegative() + pmf_r0.mass_negative())


def _hybrid_recursion(
    alpha: float, cfg: FeedForwardConfig, tau: float, z: float, n_th: int
) -> tuple[list[float], tuple[float, ...]]:
    e0 = _hybrid_initial_error(alpha, tau, z, cfg.model)
    return _optimized_recursion(math.sqrt(tau) * alpha, cfg.n_copies, cfg.model, n_th, e0)


def hffre_error(alpha: float, cfg: FeedForwardConfig) -> EvalResult:
    """Hybrid feed-forward receiver error probability, optimized over (tau, z).

    The search box is tau in [0, 1], z in [0, 5 + 4 alpha]; tau = 1 is a
    mandatory grid point, so up to optimizer tolerance the result never
    exceeds the DFFRE one.
    """
    alpha = _check_alpha(alpha)
    if cfg.receiver is not Receiver.HFFRE:
        raise ValueError("cfg.receiver must be Receiver.HFFRE")
    if alpha == 0.0:
        return _degenerate_result(cfg.n_copies)

    spec = GridSearchSpec(
        bounds=((0.0, 1.0), (0.0, BETA_MARGIN + 4.0 * alpha)),
        points=(TAU_Z_POINTS, TAU_Z_POINTS),
        refinement_rounds=TAU_Z_ROUNDS,
        shrink_factor=TAU_Z_SHRINK,
        mandatory=((1.0, 0.0),),
    )
    best: dict[int, tuple[tuple[float, float], float]] = {}

    def scan_threshold(n_th: int) -> float:
        def objective(tau: float, z: float) -> float:
            return -_hybrid_recursion(alpha, cfg, tau, z, n_th)[0][-1]

        best[n_th] = maximize_grid(objective, spec)
        return best[n_th][1]

    n_th, _ = scan_discrete(scan_threshold, _threshold_candidates(cfg.model))
    (tau, z), negated = best[n_th]
    errors, betas = _hybrid_recursion(alpha, cfg, tau, z, n_th)
    p_err = -negated
    params = ReceiverParams(tau=tau, z=z, betas=betas, n_th=n_th)
    trace = tuple(1.0 - e for e in errors)
    return EvalResult(p_err=p_err, params=params, per_step_correct=trace,
                      ratio=ratio(p_err, alpha), gain=gain(p_err, alpha))


def hffre_error_at(alpha: float, cfg: FeedForwardConfig, tau: float, z: float) -> EvalResult:
    """HFFRE evaluation at a fixed beam-splitter setting (betas and n_th still optimized)."""
    alpha = _check_alpha(alpha)
    if cfg.receiver is not Receiver.HFFRE:
        raise ValueError("cfg.receiver must be Receiver.HFFRE")
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau!r}")
    if z < 0.0:
        raise ValueError(f"z must be >= 0, got {z!r}")
    if alpha == 0.0:
        return _degenerate_result(cfg.n_copies)
    cache: dict[int, tuple[list[float], tuple[float, ...]]] = {}

    def negated_error(n_th: int) -> float:
        cache[n_th] = _hybrid_recursion(alpha, cfg, tau, z, n_th)
        return -cache[n_th][0][-1]

    n_th, negated = scan_discrete(negated_error, _threshold_candidates(cfg.model))
    errors, betas = cache[n_th]
    p_err = -negated
    params = ReceiverParams(tau=tau, z=z, betas=betas, n_th=n_th)
    trace = tuple(1.0 - e for e in errors)
    return EvalResult(p_err=p_err, params=params, per_step_correct=trace,
                      ratio=ratio(p_err, alpha), gain=gain(p_err, alpha))


def switch_conditional_traces(
    alpha: float, betas: Sequence[float]
) -> tuple[np.ndarray, np.ndarray]:
    """Per-hypothesis correct-inference traces of the switch model (ideal detectors).

    Returns (p00, p11): the probabilities of inferring "0" after j steps
    given "0" was sent, and "1" given "1", for j = 0..N. The switch
    starts in position "0", so p00[0] = 1 and p11[0] = 0. Both obey the
    same linear recursion as the average correct-decision trace, which
    therefore equals (p00 + p11) / 2.
    """
    alpha = _check_alpha(alpha)
    n = len(betas)
    if n < 1:
        raise ValueError("betas must contain at least one amplitude")
    p00 = np.empty(n + 1)
    p11 = np.empty(n + 1)
    p00[0] = 1.0
    p11[0] = 0.0
    for j, beta in enumerate(betas, 1):
        rates = step_rates(float(beta), alpha, n)
        stay = q_off(rates.lambda_minus)
        flip = q_on(rates.lambda_plus)
        p00[j] = p00[j - 1] * stay + (1.0 - p00[j - 1]) * flip
        p11[j] = p11[j - 1] * stay + (1.0 - p11[j - 1]) * flip
    return p00, p11


def _saturation(rate: float, n_copies: int, resolution: int) -> float:
    q0, _ = q_thresh(rate, resolution, resolution)
    r = q0 - 1.0
    rn = r**n_copies
    return 1.0 - (0.5 * rn + (1.0 - rn) / (1.0 - r))


def saturation_dark(nu: float, n_copies: int, resolution: int) -> float:
    """High-energy error-probability floor induced by dark counts.

    Derived from the recursion with nulling displacements and threshold
    at the full resolution; independent of the signal energy.
    """
    if nu < 0.0:
        raise ValueError(f"nu must be >= 0, got {nu!r}")
    if n_copies < 1:
        raise ValueError("n_copies must be >= 1")
    return _saturation(nu, n_copies, resolution)


def saturation_visibility(xi: float, alpha: float, n_copies: int, resolution: int) -> float:
    """High-energy error probability under reduced visibility.

    Same functional form as the dark-count floor, at the residual rate
    2 alpha^2 (1 - xi) / N left by an imperfectly matched nulling
    displacement; increases with the signal energy.
    """
    if not 0.0 < xi <= 1.0:
        raise ValueError(f"xi must be in (0, 1], got {xi!r}")
    alpha = _check_alpha(alpha)
    if n_copies < 1:
        raise ValueError("n_copies must be >= 1")
    g = 2.0 * alpha * alpha * (1.0 - xi) / n_copies
    return _saturation(g, n_copies, resolution)


def ratio(p_err: float, alpha: float) -> float:
    """Error probability relative to the Helstrom bound."""
    return p_err / helstrom_bound(alpha)


def gain(p_err: float, alpha: float) -> float:
    """Fractional improvement over the SQL; nonnegative means the SQL is beaten."""
    return 1.0 - p_err / sql_error(alpha)
