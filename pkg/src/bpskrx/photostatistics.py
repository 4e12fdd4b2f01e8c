"""Detection statistics for PNR(M) photon counting.

A PNR(M) detector resolves photon numbers 0..M-1 and lumps every count
>= M into the saturated outcome M, so an input coherent pulse of mean
photon number mu produces a truncated Poisson distribution over 0..M.
Homodyne-like (HL) detection mixes the signal with a weak local
oscillator on a balanced beam splitter and reads the difference
Delta = n - m of the two PNR(M) outcomes, Delta in [-M, M].

Detector imperfections enter at the rate level: quantum efficiency eta
rescales every detection rate, dark counts add a constant rate nu per
detector and window, and visibility xi < 1 degrades the interference
cross term of every displacement/mixing operation.

All functions here are pure; they can be called concurrently without
restriction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "DetectorModel",
    "BranchMeans",
    "DifferencePmf",
    "pnr_pmf",
    "branch_means",
    "hl_difference_pmf",
    "skellam_pmf",
    "q_off",
    "q_on",
    "q_thresh",
]


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class DetectorModel:
    """PNR(M) detector with efficiency, dark-count and visibility parameters.

    Attributes
    ----------
    resolution : int
        Maximum resolvable photon number M >= 1.
    eta : float
        Quantum efficiency, 0 < eta <= 1. Applied by rescaling detection
        rates (equivalent to scaling all interfering amplitudes by
        sqrt(eta), since coherent states stay coherent under loss).
    nu : float
        Dark-count rate per detector per measurement window, nu >= 0.
        Added to each detector's rate independently.
    xi : float
        Interference visibility, 0 < xi <= 1. Multiplies the cross term
        of displaced/mixed mean photon numbers.
    """

    resolution: int
    eta: float = 1.0
    nu: float = 0.0
    xi: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.resolution, int) or self.resolution < 1:
            raise ValueError(f"resolution must be an integer >= 1, got {self.resolution!r}")
        if not (0.0 < self.eta <= 1.0):
            raise ValueError(f"eta must be in (0, 1], got {self.eta!r}")
        if not (self.nu >= 0.0 and math.isfinite(self.nu)):
            raise ValueError(f"nu must be finite and >= 0, got {self.nu!r}")
        if not (0.0 < self.xi <= 1.0):
            raise ValueError(f"xi must be in (0, 1], got {self.xi!r}")

    @property
    def is_ideal(self) -> bool:
        return self.eta == 1.0 and self.nu == 0.0 and self.xi == 1.0

    def detection_rate(self, mu: float) -> float:
        """Effective Poisson rate seen by the detector for optical rate mu.

        Dark counts are detector-local noise and are not attenuated by the
        efficiency, hence eta * mu + nu.
        """
        return self.eta * mu + self.nu


class BranchMeans(NamedTuple):
    """Mean photon numbers on the two outputs of the HL beam splitter."""

    mu_plus: float
    mu_minus: float


@dataclass(frozen=True)
class DifferencePmf:
    """PMF of the HL difference photocurrent Delta over [-resolution, resolution].

    ``probs[i]`` is the probability of Delta = i - resolution.
    """

    resolution: int
    probs: np.ndarray

    def prob(self, delta: int) -> float:
        if not -self.resolution <= delta <= self.resolution:
            raise ValueError(f"delta must lie in [-{self.resolution}, {self.resolution}]")
        return float(self.probs[delta + self.resolution])

    def mass_negative(self) -> float:
        """Total probability of Delta < 0."""
        return float(np.sum(self.probs[: self.resolution]))

    def mass_nonnegative(self) -> float:
        """Total probability of Delta >= 0 (ties Delta = 0 included)."""
        return float(np.sum(self.probs[self.resolution :]))


def pnr_pmf(mu: float, resolution: int) -> np.ndarray:
    """Truncated Poisson PMF of a PNR(M) measurement at rate mu.

    Entries 0..M-1 are plain Poisson weights; entry M collects the whole
    tail and is computed as one minus the partial sum (then clamped to
    [0, 1] against rounding), so the distribution is normalized exactly.
    """
    mu = _check_finite("mu", mu)
    if mu < 0.0:
        raise ValueError(f"mu must be >= 0, got {mu!r}")
    if not isinstance(resolution, (int, np.integer)) or resolution < 1:
        raise ValueError(f"resolution must be an integer >= 1, got {resolution!r}")
    probs = np.empty(resolution + 1, dtype=float)
    # Iterative term recurrence avoids factorials and overflow.
    term = math.exp(-mu)
    partial = 0.0
    for n in range(resolution):
        probs[n] = term
        partial += term
        term *= mu / (n + 1)
    probs[resolution] = min(1.0, max(0.0, 1.0 - partial))
    return probs


def branch_means(zeta: float, z: float, xi: float = 1.0) -> BranchMeans:
    """Mean photon numbers of the two HL outputs for signal amplitude zeta.

    mu_pm = (zeta^2 + z^2 +- 2 xi z zeta) / 2. With xi = 1 this is exactly
    |zeta +- z|^2 / 2 for the balanced beam splitter; xi < 1 models the
    mode mismatch between signal and local oscillator.
    """
    zeta = _check_finite("zeta", zeta)
    z = _check_finite("z", z)
    if z < 0.0:
        raise ValueError(f"z must be >= 0, got {z!r}")
    if not (0.0 < xi <= 1.0):
        raise ValueError(f"xi must be in (0, 1], got {xi!r}")
    base = zeta * zeta + z * z
    cross = 2.0 * xi * z * zeta
    return BranchMeans(0.5 * (base + cross), 0.5 * (base - cross))


def hl_difference_pmf(zeta: float, z: float, model: DetectorModel) -> DifferencePmf:
    """PMF of Delta = n - m for HL detection of a coherent signal.

    Both PNR(M) detectors see their branch mean scaled by the efficiency
    plus the dark-count rate. The PMF is assembled diagonal by diagonal
    from the outer product of the two truncated Poisson PMFs, which makes
    the mirror identity S_Delta(-zeta) = S_(-Delta)(zeta) hold bit-exactly.
    """
    mu = branch_means(zeta, z, model.xi)
    p_plus = pnr_pmf(model.detection_rate(mu.mu_plus), model.resolution)
    p_minus = pnr_pmf(model.detection_rate(mu.mu_minus), model.resolution)
    joint = np.outer(p_plus, p_minus)
    m = model.resolution
    probs = np.empty(2 * m + 1, dtype=float)
    for delta in range(-m, m + 1):
        probs[delta + m] = np.trace(joint, offset=-delta)
    return DifferencePmf(resolution=m, probs=probs)


def skellam_pmf(delta: int, mu_plus: float, mu_minus: float) -> float:
    """Skellam probability of a difference of two untruncated Poisson counts.

    Series over the pair distribution, truncated once terms fall below
    1e-16 of the accumulated sum (past the mode). This is the M >> 1
    limit of the HL difference distribution.
    """
    mu_plus = _check_finite("mu_plus", mu_plus)
    mu_minus = _check_finite("mu_minus", mu_minus)
    if mu_plus < 0.0 or mu_minus < 0.0:
        raise ValueError("rates must be >= 0")
    delta = int(delta)
    m0 = max(0, -delta)
    n0 = m0 + delta
    # First term exp(-mu_plus - mu_minus) * mu_plus^n0 / n0! * mu_minus^m0 / m0!
    if (mu_plus == 0.0 and n0 > 0) or (mu_minus == 0.0 and m0 > 0):
        return 0.0
    log_term = -(mu_plus + mu_minus)
    if n0 > 0:
        log_term += n0 * math.log(mu_plus) - math.lgamma(n0 + 1)
    if m0 > 0:
        log_term += m0 * math.log(mu_minus) - math.lgamma(m0 + 1)
    term = math.exp(log_term)
    total = term
    n, m = n0, m0
    prev = term
    for _ in range(100_000):
        n += 1
        m += 1
        term *= (mu_plus * mu_minus) / (n * m)
        total += term
        # Terms rise toward the mode before decaying; only stop on the way down.
        if term <= prev and term < 1e-16 * total:
            break
        prev = term
    return total


def q_off(x: float) -> float:
    """Probability of an "off" (zero-count) result at rate x."""
    x = _check_finite("x", x)
    if x < 0.0:
        raise ValueError(f"x must be >= 0, got {x!r}")
    return math.exp(-x)


def q_on(x: float) -> float:
    """Probability of an "on" result at rate x, cancellation-safe (1 - e^-x)."""
    x = _check_finite("x", x)
    if x < 0.0:
        raise ValueError(f"x must be >= 0, got {x!r}")
    return -math.expm1(-x)


def q_thresh(x: float, n_th: int, resolution: int | None = None) -> tuple[float, float]:
    """Probabilities of counting below / at-or-above the threshold n_th.

    q0 = P(count < n_th) for a Poisson count at rate x, q1 = 1 - q0.
    n_th = 1 reduces exactly to the on/off pair (q_off, q_on). When
    ``resolution`` is given, n_th must not exceed it.
    """
    x = _check_finite("x", x)
    if x < 0.0:
        raise ValueError(f"x must be >= 0, got {x!r}")
    if not isinstance(n_th, (int, np.integer)) or n_th < 1:
        raise ValueError(f"n_th must be an integer >= 1, got {n_th!r}")
    if resolution is not None and n_th > resolution:
        raise ValueError(f"n_th must be <= resolution {resolution}, got {n_th}")
    if n_th == 1:
        return math.exp(-x), -math.expm1(-x)
    term = math.exp(-x)
    q0 = 0.0
    for s in range(n_th):
        q0 += term
        term *= x / (s + 1)
    q0 = min(1.0, q0)
    return q0, 1.0 - q0
