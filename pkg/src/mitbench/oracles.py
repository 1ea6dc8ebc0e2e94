"""Closed-form predictions under global depolarising noise and ratio-normality checks.

These functions are independent of the simulator and the mitigation engines
and serve as ground truth for both.
"""

import math
from dataclasses import dataclass

from .errors import InvalidInputError


@dataclass(frozen=True)
class DepolarisingProfile:
    """Gate counts and error rates of a circuit under global depolarising noise."""

    p1: float
    p2: float
    d1: int
    d2: int

    def __post_init__(self):
        if not (0 <= self.p1 <= 1 and 0 <= self.p2 <= 1):
            raise InvalidInputError("probabilities must lie in [0, 1]")
        if self.d1 < 0 or self.d2 < 0:
            raise InvalidInputError("gate counts must be non-negative")

    @classmethod
    def of_circuit(cls, c, p1, p2):
        return cls(p1, p2, c.n_one_qubit, c.n_two_qubit)

    @property
    def gamma(self):
        """Attenuation ``(1−p1)^{d1}·(1−p2)^{d2}`` of traceless expectations."""
        return (1.0 - self.p1) ** self.d1 * (1.0 - self.p2) ** self.d2


def depolarising_noisy_expectation(ideal, prof):
    """Noisy expectation ``γ·ideal`` of a traceless observable."""
    return prof.gamma * ideal


def richardson_coefficients(alphas):
    """Weights ``F_i = Π_{j≠i} α_j/(α_j − α_i)`` with ``Σ F_i·f(α_i) = f(0)`` for polynomials of degree < k."""
    alphas = [float(a) for a in alphas]
    if len(alphas) < 2:
        raise InvalidInputError("need at least two noise levels")
    if len(set(alphas)) != len(alphas):
        raise InvalidInputError("noise levels must be distinct")
    out = []
    for i, ai in enumerate(alphas):
        f = 1.0
        for j, aj in enumerate(alphas):
            if j != i:
                f *= aj / (aj - ai)
        out.append(f)
    return out


def predicted_zne_poly_error(gamma, alphas):
    """Relative error ``(1 − Σ F_i·γ^{α_i})/(1 − γ)`` of Richardson ZNE under global depolarising noise.

    ``gamma`` is the attenuation of the unfolded circuit.
    """
    if not 0 < gamma < 1:
        raise InvalidInputError("gamma must lie in (0, 1)")
    coeffs = richardson_coefficients(alphas)
    return (1.0 - sum(f * gamma**a for f, a in zip(coeffs, alphas))) / (1.0 - gamma)


@dataclass(frozen=True)
class NormalityCheck:
    """Coefficient-of-variation test for treating the error ratio as normal.

    ``passes`` holds when ``0 ≤ delta_y ≤ threshold``; ``valid_interval`` is
    ``(μ − σ/λ, μ + σ/λ)``.
    """

    delta_y: float
    threshold: float
    passes: bool
    valid_interval: tuple

    def to_dict(self):
        return {
            "delta_y": self.delta_y,
            "threshold": self.threshold,
            "passes": self.passes,
            "valid_interval": list(self.valid_interval),
        }


def ratio_normality_check(mu_n_gap, sigma_n, lam):
    """Check ``δ_Y = σ_N/|μ_N − ⟨O⟩| ≤ λ`` for the denominator of the relative error."""
    if not mu_n_gap > 0:
        raise InvalidInputError("the noisy-ideal gap must be positive")
    if not 0 < lam < 1:
        raise InvalidInputError("lambda must lie in (0, 1)")
    if sigma_n < 0:
        raise InvalidInputError("sigma_n must be non-negative")
    delta = sigma_n / mu_n_gap
    half = sigma_n / lam
    return NormalityCheck(delta, lam, delta <= lam, (mu_n_gap - half, mu_n_gap + half))


def low_noise_bound(lam, depth, e_max, obs_norm=1.0):
    """Largest standard error ``λ·d·e_max·‖O‖_∞`` compatible with the normality lemma."""
    return lam * depth * e_max * obs_norm


def e_max_of(noise):
    """Maximal gate error for depolarising modes: ``max(p1, p2)``."""
    if noise.mode == "ideal":
        return 0.0
    if noise.thermal is not None or noise.readout is not None:
        raise InvalidInputError("e_max is only defined for pure depolarising models; pass it explicitly")
    return max(noise.p1, noise.p2)


def zne_exponential_is_exact(gamma, alphas, tol=1e-12):
    """Sanity helper: the two-level exponential closed form recovers 1 from ``γ^{α}`` data."""
    a0, a1 = alphas[:2]
    est = (gamma**a0) ** (a1 / (a1 - a0)) * (gamma**a1) ** (a0 / (a0 - a1))
    return math.isclose(est, 1.0, abs_tol=tol)
