"""Sampling-variance propagation for the mitigated estimators."""

import numpy as np

from ..errors import InvalidInputError, SingularVarianceError


def cdr_variance(sigma_n2, f1, f0, noisy, ideal_training):
    """Variance of the CDR estimate under the ``noisy = F1·ideal + F0`` regression.

    Args:
        sigma_n2: variance of the noisy estimate of the target circuit; the
            training estimates are assumed to share it.
        f1, f0: fitted slope and intercept.
        noisy: noisy estimate ``⟨Ô⟩_N`` of the target circuit.
        ideal_training: exact values ``Dᶜᵢ`` of the K training circuits.

    Returns:
        ``((K+1)σ²)/(K·F1²)·[1 + ((⟨Ô⟩_N − F0)² + F1²·D̄ᶜ²)/(F1²·Σ(Dᶜᵢ − D̄ᶜ)²)]``.
    """
    dc = np.asarray(ideal_training, dtype=float)
    k = len(dc)
    if k < 2:
        raise InvalidInputError("need at least two training values")
    if sigma_n2 == 0:
        return 0.0
    spread = float(np.sum((dc - dc.mean()) ** 2))
    if spread == 0.0 or f1 == 0.0:
        raise SingularVarianceError("training values have no spread")
    mean = float(dc.mean())
    bracket = 1.0 + ((noisy - f0) ** 2 + f1 * f1 * mean * mean) / (f1 * f1 * spread)
    return (k + 1) * sigma_n2 / (k * f1 * f1) * bracket


def zne_exponential_relative_variance(sigma_n2, noisy, lambdas):
    """Relative variance ``σ_EM²/⟨Ô⟩_EM²`` of exponential extrapolation.

    ``(1/|λ|)·σ²/⟨Ô⟩_N² + λ̄·Var[F̂₁]`` with
    ``Var[F̂₁] = σ²·(|λ|+1)/(|λ|·Σ(λᵢ − λ̄)²)``.
    """
    lam = np.asarray(lambdas, dtype=float)
    m = len(lam)
    spread = float(np.sum((lam - lam.mean()) ** 2))
    if spread == 0.0:
        raise SingularVarianceError("noise scales have no spread")
    if sigma_n2 == 0:
        return 0.0
    if noisy == 0.0:
        raise SingularVarianceError("noisy expectation is zero")
    var_f1 = sigma_n2 * (m + 1) / (m * spread)
    return sigma_n2 / (m * noisy * noisy) + float(lam.mean()) * var_f1


def propagate_variance(kind, **ctx):
    """Dispatch to :func:`cdr_variance` or the ZNE-exponential formula.

    For ``kind="zne_exponential"`` pass ``sigma_n2``, ``noisy``, ``lambdas``
    and ``mitigated``; the absolute variance is returned.
    """
    if kind == "cdr":
        return cdr_variance(ctx["sigma_n2"], ctx["f1"], ctx["f0"], ctx["noisy"], ctx["ideal_training"])
    if kind == "zne_exponential":
        rel = zne_exponential_relative_variance(ctx["sigma_n2"], ctx["noisy"], ctx["lambdas"])
        return rel * float(ctx["mitigated"]) ** 2
    raise InvalidInputError(f"unknown variance kind {kind!r}")
