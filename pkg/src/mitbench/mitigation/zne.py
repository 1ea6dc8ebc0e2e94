"""Zero-noise extrapolation.

Data collection folds the circuit at each noise scale and estimates the
observable with an equal share of the shot budget; data processing fits the
points and reads the curve at zero noise.
"""

import json
import math
from dataclasses import dataclass, field

from ..circuit import Circuit, InvalidInputError, PauliOperator, PauliString
from ..errors import FitFailureError
from ..rng import derive_seed
from ..simulator import split_shots
from .extrapolation import FitResult, FitSpec, extrapolate
from .folding import FOLDING_MODES, check_scale, fold
from .variance import propagate_variance


@dataclass(frozen=True)
class Experiment:
    """Circuit, observable and total shot budget of one mitigation run."""

    circuit: Circuit
    observable: PauliOperator
    shot_budget: int

    def __post_init__(self):
        obs = self.observable
        if isinstance(obs, (str, PauliString)):
            obs = PauliOperator(obs)
            object.__setattr__(self, "observable", obs)
        if obs.width != self.circuit.n_qubits:
            raise InvalidInputError("observable width does not match the circuit")
        if int(self.shot_budget) < 1:
            raise InvalidInputError("shot budget must be at least 1")
        object.__setattr__(self, "shot_budget", int(self.shot_budget))


@dataclass(frozen=True)
class ZneConfig:
    """ZNE settings.

    Attributes:
        lambdas: strictly increasing odd noise scales starting at 1.
        folding: ``circuit``, ``random_gate`` or ``odd_gate``.
        fit: fit model name or :class:`FitSpec`; ``"polynomial(2)"`` style
            strings carry the order.
        seed: seed for random folding.
    """

    lambdas: tuple = (1, 3, 5, 7, 9)
    folding: str = "circuit"
    fit: object = "exponential"
    seed: int = 0

    def __post_init__(self):
        lams = tuple(check_scale(x) for x in self.lambdas)
        if not lams or lams[0] != 1 or any(b <= a for a, b in zip(lams, lams[1:])):
            raise InvalidInputError("lambdas must be strictly increasing odd integers starting at 1")
        object.__setattr__(self, "lambdas", lams)
        if self.folding not in FOLDING_MODES:
            raise InvalidInputError(f"unknown folding mode {self.folding!r}")
        spec = FitSpec.parse(self.fit)
        if len(lams) < spec.n_params(len(lams)):
            raise InvalidInputError(f"{spec} needs at least {spec.n_params()} noise scales")
        object.__setattr__(self, "fit", spec)


@dataclass(frozen=True)
class MitigatedEstimate:
    """Result of a mitigation run.

    Attributes:
        mitigated: error-mitigated estimate.
        noisy: unmitigated estimate from the same data (λ = 1 or the target circuit).
        fit: the fit behind ``mitigated``.
        variance: propagated sampling variance of ``mitigated``.
        metadata: per-λ values or training pairs and bookkeeping.
    """

    mitigated: float
    noisy: float
    fit: FitResult
    variance: float
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "mitigated": float(self.mitigated),
            "noisy": float(self.noisy),
            "fit": {k: v for k, v in self.fit.to_dict().items() if k in ("model", "params", "residual")},
            "variance": float(self.variance),
            "metadata": self.metadata,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def zne_plan(e, cfg, shot_seed=None):
    """Per-level ``(λ, shots, fold seed, shot seed)`` tuples for a run."""
    lams = cfg.lambdas
    if e.shot_budget < len(lams):
        raise InvalidInputError("shot budget is smaller than the number of noise scales")
    root = cfg.seed if shot_seed is None else shot_seed
    shares = split_shots(e.shot_budget, len(lams))
    return [
        (lam, shots, derive_seed(cfg.seed, "fold", lam), derive_seed(root, "zne", i))
        for i, (lam, shots) in enumerate(zip(lams, shares))
    ]


def fold_level(circuit, lam, folding, fold_seed):
    return fold(circuit, lam, folding, fold_seed)


def evaluate_level(backend, circuit, observable, shots, seed):
    return backend.estimate(circuit, observable, shots, seed)


def finish_zne(cfg, plan, estimates):
    """Fit the collected per-level estimates and assemble the result."""
    points = [(lam, ev.value, ev.sample_variance) for (lam, *_), ev in zip(plan, estimates)]
    noisy = estimates[0]
    try:
        fit = extrapolate(points, cfg.fit)
    except FitFailureError as exc:
        exc.diagnostics.setdefault("points", [list(p) for p in points])
        raise
    if fit.model == "exponential" and not cfg.fit.offset:
        variance = propagate_variance(
            "zne_exponential",
            sigma_n2=noisy.sample_variance,
            noisy=noisy.value,
            lambdas=[p[0] for p in points],
            mitigated=fit.extrapolated,
        )
    else:
        variance = fit.info.get("extrapolated_variance", 0.0)
    if not math.isfinite(variance):
        variance = float("inf")
    metadata = {
        "method": "zne",
        "fit": str(cfg.fit),
        "folding": cfg.folding,
        "levels": [
            {"lambda": lam, "shots": shots, "value": ev.value, "variance": ev.sample_variance}
            for (lam, shots, *_), ev in zip(plan, estimates)
        ],
        "shots_used": sum(p[1] for p in plan),
    }
    if "fallback" in fit.info:
        metadata["fallback"] = fit.info["fallback"]
    return MitigatedEstimate(float(fit.extrapolated), float(noisy.value), fit, float(variance), metadata)


def zne(e, cfg, backend, shot_seed=None):
    """Zero-noise extrapolation of ``e`` on ``backend``.

    Args:
        e: experiment (circuit, observable, budget).
        cfg: :class:`ZneConfig`.
        backend: object with ``estimate(circuit, observable, shots, seed)``.
        shot_seed: seed for shot sampling; defaults to ``cfg.seed``.

    Returns:
        :class:`MitigatedEstimate` whose ``noisy`` field is the λ = 1 estimate.
    """
    plan = zne_plan(e, cfg, shot_seed)
    estimates = []
    for lam, shots, fseed, sseed in plan:
        folded = fold_level(e.circuit, lam, cfg.folding, fseed)
        estimates.append(evaluate_level(backend, folded, e.observable, shots, sseed))
    return finish_zne(cfg, plan, estimates)
