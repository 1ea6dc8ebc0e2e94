"""Clifford data regression.

Training circuits are near-Clifford copies of the target: all but a few
non-Clifford ``Rz`` rotations are snapped to the nearest multiple of π/2. Each
training circuit is run on the noisy backend and simulated exactly; a linear
map fitted to those pairs corrects the noisy estimate of the target.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..circuit import Circuit, Gate, InvalidInputError
from ..errors import DegenerateTrainingError, SingularFitError
from ..rng import derive_seed, make_rng
from ..simulator import split_shots
from .extrapolation import FitResult
from .variance import cdr_variance
from .zne import MitigatedEstimate

FIT_DIRECTIONS = ("ideal_from_noisy", "noisy_from_ideal")
SINGULAR_SLOPE = 1e-12
_UNSUPPORTED = ("U2q", "T", "Tdg")


@dataclass(frozen=True)
class CdrConfig:
    """CDR settings.

    Attributes:
        n_non_clifford: non-Clifford rotations kept in each training circuit.
        n_pairs: Clifford/non-Clifford swaps between the seed circuit and each
            further training circuit.
        n_training: number of training circuits.
        fit_direction: ``ideal_from_noisy`` fits ``ideal = F1·noisy + F0``;
            ``noisy_from_ideal`` fits ``noisy = A·ideal + B`` and inverts it.
        conditioning_tol: minimum spread Σ(x − x̄)² of training values.
        seed: seed for training-set generation.
        max_attempts: training sets tried before giving up.
    """

    n_non_clifford: int = 10
    n_pairs: int = 1
    n_training: int = 20
    fit_direction: str = "ideal_from_noisy"
    conditioning_tol: float = 1e-6
    seed: int = 0
    max_attempts: int = 5

    def __post_init__(self):
        if int(self.n_non_clifford) < 0:
            raise InvalidInputError("n_non_clifford must be non-negative")
        if int(self.n_pairs) < 1:
            raise InvalidInputError("n_pairs must be positive")
        if int(self.n_training) < 2:
            raise InvalidInputError("n_training must be at least 2")
        if self.fit_direction not in FIT_DIRECTIONS:
            raise InvalidInputError(f"unknown fit direction {self.fit_direction!r}")
        if not self.conditioning_tol > 0:
            raise InvalidInputError("conditioning_tol must be positive")
        if int(self.max_attempts) < 1:
            raise InvalidInputError("max_attempts must be positive")


def nearest_clifford_angle(theta):
    """Closest multiple of π/2 to ``theta`` on the circle, in [0, 2π)."""
    k = round((theta % (2 * math.pi)) / (math.pi / 2)) % 4
    return k * math.pi / 2


def _non_clifford_positions(c):
    pos = []
    for i, g in enumerate(c.gates):
        if g.kind in _UNSUPPORTED:
            raise InvalidInputError(f"CDR needs a compiled circuit; found {g.kind} (compile first)")
        if g.kind == "Rz" and not g.is_clifford():
            pos.append(i)
    return pos


def generate_training_set(c, cfg, seed=None):
    """Near-Clifford training circuits for ``c``.

    The first circuit (the seed) keeps ``min(n_non_clifford, m)`` of the ``m``
    non-Clifford rotations, or ``m − 1`` when ``m ≤ n_non_clifford`` so that
    at least one is replaced. Each further circuit swaps ``n_pairs`` kept and
    replaced rotations of the seed, chosen uniformly at random.

    Args:
        c: compiled circuit; non-Clifford content must sit in ``Rz`` gates.
        cfg: :class:`CdrConfig`.
        seed: overrides ``cfg.seed``.

    Returns:
        List of ``cfg.n_training`` circuits with the same gate count as ``c``.
    """
    seed = cfg.seed if seed is None else seed
    pos = _non_clifford_positions(c)
    m = len(pos)
    if m == 0:
        return [c.with_gates(c.gates) for _ in range(cfg.n_training)]
    keep = min(cfg.n_non_clifford, m)
    if m <= cfg.n_non_clifford:
        keep = m - 1
    rng = make_rng(seed, "training")
    kept = set(rng.choice(m, size=keep, replace=False).tolist()) if keep else set()
    base = list(c.gates)

    def build(kept_idx):
        gates = list(base)
        for j, p in enumerate(pos):
            if j not in kept_idx:
                g = base[p]
                gates[p] = Gate.rz(g.qubits[0], nearest_clifford_angle(g.angle))
        return c.with_gates(gates)

    out = [build(kept)]
    kept_sorted = sorted(kept)
    replaced_sorted = sorted(set(range(m)) - kept)
    n_swap = min(cfg.n_pairs, len(kept_sorted), len(replaced_sorted))
    for _ in range(cfg.n_training - 1):
        if n_swap == 0:
            out.append(build(kept))
            continue
        drop = rng.choice(kept_sorted, size=n_swap, replace=False).tolist()
        add = rng.choice(replaced_sorted, size=n_swap, replace=False).tolist()
        out.append(build((kept - set(drop)) | set(add)))
    return out


def _spread(x):
    x = np.asarray(x, dtype=float)
    return float(np.sum((x - x.mean()) ** 2))


def _line_fit(x, y):
    """Ordinary least squares ``y = slope·x + intercept``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    res = y - (slope * x + intercept)
    rss = float(np.sum(res**2))
    dof = len(x) - 2
    s2 = rss / dof if dof > 0 else 0.0
    var_slope = s2 / sxx
    var_int = s2 * (1.0 / len(x) + xm * xm / sxx)
    return slope, intercept, rss, (var_int, var_slope)


def cdr_plan(e, cfg, shot_seed=None):
    """Shot shares (target first) and the seed root for one CDR run."""
    n_circ = cfg.n_training + 1
    if e.shot_budget < n_circ:
        raise InvalidInputError("shot budget is smaller than the number of CDR circuits")
    root = cfg.seed if shot_seed is None else shot_seed
    return split_shots(e.shot_budget, n_circ), root


def attempt_seed(cfg, attempt):
    return cfg.seed if attempt == 0 else derive_seed(cfg.seed, "retry", attempt)


def shot_seed_for(root, attempt, index):
    return derive_seed(root, "cdr", attempt, index)


def ideal_values(training, observable, ideal_backend):
    return [float(ideal_backend.exact(t, observable)) for t in training]


def finish_cdr(e, cfg, target_est, train_noisy, train_ideal, attempts, shots_used):
    """Fit training pairs and assemble the mitigated estimate."""
    noisy = float(target_est.value)
    a, b, rss_nfi, var_nfi = _line_fit(train_ideal, train_noisy)
    if cfg.fit_direction == "ideal_from_noisy":
        f1, f0, rss, pvar = _line_fit(train_noisy, train_ideal)
        if abs(f1) < SINGULAR_SLOPE:
            raise SingularFitError(f"fitted slope {f1:.3g} is singular")
        mitigated = f1 * noisy + f0
        params = (f0, f1)
    else:
        if abs(a) < SINGULAR_SLOPE:
            raise SingularFitError(f"fitted slope {a:.3g} is singular")
        mitigated = (noisy - b) / a
        params, rss, pvar = (b, a), rss_nfi, var_nfi
    if abs(a) < SINGULAR_SLOPE:
        raise SingularFitError(f"fitted slope {a:.3g} is singular")
    variance = cdr_variance(target_est.sample_variance, a, b, noisy, train_ideal)
    fit = FitResult(
        cfg.fit_direction, tuple(float(p) for p in params), float(mitigated), float(rss),
        tuple(float(v) for v in pvar), {"noisy_from_ideal": (float(b), float(a))},
    )
    metadata = {
        "method": "cdr",
        "fit_direction": cfg.fit_direction,
        "training": [{"ideal": float(i), "noisy": float(n)} for i, n in zip(train_ideal, train_noisy)],
        "attempts": attempts,
        "shots_used": int(shots_used),
    }
    return MitigatedEstimate(float(mitigated), noisy, fit, float(variance), metadata)


def cdr(e, cfg, noisy_backend, ideal_backend, shot_seed=None):
    """Clifford data regression of ``e``.

    The shot budget is split equally over the target and the training
    circuits. Training sets whose exact or noisy values have spread below
    ``cfg.conditioning_tol`` are regenerated from a derived seed, up to
    ``cfg.max_attempts`` times; a regenerated set after a noisy-spread failure
    costs another training budget, reported in ``metadata["shots_used"]``.

    Args:
        e: experiment with a compiled circuit.
        cfg: :class:`CdrConfig`.
        noisy_backend: object with ``estimate(circuit, observable, shots, seed)``.
        ideal_backend: object with ``exact(circuit, observable)``.
        shot_seed: seed for shot sampling; defaults to ``cfg.seed``.

    Raises:
        DegenerateTrainingError: no well-conditioned training set was found.
        SingularFitError: the fitted slope vanished.
    """
    shares, root = cdr_plan(e, cfg, shot_seed)
    target_est = noisy_backend.estimate(e.circuit, e.observable, shares[0], shot_seed_for(root, 0, 0))
    return run_training(e, cfg, noisy_backend, ideal_backend, shares, root, target_est, 0, shares[0])


def run_training(e, cfg, noisy_backend, ideal_backend, shares, root, target_est, first_attempt, shots_used):
    """Try training sets from ``first_attempt`` on until one is well conditioned."""
    reasons = []
    for attempt in range(first_attempt, cfg.max_attempts):
        training = generate_training_set(e.circuit, cfg, attempt_seed(cfg, attempt))
        ideal = ideal_values(training, e.observable, ideal_backend)
        if _spread(ideal) < cfg.conditioning_tol:
            reasons.append({"attempt": attempt, "reason": "ideal spread", "spread": _spread(ideal)})
            continue
        noisy = []
        for i, t in enumerate(training):
            est = noisy_backend.estimate(t, e.observable, shares[i + 1], shot_seed_for(root, attempt, i + 1))
            noisy.append(float(est.value))
        shots_used += sum(shares[1:])
        status = check_noisy_spread(cfg, noisy, attempt)
        if status is not None:
            reasons.append(status)
            continue
        return finish_cdr(e, cfg, target_est, noisy, ideal, attempt + 1, shots_used)
    raise DegenerateTrainingError(
        f"no well-conditioned training set after {cfg.max_attempts} attempts: {reasons}"
    )


def check_noisy_spread(cfg, noisy, attempt):
    if _spread(noisy) < cfg.conditioning_tol:
        return {"attempt": attempt, "reason": "noisy spread", "spread": _spread(noisy)}
    return None
