"""Ideal statevector and noisy density-matrix simulation with shot sampling.

Noise semantics:

* ``global_depolarising``: after every gate the whole register goes through
  ``ρ → (1−p)ρ + p·I/2ⁿ`` with ``p = p1`` for single-qubit gates and ``p2``
  for two-qubit gates.
* ``local``: after every gate its own qubits are depolarised (k-local channel
  with ``p1``/``p2``), then each of those qubits undergoes thermal relaxation
  for the gate duration when ``thermal`` is set.
* Readout confusion acts on the outcome distribution.

Basis-change gates appended by :func:`~mitbench.circuit.measurement_circuit`
are executed noiselessly, both here and when sampling, so exact and sampled
estimates describe the same quantity.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .circuit import Circuit, InvalidInputError, PauliOperator, PauliString, ResourceError
from .rng import derive_seed, make_rng

MAX_DM_QUBITS = 7
MAX_SV_QUBITS = 10
MODES = ("ideal", "global_depolarising", "local")


@dataclass(frozen=True)
class ThermalRelaxation:
    """T1/T2 relaxation during gates.

    ``t1`` and ``t2`` are in microseconds, either one value for every qubit or
    a per-qubit sequence. Gate durations default to 35 ns and 300 ns.
    """

    t1: object
    t2: object
    dur1: float = 0.035
    dur2: float = 0.3

    def __post_init__(self):
        for name in ("t1", "t2"):
            v = getattr(self, name)
            v = tuple(float(x) for x in v) if np.ndim(v) else float(v)
            object.__setattr__(self, name, v)
            if min(np.atleast_1d(v)) <= 0:
                raise InvalidInputError(f"{name} must be positive")
        t1 = np.atleast_1d(self.t1)
        t2 = np.atleast_1d(self.t2)
        if np.any(np.broadcast_to(t2, np.broadcast_shapes(t1.shape, t2.shape))
                  > 2 * np.broadcast_to(t1, np.broadcast_shapes(t1.shape, t2.shape)) + 1e-12):
            raise InvalidInputError("t2 must not exceed 2*t1")
        if self.dur1 < 0 or self.dur2 < 0:
            raise InvalidInputError("gate durations must be non-negative")

    def params(self, q, duration):
        """``(p_ad, coherence)`` for qubit ``q`` over ``duration``."""
        t1 = self.t1[q] if isinstance(self.t1, tuple) else self.t1
        t2 = self.t2[q] if isinstance(self.t2, tuple) else self.t2
        return 1.0 - math.exp(-duration / t1), math.exp(-duration / t2)


@dataclass(frozen=True)
class NoiseModel:
    """Noise specification for :func:`noisy_expectation` and sampling.

    Attributes:
        mode: ``"ideal"``, ``"global_depolarising"`` or ``"local"``.
        p1: depolarising probability per single-qubit gate.
        p2: depolarising probability per two-qubit gate.
        thermal: optional :class:`ThermalRelaxation` (local mode only).
        readout: optional 2×2 column-stochastic confusion matrix, shared by all
            qubits, or a per-qubit sequence of them. Entry ``[i][j]`` is the
            probability of reading ``i`` when the qubit is ``j``.
    """

    mode: str = "ideal"
    p1: float = 0.0
    p2: float = 0.0
    thermal: ThermalRelaxation = None
    readout: object = None
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInputError(f"unknown noise mode {self.mode!r}")
        for name in ("p1", "p2"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise InvalidInputError(f"{name} must lie in [0, 1]")
            object.__setattr__(self, name, v)
        if self.thermal is not None and self.mode != "local":
            raise InvalidInputError("thermal relaxation needs local mode")
        if self.readout is not None:
            arr = np.asarray(self.readout, dtype=float)
            if arr.shape == (2, 2):
                arr = arr[None]
            if arr.ndim != 3 or arr.shape[1:] != (2, 2):
                raise InvalidInputError("readout must be a 2x2 matrix or a list of them")
            if np.any(arr < -1e-12) or np.any(np.abs(arr.sum(axis=1) - 1.0) > 1e-9):
                raise InvalidInputError("readout confusion columns must sum to 1")
            object.__setattr__(self, "readout", tuple(map(tuple, arr.reshape(-1, 4))))

    @classmethod
    def ideal(cls):
        return cls("ideal")

    @classmethod
    def global_depolarising(cls, p1, p2):
        return cls("global_depolarising", p1, p2)

    @classmethod
    def local(cls, p1, p2, thermal=None, readout=None):
        return cls("local", p1, p2, thermal, readout)

    @classmethod
    def symmetric_readout(cls, p1, p2, flip, thermal=None):
        """Local model with a symmetric bit-flip readout error of probability ``flip``."""
        return cls.local(p1, p2, thermal, [[1 - flip, flip], [flip, 1 - flip]])

    @property
    def is_ideal(self):
        return self.mode == "ideal" or (
            self.p1 == 0 and self.p2 == 0 and self.thermal is None and self.readout is None
        )

    def confusion(self, q):
        if self.readout is None:
            return None
        flat = self.readout[q] if len(self.readout) > 1 else self.readout[0]
        return np.array(flat, dtype=float).reshape(2, 2)


# Device noise parameters (averages over the device; times in µs).
DEVICES = {
    "lagos": {"t1": 128.1, "t2": 99.50, "e1": 2.307e-4, "e2": 8.973e-3, "readout": 1.164e-2},
    "casablanca": {"t1": 108.5, "t2": 124.1, "e1": 1.713e-4, "e2": 8.075e-3, "readout": 2.081e-2},
}


def device_noise_model(name, dur1=0.035, dur2=0.3):
    """Local depolarising + thermal relaxation + symmetric readout for a named device."""
    try:
        d = DEVICES[name]
    except KeyError:
        raise InvalidInputError(f"unknown device {name!r}; choose from {sorted(DEVICES)}") from None
    th = ThermalRelaxation(d["t1"], d["t2"], dur1, dur2)
    return NoiseModel.symmetric_readout(d["e1"], d["e2"], d["readout"], th)


# Pauli helpers ---------------------------------------------------------------

def _pauli_masks(p, n):
    xmask = zmask = 0
    n_y = 0
    for q, ch in enumerate(p.letters):
        bit = 1 << (n - 1 - q)
        if ch in "XY":
            xmask |= bit
        if ch in "YZ":
            zmask |= bit
        if ch == "Y":
            n_y += 1
    return xmask, zmask, n_y


def _parity_signs(mask, dim):
    idx = np.arange(dim, dtype=np.int64) & mask
    par = np.zeros(dim, dtype=np.int64)
    while np.any(idx):
        par ^= idx & 1
        idx >>= 1
    return 1.0 - 2.0 * par


def _pauli_apply_phase(p, n):
    """``(flip_index, phase)`` with ``P|j⟩ = phase[j]·|flip_index[j]⟩``."""
    dim = 1 << n
    xmask, zmask, n_y = _pauli_masks(p, n)
    flip = np.arange(dim) ^ xmask
    phase = (1j**n_y) * _parity_signs(zmask, dim)
    return flip, phase


def pauli_expectation_sv(psi, p, n):
    flip, phase = _pauli_apply_phase(p, n)
    return float(np.real(np.vdot(psi[flip], phase * psi)))


def pauli_expectation_dm(rho, p, n):
    flip, phase = _pauli_apply_phase(p, n)
    return float(np.real(np.sum(phase * rho[np.arange(1 << n), flip])))


def _check_operator(c, o):
    if isinstance(o, (str, PauliString)):
        o = PauliOperator(o)
    if o.width != c.n_qubits:
        raise InvalidInputError(f"operator width {o.width} does not match circuit width {c.n_qubits}")
    return o


# Ideal simulation --------------------------------------------------------------

def statevector(c):
    if c.n_qubits > MAX_SV_QUBITS:
        raise ResourceError(f"statevector simulation supports at most {MAX_SV_QUBITS} qubits")
    psi = np.zeros(1 << c.n_qubits, dtype=complex)
    psi[0] = 1.0
    for g in c.gates:
        psi = kernels.sv_apply(psi, g.to_matrix(), g.qubits, c.n_qubits)
    return psi


def ideal_expectation(c, o):
    """Exact ``⟨0|U† O U|0⟩`` by statevector simulation."""
    o = _check_operator(c, o)
    psi = statevector(c)
    return float(sum(coef * pauli_expectation_sv(psi, p, c.n_qubits) for p, coef in o.items()))


# Noisy simulation --------------------------------------------------------------

def _apply_gate_noise(rho, g, nm, n):
    k = g.n_qubits
    p = nm.p1 if k == 1 else nm.p2
    if nm.mode == "global_depolarising":
        if p > 0:
            rho *= 1.0 - p
            rho[np.diag_indices_from(rho)] += p / rho.shape[0]
        return
    if p > 0:
        kernels.dm_depolarize(rho, p, g.qubits, n)
    if nm.thermal is not None:
        dur = nm.thermal.dur1 if k == 1 else nm.thermal.dur2
        for q in g.qubits:
            p_ad, coh = nm.thermal.params(q, dur)
            kernels.dm_thermal(rho, q, n, p_ad, coh)


def density_matrix(c, nm, ideal_tail=0):
    """Final density matrix; the last ``ideal_tail`` gates are applied without noise."""
    n = c.n_qubits
    if n > MAX_DM_QUBITS:
        raise ResourceError(f"density-matrix simulation supports at most {MAX_DM_QUBITS} qubits")
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    noisy = nm.mode != "ideal"
    cut = len(c.gates) - ideal_tail
    for i, g in enumerate(c.gates):
        kernels.dm_apply_unitary(rho, g.to_matrix(), g.qubits, n)
        if noisy and i < cut:
            _apply_gate_noise(rho, g, nm, n)
    return rho


def apply_readout(probs, nm, n):
    """Push a computational-basis distribution through the readout confusion."""
    if nm.readout is None or nm.mode == "ideal":
        return probs
    t = probs.reshape((2,) * n)
    for q in range(n):
        t = np.moveaxis(np.tensordot(nm.confusion(q), t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def _diagonal(rho):
    return np.clip(np.real(np.diag(rho)), 0.0, None)


def _rotate_for(rho, p, n):
    """Ideal basis change mapping ``p`` to Z, applied to a copy of ``rho``."""
    from .circuit import measurement_circuit

    rot = measurement_circuit(Circuit(n), p)
    out = rho.copy()
    for g in rot.gates:
        kernels.dm_apply_unitary(out, g.to_matrix(), g.qubits, n)
    return out


def noisy_expectation(c, o, nm):
    """Infinite-shot expectation value of ``o`` after ``c`` under noise ``nm``."""
    o = _check_operator(c, o)
    n = c.n_qubits
    rho = density_matrix(c, nm)
    readout = nm.readout is not None and nm.mode != "ideal"
    total = 0.0
    for p, coef in o.items():
        if p.is_identity:
            total += coef
        elif not readout:
            total += coef * pauli_expectation_dm(rho, p, n)
        else:
            probs = apply_readout(_diagonal(_rotate_for(rho, p, n)), nm, n)
            signs = _parity_signs(_support_mask(p, n), 1 << n)
            total += coef * float(np.dot(signs, probs) / probs.sum())
    return float(total)


def _support_mask(p, n):
    m = 0
    for q in p.support:
        m |= 1 << (n - 1 - q)
    return m


def outcome_distribution(c, nm):
    """Exact outcome probabilities of a measured circuit, readout error included."""
    if not c.measured:
        raise InvalidInputError("outcome_distribution needs a measured circuit")
    tail = int(c.meta.get("basis_gates", 0))
    if nm.mode == "ideal":
        probs = np.abs(statevector(c.with_measurement(False))) ** 2
    else:
        probs = _diagonal(density_matrix(c, nm, ideal_tail=tail))
    probs = apply_readout(probs, nm, c.n_qubits)
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


# Counts and estimation ---------------------------------------------------------

class Counts:
    """Shot outcome histogram keyed by bitstring (qubit 0 first)."""

    def __init__(self, counts, total_shots=None):
        counts = {str(k): int(v) for k, v in counts.items() if int(v) != 0}
        if any(v < 0 for v in counts.values()):
            raise InvalidInputError("counts must be non-negative")
        widths = {len(k) for k in counts}
        if len(widths) > 1 or any(set(k) - {"0", "1"} for k in counts):
            raise InvalidInputError("bitstrings must be binary and of equal length")
        total = sum(counts.values())
        if total_shots is not None and int(total_shots) != total:
            raise InvalidInputError("counts do not sum to total_shots")
        self.counts = dict(sorted(counts.items()))
        self.total_shots = total

    def __getitem__(self, key):
        return self.counts.get(key, 0)

    def __eq__(self, other):
        return isinstance(other, Counts) and self.counts == other.counts

    def __repr__(self):
        return f"Counts({self.counts})"

    def items(self):
        return self.counts.items()

    def to_json(self):
        d = dict(self.counts)
        d["_shots"] = self.total_shots
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        total = d.pop("_shots", None)
        return cls(d, total)


def sample_counts(c, nm, shots, seed):
    """Multinomial shot sample from a measured circuit under noise ``nm``."""
    if not c.measured:
        raise InvalidInputError("sample_counts needs a measured circuit")
    shots = int(shots)
    if shots <= 0:
        raise InvalidInputError("shots must be positive")
    probs = outcome_distribution(c, nm)
    return counts_from_probs(probs, c.n_qubits, shots, seed)


def counts_from_probs(probs, n, shots, seed):
    rng = make_rng(seed, "shots")
    draws = rng.multinomial(shots, probs)
    nz = np.flatnonzero(draws)
    return Counts({format(int(i), f"0{n}b"): int(draws[i]) for i in nz}, shots)


@dataclass(frozen=True)
class EstimatorValue:
    """Sample-mean estimate with the variance of that mean."""

    value: float
    n_shots: int
    sample_variance: float

    @property
    def std(self):
        return math.sqrt(self.sample_variance)


def estimate_expectation(counts, p):
    """Parity estimator of ``⟨p⟩`` from counts taken in ``p``'s measurement basis."""
    p = p if isinstance(p, PauliString) else PauliString(p)
    if counts.total_shots <= 0:
        raise InvalidInputError("empty counts")
    n = len(p)
    support = p.support
    acc = 0
    for bits, k in counts.items():
        if len(bits) != n:
            raise InvalidInputError("bitstring width does not match Pauli string")
        parity = sum(bits[q] == "1" for q in support) & 1
        acc += -k if parity else k
    total = counts.total_shots
    v = acc / total
    return EstimatorValue(v, total, max(0.0, 1.0 - v * v) / total)


def split_shots(total, parts):
    """Equal shares of ``total``; the remainder goes to the first share."""
    base, extra = divmod(int(total), parts)
    return [base + extra] + [base] * (parts - 1)


def _combine(o, per_term):
    value = sum(coef * ev.value for (_, coef), ev in zip(o.items(), per_term))
    var = sum(coef * coef * ev.sample_variance for (_, coef), ev in zip(o.items(), per_term))
    shots = sum(ev.n_shots for ev in per_term)
    return EstimatorValue(float(value), int(shots), float(var))


# Backends ----------------------------------------------------------------------

class SampledBackend:
    """Finite-shot expectation estimates under a noise model.

    Shots are split evenly across the non-identity terms of the operator; each
    term is sampled from its own derived seed.
    """

    name = "sampled"

    def __init__(self, noise):
        self.noise = noise

    def estimate(self, c, o, shots, seed):
        from .circuit import measurement_circuit

        o = _check_operator(c, o)
        terms = [p for p, _ in o.items() if not p.is_identity]
        alloc = iter(split_shots(shots, max(1, len(terms))))
        out = []
        for k, (p, _) in enumerate(o.items()):
            if p.is_identity:
                out.append(EstimatorValue(1.0, 0, 0.0))
                continue
            n_k = next(alloc)
            if n_k <= 0:
                raise InvalidInputError("not enough shots for every operator term")
            counts = sample_counts(measurement_circuit(c, p), self.noise, n_k, derive_seed(seed, "term", k))
            out.append(estimate_expectation(counts, p))
        return _combine(o, out)

    def exact(self, c, o):
        return noisy_expectation(c, o, self.noise)


class ExactBackend(SampledBackend):
    """Infinite-shot values with the variance a sampled run of the same size would have."""

    name = "exact"

    def estimate(self, c, o, shots, seed=None):
        o = _check_operator(c, o)
        terms = [p for p, _ in o.items() if not p.is_identity]
        alloc = iter(split_shots(shots, max(1, len(terms))))
        out = []
        for p, _ in o.items():
            if p.is_identity:
                out.append(EstimatorValue(1.0, 0, 0.0))
                continue
            n_k = next(alloc)
            v = self.exact(c, PauliOperator({p: 1.0}))
            out.append(EstimatorValue(v, n_k, max(0.0, 1.0 - v * v) / n_k))
        return _combine(o, out)


class IdealBackend(ExactBackend):
    """Noise-free exact values; the classical simulator used for CDR training."""

    name = "ideal"

    def __init__(self):
        super().__init__(NoiseModel.ideal())

    def exact(self, c, o):
        return ideal_expectation(c, o)


def make_backend(noise, sampled=True):
    return SampledBackend(noise) if sampled else ExactBackend(noise)


__all__ = [
    "Counts",
    "DEVICES",
    "EstimatorValue",
    "ExactBackend",
    "IdealBackend",
    "NoiseModel",
    "SampledBackend",
    "ThermalRelaxation",
    "density_matrix",
    "device_noise_model",
    "estimate_expectation",
    "ideal_expectation",
    "noisy_expectation",
    "outcome_distribution",
    "sample_counts",
]
