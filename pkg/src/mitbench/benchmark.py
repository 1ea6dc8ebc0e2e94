"""Volumetric benchmarking of error mitigation.

Circuits come from two classes: layers of Haar-random two-qubit blocks on a
random pairing (``random_su4``) and layers of single Pauli gadgets with a
uniformly random string and angle (``pauli_gadget``). A mirrored circuit
follows each layer by its inverse, fixing the ideal value of ``Z⊗…⊗Z`` at 1.

For every ``(n, d)`` cell the same circuits are evaluated without mitigation,
with ZNE and with CDR, and the relative error of mitigation
``ε = |mitigated − ideal| / |noisy − ideal|`` is summarised by its lower
median and its maximum.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, Gate, InvalidInputError, PauliOperator, build_pauli_gadget, invert
from .errors import DivisionDegenerateError, MitbenchError, SamplingExhaustedError
from .mitigation import CdrConfig, Experiment, ZneConfig, cdr, zne
from .oracles import ratio_normality_check
from .rng import derive_seed, make_rng
from .simulator import ExactBackend, IdealBackend, SampledBackend, ideal_expectation
from .synthesis import compile_circuit

CIRCUIT_KINDS = ("random_su4", "pauli_gadget")
METHODS = ("none", "zne", "cdr")
DEFAULT_MAX_ATTEMPTS = 10_000
NORMALITY_THRESHOLD = 0.5


@dataclass(frozen=True)
class CircuitClass:
    kind: str = "random_su4"
    mirrored: bool = False

    def __post_init__(self):
        if self.kind not in CIRCUIT_KINDS:
            raise InvalidInputError(f"unknown circuit class {self.kind!r}")
        object.__setattr__(self, "mirrored", bool(self.mirrored))

    @property
    def label(self):
        return self.kind + ("_mirrored" if self.mirrored else "")


def haar_su4(rng):
    """Haar-random 4×4 unitary from the QR decomposition of a complex Ginibre matrix."""
    z = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def _random_su4_layer(n, rng):
    perm = rng.permutation(n)
    gates = []
    for i in range(n // 2):
        a, b = int(perm[2 * i]), int(perm[2 * i + 1])
        gates.append(Gate.u2q(a, b, haar_su4(rng)))
    return Circuit(n, tuple(gates))


def _pauli_gadget_layer(n, rng):
    while True:
        letters = "".join("IXYZ"[int(k)] for k in rng.integers(0, 4, size=n))
        if set(letters) != {"I"}:
            break
    alpha = float(rng.uniform(0.0, 2.0 * math.pi))
    layer = build_pauli_gadget(letters, alpha)
    layer.meta["pauli"] = letters
    return layer


def generate_circuit(cls, n, d, seed):
    """One measured circuit of class ``cls`` with ``d`` layers on ``n`` qubits.

    Mirrored circuits have ``d/2`` random layers, each followed by its inverse.
    ``meta`` records the layer structure.
    """
    if n < 2 or d < 1:
        raise InvalidInputError("need n >= 2 and d >= 1")
    if cls.mirrored and d % 2:
        raise InvalidInputError("mirrored circuits need an even depth")
    rng = make_rng(seed, "circuit")
    make_layer = _random_su4_layer if cls.kind == "random_su4" else _pauli_gadget_layer
    n_random = d // 2 if cls.mirrored else d
    gates = []
    layers = []
    for _ in range(n_random):
        layer = make_layer(n, rng)
        gates.extend(layer.gates)
        info = {"gates": len(layer.gates)}
        if "pauli" in layer.meta:
            info["pauli"] = layer.meta["pauli"]
        layers.append(info)
        if cls.mirrored:
            gates.extend(invert(layer).gates)
            layers.append({"gates": len(layer.gates), "inverse": True})
    blocks = sum(1 for g in gates if g.kind == "U2q")
    meta = {"class": cls.label, "n": n, "d": d, "layers": layers, "blocks": blocks, "seed": int(seed)}
    return Circuit(n, tuple(gates), True, meta)


def _observable(obs, n):
    if obs is None or obs == "global_z":
        return PauliOperator.z_all(n)
    return obs if isinstance(obs, PauliOperator) else PauliOperator(obs)


def sample_filtered_circuits(cls, n, d, count, value_range=(0.4, 0.6), seed=0,
                             max_attempts=None, observable=None):
    """``count`` circuits whose ideal ``|⟨O⟩|`` lies in ``value_range``.

    Mirrored classes are not filtered. ``max_attempts`` bounds the total
    number of circuits drawn and defaults to 10,000 per requested circuit.
    """
    lo, hi = value_range
    if not 0 <= lo <= hi:
        raise InvalidInputError("filter range must satisfy 0 <= lo <= hi")
    if count < 1:
        raise InvalidInputError("count must be positive")
    if cls.mirrored:
        return [generate_circuit(cls, n, d, derive_seed(seed, "circuit", i)) for i in range(count)]
    o = _observable(observable, n)
    budget = DEFAULT_MAX_ATTEMPTS * count if max_attempts is None else int(max_attempts)
    out = []
    for k in range(budget):
        c = generate_circuit(cls, n, d, derive_seed(seed, "filter", k))
        v = ideal_expectation(c.with_measurement(False), o)
        if lo <= abs(v) <= hi:
            c.meta["ideal"] = v
            c.meta["attempt"] = k
            out.append(c)
            if len(out) == count:
                return out
    raise SamplingExhaustedError(
        f"accepted {len(out)}/{count} circuits in {budget} attempts "
        f"(acceptance rate {len(out) / budget:.3g}) for |<O>| in [{lo}, {hi}]",
        attempts=budget,
        accepted=len(out),
    )


@dataclass(frozen=True)
class ErrorTriple:
    """``ε_N = |noisy − ideal|``, ``ε_EM = |mitigated − ideal|`` and ``ε = ε_EM/ε_N``.

    ``eps_rel`` is ``None`` when ``ε_N = 0``.
    """

    eps_n: float
    eps_em: float
    eps_rel: float

    def to_dict(self):
        return {"eps_n": self.eps_n, "eps_em": self.eps_em, "eps_rel": self.eps_rel}


def mitigation_errors(mitigated, noisy, ideal):
    eps_n = abs(noisy - ideal)
    eps_em = abs(mitigated - ideal)
    return ErrorTriple(float(eps_n), float(eps_em), float(eps_em / eps_n) if eps_n > 0 else None)


def relative_error_variance(sigma_em2, sigma_n2, mu_em, mu_n, ideal):
    """``σ_ε² = σ_EM²/(μ_N−⟨O⟩)² + σ_N²(μ_EM−⟨O⟩)²/(μ_N−⟨O⟩)⁴``."""
    gap = mu_n - ideal
    if gap == 0:
        raise DivisionDegenerateError("noisy mean equals the ideal value")
    return sigma_em2 / gap**2 + sigma_n2 * (mu_em - ideal) ** 2 / gap**4


def aggregate_cell(eps_values):
    """Lower median and maximum of the defined ε values.

    ``None`` entries are undefined and counted separately. When nothing is
    defined the summary has ``status = "empty"``.
    """
    defined = sorted(v for v in eps_values if v is not None)
    n_undef = sum(1 for v in eps_values if v is None)
    if not defined:
        return {"status": "empty", "median": None, "worst": None, "n_defined": 0, "n_undefined": n_undef}
    return {
        "status": "ok",
        "median": defined[(len(defined) - 1) // 2],
        "worst": defined[-1],
        "n_defined": len(defined),
        "n_undefined": n_undef,
    }


@dataclass
class CellResult:
    n: int
    d: int
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    error: str = None

    def to_dict(self):
        out = {"n": self.n, "d": self.d, "summary": self.summary, "circuits": self.records}
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class VolumetricGrid:
    method: str
    circuit_class: CircuitClass
    cells: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "method": self.method,
            "class": {"kind": self.circuit_class.kind, "mirrored": self.circuit_class.mirrored},
            "cells": [self.cells[k].to_dict() for k in sorted(self.cells)],
        }

    @classmethod
    def from_dict(cls, d):
        grid = cls(d["method"], CircuitClass(d["class"]["kind"], d["class"]["mirrored"]))
        for cell in d["cells"]:
            grid.cells[(cell["n"], cell["d"])] = CellResult(
                cell["n"], cell["d"], cell["circuits"], cell["summary"], cell.get("error"))
        return grid


def _backend(cfg):
    if cfg.evaluation == "infinite_shot":
        return ExactBackend(cfg.noise)
    return SampledBackend(cfg.noise)


def cell_seed(root, n, d):
    return derive_seed(root, n, d)


def cell_circuits(cfg, n, d):
    """The circuits of cell ``(n, d)``; shared by every method."""
    return sample_filtered_circuits(
        cfg.circuit_class, n, d, cfg.circuits_per_cell, cfg.filter_range,
        derive_seed(cell_seed(cfg.seed, n, d), "filter"), cfg.max_attempts, cfg.observable,
    )


def _safe(fn):
    try:
        return fn(), None
    except MitbenchError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def evaluate_circuit(cfg, n, d, index, circuit):
    """Run every configured method on one circuit; return per-method records."""
    seed = derive_seed(cell_seed(cfg.seed, n, d), index)
    backend = _backend(cfg)
    compiled = compile_circuit(circuit.with_measurement(False), cfg.target)
    o = _observable(cfg.observable, n).permuted(compiled.meta["final_layout"])
    ideal = ideal_expectation(compiled, o)
    cid = f"n{n}_d{d}_c{index}"
    base = {"circuit_id": cid, "ideal": ideal, "n_cx": compiled.count("CX"), "n_gates": len(compiled)}
    noisy_est = backend.estimate(compiled, o, cfg.budget_unmitigated, derive_seed(seed, "none"))
    noisy = noisy_est.value
    out = {}
    for method in cfg.methods:
        rec = dict(base, noisy=noisy, noisy_variance=noisy_est.sample_variance)
        if method == "none":
            res, err = noisy_est, None
            mitigated, variance = noisy, noisy_est.sample_variance
        elif method == "zne":
            zcfg = ZneConfig(cfg.zne.lambdas, cfg.zne.folding, cfg.zne.fit, derive_seed(seed, "zne"))
            res, err = _safe(lambda: zne(Experiment(compiled, o, cfg.budget_mitigated), zcfg, backend))
        else:
            ccfg = CdrConfig(cfg.cdr.n_non_clifford, cfg.cdr.n_pairs, cfg.cdr.n_training,
                             cfg.cdr.fit_direction, cfg.cdr.conditioning_tol, derive_seed(seed, "cdr"),
                             cfg.cdr.max_attempts)
            res, err = _safe(lambda: cdr(Experiment(compiled, o, cfg.budget_mitigated), ccfg, backend,
                                         IdealBackend()))
        if err is not None:
            rec.update(status="failed", error=err, mitigated=None, errors=None, sigma_eps=None)
            out[method] = rec
            continue
        if method != "none":
            mitigated, variance = res.mitigated, res.variance
            rec["fit"] = res.fit.model
        errs = mitigation_errors(mitigated, noisy, ideal)
        if method == "none":
            sigma_eps = 0.0  # ε ≡ 1 when nothing is mitigated
        else:
            try:
                sig2 = relative_error_variance(variance, noisy_est.sample_variance, mitigated, noisy, ideal)
                sigma_eps = math.sqrt(sig2) if math.isfinite(sig2) else None
            except DivisionDegenerateError:
                sigma_eps = None
        if errs.eps_n > 0:
            chk = ratio_normality_check(errs.eps_n, math.sqrt(noisy_est.sample_variance), NORMALITY_THRESHOLD)
            rec["normality"] = chk.to_dict()
        rec.update(status="ok", mitigated=mitigated, variance=variance, errors=errs.to_dict(),
                   sigma_eps=sigma_eps)
        out[method] = rec
    return out


def run_volumetric(cfg, threads=1):
    """Run the benchmark described by ``cfg``; one :class:`VolumetricGrid` per method.

    Results do not depend on ``threads``: each circuit owns its random
    streams and records are assembled by index.
    """
    grids = {m: VolumetricGrid(m, cfg.circuit_class) for m in cfg.methods}
    jobs = []
    cell_errors = {}
    for n, d in cfg.grid:
        try:
            circuits = cell_circuits(cfg, n, d)
        except MitbenchError as exc:
            cell_errors[(n, d)] = f"{type(exc).__name__}: {exc}"
            continue
        for i, c in enumerate(circuits):
            jobs.append((n, d, i, c))

    def work(job):
        n, d, i, c = job
        return evaluate_circuit(cfg, n, d, i, c)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]
    per_cell = {}
    for (n, d, i, _), res in zip(jobs, results):
        per_cell.setdefault((n, d), []).append(res)
    for n, d in cfg.grid:
        for m in cfg.methods:
            cell = CellResult(n, d)
            if (n, d) in cell_errors:
                cell.error = cell_errors[(n, d)]
                cell.summary = aggregate_cell([])
            else:
                cell.records = [r[m] for r in per_cell[(n, d)]]
                eps = [r["errors"]["eps_rel"] for r in cell.records if r["status"] == "ok"]
                cell.summary = aggregate_cell(eps)
                cell.summary["n_failed"] = sum(1 for r in cell.records if r["status"] != "ok")
            grids[m].cells[(n, d)] = cell
    return [grids[m] for m in cfg.methods]
