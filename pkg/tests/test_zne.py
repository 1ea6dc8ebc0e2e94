import math

import numpy as np
import pytest

from conftest import benchmark_circuits, random_circuit
from mitbench.circuit import Circuit, Gate, PauliOperator
from mitbench.errors import InvalidInputError
from mitbench.mitigation import Experiment, ZneConfig, build_zne_graph, run_task_graph, zne
from mitbench.oracles import DepolarisingProfile, predicted_zne_poly_error
from mitbench.simulator import ExactBackend, IdealBackend, NoiseModel, SampledBackend, ideal_expectation


def test_config_defaults():
    cfg = ZneConfig()
    assert cfg.lambdas == (1, 3, 5, 7, 9)
    assert cfg.folding == "circuit"
    assert str(cfg.fit) == "exponential"


@pytest.mark.parametrize(
    "kwargs",
    [dict(lambdas=(3, 5)), dict(lambdas=(1, 5, 3)), dict(lambdas=(1, 2)), dict(folding="all"),
     dict(lambdas=(1, 3), fit="polynomial(2)")],
)
def test_config_rejects(kwargs):
    with pytest.raises(InvalidInputError):
        ZneConfig(**kwargs)


def test_experiment_width_check():
    with pytest.raises(InvalidInputError):
        Experiment(Circuit(2), "Z", 100)


def test_ideal_backend_fixed_point(rng):
    c = random_circuit(3, 10, rng)
    o = PauliOperator.z_all(3)
    res = zne(Experiment(c, o, 1000), ZneConfig(), IdealBackend())
    assert res.mitigated == pytest.approx(ideal_expectation(c, o), abs=1e-12)
    assert res.noisy == pytest.approx(res.mitigated, abs=1e-12)


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("kind", ["random_su4", "pauli_gadget"])
def test_exponential_exact_under_global_noise(kind, seed):
    ((c, o),) = benchmark_circuits(kind, 3, 3, 1, seed)
    ideal = ideal_expectation(c, o)
    backend = ExactBackend(NoiseModel.global_depolarising(0.001, 0.01))
    res = zne(Experiment(c, o, 10**5), ZneConfig(), backend)
    assert abs(res.mitigated - ideal) <= 1e-9 * abs(res.noisy - ideal)


@pytest.mark.parametrize("p2", [0.002, 0.02, 0.06])
def test_richardson_matches_prediction(p2):
    c = Circuit(2, (Gate("SX", (0,)), Gate.rz(0, 0.3), Gate("CX", (0, 1)), Gate("CX", (0, 1)), Gate("CX", (0, 1))))
    o = PauliOperator("ZZ")
    ideal = ideal_expectation(c, o)
    gamma = DepolarisingProfile.of_circuit(c, 0.0, p2).gamma
    backend = ExactBackend(NoiseModel.global_depolarising(0.0, p2))
    res = zne(Experiment(c, o, 3000), ZneConfig((1, 3, 5), fit="richardson"), backend)
    eps = abs(res.mitigated - ideal) / abs(res.noisy - ideal)
    assert eps == pytest.approx(abs(predicted_zne_poly_error(gamma, (1, 3, 5))), abs=1e-8)


def test_budget_split_remainder_first():
    c = Circuit(1, (Gate("H", (0,)),))
    res = zne(Experiment(c, "X", 1003), ZneConfig(), ExactBackend(NoiseModel.local(0.01, 0.0)))
    shots = [lvl["shots"] for lvl in res.metadata["levels"]]
    assert shots == [203, 200, 200, 200, 200]
    assert res.metadata["shots_used"] == 1003


def test_budget_too_small():
    with pytest.raises(InvalidInputError):
        zne(Experiment(Circuit(1), "Z", 4), ZneConfig(), IdealBackend())


def test_deterministic(rng):
    c = random_circuit(2, 6, rng)
    backend = SampledBackend(NoiseModel.local(0.01, 0.05))
    e = Experiment(c, PauliOperator.z_all(2), 5000)
    cfg = ZneConfig(folding="random_gate", fit="linear", seed=4)
    a, b = zne(e, cfg, backend), zne(e, cfg, backend)
    assert a.to_json() == b.to_json()


def test_noisy_is_lambda_one(rng):
    c = random_circuit(2, 6, rng)
    backend = SampledBackend(NoiseModel.local(0.01, 0.05))
    res = zne(Experiment(c, PauliOperator.z_all(2), 5000), ZneConfig(), backend, shot_seed=11)
    assert res.noisy == res.metadata["levels"][0]["value"]


def test_exponential_variance_formula(rng):
    c = random_circuit(2, 6, rng, kinds=("H", "Rz", "CX"))
    backend = ExactBackend(NoiseModel.global_depolarising(0.01, 0.05))
    o = PauliOperator.z_all(2)
    if abs(ideal_expectation(c, o)) < 0.05:
        c = Circuit(2, (Gate.rz(0, 0.3), Gate("CX", (0, 1))))
    res = zne(Experiment(c, o, 5000), ZneConfig(), backend)
    s2 = res.metadata["levels"][0]["variance"]
    lams = np.array([1, 3, 5, 7, 9])
    rel = s2 / (5 * res.noisy**2) + lams.mean() * s2 * 6 / (5 * np.sum((lams - lams.mean()) ** 2))
    assert res.variance == pytest.approx(rel * res.mitigated**2)


@pytest.mark.parametrize("folding", ["circuit", "random_gate", "odd_gate"])
@pytest.mark.parametrize("threads", [1, 4])
def test_graph_equals_monolithic(folding, threads, rng):
    c = random_circuit(2, 8, rng)
    o = PauliOperator.z_all(2)
    backend = SampledBackend(NoiseModel.local(0.01, 0.05))
    cfg = ZneConfig(folding=folding, fit="linear", seed=9)
    direct = zne(Experiment(c, o, 4000), cfg, backend, shot_seed=5)
    (graph,) = run_task_graph(build_zne_graph(cfg, backend, 4000, shot_seed=5), [c, o], threads)
    assert graph.to_json() == direct.to_json()
    assert math.isfinite(graph.variance)
