import json

import numpy as np
import pytest

from mitbench.benchmark import (
    CircuitClass,
    aggregate_cell,
    cell_circuits,
    generate_circuit,
    mitigation_errors,
    relative_error_variance,
    run_volumetric,
    sample_filtered_circuits,
)
from mitbench.circuit import PauliOperator, dumps, ibm_7q_target
from mitbench.config import from_dict
from mitbench.errors import DivisionDegenerateError, InvalidInputError, SamplingExhaustedError
from mitbench.simulator import ideal_expectation
from mitbench.synthesis import compile_circuit


def small_config(**over):
    raw = {
        "grid": [[2, 2], [3, 2]],
        "class": {"kind": "random_su4"},
        "noise": {"mode": "local", "p1": 0.001, "p2": 0.01},
        "circuits_per_cell": 3,
        "budgets": {"mitigated": 21000, "unmitigated": 5000},
        "seed": 17,
    }
    raw.update(over)
    return from_dict(raw)


class TestErrors:
    def test_def_example(self):
        e = mitigation_errors(0.98, 0.90, 1.0)
        assert (e.eps_n, e.eps_em, e.eps_rel) == (pytest.approx(0.1), pytest.approx(0.02), pytest.approx(0.2))

    def test_faithful(self):
        e = mitigation_errors(1.0, 0.9, 1.0)
        assert e.eps_em == 0 and e.eps_rel == 0

    def test_unsuccessful(self):
        assert mitigation_errors(0.7, 0.9, 1.0).eps_rel == pytest.approx(3.0)

    def test_undefined_marker(self):
        assert mitigation_errors(0.7, 1.0, 1.0).eps_rel is None


class TestRelativeErrorVariance:
    def test_no_noise(self):
        assert relative_error_variance(0, 0, 0.98, 0.9, 1.0) == 0

    def test_example(self):
        assert relative_error_variance(1e-4, 1e-4, 0.98, 0.9, 1.0) == pytest.approx(0.0104)

    def test_exact_mean(self):
        assert relative_error_variance(1e-4, 5e-3, 1.0, 0.9, 1.0) == pytest.approx(1e-4 / 0.01)

    def test_degenerate(self):
        with pytest.raises(DivisionDegenerateError):
            relative_error_variance(1e-4, 1e-4, 0.98, 1.0, 1.0)


class TestAggregate:
    @pytest.mark.parametrize(
        "values, median, worst",
        [([0.5], 0.5, 0.5), ([0.1, 0.2, 3.0], 0.2, 3.0), ([0.1, 0.2, 0.3, 4.0], 0.2, 4.0),
         ([4.0, None, 0.3, 0.1, 0.2], 0.2, 4.0)],
    )
    def test_lower_median(self, values, median, worst):
        s = aggregate_cell(values)
        assert (s["median"], s["worst"]) == (median, worst)

    def test_all_undefined(self):
        s = aggregate_cell([None, None])
        assert s["status"] == "empty" and s["n_undefined"] == 2


class TestGeneration:
    @pytest.mark.parametrize("kind", ["random_su4", "pauli_gadget"])
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    @pytest.mark.parametrize("d", [2, 4, 6])
    def test_mirror_ideal(self, kind, n, d):
        for seed in range(5):
            c = generate_circuit(CircuitClass(kind, True), n, d, seed).with_measurement(False)
            assert ideal_expectation(c, PauliOperator.z_all(n)) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("n, d", [(2, 3), (3, 4), (5, 2)])
    def test_layer_count(self, n, d):
        c = generate_circuit(CircuitClass("random_su4"), n, d, 0)
        assert len(c.meta["layers"]) == d
        assert c.meta["blocks"] == d * (n // 2)
        assert c.count("U2q") == d * (n // 2)

    def test_mirrored_layer_pairs(self):
        c = generate_circuit(CircuitClass("pauli_gadget", True), 3, 4, 2)
        layers = c.meta["layers"]
        assert len(layers) == 4
        assert [bool(layer.get("inverse")) for layer in layers] == [False, True, False, True]

    def test_mirrored_odd_depth(self):
        with pytest.raises(InvalidInputError):
            generate_circuit(CircuitClass("random_su4", True), 2, 3, 0)

    def test_identity_strings_resampled(self):
        for seed in range(30):
            c = generate_circuit(CircuitClass("pauli_gadget"), 2, 3, seed)
            assert all(set(layer["pauli"]) != {"I"} for layer in c.meta["layers"])

    def test_random_su4_compiles_to_cx(self):
        c = generate_circuit(CircuitClass("random_su4", True), 2, 2, 0).with_measurement(False)
        assert compile_circuit(c, ibm_7q_target()).count("CX") >= 1


class TestFilter:
    def test_mirrored_unfiltered(self):
        out = sample_filtered_circuits(CircuitClass("random_su4", True), 2, 2, 5, (1.1, 1.2))
        assert len(out) == 5

    @pytest.mark.parametrize("kind", ["pauli_gadget", "random_su4"])
    def test_soundness(self, kind):
        out = sample_filtered_circuits(CircuitClass(kind), 2, 2, 3, (0.4, 0.6), seed=3)
        for c in out:
            v = ideal_expectation(c.with_measurement(False), PauliOperator.z_all(2))
            assert 0.4 - 1e-10 <= abs(v) <= 0.6 + 1e-10

    def test_impossible_range(self):
        with pytest.raises(SamplingExhaustedError) as info:
            sample_filtered_circuits(CircuitClass("pauli_gadget"), 2, 2, 1, (1.1, 1.2), max_attempts=50)
        assert "acceptance rate" in str(info.value)

    def test_deterministic(self):
        a = sample_filtered_circuits(CircuitClass("pauli_gadget"), 3, 2, 2, seed=5)
        b = sample_filtered_circuits(CircuitClass("pauli_gadget"), 3, 2, 2, seed=5)
        assert [dumps(c) for c in a] == [dumps(c) for c in b]


class TestVolumetric:
    def test_fairness(self):
        cfg = small_config()
        grids = run_volumetric(cfg)
        assert [g.method for g in grids] == ["none", "zne", "cdr"]
        for key in cfg.grid:
            ids = [[r["circuit_id"] for r in g.cells[key].records] for g in grids]
            ideals = [[r["ideal"] for r in g.cells[key].records] for g in grids]
            noisy = [[r["noisy"] for r in g.cells[key].records] for g in grids]
            assert ids[0] == ids[1] == ids[2]
            assert ideals[0] == ideals[1] == ideals[2]
            assert noisy[0] == noisy[1] == noisy[2]

    def test_cell_circuits_shared(self):
        cfg = small_config()
        assert [dumps(c) for c in cell_circuits(cfg, 2, 2)] == [dumps(c) for c in cell_circuits(cfg, 2, 2)]

    def test_none_has_unit_eps(self):
        grid = run_volumetric(small_config(methods=["none"]))[0]
        for cell in grid.cells.values():
            assert cell.summary["median"] == pytest.approx(1.0)

    def test_determinism_across_threads(self):
        cfg = small_config()
        a = json.dumps([g.to_dict() for g in run_volumetric(cfg, threads=1)], sort_keys=True)
        b = json.dumps([g.to_dict() for g in run_volumetric(cfg, threads=4)], sort_keys=True)
        assert a == b

    def test_infinite_shot_zne_global(self):
        cfg = small_config(
            noise={"mode": "global_depolarising", "p1": 0.001, "p2": 0.01},
            evaluation="infinite_shot", methods=["zne"],
            grid={"widths": [2, 3], "depths": [2, 3]},
        )
        (grid,) = run_volumetric(cfg)
        for cell in grid.cells.values():
            assert cell.summary["median"] <= 1e-9

    def test_ideal_noise_nothing_to_mitigate(self):
        cfg = small_config(noise={"mode": "ideal"}, methods=["none", "zne"], grid=[[2, 2]])
        for g in run_volumetric(cfg):
            for r in g.cells[(2, 2)].records:
                assert abs(r["noisy"] - r["ideal"]) < 5 * np.sqrt(1 / 5000)

    def test_cell_error_recorded(self):
        cfg = small_config(filter_range=[0.99999, 1.0], max_attempts=5, grid=[[2, 2]])
        grids = run_volumetric(cfg)
        for g in grids:
            cell = g.cells[(2, 2)]
            assert "SamplingExhaustedError" in cell.error
            assert cell.summary["status"] == "empty"
