"""Volumetric benchmarking of quantum error mitigation on simulated devices."""

from .benchmark import CircuitClass, generate_circuit, run_volumetric, sample_filtered_circuits
from .circuit import Circuit, Gate, PauliOperator, PauliString, Target, ibm_7q_target
from .config import BenchmarkConfig, load_config
from .errors import MitbenchError
from .mitigation import CdrConfig, Experiment, ZneConfig, cdr, extrapolate, fold, zne
from .simulator import ExactBackend, IdealBackend, NoiseModel, SampledBackend, ideal_expectation, noisy_expectation
from .synthesis import compile_circuit, decompose_su4

__version__ = "0.1.0"

__all__ = [
    "BenchmarkConfig",
    "CdrConfig",
    "Circuit",
    "CircuitClass",
    "ExactBackend",
    "Experiment",
    "Gate",
    "IdealBackend",
    "MitbenchError",
    "NoiseModel",
    "PauliOperator",
    "PauliString",
    "SampledBackend",
    "Target",
    "ZneConfig",
    "cdr",
    "compile_circuit",
    "decompose_su4",
    "extrapolate",
    "fold",
    "generate_circuit",
    "ibm_7q_target",
    "ideal_expectation",
    "load_config",
    "noisy_expectation",
    "run_volumetric",
    "sample_filtered_circuits",
    "zne",
]
