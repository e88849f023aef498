"""Bit-flip error propagation through CNOT circuits.

Build the space-time propagation graph of a circuit, reduce it to the
readout-by-site GF(2) matrix, and compute exact or sampled distributions of
the number of flipped readouts.
"""

from .analysis import (
    ErrorDistribution,
    InstanceTooLarge,
    Moments,
    brute_force_distribution,
    component_distribution,
    dp_transversal,
    moments,
)
from .circuit import Circuit, CircuitError, Gate, NoiseModel, generate, parse_circuit, serialize_circuit
from .gf2 import BitMatrix, BitVector, kernel_dim, mat_vec, solve
from .graph import Epstg, Rsg, build_epstg, build_rsg, components, gen_complete_rsg, rsg_of
from .sampler import SampleReport, sample, sweep

__version__ = "0.1.0"

__all__ = [
    "BitMatrix",
    "BitVector",
    "Circuit",
    "CircuitError",
    "Epstg",
    "ErrorDistribution",
    "Gate",
    "InstanceTooLarge",
    "Moments",
    "NoiseModel",
    "Rsg",
    "SampleReport",
    "brute_force_distribution",
    "build_epstg",
    "build_rsg",
    "component_distribution",
    "components",
    "dp_transversal",
    "gen_complete_rsg",
    "generate",
    "kernel_dim",
    "mat_vec",
    "moments",
    "parse_circuit",
    "rsg_of",
    "sample",
    "serialize_circuit",
    "solve",
    "sweep",
]
