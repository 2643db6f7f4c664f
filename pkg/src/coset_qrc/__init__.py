"""Quantum reservoir computing with stabilizer-coset encoding and syndrome correction."""

__version__ = "0.1.0"

from .pauli import PauliString, StabilizerSpec, chain_zz, single_z
from .state import DensityMatrix, IsingHamiltonian, sample_ising, trotter_unitary
from .reservoir import EncodingConfig, MultiplexedReservoir, ReservoirInstance, build_features, drive_sequence
from .readout import fit, predict_closed_loop, score_r2
from .benchmarks import MapSpec, generate_trajectory, map_error

__all__ = [
    "PauliString",
    "StabilizerSpec",
    "chain_zz",
    "single_z",
    "DensityMatrix",
    "IsingHamiltonian",
    "sample_ising",
    "trotter_unitary",
    "EncodingConfig",
    "MultiplexedReservoir",
    "ReservoirInstance",
    "build_features",
    "drive_sequence",
    "fit",
    "predict_closed_loop",
    "score_r2",
    "MapSpec",
    "generate_trajectory",
    "map_error",
]
