"""Tensor-network compression of phase-difference estimation circuits."""

from .brickwall import BrickWallCircuit, init_circuit, two_qubit_gate_count
from .circuit_sim import NoiseSpec, QpdeSimulator, Statevector
from .compress import (
    MultistartConfig,
    compress_multistart,
    compress_to_mpo,
    compress_to_state,
    distance_metric_delta,
    fidelity_metric_f,
    gate_environment,
)
from .dmrg import DmrgSchedule, dmrg_excited, dmrg_ground
from .estimator import EstimatorConfig, GaussianBelief, run_fci, run_qpde
from .fcidump import FermionicIntegrals, exchange_matrix, integrals_to_qubit_hamiltonian, parse_fcidump
from .hamiltonian import PauliTerm, QubitHamiltonian, exact_spectrum, hubbard_1d, jordan_wigner
from .mpo import MatrixProductOperator, hamiltonian_to_mpo, trotterized_reference
from .mps import MatrixProductState, build_superposition
from .ordering import GAConfig, OrbitalOrdering, ga_reorder, ordering_cost

__version__ = "0.1.0"
