"""Four-level diamond system: SU(N) algebra, pulse-driven dynamics, decision trees."""
from .decision_tree import (DecisionTree, build_tree, path_probability, populations_at, return_probability,
                            transition_matrix, tree_from_propagators, tree_from_trajectory)
from .dynamics import (DissipationSpec, QuantumState, TimeGrid, Trajectory, basis_state, dissipator_apply,
                       evolve_coherence, evolve_density, propagator, superoperator_matrices,
                       total_decoherence_rates)
from .lie_algebra import (GeneratorSet, StructureTensor, build_generators, decompose, recompose,
                          structure_constants, verify_algebra)
from .model import (PulseEnvelope, PulseSchedule, compare_paper_blocks, default_schedule, g_matrix,
                    gamma_coefficients, gaussian_schedule, hamiltonian_at, pulse_value)

__version__ = "0.1.0"
