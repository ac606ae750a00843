from .ir import AncillaPool, Circuit, Gate, GateCensus, check_ancillas, count_gates, dagger, place
from .sim import (apply_circuit, apply_factors, circuit_factors, circuit_to_unitary, distance_up_to_phase,
                  factored_distance_bound, factored_distance_bounds, gate_matrix, is_unitary, merge_factors, power_iteration_norm,
                  spectral_norm)
from .textio import dumps, loads

__all__ = [
    "AncillaPool", "Circuit", "Gate", "GateCensus", "apply_circuit", "apply_factors", "check_ancillas",
    "circuit_factors", "circuit_to_unitary", "count_gates", "dagger", "distance_up_to_phase", "dumps",
    "factored_distance_bound", "factored_distance_bounds", "gate_matrix", "is_unitary", "loads", "merge_factors", "place",
    "power_iteration_norm", "spectral_norm",
]
