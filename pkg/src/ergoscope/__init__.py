"""ergoscope: lattice spin models, work-extraction bounds with finite-size
slack, eigenstate-thermalization scans, and entropy-rate diagnostics."""

from .dynamics import Drive, area_law_fit, entropy_rate, sie_diagnostic, trotter_evolve
from .ergotropy import (Channel, Gate, athermality_bound, channel_work,
                        cnot_protocol, ergotropy_bound_report,
                        local_control_caps, passive_state)
from .eth import diagonalize, eth_scan, microcanonical_state, mite_distance
from .hamiltonian import (HamiltonianOperator, ModelSpec, assemble_block,
                          assemble_full, ising_zz_field, mixed_field_ising,
                          residual_norm_bound, verify_short_range)
from .lattice import (Lattice, Partition, build_lattice, cut_pairs, distance,
                      partition_hypercubes)
from .states import (QuantumState, build_pair_family, density_state,
                     expectation, partial_trace, pure_state, trace_distance,
                     von_neumann_entropy)
from .thermo import (canonical_energy, fannes_bound, gibbs_state,
                     inverse_temperature, min_energy_gap, thermo_curve)

__version__ = "0.1.0"

__all__ = [
    "Channel", "Drive", "Gate", "HamiltonianOperator", "Lattice", "ModelSpec",
    "Partition", "QuantumState", "area_law_fit", "assemble_block",
    "assemble_full", "athermality_bound", "build_lattice", "build_pair_family",
    "canonical_energy", "channel_work", "cnot_protocol", "cut_pairs",
    "density_state", "diagonalize", "distance", "entropy_rate",
    "ergotropy_bound_report", "eth_scan", "expectation", "fannes_bound",
    "gibbs_state", "inverse_temperature", "ising_zz_field",
    "local_control_caps", "microcanonical_state", "min_energy_gap",
    "mite_distance", "mixed_field_ising", "partial_trace",
    "partition_hypercubes", "passive_state", "pure_state",
    "residual_norm_bound", "sie_diagnostic", "thermo_curve", "trace_distance",
    "trotter_evolve", "verify_short_range", "von_neumann_entropy",
]
