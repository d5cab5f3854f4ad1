"""Spin-entangled fermion pairs from a degenerate Fermi gas.

Core model: a pair of fermions extracted from a filled Fermi sphere by two
spin-non-destructive detectors is left in a Werner-like two-qubit spin
state whose singlet visibility is set by the normalized one-body
correlation g at the detector separation.  The package computes that
state for point-like and Gaussian (fuzzy) detectors, quantifies its
entanglement, simulates the stored-neutron coincidence experiment that
would measure it, and reconstructs the state from coincidence counts.
"""

__version__ = "0.1.0"

from .entanglement import (
    EntanglementReport,
    chsh_max,
    concurrence,
    entanglement_distance,
    entanglement_report,
    negativity,
    partial_transpose,
)
from .experiment import (
    AnalyzerSetting,
    CoincidenceEvent,
    CountsRecord,
    ExperimentConfig,
    SettingsPlanEntry,
    born_probabilities,
    coincidence_rate_estimate,
    flux_estimate,
    forced_pairs_record,
    sample_outcome,
    simulate_run,
)
from .fermi_gas import (
    POINT_LIKE,
    DetectorProfile,
    FiniteModeGas,
    PairQuery,
    kernel,
    pair_state,
    pair_state_on_grid,
    wick_oracle,
)
from .spin_algebra import (
    SWAP,
    bloch_vector,
    compose,
    decompose,
    fidelity,
    is_physical,
    maximally_mixed,
    pauli,
    singlet_state,
    tensor_basis,
    trace_distance,
)
from .tomography import (
    CoefficientEstimates,
    TomographyInput,
    TomographyResult,
    bloch_from_counts,
    bloch_from_counts_unbalanced,
    coefficients_from_coincidences,
    end_to_end,
    project_to_physical,
    reconcile,
    reconstruct,
    tomography_plan,
    tomography_settings,
)

__all__ = [
    "__version__",
    "AnalyzerSetting",
    "CoefficientEstimates",
    "CoincidenceEvent",
    "CountsRecord",
    "DetectorProfile",
    "EntanglementReport",
    "ExperimentConfig",
    "FiniteModeGas",
    "POINT_LIKE",
    "PairQuery",
    "SWAP",
    "SettingsPlanEntry",
    "TomographyInput",
    "TomographyResult",
    "bloch_from_counts",
    "bloch_from_counts_unbalanced",
    "bloch_vector",
    "born_probabilities",
    "chsh_max",
    "coefficients_from_coincidences",
    "coincidence_rate_estimate",
    "compose",
    "concurrence",
    "decompose",
    "end_to_end",
    "entanglement_distance",
    "entanglement_report",
    "fidelity",
    "flux_estimate",
    "forced_pairs_record",
    "is_physical",
    "kernel",
    "maximally_mixed",
    "negativity",
    "pair_state",
    "pair_state_on_grid",
    "partial_transpose",
    "pauli",
    "project_to_physical",
    "reconcile",
    "reconstruct",
    "sample_outcome",
    "simulate_run",
    "singlet_state",
    "tensor_basis",
    "tomography_plan",
    "tomography_settings",
    "trace_distance",
    "wick_oracle",
]
