"""Numerical laboratory for pre- and post-selected quantum systems.

Forward/backward state evolution, conditional outcome probabilities for
intermediate measurements (the ABL rule), weak values, generalized
two-state vectors, two-time correlation kernels, and measurement
simulators (projective Monte Carlo, Gaussian pointer) cross-validated
against an independent forward-only oracle.
"""

from .errors import (
    ConfigError,
    DimensionError,
    NotHermitianError,
    NotMeasurableError,
    NullEnsembleError,
    OrthogonalSelectionError,
    ProblemFileError,
    SearchFailedError,
    TimeWindowError,
    TsvLabError,
    ZeroStateError,
)
from .qcore import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    Bra,
    HamiltonianSchedule,
    Ket,
    Observable,
    Operator,
    evolve_backward,
    evolve_forward,
    make_bra,
    make_ket,
    matrix_element,
    overlap,
    spectral_decompose,
    tensor,
)
from .tsv import (
    CertaintyReport,
    Distribution,
    GeneralizedTwoStateVector,
    ProductRuleReport,
    TwoStateVector,
    TwoTimeKernel,
    abl_at_time,
    abl_probabilities,
    abl_probabilities_generalized,
    element_of_reality,
    gtsv_from_ancilla,
    product_rule_report,
    two_time_joint,
    weak_value,
    weak_value_generalized,
)
from .measure import (
    ConsistencyReport,
    MeasurementRecord,
    MonteCarloReport,
    PointerConfig,
    PointerResult,
    exact_conditional_oracle,
    ideal_measure,
    monte_carlo_abl,
    pointer_bump_masses,
    strong_weak_consistency,
    weak_measure_pointer,
)
from .scenarios import SCENARIOS, Report, Scenario, get_scenario, run_scenario

__version__ = "0.1.0"

__all__ = [
    "SCENARIOS",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "Bra",
    "CertaintyReport",
    "ConfigError",
    "ConsistencyReport",
    "DimensionError",
    "Distribution",
    "GeneralizedTwoStateVector",
    "HamiltonianSchedule",
    "Ket",
    "MeasurementRecord",
    "MonteCarloReport",
    "NotHermitianError",
    "NotMeasurableError",
    "NullEnsembleError",
    "Observable",
    "Operator",
    "OrthogonalSelectionError",
    "PointerConfig",
    "PointerResult",
    "ProblemFileError",
    "ProductRuleReport",
    "Report",
    "Scenario",
    "SearchFailedError",
    "TimeWindowError",
    "TsvLabError",
    "TwoStateVector",
    "TwoTimeKernel",
    "ZeroStateError",
    "abl_at_time",
    "abl_probabilities",
    "abl_probabilities_generalized",
    "element_of_reality",
    "evolve_backward",
    "evolve_forward",
    "exact_conditional_oracle",
    "get_scenario",
    "gtsv_from_ancilla",
    "ideal_measure",
    "make_bra",
    "make_ket",
    "matrix_element",
    "monte_carlo_abl",
    "overlap",
    "pointer_bump_masses",
    "product_rule_report",
    "run_scenario",
    "spectral_decompose",
    "strong_weak_consistency",
    "tensor",
    "two_time_joint",
    "weak_measure_pointer",
    "weak_value",
    "weak_value_generalized",
]
