"""Complete positivity of Gaussian score reversal: generators, repairs and noise-floor checks."""

__version__ = "0.1.0"

from .exceptions import (
    DegenerateInputError,
    FastPathError,
    GaussCPError,
    InvalidInputError,
    NearPurityError,
    TruncationError,
)
from .gaussian import (
    FidelityValue,
    SqueezedThermalParams,
    bures_angle,
    gaussian_fidelity,
    physicality_check,
    squeezed_thermal_cov,
    squeezed_thermal_params,
    symplectic_eigenvalues,
    symplectic_form,
)
from .generator import (
    CpMatrix,
    cp_matrix,
    GaussianChannel,
    GaussianGenerator,
    attenuator,
    bayes_cp_matrix,
    bayes_reverse_generator,
    generator_cp_matrix,
    hhw_cp_check,
    nogo_eigenvalues,
    nogo_lambda_min,
    sign_flip_spectrum_check,
    tmsv_cov,
    tmsv_schur_witness,
)
from .geometry import (
    bkm_displacement_metric,
    bures_displacement_metric,
    c_geom,
    endpoint_bound,
    lambda_ratio,
    metric_ratio,
)
from .repair import (
    RepairResult,
    brute_force_repair_oracle,
    isotropic_repair_closed_form,
    minimal_repair,
)
from .trajectory import (
    NoiseFloorRow,
    TrajectoryConfig,
    TrajectoryRecord,
    debruijn_increment,
    forward_evolve,
    noise_floor_report,
    reverse_decode,
    worst_case_irreversibility,
)
