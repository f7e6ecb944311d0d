"""Cut-and-project schemes, weighted model sets and their harmonic analysis."""

from .errors import (
    CutProjectError,
    CyclicNotDense,
    DimensionMismatch,
    EpsTooSmall,
    InjectivityViolated,
    ParseError,
    RegionTooLarge,
    SignatureMismatch,
    SingularMatrix,
    TooFewPoints,
    UnsupportedKind,
    WeightNotInKL,
)
from .harmonic import (
    GaussianTest,
    PurePointMeasure,
    bragg_peaks,
    character_average,
    check_positive_definite,
    finite_autocorrelation,
    fourier_bohr,
    measure_distance,
    reflect_measure,
    theoretical_autocorrelation,
    theoretical_diffraction,
    van_hove_ratio,
)
from .pointset import VanHoveBox, cut_model_set, enumerate_lattice, max_gap, min_gap
from .scheme import (
    CutProjectScheme,
    DualLattice,
    annihilator_residual,
    density,
    dual_lattice,
    new_scheme,
    validate_scheme,
)
from .verify import (
    CheckReport,
    density_check,
    diffraction_check,
    inverse_psf_check,
    maximal_density_check,
    psf_lattice_check,
    weighted_psf_check,
    wiener_identity_check,
)
from .windows import (
    ClassTag,
    WeightFunction,
    box_indicator,
    classify_weight,
    combination,
    cyclic_weight,
    eval_weight,
    tent,
    weight_autocorr,
    weight_ft,
)

__version__ = "0.1.0"
