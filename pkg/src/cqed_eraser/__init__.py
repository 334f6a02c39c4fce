"""Cavity-QED which-path simulator: cat-state preparation, lambda-atom double slit, cascade eraser."""
from .composite import (
    CASCADE,
    LAMBDA,
    TWO_LEVEL,
    AtomBasis,
    AtomState,
    JointState,
    Path,
    RamseyRotation,
    apply_cascade_effective,
    apply_dispersive_two_level,
    apply_lambda_dispersive,
    apply_ramsey,
    conditional_cavity_state,
    make_joint,
    marker_states,
    measure_atom,
)
from .errors import (
    BasisMismatch,
    ConfigError,
    CQEDError,
    DegenerateCat,
    DimensionMismatch,
    GridTooCoarse,
    NonUnitaryError,
    NormError,
    TruncationError,
    ZeroProbability,
)
from .fock import (
    CatSpec,
    CavityState,
    InteractionPhase,
    apply_number_phase,
    cat_state,
    coherent_state,
    inner_product,
    parity_projector_apply,
    tail_mass,
)
from .protocols import (
    CatPrepConfig,
    ProtocolReport,
    WhichPathConfig,
    run_cascade_eraser,
    run_cat_preparation,
    run_lambda_which_path,
)
from .screen import (
    IntensityPattern,
    ScreenModel,
    distinguishability,
    intensity_pattern,
    slit_amplitude,
    visibility_analytic,
    visibility_empirical,
)

__version__ = "0.1.0"
