"""Synthesis of two-mode N-photon interference patterns from coherent light."""

__version__ = "0.1.0"

from .fourier import (  # noqa: E402
    CoefficientVector,
    SmoothingMode,
    TargetAmplitude,
    TargetKind,
    apply_smoothing,
    coefficients_from_samples,
    fresnel_sine,
    noon_coefficients,
    rect_coefficients,
    saw_sqrt_coefficients,
)
from .compiler import (  # noqa: E402
    ROOT_AT_INFINITY,
    ProjectorSetting,
    RootSet,
    compile_settings,
    expand_roots,
    factor_state,
    settings_to_root,
)
from .model import (  # noqa: E402
    Pattern,
    PhaseGrid,
    SourceConfig,
    ideal_pattern,
    product_pattern,
    single_projector_probability,
)
from .simul import (  # noqa: E402
    CountRecord,
    NoiseConfig,
    WedgeCalibration,
    efficiency_drift_std,
    multiply_counts,
    simulate_counts,
    wedge_phase,
)
from .analysis import (  # noqa: E402
    FitResult,
    VisibilityReport,
    fit_amplitude,
    fringe_period,
    gibbs_overshoot,
    visibility,
)
