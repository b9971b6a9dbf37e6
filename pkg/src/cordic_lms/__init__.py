"""Fixed-point CORDIC kernel and CORDIC-driven TLMS/HLMS equalizers."""

from .channel import (
    ChannelSpec,
    ExperimentConfig,
    MseCurve,
    SourceSpec,
    channel_output,
    channel_taps_from_factors,
    gen_symbols,
    make_source,
    reference_channel,
    run_ensemble,
    run_single,
)
from .cordic import (
    AngleTable,
    CordicDomainError,
    CordicMode,
    CordicTrace,
    build_angle_table,
    cordic_rotate,
    elementary_angle,
    rotate_raw,
    scale_factor,
    sin_cos,
    sinh_cosh,
)
from .filters import (
    AlgorithmKind,
    CordicBackend,
    EqualizerState,
    ExactBackend,
    StepResult,
    decide,
    filter_output,
    init_state,
    step,
    update_thetas,
    weight,
)
from .fixed import FixedPoint, FixedPointOverflowError, from_fixed, to_fixed

__version__ = "0.1.0"
