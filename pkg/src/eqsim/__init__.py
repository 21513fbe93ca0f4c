"""Iterative Kalman equalization with expectation-propagation soft-bit messages."""

from .channel import (
    PRESETS,
    ChannelSpec,
    InvalidChannelError,
    StateSpaceModel,
    TransmissionRecord,
    parse_channel,
    realize_state_space,
    simulate,
    snr_to_noise_var,
)
from .coded import ConvCode, Interleaver, bcjr_decode, conv_encode, deinterleave, interleave, turbo_equalize
from .conversion import (
    LLR_MAX,
    MinkaFallback,
    SoftBit,
    damped_msg,
    gaussian_to_softbit,
    minka_gaussian,
    minka_or_standard,
    softbit_moments,
    standard_gaussian,
    true_moments,
)
from .equalizer import (
    EqualizerConfig,
    EqualizerDiagnostics,
    NumericalFailure,
    UnsupportedChannelError,
    bcjr_equalize,
    ep_equalize,
    hard_decide,
    kalman_extrinsic,
    lmmse_equalize,
)
from .harness import BerRecord, ExperimentConfig, read_results, run_ber_experiment, verify, write_results
from .messages import (
    NON_INFORMATIVE,
    GaussianMessage,
    GaussianMessages,
    GaussianVec,
    NonInformativeError,
    TrueMoments,
    divide,
    make_from_mean_var,
    mean_var,
    multiply,
)
from .schedules import AlphaSchedule, alpha_at

__version__ = "0.1.0"
