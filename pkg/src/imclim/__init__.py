"""Energy-delay-accuracy limit models for analog in-memory dot products.

Closed-form SNR/energy expressions for charge-summing, charge-redistribution
and compute-memory architectures, minimum ADC precision assignment, and a
sample-accurate Monte Carlo simulator that cross-validates every analytical
noise expression.
"""

__version__ = "0.1.0"

from .arch import (
    AdcModel,
    ArchKind,
    ArchitectureConfig,
    NoiseBudget,
    adc_energy,
    adc_input_range,
    adc_min_bits,
    analytical_snr,
    dp_energy,
    noise_budget,
)
from .circuits import (
    NoiseDraw,
    QrConfig,
    QsConfig,
    make_noise_draw,
    qr_energy,
    qr_ideal,
    qr_noise_params,
    qr_sample,
    qs_energy,
    qs_ideal,
    qs_sample,
    qs_sigma_current,
    qs_sigma_pulse,
    qs_sigma_thermal,
    qs_trf,
)
from .precision import (
    ClipStats,
    LloydMaxResult,
    PrecisionAssignment,
    PrecisionRule,
    bgc_bits,
    gaussian_clip_stats,
    lloyd_max,
    mpc_min_bits,
    quantize,
    sqnr_bgc_db,
    sqnr_mpc_db,
)
from .snr import (
    DotProductSpec,
    QuantizerSpec,
    SignalKind,
    SignalModel,
    SnrReport,
    combine_snr_db,
    dp_output_stats,
    par_db,
    quant_noise_variances,
    sqnr_qiy_db,
    sqnr_qy_db,
    sqnr_uniform_db,
)
from .tech import TechnologyProfile, builtin_profile, builtin_profile_names

__all__ = [name for name in dir() if not name.startswith("_")]
