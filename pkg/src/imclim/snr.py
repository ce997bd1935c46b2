"""Quantization-noise algebra for fixed-point dot products.

Signal models, uniform-quantizer descriptions and the closed-form
signal-to-quantization-noise ratios (SQNR) of an N-term dot product
y = w.x with quantized activations, weights and output.

All dB math uses exact constants: the per-bit gain is 10*log10(4)
(= 6.0206 dB) and the uniform-quantizer constant is 10*log10(3)
(= 4.7712 dB).  Rounded 6B + 4.78 forms appear in the docs only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "SignalKind",
    "SignalModel",
    "QuantizerSpec",
    "DotProductSpec",
    "SnrReport",
    "par_db",
    "sqnr_uniform_db",
    "dp_output_stats",
    "quant_noise_variances",
    "sqnr_qiy_db",
    "sqnr_qy_db",
    "combine_snr_db",
]

_REL_TOL = 1e-9


def db(x: float) -> float:
    """Power ratio to decibels."""
    if x <= 0.0:
        return -math.inf
    return 10.0 * math.log10(x)


def undb(x_db: float) -> float:
    """Decibels to power ratio.  -inf maps to 0, +inf to inf."""
    if x_db == -math.inf:
        return 0.0
    if x_db == math.inf:
        return math.inf
    return 10.0 ** (x_db / 10.0)


class SignalKind(str, Enum):
    UNIFORM_UNSIGNED = "uniform_unsigned"
    UNIFORM_SIGNED = "uniform_signed"
    GAUSSIAN = "gaussian"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class SignalModel:
    """Distribution summary of a signal: range, moments and kind.

    ``range_max`` is the peak amplitude (x_m): the upper edge for
    unsigned signals on [0, range_max], the symmetric edge for signed
    signals on [-range_max, range_max], and the assumed clipping edge
    for a Gaussian.
    """

    kind: SignalKind
    range_max: float
    mean: float
    variance: float
    second_moment: float
    samples: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.range_max <= 0.0:
            raise ValueError("range_max must be positive")
        if self.variance < 0.0:
            raise ValueError("variance must be non-negative")
        scale = max(abs(self.second_moment), self.mean**2 + self.variance, 1.0)
        if self.second_moment < self.mean**2 + self.variance - _REL_TOL * scale:
            raise ValueError("second_moment inconsistent with mean and variance")

    # --- constructors -------------------------------------------------

    @staticmethod
    def uniform_unsigned(range_max: float = 1.0) -> "SignalModel":
        """Uniform on [0, range_max]: E[x^2] = range_max^2 / 3."""
        return SignalModel(
            SignalKind.UNIFORM_UNSIGNED,
            range_max,
            mean=range_max / 2.0,
            variance=range_max**2 / 12.0,
            second_moment=range_max**2 / 3.0,
        )

    @staticmethod
    def uniform_signed(range_max: float = 1.0) -> "SignalModel":
        """Uniform on [-range_max, range_max]: variance = range_max^2 / 3."""
        return SignalModel(
            SignalKind.UNIFORM_SIGNED,
            range_max,
            mean=0.0,
            variance=range_max**2 / 3.0,
            second_moment=range_max**2 / 3.0,
        )

    @staticmethod
    def gaussian(sigma: float, range_mult: float = 4.0) -> "SignalModel":
        """Zero-mean Gaussian treated with clipping edge range_mult*sigma."""
        return SignalModel(
            SignalKind.GAUSSIAN,
            range_mult * sigma,
            mean=0.0,
            variance=sigma**2,
            second_moment=sigma**2,
        )

    @staticmethod
    def empirical(samples: np.ndarray) -> "SignalModel":
        """Sample-backed model; moments computed from the data."""
        s = np.asarray(samples, dtype=float)
        if s.size < 2:
            raise ValueError("need at least two samples")
        return SignalModel(
            SignalKind.EMPIRICAL,
            range_max=float(np.max(np.abs(s))),
            mean=float(np.mean(s)),
            variance=float(np.var(s)),
            second_moment=float(np.mean(s * s)),
            samples=s,
        )

    @property
    def is_unsigned(self) -> bool:
        if self.kind is SignalKind.UNIFORM_UNSIGNED:
            return True
        if self.kind is SignalKind.EMPIRICAL and self.samples is not None:
            return bool(np.min(self.samples) >= 0.0)
        return False


@dataclass(frozen=True)
class QuantizerSpec:
    """Uniform mid-rise quantizer: bit width, clipping level, step.

    Signed quantizers span [-clip_level, clip_level] with step
    clip_level * 2^(1-bits); unsigned span [0, clip_level] with step
    clip_level * 2^(-bits).
    """

    bits: int
    clip_level: float
    signed: bool = True

    def __post_init__(self) -> None:
        if self.bits < 1:
            raise ValueError("bits must be >= 1")
        if self.clip_level <= 0.0:
            raise ValueError("clip_level must be positive")

    @property
    def step(self) -> float:
        if self.signed:
            return self.clip_level * 2.0 ** (1 - self.bits)
        return self.clip_level * 2.0 ** (-self.bits)

    @property
    def levels(self) -> int:
        return 2**self.bits


@dataclass(frozen=True)
class DotProductSpec:
    """Dimension and signal statistics of the dot product y = w.x."""

    n: int
    input: SignalModel
    weight: SignalModel

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.input.is_unsigned:
            raise ValueError("input signal must be unsigned-valued")
        if self.weight.kind is SignalKind.UNIFORM_SIGNED and self.weight.mean != 0.0:
            raise ValueError("signed-uniform weights must be zero-mean")

    @staticmethod
    def unit_uniform(n: int) -> "DotProductSpec":
        """Unsigned-uniform inputs on [0,1], signed-uniform weights on [-1,1]."""
        return DotProductSpec(
            n, SignalModel.uniform_unsigned(1.0), SignalModel.uniform_signed(1.0)
        )


@dataclass(frozen=True)
class SnrReport:
    """Closed-form SNR summary of one dot-product configuration (dB)."""

    sqnr_qiy_db: float
    snr_a_db: float
    sqnr_qy_db: float
    snr_A_db: float
    snr_T_db: float
    config_tag: str = ""

    def __post_init__(self) -> None:
        slack = 1e-9
        if self.snr_A_db > min(self.snr_a_db, self.sqnr_qiy_db) + slack:
            raise ValueError("snr_A must not exceed its components")
        if self.snr_T_db > min(self.snr_A_db, self.sqnr_qy_db) + slack:
            raise ValueError("snr_T must not exceed its components")


# --- operations -------------------------------------------------------


def par_db(sig: SignalModel, unsigned_factor4: bool = False) -> float:
    """Peak-to-average power ratio in dB.

    With ``unsigned_factor4`` the unsigned-activation convention is used,
    range_max^2 / (4 E[x^2]); otherwise range_max^2 / variance.
    """
    if unsigned_factor4:
        if sig.second_moment <= 0.0:
            raise ValueError("degenerate signal: zero second moment")
        return db(sig.range_max**2 / (4.0 * sig.second_moment))
    if sig.variance <= 0.0:
        raise ValueError("degenerate signal: zero variance")
    return db(sig.range_max**2 / sig.variance)


def sqnr_uniform_db(bits: int, par_db_value: float) -> float:
    """SQNR of a B-bit uniform quantizer: 10log10(3*4^B) - PAR.

    The familiar rounded form is 6.02 B + 4.78 dB minus the PAR.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    return db(3.0) + bits * db(4.0) - par_db_value


def dp_output_stats(dp: DotProductSpec) -> tuple[float, float, float]:
    """Output variance, full-scale maximum and output PAR of the dot product.

    Returns (sigma2_yo, y_max, zeta_y_db) where sigma2_yo is
    N * var(w) * E[x^2], y_max = N * x_m * w_m, and the output PAR
    composes the input PARs plus 10log10(N).
    """
    sigma2_yo = dp.n * dp.weight.variance * dp.input.second_moment
    y_max = dp.n * dp.input.range_max * dp.weight.range_max
    zeta_y = par_db(dp.input, True) + par_db(dp.weight, False) + db(dp.n)
    return sigma2_yo, y_max, zeta_y


def quant_noise_variances(
    dp: DotProductSpec,
    qx: QuantizerSpec,
    qw: QuantizerSpec,
    qy: QuantizerSpec,
) -> tuple[float, float]:
    """Input-referred and output quantization noise variances.

    sigma2_qiy = N/12 * (step_w^2 E[x^2] + step_x^2 var(w)),
    sigma2_qy  = step_y^2 / 12.
    """
    sigma2_qiy = (
        dp.n
        / 12.0
        * (qw.step**2 * dp.input.second_moment + qx.step**2 * dp.weight.variance)
    )
    sigma2_qy = qy.step**2 / 12.0
    return sigma2_qiy, sigma2_qy


def sqnr_qiy_db(bx: int, bw: int, zeta_x_db: float, zeta_w_db: float) -> float:
    """Output-referred SQNR due to input and weight quantization.

    Exact form: 10log10(3) + (bx+bw)*10log10(4) - zeta_x - zeta_w
    - 10log10(4^bx / zx^2 + 4^bw / zw^2), with zx^2, zw^2 the linear
    PAR power ratios.
    """
    if bx < 1 or bw < 1:
        raise ValueError("bit widths must be >= 1")
    zx2 = undb(zeta_x_db)
    zw2 = undb(zeta_w_db)
    cross = 4.0**bx / zx2 + 4.0**bw / zw2
    return db(3.0) + (bx + bw) * db(4.0) - zeta_x_db - zeta_w_db - db(cross)


def sqnr_qy_db(by: int, zeta_x_db: float, zeta_w_db: float, n: int) -> float:
    """Output-quantization SQNR at by bits for an N-term dot product.

    10log10(3*4^by) - zeta_x - zeta_w - 10log10(N); the output PAR is the
    composed zeta_x + zeta_w + 10log10(N).
    """
    if by < 1:
        raise ValueError("by must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    return db(3.0) + by * db(4.0) - zeta_x_db - zeta_w_db - db(float(n))


def combine_snr_db(components: list[float] | tuple[float, ...]) -> float:
    """Harmonic (noise-power) combination of SNR components in dB.

    10log10(1 / sum(10^(-c/10))).  The result never exceeds the smallest
    component; +inf components contribute nothing.
    """
    if len(components) == 0:
        raise ValueError("need at least one component")
    total = math.fsum(undb(-c) for c in components)
    if total == 0.0:
        return math.inf
    return -db(total)
