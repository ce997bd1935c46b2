"""Output-precision assignment rules and the reference scalar quantizers.

Three rules map a dot-product configuration to an output/ADC bit width:

* bit-growth (BGC): full-range precision bx + bw + ceil(log2 N),
* truncated bit-growth (tBGC): any smaller fixed bit count on the full range,
* minimum-precision (MPC): clip the output at a multiple of its standard
  deviation and spend the bits on the reduced range.

A Lloyd-Max optimal scalar quantizer is provided as the reference against
which the uniform rules are judged, plus the mid-rise quantize-and-clip
primitive shared with the Monte Carlo simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate, special

from .snr import QuantizerSpec, SignalKind, SignalModel, db, undb

__all__ = [
    "ClipStats",
    "PrecisionRule",
    "PrecisionAssignment",
    "LloydMaxResult",
    "bgc_bits",
    "sqnr_bgc_db",
    "gaussian_clip_stats",
    "sqnr_mpc_db",
    "mpc_min_bits",
    "lloyd_max",
    "quantize",
]


class PrecisionRule(str, Enum):
    BGC = "BGC"
    TBGC = "tBGC"
    MPC = "MPC"
    LLOYD_MAX = "LloydMax"


@dataclass(frozen=True)
class ClipStats:
    """Clipping statistics of a signal clipped at zeta_mpc standard deviations.

    ``sigma2_cc`` is the conditional mean-square distance of the exceeding
    amplitude to the clip level, in units of the signal variance.
    """

    zeta_mpc: float
    p_clip: float
    sigma2_cc: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_clip <= 1.0:
            raise ValueError("p_clip must be a probability")
        if self.sigma2_cc < 0.0:
            raise ValueError("sigma2_cc must be non-negative")


@dataclass(frozen=True)
class PrecisionAssignment:
    rule: PrecisionRule
    by: int
    clip_level: float
    achieved_sqnr_db: float

    def __post_init__(self) -> None:
        if self.by < 1:
            raise ValueError("by must be >= 1")


def bgc_bits(bx: int, bw: int, n: int) -> int:
    """Bit-growth output precision: bx + bw + ceil(log2 n)."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    return bx + bw + math.ceil(math.log2(n)) if n > 1 else bx + bw


def sqnr_bgc_db(bx: int, bw: int, zeta_x_db: float, zeta_w_db: float, n: int) -> float:
    """Output-quantization SQNR under the bit-growth rule.

    10log10(3) + (bx+bw)*10log10(4) - zeta_x - zeta_w + 10log10(N);
    identical to sqnr_qy_db evaluated at bgc_bits for power-of-two N.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return db(3.0) + (bx + bw) * db(4.0) - zeta_x_db - zeta_w_db + db(float(n))


def gaussian_clip_stats(zeta_mpc: float) -> ClipStats:
    """Clip probability and conditional clipping variance for a Gaussian.

    p_clip = erfc(zeta / sqrt(2)); sigma2_cc is obtained by quadrature of
    (|y| - y_c)^2 over the exceeding tails of the standard normal density,
    normalized by p_clip.
    """
    if zeta_mpc < 0.0:
        raise ValueError("zeta_mpc must be non-negative")
    if zeta_mpc == 0.0:
        return ClipStats(0.0, 1.0, 1.0)
    p_clip = float(special.erfc(zeta_mpc / math.sqrt(2.0)))

    def tail_integrand(x: float) -> float:
        return (x - zeta_mpc) ** 2 * math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)

    tail, _ = integrate.quad(
        tail_integrand, zeta_mpc, math.inf, epsabs=1e-10, epsrel=1e-12
    )
    sigma2_cc = 2.0 * tail / p_clip if p_clip > 0.0 else 0.0
    return ClipStats(zeta_mpc, p_clip, sigma2_cc)


def sqnr_mpc_db(by: int, clip: ClipStats) -> float:
    """Output SQNR when clipping at zeta_mpc sigma and quantizing with by bits.

    10log10(3*4^by) - 20log10(zeta) - 10log10(1 + p_clip*sigma2_cc/sigma2_qy)
    with sigma2_qy = zeta^2 * 4^(-by) / 3 (all in signal-variance units).
    The last term is the quantization-versus-clipping penalty.
    """
    if by < 1:
        raise ValueError("by must be >= 1")
    if clip.zeta_mpc <= 0.0:
        raise ValueError("zeta_mpc must be positive")
    sigma2_qy = clip.zeta_mpc**2 * 4.0 ** (-by) / 3.0
    penalty = db(1.0 + clip.p_clip * clip.sigma2_cc / sigma2_qy)
    return db(3.0 * 4.0**by) - db(clip.zeta_mpc**2) - penalty


def mpc_min_bits(snr_A_db: float, gamma_db: float = 0.5) -> int:
    """Smallest output bit count keeping the total SNR within gamma of SNR_A.

    ceil of (SNR_A + 7.2 - gamma - 10log10(1 - 10^(-gamma/10))) / 6, the
    minimum-precision bound for a Gaussian output clipped at 4 sigma.
    For gamma = 0.5 dB this reduces to ceil((SNR_A + 16.3) / 6).
    """
    if gamma_db <= 0.0:
        raise ValueError("gamma_db must be positive")
    arg = 1.0 - undb(-gamma_db)
    if arg <= 0.0:
        raise ValueError("gamma_db too large: log argument not positive")
    bits = (snr_A_db + 7.2 - gamma_db - db(arg)) / 6.0
    return max(1, math.ceil(bits))


# --- Lloyd-Max reference quantizer ------------------------------------

_SQRT2PI = math.sqrt(2.0 * math.pi)


def _phi(x: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * x * x) / _SQRT2PI


def _big_phi(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + special.erf(x / math.sqrt(2.0)))


@dataclass
class LloydMaxResult:
    codebook: np.ndarray
    boundaries: np.ndarray
    sqnr_db: float
    converged: bool
    iterations: int


def _gaussian_interval_moments(lo: np.ndarray, hi: np.ndarray, mu: float, sigma: float):
    """(probability, first moment, second moment) of N(mu, sigma^2) on [lo, hi]."""
    a = (lo - mu) / sigma
    b = (hi - mu) / sigma
    p = _big_phi(b) - _big_phi(a)
    pa, pb = _phi(a), _phi(b)
    # Standardized moments; guard the empty-interval case.
    m1s = np.where(p > 0.0, (pa - pb) / np.maximum(p, 1e-300), 0.0)
    a_fin = np.where(np.isfinite(a), a, 0.0)
    b_fin = np.where(np.isfinite(b), b, 0.0)
    m2s = np.where(
        p > 0.0,
        1.0 + (a_fin * pa - b_fin * pb) / np.maximum(p, 1e-300),
        0.0,
    )
    m1 = mu + sigma * m1s
    m2 = mu * mu + 2.0 * mu * sigma * m1s + sigma * sigma * m2s
    return p, m1, m2


def _uniform_interval_moments(lo: np.ndarray, hi: np.ndarray, a: float, b: float):
    """Moments of U[a, b] restricted to [lo, hi]."""
    lo_c = np.clip(lo, a, b)
    hi_c = np.clip(hi, a, b)
    width = np.maximum(hi_c - lo_c, 0.0)
    p = width / (b - a)
    m1 = np.where(width > 0.0, 0.5 * (lo_c + hi_c), 0.0)
    m2 = np.where(width > 0.0, (lo_c**2 + lo_c * hi_c + hi_c**2) / 3.0, 0.0)
    return p, m1, m2


def lloyd_max(
    model: SignalModel,
    levels: int,
    max_iter: int = 200,
    tol: float = 1e-10,
) -> LloydMaxResult:
    """Lloyd-Max fixed point: centroid codebook with midpoint boundaries.

    Deterministic initialization from a uniform codebook over the signal's
    +-4 sigma span (its full range for uniform models).  Iterates until the
    largest codebook movement drops below ``tol`` (relative to the span) or
    ``max_iter`` is reached; in the latter case ``converged`` is False and
    the best codebook so far is returned.
    """
    if levels < 2:
        raise ValueError("levels must be >= 2")

    if model.kind is SignalKind.GAUSSIAN:
        sigma = math.sqrt(model.variance)
        span_lo, span_hi = model.mean - 4.0 * sigma, model.mean + 4.0 * sigma

        def interval_moments(lo, hi):
            return _gaussian_interval_moments(lo, hi, model.mean, sigma)

    elif model.kind in (SignalKind.UNIFORM_SIGNED, SignalKind.UNIFORM_UNSIGNED):
        if model.kind is SignalKind.UNIFORM_SIGNED:
            a, b = -model.range_max, model.range_max
        else:
            a, b = 0.0, model.range_max
        span_lo, span_hi = a, b

        def interval_moments(lo, hi):
            return _uniform_interval_moments(lo, hi, a, b)

    elif model.kind is SignalKind.EMPIRICAL:
        return _lloyd_max_samples(model, levels, max_iter, tol)
    else:
        raise ValueError(f"unsupported signal kind {model.kind}")

    span = span_hi - span_lo
    step = span / levels
    codebook = span_lo + step * (np.arange(levels) + 0.5)

    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        edges = np.empty(levels + 1)
        edges[0], edges[-1] = -np.inf, np.inf
        edges[1:-1] = 0.5 * (codebook[:-1] + codebook[1:])
        p, m1, _ = interval_moments(edges[:-1], edges[1:])
        new_codebook = np.where(p > 0.0, m1, codebook)
        move = float(np.max(np.abs(new_codebook - codebook)))
        codebook = new_codebook
        if move < tol * span:
            converged = True
            break

    edges = np.empty(levels + 1)
    edges[0], edges[-1] = -np.inf, np.inf
    edges[1:-1] = 0.5 * (codebook[:-1] + codebook[1:])
    p, m1, m2 = interval_moments(edges[:-1], edges[1:])
    mse = float(np.sum(p * (m2 - 2.0 * codebook * m1 + codebook**2)))
    sqnr = db(model.variance / mse) if mse > 0.0 else math.inf
    return LloydMaxResult(codebook, edges[1:-1], sqnr, converged, iterations)


def _lloyd_max_samples(
    model: SignalModel, levels: int, max_iter: int, tol: float
) -> LloydMaxResult:
    s = np.sort(model.samples)
    std = math.sqrt(model.variance)
    span_lo, span_hi = model.mean - 4.0 * std, model.mean + 4.0 * std
    span = span_hi - span_lo
    codebook = span_lo + (span / levels) * (np.arange(levels) + 0.5)

    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        edges = 0.5 * (codebook[:-1] + codebook[1:])
        idx = np.searchsorted(edges, s)
        sums = np.bincount(idx, weights=s, minlength=levels)
        counts = np.bincount(idx, minlength=levels)
        new_codebook = np.where(counts > 0, sums / np.maximum(counts, 1), codebook)
        move = float(np.max(np.abs(new_codebook - codebook)))
        codebook = new_codebook
        if move < tol * span:
            converged = True
            break

    edges = 0.5 * (codebook[:-1] + codebook[1:])
    idx = np.searchsorted(edges, s)
    mse = float(np.mean((s - codebook[idx]) ** 2))
    sqnr = db(model.variance / mse) if mse > 0.0 else math.inf
    return LloydMaxResult(codebook, edges, sqnr, converged, iterations)


# --- mid-rise quantize-and-clip ---------------------------------------


def quantize(value, spec: QuantizerSpec):
    """Uniform mid-rise quantize-and-clip.

    Reconstruction levels sit at half-step offsets: (k + 1/2) * step.  Input
    0 maps to +step/2 on a signed quantizer; values at bin boundaries round
    half away from zero; values beyond the clip level saturate to the
    outermost level, clip_level - step/2.  Accepts scalars or arrays.
    """
    v = np.asarray(value, dtype=float)
    step = spec.step
    if spec.signed:
        top = 2 ** (spec.bits - 1) - 1
        mag = np.minimum(np.floor(np.abs(v) / step), top)
        sign = np.where(v < 0.0, -1.0, 1.0)
        out = sign * (mag + 0.5) * step
    else:
        top = 2**spec.bits - 1
        idx = np.clip(np.floor(v / step), 0, top)
        out = (idx + 0.5) * step
    if np.isscalar(value) or np.ndim(value) == 0:
        return float(out)
    return out
