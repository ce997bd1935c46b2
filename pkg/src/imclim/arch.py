"""Architecture-level composition of the compute models.

Three architectures map a multi-bit dot product onto the analog core:

* ``QS_ARCH``: fully binarized bit-plane dot products on the bit-lines,
  one charge-summing evaluation per (weight bit, input bit) pair.
* ``QR_ARCH``: binary-weighted planes, one charge-redistribution pass per
  weight bit with multi-bit analog inputs.
* ``CM``: multi-bit column discharge (pulse-width weighted charge summing)
  aggregated across columns by charge redistribution.

This module provides the closed-form noise budgets, the per-architecture
ADC precision bound and input range, the ADC quantization window actually
used by the converter, and the energy/delay roll-ups.

All budget variances are expressed in the normalized output domain
(weights scaled to [-1, 1], inputs to [0, 1]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.special import gammaln

from .circuits import QrConfig, QsConfig
from .snr import DotProductSpec, SnrReport, combine_snr_db, db
from .tech import TechnologyProfile

__all__ = [
    "ArchKind",
    "ArchitectureConfig",
    "NoiseBudget",
    "AdcModel",
    "AdcWindow",
    "binomial_clip_moment",
    "noise_budget",
    "analytical_snr",
    "adc_min_bits",
    "adc_input_range",
    "adc_window",
    "adc_quant_variance",
    "adc_energy",
    "dp_energy",
]


class ArchKind(str, Enum):
    QS_ARCH = "QsArch"
    QR_ARCH = "QrArch"
    CM = "CM"


@dataclass(frozen=True)
class ArchitectureConfig:
    """One architecture instance: dimension, precisions and tuning knobs."""

    kind: ArchKind
    n: int
    bx: int
    bw: int
    tech: TechnologyProfile
    dp: DotProductSpec | None = None
    v_wl: float = 0.8
    c_bl: float = 270e-15
    c_o: float = 3e-15
    t_pulse: float = 100e-12
    e_su: float = 0.0
    e_misc: float = 0.0
    adc_k1: float = 100e-15
    adc_k2: float = 1e-18
    dvbl_unit_override: float | None = None

    def __post_init__(self) -> None:
        if self.n < 1 or self.bx < 1 or self.bw < 1:
            raise ValueError("n, bx and bw must be >= 1")
        if self.dp is None:
            object.__setattr__(self, "dp", DotProductSpec.unit_uniform(self.n))
        if self.dp.n != self.n:
            raise ValueError("dot-product dimension must match n")
        if self.kind in (ArchKind.QS_ARCH, ArchKind.CM):
            if self.v_wl <= self.tech.vt:
                raise ValueError(
                    f"cell cutoff: v_wl={self.v_wl} V does not exceed "
                    f"vt={self.tech.vt} V"
                )

    def with_knob(self, **kw) -> "ArchitectureConfig":
        return replace(self, **kw)

    # --- normalized signal moments -------------------------------------

    @property
    def ex2(self) -> float:
        """Normalized input second moment E[(x/x_m)^2]."""
        return self.dp.input.second_moment / self.dp.input.range_max**2

    @property
    def varx(self) -> float:
        return self.dp.input.variance / self.dp.input.range_max**2

    @property
    def mux(self) -> float:
        return self.dp.input.mean / self.dp.input.range_max

    @property
    def sw2(self) -> float:
        """Normalized weight variance var(w/w_m)."""
        return self.dp.weight.variance / self.dp.weight.range_max**2

    @property
    def sigma2_yo(self) -> float:
        return self.n * self.sw2 * self.ex2

    # --- derived circuit parameters ------------------------------------

    @property
    def i_cell(self) -> float:
        return self.tech.cell_current(self.v_wl)

    @property
    def dvbl_unit(self) -> float:
        """Bit-line discharge of one unit pulse (LSB pulse in CM)."""
        if self.dvbl_unit_override is not None:
            return self.dvbl_unit_override
        if self.kind is ArchKind.CM:
            return self.i_cell * self.tech.t0 / self.c_bl
        return self.i_cell * self.t_pulse / self.c_bl

    @property
    def k_h(self) -> float:
        """Headroom in unit discharges."""
        return self.tech.dvbl_max / self.dvbl_unit

    @property
    def sigma_d(self) -> float:
        return self.tech.alpha * self.tech.sigma_vt / (self.v_wl - self.tech.vt)

    def qs_config(self) -> QsConfig:
        if self.kind is ArchKind.CM:
            t_max = 2 ** (self.bw - 1) * self.tech.t0
            return QsConfig(self.tech, self.c_bl, self.v_wl, self.bw, t_max=t_max,
                            e_su=self.e_su)
        return QsConfig(self.tech, self.c_bl, self.v_wl, self.n,
                        t_max=self.t_pulse, e_su=self.e_su)

    def qr_config(self) -> QrConfig:
        return QrConfig.uniform(self.tech, self.c_o, self.n, e_su=self.e_su)

    def fingerprint(self) -> str:
        parts = [
            self.kind.value, self.n, self.bx, self.bw, self.v_wl, self.c_bl,
            self.c_o, self.t_pulse, self.tech.content_hash(),
        ]
        return "|".join(str(p) for p in parts)


@dataclass(frozen=True)
class NoiseBudget:
    """Per-source variances in normalized output units, plus derived SNRs."""

    sigma2_qiy: float
    sigma2_eta_h: float
    sigma2_eta_e: float
    sigma2_qy: float
    snr_a_db: float
    snr_A_db: float
    snr_T_db: float

    def __post_init__(self) -> None:
        for name in ("sigma2_qiy", "sigma2_eta_h", "sigma2_eta_e", "sigma2_qy"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class AdcModel:
    """Converter energy model: E = k1 (B + log2(Vdd/Vc)) + k2 (Vdd/Vc)^2 4^B."""

    k1: float
    k2: float
    b_adc: int
    v_c: float
    vdd: float = 1.0

    def __post_init__(self) -> None:
        if self.k1 <= 0.0 or self.k2 <= 0.0:
            raise ValueError("k1 and k2 must be positive")
        if not 0.0 < self.v_c <= self.vdd:
            raise ValueError("v_c must lie in (0, vdd]")
        if self.b_adc < 1:
            raise ValueError("b_adc must be >= 1")


@dataclass(frozen=True)
class AdcWindow:
    """Quantization window of one plane converter.

    ``lo``/``hi`` bound the converted range in volts; ``step`` is the LSB.
    """

    lo: float
    hi: float
    step: float


# --- clipping statistics of the binarized bit-line ----------------------


def binomial_clip_moment(n: int, k_h: float, order: int = 2) -> float:
    """E[(K - k_h)^order ; K >= k_h] for K ~ Binomial(n, 1/4).

    Evaluated in log space so large-n tails do not underflow.
    """
    if k_h > n:
        return 0.0
    k0 = max(0, math.ceil(k_h))
    ks = np.arange(k0, n + 1, dtype=float)
    log_pmf = (
        gammaln(n + 1.0)
        - gammaln(ks + 1.0)
        - gammaln(n - ks + 1.0)
        + ks * math.log(0.25)
        + (n - ks) * math.log(0.75)
    )
    return float(np.sum((ks - k_h) ** order * np.exp(log_pmf)))


# --- noise budget -------------------------------------------------------


def _sigma2_qiy(cfg: ArchitectureConfig) -> float:
    dx = 2.0 ** (-cfg.bx)
    dw = 2.0 ** (1 - cfg.bw)
    return cfg.n / 12.0 * (dw**2 * cfg.ex2 + dx**2 * cfg.sw2)


def _eta_variances(cfg: ArchitectureConfig) -> tuple[float, float]:
    """(sigma2_eta_h, sigma2_eta_e) in normalized output units."""
    t = cfg.tech
    if cfg.kind is ArchKind.QS_ARCH:
        if cfg.k_h < 1.0:
            raise ValueError("headroom smaller than unit discharge")
        fm = (1.0 - 4.0**-cfg.bw) * (1.0 - 4.0**-cfg.bx)
        eta_h = (4.0 / 9.0) * fm * binomial_clip_moment(cfg.n, cfg.k_h)
        eta_e = cfg.n * cfg.sigma_d**2 * fm / 9.0
        return eta_h, eta_e
    if cfg.kind is ArchKind.QR_ARCH:
        c = cfg.c_o
        cap_term = cfg.ex2 * t.kappa**2 / c
        thermal_term = 2.0 * t.kt / (c * t.vdd**2)
        inj_term = cfg.ex2 * (t.inj_p * t.wl_cox / c) ** 2 / 2.0
        eta_e = (2.0 / 3.0) * (1.0 - 4.0**-cfg.bw) * cfg.n * (
            cap_term + thermal_term + inj_term
        )
        return 0.0, eta_e
    # CM
    if cfg.k_h < 1.0:
        raise ValueError("headroom smaller than unit discharge")
    w_h = 2.0 * cfg.k_h * 2.0**-cfg.bw
    plus = max(0.0, 1.0 - w_h)
    eta_h = (
        cfg.n * cfg.ex2 * cfg.sw2 / 12.0 * cfg.k_h**-2 * 4.0**cfg.bw * plus**2
    )
    eta_e = (2.0 / 3.0) * cfg.n * cfg.ex2 * (0.25 - 4.0**-cfg.bw) * cfg.sigma_d**2
    return eta_h, eta_e


def adc_input_range(cfg: ArchitectureConfig) -> float:
    """Architecture ADC input range V_c in volts (conservative full span).

    QS: min(4 sqrt(3N) dV_unit, dV_max, N dV_unit); QR: 8 Vdd
    sqrt((E[x^2] + var(x))/N); CM: 8 sigma_w 2^Bw dV_unit sqrt(E[x^2]) / sqrt(N).
    """
    t = cfg.tech
    if cfg.kind is ArchKind.QS_ARCH:
        u = cfg.dvbl_unit
        return min(4.0 * math.sqrt(3.0 * cfg.n) * u, t.dvbl_max, cfg.n * u)
    if cfg.kind is ArchKind.QR_ARCH:
        return 8.0 * t.vdd * math.sqrt((cfg.ex2 + cfg.varx) / cfg.n)
    return (
        8.0
        * math.sqrt(cfg.sw2)
        * 2.0**cfg.bw
        * cfg.dvbl_unit
        * math.sqrt(cfg.ex2)
        / math.sqrt(cfg.n)
    )


def adc_window(cfg: ArchitectureConfig, b_adc: int) -> AdcWindow:
    """Window actually spanned by the plane converter at b_adc bits.

    The converter covers four standard deviations around the plane mean
    (the clipping level that maximizes uniform-quantizer SQNR on a
    near-Gaussian signal), bounded by the physical signal support.
    """
    if b_adc < 1:
        raise ValueError("b_adc must be >= 1")
    t = cfg.tech
    levels = 2.0**b_adc
    if cfg.kind is ArchKind.QS_ARCH:
        u = cfg.dvbl_unit
        sigma_v = math.sqrt(3.0 * cfg.n) / 4.0 * u
        support = min(cfg.k_h, float(cfg.n)) * u
        span = min(8.0 * sigma_v, support)
        mu = cfg.n / 4.0 * u
        lo = max(0.0, min(mu - span / 2.0, support - span))
        return AdcWindow(lo, lo + span, span / levels)
    if cfg.kind is ArchKind.QR_ARCH:
        var_plane = cfg.ex2 / 2.0 - (cfg.mux / 2.0) ** 2
        sigma_p = t.vdd * math.sqrt(var_plane / cfg.n)
        center = t.vdd * cfg.mux / 2.0
        span = 8.0 * sigma_p
        return AdcWindow(center - span / 2.0, center + span / 2.0, span / levels)
    scale = 2.0 ** (cfg.bw - 1) * cfg.dvbl_unit
    sigma_v = scale * math.sqrt(cfg.sw2 * cfg.ex2 / cfg.n)
    span = 8.0 * sigma_v
    return AdcWindow(-span / 2.0, span / 2.0, span / levels)


def adc_quant_variance(cfg: ArchitectureConfig, b_adc: int) -> float:
    """Converter quantization noise referred to the normalized output."""
    w = adc_window(cfg, b_adc)
    if cfg.kind is ArchKind.QS_ARCH:
        step_counts = w.step / cfg.dvbl_unit
        fm = (1.0 - 4.0**-cfg.bw) * (1.0 - 4.0**-cfg.bx)
        return (4.0 / 9.0) * fm * step_counts**2 / 12.0
    if cfg.kind is ArchKind.QR_ARCH:
        gain = cfg.n / cfg.tech.vdd
        return (
            (4.0 / 3.0)
            * (1.0 - 4.0**-cfg.bw)
            * gain**2
            * w.step**2
            / 12.0
        )
    gain = cfg.n / (2.0 ** (cfg.bw - 1) * cfg.dvbl_unit)
    return gain**2 * w.step**2 / 12.0


def noise_budget(cfg: ArchitectureConfig, b_adc: int | None = None) -> NoiseBudget:
    """Closed-form noise budget; with ``b_adc`` the ADC term is included."""
    sigma2_qiy = _sigma2_qiy(cfg)
    eta_h, eta_e = _eta_variances(cfg)
    sigma2_qy = adc_quant_variance(cfg, b_adc) if b_adc is not None else 0.0
    s = cfg.sigma2_yo
    snr_a = db(s / (eta_h + eta_e)) if eta_h + eta_e > 0.0 else math.inf
    snr_A = db(s / (eta_h + eta_e + sigma2_qiy))
    snr_T = db(s / (eta_h + eta_e + sigma2_qiy + sigma2_qy))
    return NoiseBudget(sigma2_qiy, eta_h, eta_e, sigma2_qy, snr_a, snr_A, snr_T)


def analytical_snr(cfg: ArchitectureConfig, b_adc: int | None = None) -> SnrReport:
    """Full closed-form SNR report for one configuration."""
    budget = noise_budget(cfg, b_adc)
    s = cfg.sigma2_yo
    sqnr_qiy = db(s / budget.sigma2_qiy)
    sqnr_qy = (
        db(s / budget.sigma2_qy) if budget.sigma2_qy > 0.0 else math.inf
    )
    return SnrReport(
        sqnr_qiy_db=sqnr_qiy,
        snr_a_db=budget.snr_a_db,
        sqnr_qy_db=sqnr_qy,
        snr_A_db=budget.snr_A_db,
        snr_T_db=combine_snr_db([budget.snr_A_db, sqnr_qy]),
        config_tag=cfg.fingerprint(),
    )


def adc_min_bits(cfg: ArchitectureConfig, snr_A_db: float) -> int:
    """Smallest ADC precision preserving SNR_A, per architecture.

    QS: ceil(min((SNR_A + 16.2)/6, log2 k_h, log2 N)); QR adds the
    bx + log2 N input-resolution bound; CM uses only the
    minimum-precision term.
    """
    mpc_term = (snr_A_db + 16.2) / 6.0
    if cfg.kind is ArchKind.QS_ARCH:
        bound = min(mpc_term, math.log2(cfg.k_h), math.log2(cfg.n))
    elif cfg.kind is ArchKind.QR_ARCH:
        bound = min(mpc_term, cfg.bx + math.log2(cfg.n))
    else:
        bound = mpc_term
    return max(1, math.ceil(bound))


def adc_energy(model: AdcModel) -> float:
    """Converter energy per conversion (J)."""
    ratio = model.vdd / model.v_c
    return model.k1 * (model.b_adc + math.log2(ratio)) + model.k2 * ratio**2 * (
        4.0**model.b_adc
    )


def _adc_model(cfg: ArchitectureConfig, b_adc: int) -> AdcModel:
    v_c = min(adc_input_range(cfg), cfg.tech.vdd)
    return AdcModel(cfg.adc_k1, cfg.adc_k2, b_adc, v_c, cfg.tech.vdd)


def dp_energy(cfg: ArchitectureConfig, b_adc: int) -> float:
    """Total energy of one N-term dot product, converter included (J)."""
    t = cfg.tech
    e_adc = adc_energy(_adc_model(cfg, b_adc))
    if cfg.kind is ArchKind.QS_ARCH:
        mean_counts = cfg.n / 4.0 - binomial_clip_moment(cfg.n, cfg.k_h, order=1)
        mean_va = mean_counts * cfg.dvbl_unit
        e_qs = mean_va * t.vdd * cfg.c_bl + cfg.e_su
        return cfg.bw * cfg.bx * (e_qs + e_adc) + cfg.e_misc
    if cfg.kind is ArchKind.QR_ARCH:
        mean_vj = t.vdd * cfg.mux / 2.0
        e_qr = cfg.n * (t.vdd - mean_vj) * t.vdd * cfg.c_o + cfg.e_su
        e_mult = cfg.mux * 0.5 * cfg.c_o * t.vdd**2
        return cfg.bw * (e_qr + cfg.n * e_mult + e_adc) + cfg.e_misc
    # CM: discharge magnitudes saturate at the headroom.
    a = 2.0 ** (cfg.bw - 1)
    ratio = min(cfg.k_h / a, 1.0)
    mean_units = a * (ratio - ratio**2 / 2.0) if ratio < 1.0 else a / 2.0
    e_col = mean_units * cfg.dvbl_unit * t.vdd * cfg.c_bl + cfg.e_su
    e_qr = cfg.n * t.vdd**2 * cfg.c_o + cfg.e_su
    e_mult = cfg.mux * 0.5 * cfg.c_o * t.vdd**2
    return 2.0 * cfg.n * e_col + e_qr + e_mult + e_adc + cfg.e_misc
