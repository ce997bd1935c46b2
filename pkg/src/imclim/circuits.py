"""Charge-summing (QS) and charge-redistribution (QR) compute models.

QS integrates per-row cell currents over wordline pulse widths onto a
bit-line capacitor; QR averages pre-charged capacitor voltages by charge
sharing.  Each model exposes its ideal transfer, the closed-form noise
parameters (current mismatch, pulse jitter, thermal, capacitor mismatch,
charge injection), a single-shot noisy sample, and energy/delay.

Sampling is pure: a :class:`NoiseDraw` carries every random realization,
so identical draws reproduce identical outputs.  Spatial mismatch fields
are frozen per die instance; temporal fields are redrawn per evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tech import TechnologyProfile

__all__ = [
    "QsConfig",
    "QrConfig",
    "NoiseDraw",
    "make_noise_draw",
    "qs_ideal",
    "qs_sigma_current",
    "qs_trf",
    "qs_sigma_pulse",
    "qs_sigma_thermal",
    "qs_sample",
    "qs_energy",
    "qs_delay",
    "qr_ideal",
    "qr_noise_params",
    "qr_sample",
    "qr_energy",
    "qr_delay",
]

_CAP_PLAUSIBLE = (0.5e-15, 100e-15)


@dataclass(frozen=True)
class QsConfig:
    """Charge-summing cell array: bit-line cap, wordline drive and timing."""

    tech: TechnologyProfile
    c_bl: float
    v_wl: float
    n: int
    t_rise: float = 0.0
    t_fall: float = 0.0
    t_max: float = 100e-12
    e_su: float = 0.0
    t_su: float = 0.0

    def __post_init__(self) -> None:
        if self.c_bl <= 0.0:
            raise ValueError("c_bl must be positive")
        if self.v_wl <= self.tech.vt:
            raise ValueError(
                f"cell cutoff: v_wl={self.v_wl} V does not exceed vt={self.tech.vt} V"
            )
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def i_cell(self) -> float:
        return self.tech.cell_current(self.v_wl)

    @property
    def dvbl_unit(self) -> float:
        """Bit-line discharge of one full-width unit pulse, I*T_max/C."""
        return self.i_cell * self.t_max / self.c_bl


@dataclass(frozen=True)
class QrConfig:
    """Charge-redistribution capacitor bank (typically N equal MOM caps)."""

    tech: TechnologyProfile
    caps: tuple[float, ...]
    e_su: float = 0.0
    t_share: float = 0.0
    t_su: float = 0.0

    def __post_init__(self) -> None:
        if len(self.caps) == 0:
            raise ValueError("caps must be nonempty")
        if any(c <= 0.0 for c in self.caps):
            raise ValueError("capacitances must be positive")
        lo, hi = _CAP_PLAUSIBLE
        if any(not lo <= c <= hi for c in self.caps):
            import warnings

            warnings.warn(
                f"capacitance outside the plausible MOM band [{lo}, {hi}] F",
                stacklevel=2,
            )

    @staticmethod
    def uniform(tech: TechnologyProfile, c_o: float, n: int, **kw) -> "QrConfig":
        return QrConfig(tech, (c_o,) * n, **kw)

    @property
    def n(self) -> int:
        return len(self.caps)


@dataclass(frozen=True)
class NoiseDraw:
    """One realization of every noise source for a single array evaluation.

    ``current_mismatch`` (A) and ``cap_mismatch`` (F) are spatial: frozen
    per die instance.  ``pulse_jitter`` (s) and the thermal fields are
    temporal: redrawn per input vector.
    """

    current_mismatch: np.ndarray | None = None
    pulse_jitter: np.ndarray | None = None
    cap_mismatch: np.ndarray | None = None
    thermal: float = 0.0
    cap_thermal: np.ndarray | None = None
    injection_enabled: bool = True
    seed_info: tuple = field(default=())


def make_noise_draw(
    cfg: QsConfig | QrConfig,
    seed: int | tuple,
    currents: np.ndarray | None = None,
    pulse_stages: np.ndarray | None = None,
) -> NoiseDraw:
    """Draw a complete noise realization, deterministically keyed by seed.

    For a QS array ``currents`` are the nominal per-row currents (defaults
    to the uniform cell current) and ``pulse_stages`` the per-row driver
    stage counts h_j (defaults to 1).
    """
    rng = np.random.default_rng(seed)
    key = seed if isinstance(seed, tuple) else (seed,)
    if isinstance(cfg, QsConfig):
        n = cfg.n
        i_nom = np.full(n, cfg.i_cell) if currents is None else np.asarray(currents)
        h = np.ones(n) if pulse_stages is None else np.asarray(pulse_stages)
        sigma_d = qs_sigma_current(cfg)
        return NoiseDraw(
            current_mismatch=rng.standard_normal(n) * sigma_d * i_nom,
            pulse_jitter=rng.standard_normal(n) * np.sqrt(h) * cfg.tech.sigma_t0,
            thermal=rng.standard_normal() * qs_sigma_thermal(cfg),
            seed_info=key,
        )
    caps = np.asarray(cfg.caps)
    sigma_c, _, sigma_th = qr_noise_params(cfg, 0.0)
    return NoiseDraw(
        cap_mismatch=rng.standard_normal(len(caps)) * sigma_c,
        cap_thermal=rng.standard_normal(len(caps)) * sigma_th,
        seed_info=key,
    )


# --- charge summing ----------------------------------------------------


def qs_ideal(currents, pulses, c: float) -> float:
    """Noise-free charge-summing transfer: V_o = (1/C) sum(I_j * T_j)."""
    i = np.asarray(currents, dtype=float)
    t = np.asarray(pulses, dtype=float)
    if i.shape != t.shape:
        raise ValueError("currents and pulses must have equal length")
    if c <= 0.0:
        raise ValueError("capacitance must be positive")
    return float(np.dot(i, t) / c)


def qs_sigma_current(cfg: QsConfig) -> float:
    """Relative cell-current mismatch std: alpha * sigma_vt / (V_WL - V_t)."""
    dv = cfg.v_wl - cfg.tech.vt
    if dv <= 0.0:
        raise ValueError("cell cutoff: v_wl must exceed vt")
    return cfg.tech.alpha * cfg.tech.sigma_vt / dv


def qs_trf(cfg: QsConfig) -> float:
    """Effective pulse-width loss from finite rise/fall times.

    Linear-ramp approximation of the wordline edge under the alpha-law
    current: t_rf = T_r - ((V_WL - V_t)/V_WL) (T_r + T_f)/(alpha + 1).
    """
    t = cfg.tech
    return cfg.t_rise - ((cfg.v_wl - t.vt) / cfg.v_wl) * (cfg.t_rise + cfg.t_fall) / (
        t.alpha + 1.0
    )


def qs_sigma_pulse(h: int | float, cfg: QsConfig) -> float:
    """Pulse-width jitter std of an h-stage wordline driver: sqrt(h)*sigma_t0."""
    if h < 0:
        raise ValueError("h must be non-negative")
    return math.sqrt(h) * cfg.tech.sigma_t0


def qs_sigma_thermal(cfg: QsConfig) -> float:
    """Integrated bit-line thermal noise std: (1/C) sqrt(N T_max g_m kT / 3)."""
    t = cfg.tech
    return math.sqrt(cfg.n * cfg.t_max * t.gm * t.kt / 3.0) / cfg.c_bl


def qs_sample(
    weights_as_currents,
    inputs_as_pulses,
    cfg: QsConfig,
    draw: NoiseDraw,
    clip_noise_free: bool = False,
) -> float:
    """One noisy charge-summing evaluation.

    V_a = min(V_o + v_e, dvbl_max) with
    v_e = v_theta + (1/C) sum(i_j T_j + I_j (t_j - t_rf)).
    Headroom clipping is applied after adding the electrical noise, since
    the physical discharge saturates at the rail; ``clip_noise_free``
    instead clips the noise-free V_o only (useful when validating the
    closed forms, which assume noise-free clipping).
    """
    i = np.asarray(weights_as_currents, dtype=float)
    t = np.asarray(inputs_as_pulses, dtype=float)
    if i.shape != t.shape:
        raise ValueError("currents and pulses must have equal length")
    mism = draw.current_mismatch if draw.current_mismatch is not None else 0.0
    jit = draw.pulse_jitter if draw.pulse_jitter is not None else 0.0
    if np.ndim(mism) and np.shape(mism) != i.shape:
        raise ValueError("current mismatch length must match the array")
    if np.ndim(jit) and np.shape(jit) != i.shape:
        raise ValueError("pulse jitter length must match the array")
    active = t > 0.0
    t_rf = qs_trf(cfg)
    v_o = float(np.dot(i, t) / cfg.c_bl)
    v_e = draw.thermal + float(
        np.sum((mism * t + i * (jit - t_rf)) * active) / cfg.c_bl
    )
    if clip_noise_free:
        return min(v_o, cfg.tech.dvbl_max) + v_e
    return min(v_o + v_e, cfg.tech.dvbl_max)


def qs_energy(cfg: QsConfig, mean_va: float) -> float:
    """Average charge-summing energy: E[V_a] * V_dd * C + E_su."""
    if not 0.0 <= mean_va <= cfg.tech.vdd:
        raise ValueError("mean_va must lie in [0, vdd]")
    return mean_va * cfg.tech.vdd * cfg.c_bl + cfg.e_su


def qs_delay(cfg: QsConfig) -> float:
    """Longest allowable pulse width plus setup: T_max + T_su."""
    return cfg.t_max + cfg.t_su


# --- charge redistribution ---------------------------------------------


def qr_ideal(node_voltages, caps) -> float:
    """Charge-sharing transfer: V_o = sum(C_j V_j) / sum(C_j)."""
    v = np.asarray(node_voltages, dtype=float)
    c = np.asarray(caps, dtype=float)
    if v.shape != c.shape:
        raise ValueError("node voltages and caps must have equal length")
    total = float(np.sum(c))
    if total <= 0.0:
        raise ValueError("total capacitance must be positive")
    return float(np.dot(c, v) / total)


def qr_noise_params(cfg: QrConfig, vj: float) -> tuple[float, float, float]:
    """Per-capacitor noise parameters at node voltage vj.

    Returns (sigma_cap, v_inj, sigma_thermal): Pelgrom mismatch
    kappa*sqrt(C), deterministic charge-injection offset
    p*WLCox*(Vdd - Vt - Vj)/C, and sampled thermal noise sqrt(kT/C).
    Uses the first capacitor as the nominal size.
    """
    t = cfg.tech
    c = cfg.caps[0]
    sigma_cap = t.kappa * math.sqrt(c)
    v_inj = t.inj_p * t.wl_cox * (t.vdd - t.vt - vj) / c
    sigma_th = math.sqrt(t.kt / c)
    return sigma_cap, v_inj, sigma_th


def qr_sample(node_voltages, cfg: QrConfig, draw: NoiseDraw) -> float:
    """One noisy charge-sharing evaluation.

    V_a = sum((C_j + c_j)(V_j + v_th_j + v_inj_j)) / sum(C_j + c_j).
    No headroom clipping: the shared voltage stays inside the rail by
    construction.  Charge injection follows the deterministic per-switch
    offset and can be disabled through the draw.
    """
    v = np.asarray(node_voltages, dtype=float)
    c = np.asarray(cfg.caps, dtype=float)
    if v.shape != c.shape:
        raise ValueError("node voltages and caps must have equal length")
    cm = draw.cap_mismatch if draw.cap_mismatch is not None else np.zeros_like(c)
    th = draw.cap_thermal if draw.cap_thermal is not None else np.zeros_like(c)
    if np.shape(cm) != c.shape or np.shape(th) != c.shape:
        raise ValueError("draw dimensions must match the capacitor bank")
    t = cfg.tech
    c_eff = c + cm
    if draw.injection_enabled:
        v_inj = t.inj_p * t.wl_cox * (t.vdd - t.vt - v) / c_eff
    else:
        v_inj = 0.0
    return float(np.sum(c_eff * (v + th + v_inj)) / np.sum(c_eff))


def qr_energy(cfg: QrConfig, mean_vj) -> float:
    """Average charge-sharing energy: sum(E[Vdd - V_j] Vdd C_j) + E_su."""
    v = np.asarray(mean_vj, dtype=float)
    c = np.asarray(cfg.caps, dtype=float)
    if v.shape != c.shape:
        raise ValueError("mean voltages and caps must have equal length")
    t = cfg.tech
    return float(np.sum((t.vdd - v) * t.vdd * c)) + cfg.e_su


def qr_delay(cfg: QrConfig) -> float:
    """Charge-sharing settling plus setup: T_share + T_su."""
    return cfg.t_share + cfg.t_su
