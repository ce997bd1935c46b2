"""Sample-accurate Monte Carlo estimation of the architecture SNR metrics.

A trial plan runs ``n_dies`` independent die instances.  Per die the
spatial mismatch fields (cell currents, capacitors) are drawn once and
frozen; per input vector fresh signals and temporal noise (pulse jitter,
thermal) are drawn.  Each vector is pushed through quantize -> analog
compute -> converter, and the metric variances are estimated from
signal-pair differences against the floating-point reference:

    eta_a  from  y_analog - y_input_quantized
    q_iy   from  y_input_quantized - y_float
    q_y    from  y_converted - y_analog

Sample means are removed before squaring: deterministic offsets
(charge-injection bias, the two's-complement half-step offsets) are
calibratable and reported separately from noise.

Determinism: per-die random streams are keyed by (seed, die index), and
cross-die reduction uses exact compensated summation, so results do not
depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .arch import ArchitectureConfig, ArchKind, adc_min_bits, adc_window, analytical_snr
from .circuits import qs_sigma_thermal
from .snr import SnrReport, db

__all__ = ["TrialPlan", "SnrEstimate", "CompareReport", "run_trials", "clipping_oracle", "compare"]

_PAIRS = ("yo", "eta_a", "noise_A", "noise_T", "qiy", "qy")


@dataclass(frozen=True)
class TrialPlan:
    """Monte Carlo run description; identical plans give identical results."""

    arch: ArchitectureConfig
    n_dies: int = 1000
    vectors_per_die: int = 100
    seed: int = 0
    b_adc: int | None = None
    enable_analog_noise: bool = True

    def __post_init__(self) -> None:
        if self.n_dies < 1 or self.vectors_per_die < 1:
            raise ValueError("n_dies and vectors_per_die must be >= 1")


@dataclass(frozen=True)
class SnrEstimate:
    snr_a_db: float
    snr_A_db: float
    snr_T_db: float
    sqnr_qiy_db: float
    sqnr_qy_db: float
    stderr_db: float
    variances: dict = field(default_factory=dict)
    bias: dict = field(default_factory=dict)
    n_samples: int = 0
    config_tag: str = ""
    backend: str = ""


@dataclass(frozen=True)
class CompareReport:
    deltas_db: dict
    tolerance_db: float
    passed: bool
    failures: tuple[str, ...]


def _weight_codes(w: np.ndarray, bw: int) -> np.ndarray:
    """Mid-rise signed codes W with w_q = (W + 1/2) * 2^(1-bw)."""
    half = 2 ** (bw - 1)
    return np.clip(np.floor(w * half), -half, half - 1).astype(np.int64)


def _input_codes(x: np.ndarray, bx: int) -> np.ndarray:
    levels = 2**bx
    return np.clip(np.floor(x * levels), 0, levels - 1).astype(np.int64)


def _die_outputs(plan: TrialPlan, die: int, kernels: dict, win) -> tuple:
    """Simulate one die; returns (y_o, y_q, y_a, y_t) arrays."""
    cfg = plan.arch
    n, bx, bw = cfg.n, cfg.bx, cfg.bw
    v_cnt = plan.vectors_per_die
    t = cfg.tech
    rng = np.random.default_rng((plan.seed, die))

    x = rng.random((v_cnt, n))
    w = rng.random((v_cnt, n)) * 2.0 - 1.0
    xcode = _input_codes(x, bx)
    wcode = _weight_codes(w, bw)
    dx = 2.0**-bx
    dw = 2.0 ** (1 - bw)
    xq = (xcode + 0.5) * dx
    wq = (wcode + 0.5) * dw
    y_o = np.einsum("vj,vj->v", w, x)
    y_q = np.einsum("vj,vj->v", wq, xq)

    noise_on = plan.enable_analog_noise
    adc_on = win is not None
    lo, step, levels = (win.lo, win.step, float(2**plan.b_adc)) if adc_on else (0.0, 1.0, 2.0)
    half = 2 ** (bw - 1)

    if cfg.kind is ArchKind.QS_ARCH:
        u_off = (wcode + half).astype(np.int64)
        sigma_d = cfg.sigma_d if noise_on else 0.0
        jit_rel = t.sigma_t0 / cfg.t_pulse if noise_on else 0.0
        th_counts = (
            qs_sigma_thermal(cfg.qs_config()) / cfg.dvbl_unit if noise_on else 0.0
        )
        # One independent mismatch realization per bit-plane access, frozen
        # per die: the closed forms treat successive accesses of a cell as
        # independent noise events.
        mism = rng.standard_normal((bw, bx, n)) * sigma_d
        jit = rng.standard_normal((v_cnt, bx, n)) * jit_rel
        th = rng.standard_normal((v_cnt, bw, bx)) * th_counts
        lo_c, step_c = (lo / cfg.dvbl_unit, step / cfg.dvbl_unit) if adc_on else (0.0, 1.0)
        ya_raw, yt_raw = kernels["qs"](
            xcode, u_off, mism, jit, th, bx, bw, cfg.k_h,
            lo_c, step_c, levels, adc_on,
        )
        corr = (
            0.5 * u_off.sum(axis=1)
            + (0.5 - half) * xcode.sum(axis=1)
            + n * (0.25 - half / 2.0)
        )
        y_a = dw * dx * (ya_raw + corr)
        y_t = dw * dx * (yt_raw + corr)
        return y_o, y_q, y_a, y_t

    if cfg.kind is ArchKind.QR_ARCH:
        u_off = (wcode + half).astype(np.int64)
        c_o = cfg.c_o
        cap_rel = t.kappa * math.sqrt(c_o) / c_o if noise_on else 0.0
        th_v = math.sqrt(t.kt / c_o) if noise_on else 0.0
        inj_gain = t.inj_p * t.wl_cox / c_o if noise_on else 0.0
        cm = rng.standard_normal((bw, n)) * cap_rel
        cth = rng.standard_normal((v_cnt, bw, n)) * th_v
        # Converter mid-code calibrated to the nominal injection offset.
        shift = inj_gain * (t.vdd - t.vt - t.vdd * cfg.mux / 2.0)
        lo_v = lo + shift if adc_on else 0.0
        ya_raw, yt_raw = kernels["qr"](
            xq, u_off, cm, cth, inj_gain, t.vdd, t.vt, bw,
            lo_v, step, levels, adc_on,
        )
        base = (0.5 - half) * xq.sum(axis=1)
        y_a = dw * (cfg.n / t.vdd * ya_raw + base)
        y_t = dw * (cfg.n / t.vdd * yt_raw + base)
        return y_o, y_q, y_a, y_t

    # CM
    mag = np.where(wcode >= 0, wcode, -wcode - 1).astype(np.int64)
    sgn = np.where(wcode >= 0, 1.0, -1.0)
    sigma_d = cfg.sigma_d if noise_on else 0.0
    # Pulse plane ii drives 2^(bw-2-ii) delay stages; the last row is the
    # always-on half-LSB cell (h = 1/2).
    stages = np.array([2.0 ** (bw - 2 - ii) for ii in range(bw - 1)] + [0.5])
    jit_rel = (
        t.sigma_t0 / (np.sqrt(stages) * t.t0) if noise_on else np.zeros(bw)
    )
    qs_cfg = cfg.qs_config()
    blth_counts = qs_sigma_thermal(qs_cfg) / cfg.dvbl_unit if noise_on else 0.0
    c_o = cfg.c_o
    cap_rel = t.kappa * math.sqrt(c_o) / c_o if noise_on else 0.0
    th_v = math.sqrt(t.kt / c_o) if noise_on else 0.0
    inj_gain = t.inj_p * t.wl_cox / c_o if noise_on else 0.0
    mismB = rng.standard_normal((bw, n)) * sigma_d
    jitB = rng.standard_normal((v_cnt, bw, n)) * jit_rel[None, :, None]
    blth = rng.standard_normal((v_cnt, n)) * blth_counts
    cm = rng.standard_normal(n) * cap_rel
    cth = rng.standard_normal((v_cnt, n)) * th_v
    shift = inj_gain * (t.vdd - t.vt)
    lo_v = lo + shift if adc_on else 0.0
    ya_raw, yt_raw = kernels["cm"](
        xq, mag, sgn, mismB, jitB, blth, cm, cth, inj_gain, t.vdd, t.vt,
        cfg.dvbl_unit, cfg.k_h, bw, lo_v, step, levels, adc_on,
    )
    scale = dw * cfg.n / cfg.dvbl_unit
    y_a = scale * ya_raw
    y_t = scale * yt_raw
    return y_o, y_q, y_a, y_t


def run_trials(plan: TrialPlan) -> SnrEstimate:
    """Run the full Monte Carlo plan and estimate every SNR metric."""
    cfg = plan.arch
    win = adc_window(cfg, plan.b_adc) if plan.b_adc is not None else None
    kernels = {
        "qs": _kernels.qs_arch_die,
        "qr": _kernels.qr_arch_die,
        "cm": _kernels.cm_die,
    }

    sums = {k: [] for k in _PAIRS}
    sums_sq = {k: [] for k in _PAIRS}
    group_noise = []
    group_signal = []

    for die in range(plan.n_dies):
        y_o, y_q, y_a, y_t = _die_outputs(plan, die, kernels, win)
        diffs = {
            "yo": y_o,
            "eta_a": y_a - y_q,
            "noise_A": y_a - y_o,
            "noise_T": y_t - y_o,
            "qiy": y_q - y_o,
            "qy": y_t - y_a,
        }
        for k, d in diffs.items():
            sums[k].append(float(np.sum(d)))
            sums_sq[k].append(float(np.dot(d, d)))
        group_noise.append(sums_sq["noise_A"][-1])
        group_signal.append(sums_sq["yo"][-1])

    m = plan.n_dies * plan.vectors_per_die
    variances = {}
    bias = {}
    for k in _PAIRS:
        mean = math.fsum(sums[k]) / m
        variances[k] = math.fsum(sums_sq[k]) / m - mean**2
        bias[k] = mean

    sig = variances["yo"]

    def ratio_db(noise_key: str) -> float:
        v = variances[noise_key]
        return db(sig / v) if v > 0.0 else math.inf

    # Group dies to estimate the spread of the headline metric.
    n_groups = min(20, plan.n_dies)
    bounds = np.linspace(0, plan.n_dies, n_groups + 1, dtype=int)
    snr_groups = []
    for g in range(n_groups):
        lo_i, hi_i = bounds[g], bounds[g + 1]
        noise = math.fsum(group_noise[lo_i:hi_i])
        signal = math.fsum(group_signal[lo_i:hi_i])
        if noise > 0.0 and signal > 0.0:
            snr_groups.append(db(signal / noise))
    stderr = (
        float(np.std(snr_groups, ddof=1) / math.sqrt(len(snr_groups)))
        if len(snr_groups) > 1
        else 0.0
    )

    return SnrEstimate(
        snr_a_db=ratio_db("eta_a"),
        snr_A_db=ratio_db("noise_A"),
        snr_T_db=ratio_db("noise_T"),
        sqnr_qiy_db=ratio_db("qiy"),
        sqnr_qy_db=ratio_db("qy"),
        stderr_db=stderr,
        variances=variances,
        bias=bias,
        n_samples=m,
        config_tag=cfg.fingerprint(),
        backend=_kernels.BACKEND,
    )


def run_validation(
    cfg: ArchitectureConfig,
    n_dies: int = 1000,
    vectors_per_die: int = 100,
    seed: int = 0,
    gamma_db: float = 0.5,
) -> tuple[SnrReport, SnrEstimate, int]:
    """Analytical report and Monte Carlo estimate at the assigned ADC bits."""
    pre = analytical_snr(cfg)
    bits = adc_min_bits(cfg, pre.snr_A_db)
    report = analytical_snr(cfg, bits)
    plan = TrialPlan(cfg, n_dies=n_dies, vectors_per_die=vectors_per_die,
                     seed=seed, b_adc=bits)
    return report, run_trials(plan), bits


def clipping_oracle(n: int, k_h: float, trials: int = 1_000_000, seed: int = 0) -> float:
    """Monte Carlo estimate of E[(K - k_h)^2 ; K >= k_h], K ~ Binomial(n, 1/4).

    Independent check of the closed-form headroom-clipping moment used by
    the charge-summing noise budget.
    """
    if trials < 10_000:
        raise ValueError("trials must be >= 1e4")
    rng = np.random.default_rng(seed)
    total = 0.0
    remaining = trials
    chunk = 4_000_000
    while remaining > 0:
        cur = min(chunk, remaining)
        counts = rng.binomial(n, 0.25, cur)
        exc = np.maximum(counts - k_h, 0.0)
        total += float(np.dot(exc, exc))
        remaining -= cur
    return total / trials


def compare(
    analytical: SnrReport, estimate: SnrEstimate, tolerance_db: float = 1.5
) -> CompareReport:
    """Per-metric deltas between formula and simulation, with pass/fail."""
    if analytical.config_tag and estimate.config_tag:
        if analytical.config_tag != estimate.config_tag:
            raise ValueError("mismatched configurations: "
                             f"{analytical.config_tag} vs {estimate.config_tag}")
    deltas = {
        "snr_a_db": analytical.snr_a_db - estimate.snr_a_db,
        "snr_A_db": analytical.snr_A_db - estimate.snr_A_db,
        "snr_T_db": analytical.snr_T_db - estimate.snr_T_db,
        "sqnr_qiy_db": analytical.sqnr_qiy_db - estimate.sqnr_qiy_db,
    }
    failures = tuple(
        k for k, v in deltas.items()
        if math.isfinite(v) and abs(v) > tolerance_db
    )
    return CompareReport(deltas, tolerance_db, not failures, failures)
