"""Experiment presets, the sweep runner, and table emission.

Each named experiment evaluates the closed-form models over a parameter
grid; with ``mc_enabled`` the sample-accurate simulator runs alongside and
delta columns are added.  Output rows follow the deterministic grid order
and two runs with the same seed produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .arch import (
    AdcModel,
    ArchKind,
    ArchitectureConfig,
    adc_energy,
    adc_input_range,
    adc_min_bits,
    analytical_snr,
    dp_energy,
)
from .precision import (
    bgc_bits,
    gaussian_clip_stats,
    lloyd_max,
    quantize,
    sqnr_bgc_db,
    sqnr_mpc_db,
)
from .snr import (
    DotProductSpec,
    QuantizerSpec,
    SignalModel,
    db,
    dp_output_stats,
    par_db,
    sqnr_qy_db,
    undb,
)
from .tech import TechnologyProfile, builtin_profile

__all__ = ["SweepSpec", "ResultTable", "run_experiment", "emit", "EXPERIMENTS"]

# Noise-limited converter constant used by the energy-trend presets: the
# linear term is made negligible so the 4^B regime sets the scaling.
_NOISE_LIMITED_K1 = 1e-18


@dataclass(frozen=True)
class SweepSpec:
    """A named experiment plus grid/trial overrides."""

    experiment: str
    grid: dict = field(default_factory=dict)
    mc_enabled: bool = False
    n_dies: int = 200
    vectors_per_die: int = 100
    seed: int = 0
    profile: str = "cmos65nm"
    base_arch: ArchitectureConfig | None = None

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(
                f"unknown experiment {self.experiment!r}; "
                f"choose from {sorted(EXPERIMENTS)}"
            )
        if self.experiment == "custom" and not self.grid:
            raise ValueError("empty sweep: custom experiment requires a grid")

    def with_base(self, arch: ArchitectureConfig) -> "SweepSpec":
        return replace(self, base_arch=arch)

    def tech(self) -> TechnologyProfile:
        if self.base_arch is not None:
            return self.base_arch.tech
        return builtin_profile(self.profile)


@dataclass
class ResultTable:
    """Columns with units, rows in grid order, and reproducibility metadata."""

    columns: list[tuple[str, str]]
    rows: list[list]
    metadata: dict

    def column(self, name: str) -> list:
        idx = [c[0] for c in self.columns].index(name)
        return [r[idx] for r in self.rows]

    def __post_init__(self) -> None:
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} cells, expected {width}")


def _fmt_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def emit(table: ResultTable, fmt: str, path: str | Path) -> None:
    """Write the table as CSV (header ``name[unit]``) or JSON.

    Numeric cells are formatted with shortest round-trip precision, so the
    emitted file parses back to the exact same values and identical tables
    produce identical bytes.
    """
    p = Path(path)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            [f"{name}[{unit}]" if unit else name for name, unit in table.columns]
        )
        for row in table.rows:
            writer.writerow([_fmt_cell(v) for v in row])
        p.write_text(buf.getvalue())
    elif fmt == "json":
        payload = {
            "columns": [{"name": n, "unit": u} for n, u in table.columns],
            "rows": [
                [float(v) if isinstance(v, (np.floating,)) else v for v in row]
                for row in table.rows
            ],
            "metadata": table.metadata,
        }
        p.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'json'")


def _metadata(spec: SweepSpec) -> dict:
    tech = spec.tech()
    return {
        "experiment": spec.experiment,
        "seed": spec.seed,
        "profile": tech.name,
        "profile_hash": tech.content_hash(),
        "tool_version": __version__,
        "mc_enabled": spec.mc_enabled,
    }


def _grid_or(spec: SweepSpec, name: str, default: list) -> list:
    return list(spec.grid.get(name, default))


# --- output-precision rule presets ---------------------------------------


def _mc_quantizer_sqnr(by: int, zeta_lin: float, samples: int, seed: int) -> float:
    """Simulated SQNR of clip-and-quantize on Gaussian outputs.

    The clip range is ``zeta_lin`` standard deviations, the range implied
    by the rule under test, so the simulation checks the quantizer math of
    the corresponding formula.
    """
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(samples)
    q = QuantizerSpec(by, zeta_lin, signed=True)
    err = quantize(y, q) - y
    err -= err.mean()
    return db(1.0 / float(np.mean(err * err)))


def _run_fig4a(spec: SweepSpec) -> ResultTable:
    bx = bw = 7
    x = SignalModel.uniform_unsigned(1.0)
    w = SignalModel.uniform_signed(1.0)
    zx, zw = par_db(x, True), par_db(w, False)
    clip = gaussian_clip_stats(4.0)
    samples = max(10**6, spec.n_dies * spec.vectors_per_die)
    cols = [
        ("n", ""), ("method", ""), ("by", "bits"), ("sqnr_db", "dB"),
        ("mc_sqnr_db", "dB"), ("delta_db", "dB"), ("status", ""),
    ]
    rows = []
    for i, n in enumerate(_grid_or(spec, "n", [16, 64, 256, 1024])):
        zeta_y_lin = math.sqrt(undb(zx + zw + db(float(n))))
        entries = [
            ("MPC", 8, sqnr_mpc_db(8, clip), 4.0),
            ("tBGC", 8, sqnr_qy_db(8, zx, zw, n), zeta_y_lin),
            ("BGC", bgc_bits(bx, bw, n), sqnr_bgc_db(bx, bw, zx, zw, n), zeta_y_lin),
        ]
        for method, by, formula, zeta in entries:
            mc = float("nan")
            delta = float("nan")
            if spec.mc_enabled:
                mc = _mc_quantizer_sqnr(by, zeta, samples, spec.seed + i)
                delta = formula - mc
            rows.append([n, method, by, formula, mc, delta, "ok"])
    return ResultTable(cols, rows, _metadata(spec))


def _run_fig4b(spec: SweepSpec) -> ResultTable:
    by = 8
    zetas = _grid_or(spec, "zeta", [2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0])
    lm = lloyd_max(SignalModel.gaussian(1.0), levels=2**by)
    cols = [
        ("zeta", "sigma"), ("by", "bits"), ("sqnr_mpc_db", "dB"),
        ("p_clip", ""), ("lm_sqnr_db", "dB"), ("status", ""),
    ]
    rows = []
    for z in zetas:
        clip = gaussian_clip_stats(float(z))
        rows.append([z, by, sqnr_mpc_db(by, clip), clip.p_clip, lm.sqnr_db, "ok"])
    return ResultTable(cols, rows, _metadata(spec))


# --- architecture SNR presets ---------------------------------------------


def _arch_base(spec: SweepSpec, kind: ArchKind, **kw) -> ArchitectureConfig:
    if spec.base_arch is not None and spec.base_arch.kind is kind:
        return spec.base_arch.with_knob(**kw)
    n = kw.pop("n")
    return ArchitectureConfig(
        kind=kind, n=n, tech=spec.tech(), dp=DotProductSpec.unit_uniform(n), **kw
    )


def _snr_rows(spec: SweepSpec, configs: list[tuple]) -> ResultTable:
    """Shared analytic + optional MC evaluation over labeled configurations."""
    from .mc import TrialPlan, run_trials  # local import to avoid cycles

    cols = [
        ("arch", ""), ("knob", ""), ("knob_value", ""), ("n", ""),
        ("bx", "bits"), ("bw", "bits"), ("b_adc", "bits"),
        ("snr_a_db", "dB"), ("snr_A_db", "dB"), ("snr_T_db", "dB"),
        ("mc_snr_A_db", "dB"), ("mc_snr_T_db", "dB"), ("delta_A_db", "dB"),
        ("status", ""),
    ]
    rows = []
    for i, (knob, value, cfg) in enumerate(configs):
        try:
            pre = analytical_snr(cfg)
            bits = adc_min_bits(cfg, pre.snr_A_db)
            rep = analytical_snr(cfg, bits)
            mc_A = mc_T = delta = float("nan")
            if spec.mc_enabled:
                plan = TrialPlan(
                    cfg, n_dies=spec.n_dies, vectors_per_die=spec.vectors_per_die,
                    seed=spec.seed + i, b_adc=bits,
                )
                est = run_trials(plan)
                mc_A, mc_T = est.snr_A_db, est.snr_T_db
                delta = rep.snr_A_db - est.snr_A_db
            rows.append([
                cfg.kind.value, knob, value, cfg.n, cfg.bx, cfg.bw, bits,
                rep.snr_a_db, rep.snr_A_db, rep.snr_T_db, mc_A, mc_T, delta, "ok",
            ])
        except ValueError as exc:
            rows.append([
                cfg.kind.value, knob, value, cfg.n, cfg.bx, cfg.bw, 0,
                float("nan"), float("nan"), float("nan"),
                float("nan"), float("nan"), float("nan"), f"error:{exc}",
            ])
    return ResultTable(cols, rows, _metadata(spec))


def _run_fig7a(spec: SweepSpec) -> ResultTable:
    configs = []
    for v_wl in _grid_or(spec, "v_wl", [0.6, 0.7, 0.8]):
        for n in _grid_or(spec, "n", [16, 32, 64, 128, 256, 512, 1024]):
            cfg = _arch_base(spec, ArchKind.QS_ARCH, n=int(n), bx=6, bw=6, v_wl=v_wl)
            configs.append(("v_wl", v_wl, cfg))
    return _snr_rows(spec, configs)


def _run_fig7b(spec: SweepSpec) -> ResultTable:
    rows_cfg = []
    for v_wl in _grid_or(spec, "v_wl", [0.6, 0.7, 0.8]):
        for b in _grid_or(spec, "b_adc", list(range(1, 11))):
            cfg = _arch_base(spec, ArchKind.QS_ARCH, n=128, bx=6, bw=6, v_wl=v_wl)
            rows_cfg.append((v_wl, int(b), cfg))
    return _snr_vs_bits(spec, rows_cfg, "v_wl")


def _run_fig8a(spec: SweepSpec) -> ResultTable:
    configs = []
    for c_o in _grid_or(spec, "c_o", [1e-15, 3e-15, 9e-15]):
        for bx in _grid_or(spec, "bx", list(range(1, 9))):
            cfg = _arch_base(
                spec, ArchKind.QR_ARCH, n=64, bx=int(bx), bw=7, c_o=c_o
            )
            configs.append(("c_o", c_o, cfg))
    return _snr_rows(spec, configs)


def _run_fig8b(spec: SweepSpec) -> ResultTable:
    rows_cfg = []
    for c_o in _grid_or(spec, "c_o", [1e-15, 3e-15, 9e-15]):
        for b in _grid_or(spec, "b_adc", list(range(1, 13))):
            cfg = _arch_base(spec, ArchKind.QR_ARCH, n=64, bx=6, bw=7, c_o=c_o)
            rows_cfg.append((c_o, int(b), cfg))
    return _snr_vs_bits(spec, rows_cfg, "c_o")


def _run_fig9a(spec: SweepSpec) -> ResultTable:
    configs = []
    for v_wl in _grid_or(spec, "v_wl", [0.6, 0.7, 0.8]):
        for bw in _grid_or(spec, "bw", list(range(2, 9))):
            cfg = _arch_base(
                spec, ArchKind.CM, n=128, bx=6, bw=int(bw), v_wl=v_wl
            )
            configs.append(("v_wl", v_wl, cfg))
    return _snr_rows(spec, configs)


def _run_fig9b(spec: SweepSpec) -> ResultTable:
    rows_cfg = []
    for v_wl in _grid_or(spec, "v_wl", [0.7, 0.8]):
        for b in _grid_or(spec, "b_adc", list(range(1, 13))):
            cfg = _arch_base(spec, ArchKind.CM, n=128, bx=6, bw=6, v_wl=v_wl)
            rows_cfg.append((v_wl, int(b), cfg))
    return _snr_vs_bits(spec, rows_cfg, "v_wl")


def _snr_vs_bits(spec: SweepSpec, rows_cfg: list, knob: str) -> ResultTable:
    from .mc import TrialPlan, run_trials

    cols = [
        ("arch", ""), ("knob", ""), ("knob_value", ""), ("b_adc", "bits"),
        ("snr_A_db", "dB"), ("snr_T_db", "dB"), ("b_adc_min", "bits"),
        ("mc_snr_T_db", "dB"), ("status", ""),
    ]
    rows = []
    for i, (value, bits, cfg) in enumerate(rows_cfg):
        pre = analytical_snr(cfg)
        b_min = adc_min_bits(cfg, pre.snr_A_db)
        rep = analytical_snr(cfg, bits)
        mc_T = float("nan")
        if spec.mc_enabled:
            plan = TrialPlan(
                cfg, n_dies=spec.n_dies, vectors_per_die=spec.vectors_per_die,
                seed=spec.seed + i, b_adc=bits,
            )
            mc_T = run_trials(plan).snr_T_db
        rows.append([
            cfg.kind.value, knob, value, bits, rep.snr_A_db, rep.snr_T_db,
            b_min, mc_T, "ok",
        ])
    return ResultTable(cols, rows, _metadata(spec))


# --- converter energy and technology-scaling presets ----------------------


def _full_scale_range(cfg: ArchitectureConfig) -> float:
    """Full-range converter span used by the bit-growth rule, volts."""
    t = cfg.tech
    if cfg.kind is ArchKind.QS_ARCH:
        return min(min(cfg.k_h, float(cfg.n)) * cfg.dvbl_unit, t.vdd)
    if cfg.kind is ArchKind.QR_ARCH:
        return t.vdd
    return min(2.0 ** (cfg.bw - 1) * cfg.dvbl_unit, t.vdd)


def _run_fig10(spec: SweepSpec) -> ResultTable:
    arch_setups = [
        (ArchKind.QS_ARCH, dict(bx=6, bw=6, v_wl=0.7)),
        (ArchKind.QR_ARCH, dict(bx=6, bw=6, c_o=3e-15)),
        (ArchKind.CM, dict(bx=6, bw=6, v_wl=0.8)),
    ]
    cols = [
        ("arch", ""), ("rule", ""), ("n", ""), ("b_adc", "bits"),
        ("v_c", "V"), ("e_adc", "J"), ("status", ""),
    ]
    rows = []
    for kind, kw in arch_setups:
        for n in _grid_or(spec, "n", [16, 32, 64, 128, 256, 512, 1024]):
            cfg = _arch_base(
                spec, kind, n=int(n), adc_k1=_NOISE_LIMITED_K1, **kw
            )
            pre = analytical_snr(cfg)
            for rule in ("BGC", "MPC"):
                if rule == "BGC":
                    bits = bgc_bits(cfg.bx, cfg.bw, cfg.n)
                    v_c = _full_scale_range(cfg)
                else:
                    bits = adc_min_bits(cfg, pre.snr_A_db)
                    v_c = min(adc_input_range(cfg), cfg.tech.vdd)
                e = adc_energy(AdcModel(cfg.adc_k1, cfg.adc_k2, bits, v_c, cfg.tech.vdd))
                rows.append([kind.value, rule, int(n), bits, v_c, e, "ok"])
    return ResultTable(cols, rows, _metadata(spec))


_FIG11_NODES = ["cmos65nm", "fdsoi22nm", "fdsoi11nm", "fdsoi7nm"]


def _fig11_knobs(kind: ArchKind, tech: TechnologyProfile, grid: dict) -> list[tuple[str, float]]:
    """Knob sweep spanning the architecture's useful operating region.

    Wordline voltages run from weak inversion margin up to 0.4 V of
    overdrive (capped by the supply); below that span the converter range
    collapses and energy no longer trades against SNR.  The capacitor knob
    covers the practical MOM range where capacitor mismatch, not charge
    injection, dominates.
    """
    if kind is ArchKind.QR_ARCH:
        caps = grid.get("c_o", list(np.geomspace(3e-15, 10e-15, 6)))
        return [("c_o", float(c)) for c in caps]
    lo = tech.vt + 0.15
    hi = min(tech.vdd, tech.vt + 0.4)
    volts = grid.get("v_wl", list(np.linspace(lo, hi, 6)))
    return [("v_wl", float(v)) for v in volts]


def _run_fig11(spec: SweepSpec) -> ResultTable:
    nodes = _grid_or(spec, "node", _FIG11_NODES)
    cols = [
        ("arch", ""), ("node", ""), ("knob", ""), ("knob_value", ""),
        ("b_adc", "bits"), ("snr_a_db", "dB"), ("snr_A_db", "dB"),
        ("energy", "J"), ("status", ""),
    ]
    rows = []
    for kind in (ArchKind.QS_ARCH, ArchKind.QR_ARCH, ArchKind.CM):
        for node in nodes:
            tech = builtin_profile(node)
            for knob, value in _fig11_knobs(kind, tech, spec.grid):
                cfg = ArchitectureConfig(
                    kind=kind, n=100, bx=6, bw=6, tech=tech,
                    dp=DotProductSpec.unit_uniform(100),
                    adc_k1=_NOISE_LIMITED_K1, **{knob: value},
                )
                try:
                    pre = analytical_snr(cfg)
                    bits = adc_min_bits(cfg, pre.snr_A_db)
                    energy = dp_energy(cfg, bits)
                    rows.append([
                        kind.value, node, knob, value, bits,
                        pre.snr_a_db, pre.snr_A_db, energy, "ok",
                    ])
                except ValueError as exc:
                    rows.append([
                        kind.value, node, knob, value, 0,
                        float("nan"), float("nan"), float("nan"), f"error:{exc}",
                    ])
    return ResultTable(cols, rows, _metadata(spec))


def _run_custom(spec: SweepSpec) -> ResultTable:
    from .mc import TrialPlan, run_trials

    if spec.base_arch is None:
        raise ValueError("custom sweep needs an architecture section")
    names = sorted(spec.grid)
    for name in names:
        if not hasattr(spec.base_arch, name):
            raise ValueError(f"unknown sweep parameter {name!r}")
    cols = (
        [(n, "") for n in names]
        + [
            ("b_adc", "bits"), ("snr_a_db", "dB"), ("snr_A_db", "dB"),
            ("snr_T_db", "dB"), ("energy", "J"), ("mc_snr_A_db", "dB"),
            ("status", ""),
        ]
    )
    combos: list[list] = [[]]
    for name in names:
        combos = [c + [v] for c in combos for v in spec.grid[name]]
    rows = []
    for i, combo in enumerate(combos):
        kw = dict(zip(names, combo))
        if "n" in kw:
            kw["dp"] = DotProductSpec.unit_uniform(int(kw["n"]))
        try:
            cfg = spec.base_arch.with_knob(**kw)
            pre = analytical_snr(cfg)
            bits = adc_min_bits(cfg, pre.snr_A_db)
            rep = analytical_snr(cfg, bits)
            energy = dp_energy(cfg, bits)
            mc_A = float("nan")
            if spec.mc_enabled:
                plan = TrialPlan(
                    cfg, n_dies=spec.n_dies, vectors_per_die=spec.vectors_per_die,
                    seed=spec.seed + i, b_adc=bits,
                )
                mc_A = run_trials(plan).snr_A_db
            rows.append(
                combo + [bits, rep.snr_a_db, rep.snr_A_db, rep.snr_T_db,
                         energy, mc_A, "ok"]
            )
        except ValueError as exc:
            rows.append(
                combo + [0, float("nan"), float("nan"), float("nan"),
                         float("nan"), float("nan"), f"error:{exc}"]
            )
    return ResultTable(cols, rows, _metadata(spec))


EXPERIMENTS = {
    "fig4a": _run_fig4a,
    "fig4b": _run_fig4b,
    "fig7a": _run_fig7a,
    "fig7b": _run_fig7b,
    "fig8a": _run_fig8a,
    "fig8b": _run_fig8b,
    "fig9a": _run_fig9a,
    "fig9b": _run_fig9b,
    "fig10": _run_fig10,
    "fig11": _run_fig11,
    "custom": _run_custom,
}


def run_experiment(spec: SweepSpec) -> ResultTable:
    """Evaluate one named experiment; deterministic for a given seed."""
    return EXPERIMENTS[spec.experiment](spec)
