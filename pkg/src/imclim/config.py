"""Structured-text (JSON) configuration loading with strict validation.

A config file holds up to three sections::

    {
      "technology":   { ... TechnologyProfile fields ... },
      "architecture": { "kind": "QsArch", "n": 128, ... , "profile": "cmos65nm" },
      "sweep":        { "experiment": "fig7a", ... }
    }

Unknown keys are rejected with the offending key path.  ``load_config``
returns the most composite object present: a sweep spec if a sweep section
exists, else an architecture, else a bare technology profile.
"""

from __future__ import annotations

import json
from pathlib import Path

from .arch import ArchitectureConfig, ArchKind
from .snr import DotProductSpec
from .sweep import EXPERIMENTS, SweepSpec
from .tech import TechnologyProfile, builtin_profile

__all__ = ["load_config", "ConfigError", "architecture_from_dict"]

_TOP_KEYS = {"technology", "architecture", "sweep"}

_ARCH_KEYS = {
    "kind", "n", "bx", "bw", "v_wl", "c_bl", "c_o", "t_pulse",
    "e_su", "e_misc", "adc_k1", "adc_k2", "profile",
}

_SWEEP_KEYS = {
    "experiment", "grid", "mc_enabled", "n_dies", "vectors_per_die",
    "seed", "profile",
}


class ConfigError(ValueError):
    """Raised for malformed or schema-violating configuration files."""


def _reject_unknown(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def architecture_from_dict(
    section: dict, technology: TechnologyProfile | None = None
) -> ArchitectureConfig:
    _reject_unknown(section, _ARCH_KEYS, "architecture")
    data = dict(section)
    profile_name = data.pop("profile", None)
    if technology is None:
        technology = builtin_profile(profile_name or "cmos65nm")
    elif profile_name is not None:
        raise ConfigError(
            "architecture.profile conflicts with an inline technology section"
        )
    try:
        kind = ArchKind(data.pop("kind"))
    except KeyError:
        raise ConfigError("architecture.kind is required") from None
    except ValueError as exc:
        raise ConfigError(f"architecture.kind: {exc}") from None
    for required in ("n", "bx", "bw"):
        if required not in data:
            raise ConfigError(f"architecture.{required} is required")
    n = int(data.pop("n"))
    try:
        return ArchitectureConfig(
            kind=kind,
            n=n,
            bx=int(data.pop("bx")),
            bw=int(data.pop("bw")),
            tech=technology,
            dp=DotProductSpec.unit_uniform(n),
            **data,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"architecture: {exc}") from None


def _sweep_from_dict(section: dict) -> SweepSpec:
    _reject_unknown(section, _SWEEP_KEYS, "sweep")
    data = dict(section)
    experiment = data.pop("experiment", None)
    if experiment is None:
        raise ConfigError("sweep.experiment is required")
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"sweep.experiment must be one of {sorted(EXPERIMENTS)}, got {experiment!r}"
        )
    grid = data.pop("grid", {})
    if not isinstance(grid, dict) or any(
        not isinstance(v, list) for v in grid.values()
    ):
        raise ConfigError("sweep.grid must map parameter names to value lists")
    if experiment == "custom" and not grid:
        raise ConfigError("empty sweep: custom experiment requires a non-empty grid")
    try:
        return SweepSpec(experiment=experiment, grid=grid, **data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sweep: {exc}") from None


def load_config(path: str | Path):
    """Parse and validate a config file; returns the most composite object.

    Raises :class:`ConfigError` with key/line diagnostics for missing
    files, JSON syntax errors, unknown keys and invariant violations.
    """
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{p}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{p}: top level must be an object")
    _reject_unknown(raw, _TOP_KEYS, "top level")

    technology = None
    if "technology" in raw:
        try:
            technology = TechnologyProfile.from_dict(raw["technology"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"technology: {exc}") from None

    architecture = None
    if "architecture" in raw:
        architecture = architecture_from_dict(raw["architecture"], technology)

    if "sweep" in raw:
        spec = _sweep_from_dict(raw["sweep"])
        if architecture is not None:
            spec = spec.with_base(architecture)
        return spec
    if architecture is not None:
        return architecture
    if technology is not None:
        return technology
    raise ConfigError(f"{p}: no technology, architecture or sweep section found")
