"""Device and circuit parameters for one process node.

All values are SI (volts, seconds, farads, amps).  The bundled
``cmos65nm`` profile carries measured 65 nm values; the scaled-node
profiles (22/11/7 nm) are illustrative projections whose scaling
assumptions are documented in the profile files themselves.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from importlib import resources

__all__ = ["TechnologyProfile", "builtin_profile", "builtin_profile_names"]

_FIELD_DOC = {
    "k_prime": "transconductance parameter of the alpha-law cell current, A/V^alpha",
    "alpha": "alpha-law exponent",
    "sigma_vt": "threshold-voltage mismatch std, V",
    "sigma_t0": "unit-delay jitter std, s",
    "t0": "wordline driver unit delay, s",
    "vt": "access-transistor threshold voltage, V",
    "vdd": "supply voltage, V",
    "dvbl_max": "maximum bit-line discharge headroom, V",
    "gm": "access transistor transconductance, A/V",
    "wl_cox": "switch gate-oxide charge capacitance W*L*Cox, F",
    "kappa": "Pelgrom capacitor-matching coefficient, sqrt(F)",
    "inj_p": "charge-injection layout constant, dimensionless",
    "temperature": "operating temperature, K",
    "boltzmann": "Boltzmann constant, J/K",
}


@dataclass(frozen=True)
class TechnologyProfile:
    """Process parameters used by the charge-summing and charge-redistribution models."""

    name: str
    k_prime: float
    alpha: float
    sigma_vt: float
    sigma_t0: float
    t0: float
    vt: float
    vdd: float
    dvbl_max: float
    gm: float
    wl_cox: float
    kappa: float
    inj_p: float
    temperature: float = 300.0
    boltzmann: float = 1.38e-23

    def __post_init__(self) -> None:
        for field_name in _FIELD_DOC:
            value = getattr(self, field_name)
            if not value > 0.0:
                raise ValueError(f"{field_name} must be positive, got {value}")
        if not 1.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must be in (1, 2], got {self.alpha}")
        if self.dvbl_max > self.vdd:
            raise ValueError("dvbl_max cannot exceed vdd")

    @property
    def kt(self) -> float:
        return self.boltzmann * self.temperature

    def cell_current(self, v_wl: float) -> float:
        """Nominal cell current k' (V_WL - V_t)^alpha with unit aspect ratio."""
        if v_wl <= self.vt:
            raise ValueError(
                f"cell cutoff: v_wl={v_wl} V does not exceed vt={self.vt} V"
            )
        return self.k_prime * (v_wl - self.vt) ** self.alpha

    def to_dict(self) -> dict:
        return asdict(self)

    def content_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    @staticmethod
    def from_dict(data: dict) -> "TechnologyProfile":
        known = set(_FIELD_DOC) | {"name", "temperature", "boltzmann"}
        extra = {"comment", "scaling_notes"}
        unknown = set(data) - known - extra
        if unknown:
            raise ValueError(f"unknown technology keys: {sorted(unknown)}")
        kwargs = {k: v for k, v in data.items() if k in known}
        if "name" not in kwargs:
            raise ValueError("technology profile needs a name")
        return TechnologyProfile(**kwargs)


def builtin_profile_names() -> list[str]:
    files = resources.files("imclim.profiles")
    return sorted(p.name[: -len(".json")] for p in files.iterdir() if p.name.endswith(".json"))


def builtin_profile(name: str) -> TechnologyProfile:
    """Load a bundled profile by name (see ``builtin_profile_names``)."""
    try:
        text = resources.files("imclim.profiles").joinpath(f"{name}.json").read_text()
    except FileNotFoundError:
        raise KeyError(
            f"no bundled profile {name!r}; available: {builtin_profile_names()}"
        ) from None
    return TechnologyProfile.from_dict(json.loads(text))
