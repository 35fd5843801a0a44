"""Physical inputs of the driven optomechanical cavity and the quantities derived from them.

All angular frequencies and rates are in rad/s. The laser is taken to be
resonant with the bare cavity when deriving the optical frequency, so the
cavity angular frequency is ``2*pi*c/lambda_laser``; the frequency pulling
factor ``d omega_c / dx`` is approximated as ``omega_c / cavity_length``.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from scipy import constants as _codata

from .errors import ValidationError

OMEGA_C_CONVENTION = "omega_c = omega_p = 2*pi*c/lambda_laser; d(omega_c)/dx = omega_c/cavity_length"


@dataclass(frozen=True)
class Constants:
    """CODATA values used throughout (SI)."""

    hbar: float = _codata.hbar
    kB: float = _codata.k
    c: float = _codata.c


CONSTANTS = Constants()


@dataclass(frozen=True)
class PhysicalParams:
    """Raw experimental inputs.

    Defaults reproduce the reference operating point: a 1 MHz, 5 ng
    oscillator with a 260 Hz linewidth, driven at 1064 nm by a 1 mW laser
    into a cavity with amplitude decay rate 6*pi*1e6 rad/s.
    """

    omega_m: float = 2 * math.pi * 1e6
    gamma_m: float = 2 * math.pi * 260.0
    mass: float = 5e-12
    lambda_laser: float = 1064e-9
    kappa: float = 6 * math.pi * 1e6
    power: float = 1e-3
    cavity_length: float = 25e-3
    g2: float = 0.0
    detuning0: float = 2 * math.pi * 1e6
    bath_temperature: float = 300.0
    photon_occupation: float = 0.0
    constants: Constants = field(default=CONSTANTS, repr=False, compare=False)

    def __post_init__(self):
        for name in dataclasses.fields(self):
            if name.name == "constants":
                continue
            value = getattr(self, name.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(name.name, f"expected a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValidationError(name.name, f"must be finite, got {value!r}")
            object.__setattr__(self, name.name, float(value))
        for name in ("omega_m", "mass", "lambda_laser", "kappa", "cavity_length"):
            if getattr(self, name) <= 0:
                raise ValidationError(name, f"must be > 0, got {getattr(self, name)!r}")
        for name in ("gamma_m", "power", "bath_temperature", "photon_occupation"):
            if getattr(self, name) < 0:
                raise ValidationError(name, f"must be >= 0, got {getattr(self, name)!r}")

    def replace(self, **changes) -> PhysicalParams:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name != "constants"}

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls) if f.name != "constants")

    @classmethod
    def from_dict(cls, data: dict) -> PhysicalParams:
        """Build from a mapping of SI values; unknown keys are rejected."""
        if not isinstance(data, dict):
            raise ValidationError("config", "expected a JSON object")
        unknown = sorted(set(data) - set(cls.field_names()))
        if unknown:
            raise ValidationError("config", f"unknown keys {unknown}")
        return cls(**data)

    @property
    def derived(self) -> DerivedParams:
        return derive_constants(self)


@dataclass(frozen=True)
class DerivedParams:
    omega_c: float
    omega_p: float
    x_zpf: float
    g_m: float
    epsilon_p: float


def derive_constants(raw: PhysicalParams) -> DerivedParams:
    """Optical frequency, zero-point amplitude, single-quantum coupling and drive amplitude.

    Parameters
    ----------
    raw : PhysicalParams

    Returns
    -------
    DerivedParams
        ``x_zpf = sqrt(hbar / (2 omega_m m))``, ``g_m = (omega_c / L) x_zpf``
        and ``epsilon_p = sqrt(P kappa / (2 hbar omega_p))``.
    """
    # PhysicalParams validates on construction, but a hand-built instance
    # via object.__new__ would skip that, so the positivity checks stay here.
    for name in ("mass", "omega_m", "lambda_laser", "cavity_length"):
        if not getattr(raw, name) > 0:
            raise ValidationError(name, f"must be > 0, got {getattr(raw, name)!r}")
    k = raw.constants
    omega_c = 2 * math.pi * k.c / raw.lambda_laser
    omega_p = omega_c
    x_zpf = math.sqrt(k.hbar / (2 * raw.omega_m * raw.mass))
    g_m = omega_c / raw.cavity_length * x_zpf
    epsilon_p = math.sqrt(raw.power * raw.kappa / (2 * k.hbar * omega_p))
    return DerivedParams(omega_c=omega_c, omega_p=omega_p, x_zpf=x_zpf, g_m=g_m, epsilon_p=epsilon_p)


def load_config(path) -> PhysicalParams:
    """Read a JSON config file.

    Two layouts are accepted: a flat object whose keys are PhysicalParams
    field names, or the metadata envelope written by the CLI
    (``{"params": {...}, "meta": {...}}``, optionally on a ``#``-prefixed
    line) so that any output header can be fed back as a config.
    """
    text = Path(path).read_text()
    stripped = text.strip()
    if stripped.startswith("#"):
        stripped = stripped.splitlines()[0].lstrip("#").strip()
    try:
        data = json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise ValidationError("config", f"invalid JSON in {path}: {exc}") from None
    if isinstance(data, dict) and set(data) <= {"params", "meta"} and "params" in data:
        data = data["params"]
    return PhysicalParams.from_dict(data)
