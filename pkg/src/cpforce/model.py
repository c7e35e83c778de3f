"""Domain types, physical constants and the dimensionless parameterization.

Everything downstream works in units where lengths are measured in the
transition wavelength ``lambda0 = c / omega0`` and frequencies in ``omega0``.
Energies come out as multiples of :class:`ShiftUnit`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import constants as _const

HBAR = _const.hbar
C_LIGHT = _const.c
EPSILON_0 = _const.epsilon_0
K_BOLTZMANN = _const.k


class CPForceError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(CPForceError, ValueError):
    """An input violates a documented invariant."""


class DomainError(CPForceError, ValueError):
    """A function was called outside the domain where it is defined."""


class SingularityError(CPForceError, ArithmeticError):
    """A denominator vanished."""


class State(enum.Enum):
    GROUND = "ground"
    EXCITED = "excited"

    @property
    def sign(self) -> int:
        """Sign of the transition frequency: -1 for ground, +1 for excited."""
        return -1 if self is State.GROUND else 1

    @classmethod
    def parse(cls, value: "State | str") -> "State":
        if isinstance(value, State):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidInputError(f"unknown atomic state {value!r}") from None


def _finite_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise InvalidInputError(f"{name} must be finite and > 0, got {value!r}")
    return value


@dataclass(frozen=True)
class AtomSpec:
    """Isotropically polarizable two-level atom."""

    omega0: float
    alpha: float
    state: State = State.GROUND

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega0", _finite_positive("omega0", self.omega0))
        object.__setattr__(self, "alpha", _finite_positive("alpha", self.alpha))
        object.__setattr__(self, "state", State.parse(self.state))

    @classmethod
    def from_wavelength(cls, lambda0: float, alpha: float, state: State | str = State.GROUND) -> "AtomSpec":
        """Build from the reduced transition wavelength ``lambda0 = c / omega0``."""
        lambda0 = _finite_positive("lambda0", lambda0)
        return cls(C_LIGHT / lambda0, alpha, State.parse(state))

    @property
    def omega_ab(self) -> float:
        return self.state.sign * self.omega0

    @property
    def wavelength(self) -> float:
        """Reduced transition wavelength c / omega0 [m]."""
        return C_LIGHT / self.omega0

    def with_state(self, state: State | str) -> "AtomSpec":
        return AtomSpec(self.omega0, self.alpha, State.parse(state))


@dataclass(frozen=True)
class RealConstant:
    eps: float

    def __post_init__(self) -> None:
        eps = float(self.eps)
        if not math.isfinite(eps) or eps < 1.0:
            raise InvalidInputError(f"real permittivity must be finite and >= 1, got {eps!r}")
        object.__setattr__(self, "eps", eps)


@dataclass(frozen=True)
class ComplexPermittivity:
    eps_real: float
    eps_imag: float

    def __post_init__(self) -> None:
        re, im = float(self.eps_real), float(self.eps_imag)
        if not (math.isfinite(re) and math.isfinite(im)):
            raise InvalidInputError("complex permittivity must be finite")
        if im < 0.0:
            raise InvalidInputError(f"imaginary part of permittivity must be >= 0, got {im!r}")
        object.__setattr__(self, "eps_real", re)
        object.__setattr__(self, "eps_imag", im)

    @property
    def eps(self) -> complex:
        return complex(self.eps_real, self.eps_imag)


@dataclass(frozen=True)
class PerfectConductor:
    """The symbolic infinite-permittivity limit."""


MediumSpec = Union[RealConstant, ComplexPermittivity, PerfectConductor]


def parse_medium(value: "MediumSpec | str | float") -> MediumSpec:
    """Accept a medium object, a number, or the word ``conductor``."""
    if isinstance(value, (RealConstant, ComplexPermittivity, PerfectConductor)):
        return value
    if isinstance(value, str):
        text = value.strip().lower()
        if text in {"conductor", "perfect_conductor", "pec", "inf"}:
            return PerfectConductor()
        try:
            number = complex(text.replace("i", "j"))
        except ValueError:
            raise InvalidInputError(f"cannot parse permittivity {value!r}") from None
        value = number
    if isinstance(value, complex):
        if value.imag == 0.0:
            return RealConstant(value.real)
        return ComplexPermittivity(value.real, value.imag)
    return RealConstant(float(value))


@dataclass(frozen=True)
class ThermalConfig:
    """Thermal wavelengths hbar*c/(k_B T) of substrate and environment [m].

    ``math.inf`` encodes zero temperature.
    """

    beta_s: float
    beta_e: float

    def __post_init__(self) -> None:
        for name in ("beta_s", "beta_e"):
            value = float(getattr(self, name))
            if math.isnan(value) or value <= 0.0:
                raise InvalidInputError(f"{name} must be > 0 (inf for T = 0), got {value!r}")
            object.__setattr__(self, name, value)

    @staticmethod
    def wavelength_from_temperature(temperature: float) -> float:
        temperature = float(temperature)
        if math.isnan(temperature) or temperature < 0.0 or math.isinf(temperature):
            raise InvalidInputError(f"temperature must be finite and >= 0, got {temperature!r}")
        if temperature == 0.0:
            return math.inf
        return HBAR * C_LIGHT / (K_BOLTZMANN * temperature)

    @classmethod
    def from_temperatures(cls, t_s: float, t_e: float) -> "ThermalConfig":
        return cls(cls.wavelength_from_temperature(t_s), cls.wavelength_from_temperature(t_e))

    @classmethod
    def zero(cls) -> "ThermalConfig":
        return cls(math.inf, math.inf)

    @property
    def temperatures(self) -> tuple[float, float]:
        def temp(beta: float) -> float:
            return 0.0 if math.isinf(beta) else HBAR * C_LIGHT / (K_BOLTZMANN * beta)

        return temp(self.beta_s), temp(self.beta_e)

    def swapped(self) -> "ThermalConfig":
        return ThermalConfig(self.beta_e, self.beta_s)


@dataclass(frozen=True)
class Geometry:
    z: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "z", _finite_positive("z", self.z))


@dataclass(frozen=True)
class DimensionlessParams:
    """Distances and thermal wavelengths in units of lambda0.

    ``eps`` is ``math.inf`` for the perfect conductor.
    """

    zbar: float
    bs: float
    be: float
    eps: float | complex

    def _beta(self, which: str) -> float:
        if which == "s":
            return self.bs
        if which == "e":
            return self.be
        raise InvalidInputError(f"thermal reservoir must be 's' or 'e', got {which!r}")

    def b(self, which: str = "e") -> float:
        """2 z / beta."""
        return 2.0 * self.zbar / self._beta(which)

    def a(self, which: str = "e") -> float:
        """2 z sqrt(eps - 1) / beta."""
        root = _sqrt_eps_minus_one(self.eps)
        if root == 0.0:
            return 0.0
        return 2.0 * self.zbar * root / self._beta(which)

    def y0(self, which: str = "e") -> float:
        """beta / lambda0."""
        return self._beta(which)


def _sqrt_eps_minus_one(eps: float | complex) -> float:
    if isinstance(eps, complex):
        return abs(np.sqrt(eps - 1.0))
    if math.isinf(eps):
        return math.inf
    return math.sqrt(eps - 1.0)


def medium_eps(medium: MediumSpec) -> float | complex:
    if isinstance(medium, RealConstant):
        return medium.eps
    if isinstance(medium, ComplexPermittivity):
        return medium.eps
    return math.inf


def nondimensionalize(
    atom: AtomSpec, medium: MediumSpec, thermal: ThermalConfig, geom: Geometry
) -> DimensionlessParams:
    lam = atom.wavelength
    values = (geom.z / lam, thermal.beta_s / lam, thermal.beta_e / lam)
    if not all(math.isfinite(v) or math.isinf(v) for v in values) or not math.isfinite(values[0]):
        raise InvalidInputError("non-finite dimensionless parameter")
    return DimensionlessParams(values[0], values[1], values[2], medium_eps(medium))


@dataclass(frozen=True)
class ShiftUnit:
    """hbar/(4 pi eps0) * alpha * omega0 / lambda0**3, in joules."""

    scale: float

    @classmethod
    def for_atom(cls, atom: AtomSpec) -> "ShiftUnit":
        lam = atom.wavelength
        return cls(HBAR / (4.0 * math.pi * EPSILON_0) * atom.alpha * atom.omega0 / lam**3)

    def to_si(self, value: float) -> float:
        return value * self.scale

    def from_si(self, energy: float) -> float:
        return energy / self.scale

    def force_scale(self, atom: AtomSpec) -> float:
        """Newtons per (ShiftUnit per lambda0)."""
        return self.scale / atom.wavelength


@dataclass(frozen=True)
class PartValue:
    """One additive contribution with its absolute error estimate."""

    value: float
    abs_err: float = 0.0
    status: str = "ok"

    def scaled(self, factor: float) -> "PartValue":
        return PartValue(self.value * factor, abs(self.abs_err * factor), self.status)


@dataclass(frozen=True)
class ShiftBreakdown:
    """Energy shift split into vacuum, equilibrium and non-equilibrium parts [J]."""

    vac: PartValue
    eq: PartValue
    neq: PartValue
    unit: ShiftUnit

    @property
    def total(self) -> float:
        return self.vac.value + self.eq.value + self.neq.value

    @property
    def total_err(self) -> float:
        return self.vac.abs_err + self.eq.abs_err + self.neq.abs_err

    @property
    def status(self) -> str:
        bad = [p.status for p in (self.vac, self.eq, self.neq) if p.status != "ok"]
        return bad[0] if bad else "ok"

    def in_units(self) -> dict[str, float]:
        u = self.unit.scale
        return {
            "vac": self.vac.value / u,
            "eq": self.eq.value / u,
            "neq": self.neq.value / u,
            "total": self.total / u,
        }


def bose(y: np.ndarray | float) -> np.ndarray:
    """Occupation number 1/(e^y - 1); zero for y = inf."""
    y = np.asarray(y, dtype=float)
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(y)
