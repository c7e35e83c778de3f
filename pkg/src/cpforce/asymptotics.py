"""Closed-form asymptotic blocks, their coefficient functions and the regime classifier.

All blocks are written in the dimensionless variables of :mod:`cpforce.engine`
(``zbar = z/lambda0``, ``bs``/``be`` thermal wavelengths over lambda0, values
in :class:`~cpforce.model.ShiftUnit`). Each part is a short sum of power and
oscillatory terms, so the force blocks are differentiated term by term.

Thermal blocks valid at distances well inside the thermal wavelength
(``2z << beta``) are expansions about zbar = 0 with the constant, distance
independent, term dropped. Callers comparing them against full numerics add
:func:`cpforce.engine.equilibrium_contact_term` and
:func:`cpforce.engine.nonequilibrium_contact_term`; the flag
``AsymptoticValue.omits_contact_constant`` says when that is needed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .kernels import Kernel, Polarization, a_kernel, kernel_endpoints, subtracted_moment, t_kernel
from .model import (
    AtomSpec,
    DomainError,
    Geometry,
    InvalidInputError,
    MediumSpec,
    PerfectConductor,
    RealConstant,
    ShiftUnit,
    State,
    ThermalConfig,
    parse_medium,
)
from .quadrature import integrate_adaptive

ZETA3 = 1.2020569031595942854
ZETA5 = 1.0369277551433699263
DEFAULT_MARGIN = 10.0
EPS_GUARD = 1.2


class CrossoverRefusal(DomainError):
    """No closed form applies; use the numerical engine instead."""


# --- coefficient functions -------------------------------------------------------

@dataclass(frozen=True)
class CoefficientValue:
    value: float
    abs_err: float = 0.0

    def __float__(self) -> float:
        return self.value


def _check_coeff_eps(eps: float) -> float:
    eps = float(eps)
    if math.isnan(eps) or math.isinf(eps):
        raise DomainError("coefficient functions need a finite permittivity; the conductor has its own blocks")
    if eps < 1.0:
        raise DomainError(f"eps must be >= 1, got {eps!r}")
    return eps


def _f2_integrand(eps: float):
    def f(t: np.ndarray) -> np.ndarray:
        root = np.sqrt(eps - 1.0 + t * t)
        first = (1.0 - eps) / (t + root) ** 2
        second = (1.0 - 2.0 * t * t) * ((eps * eps - 1.0) * t * t - (eps - 1.0)) / (eps * t + root) ** 2
        return t * t * (first + second)

    return f


def _f3_integrand(eps: float):
    def f(t: np.ndarray) -> np.ndarray:
        ratio = ((3.0 * eps * eps - 2.0 * eps - 1.0) * t * t + (eps + 1.0)) / ((eps * eps - 1.0) * t * t + 1.0)
        return t**3 * np.sqrt(np.clip(1.0 - t * t, 0.0, None)) * ratio

    return f


@lru_cache(maxsize=256)
def coeff_f(k: int, eps: float) -> CoefficientValue:
    """Coefficient function f_k(eps), k = 1..7.

    f2 and f3 are integrals and come with a quadrature error estimate. At
    eps = 1 the closed forms are evaluated directly (f5(1) = 2); only f7, which
    has a pole there, raises.
    """
    eps = _check_coeff_eps(eps)
    if k == 1:
        return CoefficientValue(math.pi * (eps - 1.0) * (3 * eps**3 + 11 * eps**2 + eps + 1) / (16.0 * (eps + 1.0) ** 3))
    if k == 2:
        res = integrate_adaptive(_f2_integrand(eps), 0.0, 1.0, 1e-15, 1e-13)
        return CoefficientValue(res.value, res.abs_err)
    if k == 3:
        # t = sin(u) removes the square-root end point at t = 1
        def g(u: np.ndarray) -> np.ndarray:
            return _f3_integrand(eps)(np.sin(u)) * np.cos(u)

        res = integrate_adaptive(g, 0.0, 0.5 * math.pi, 1e-15, 1e-13)
        scale = 2.0 * (eps - 1.0) ** 1.5
        return CoefficientValue(scale * res.value, scale * res.abs_err)
    if k == 4:
        return CoefficientValue((3 * eps + 1) * (eps - 1) / (eps + 1) ** 2)
    if k == 5:
        return CoefficientValue(((5 * eps + 2) * eps + 1) / (eps + 1) ** 2)
    if k == 6:
        se = math.sqrt(eps)
        return CoefficientValue((se - 1.0) / (se + 1.0))
    if k == 7:
        if eps == 1.0:
            raise DomainError("f7 has a pole at eps = 1")
        return CoefficientValue((eps**3 - eps**2 + 3 * eps + 1) / (eps**2 - 1))
    raise InvalidInputError(f"coefficient index must be 1..7, got {k!r}")


_G_SERIES_EPS = 1e3


def _coeff_g_large(eps: float) -> float:
    """Expansion of g in x = 1/sqrt(eps); the closed form cancels O(eps^2) terms here."""
    x = 1.0 / math.sqrt(eps)
    lg = math.log(2.0 / x)
    return (
        -6.0 + 7.5 * x - 44.0 / 5.0 * x**2 + x**3 * (9.0 * lg + 17.0 / 4.0) - 516.0 / 35.0 * x**4
        + x**5 * (33.0 / 4.0 * lg + 5.0) - 1004.0 / 105.0 * x**6 + x**7 * (27.0 / 2.0 * lg + 279.0 / 160.0)
        - 3284.0 / 231.0 * x**8
    )


def coeff_g(eps: float) -> float:
    """Long-distance vacuum coefficient g(eps) = 2 g_par + g_perp, closed form.

    ``math.inf`` (perfect conductor) returns -6 exactly.
    """
    eps = float(eps)
    if math.isinf(eps) and eps > 0:
        return -6.0
    if not eps > 1.0:
        raise DomainError(f"g(eps) needs eps > 1, got {eps!r}")
    if eps >= _G_SERIES_EPS:
        return _coeff_g_large(eps)
    se = math.sqrt(eps)
    rm = math.sqrt(eps - 1.0)
    rp = math.sqrt(eps + 1.0)
    rational = (-6 * eps**2 + 3 * eps**1.5 + 4 * eps + 3 * se - 10) / (eps - 1.0)
    log1 = 3 * (2 * eps**3 - 4 * eps**2 + 3 * eps + 1) / (eps - 1.0) ** 1.5 * math.log(se + rm)
    log2 = 6 * eps**2 / rp * math.log((1.0 + rp) / (eps + math.sqrt(eps * (eps + 1.0))))
    return rational + log1 + log2


def coeff_g_sigma_numeric(sigma: Polarization, eps: float) -> CoefficientValue:
    """g_sigma(eps) assembled from kernel end-point derivatives and a subtracted t-integral.

    Independent of :func:`coeff_g`: nothing here uses the closed form.
    """
    if not eps > 1.0 or math.isinf(eps):
        raise DomainError(f"numeric g_sigma needs finite eps > 1, got {eps!r}")
    sigma = Polarization(sigma)
    T, A = t_kernel(sigma, eps), a_kernel(sigma, eps)
    d = kernel_endpoints(eps)[sigma]
    em1 = eps - 1.0
    combo = Kernel.combine([(1.0, T), (1.0 / em1**2, A)], "T + A/(eps-1)^2")
    moment = subtracted_moment(combo, 3, 4)
    value = (
        2.0 * d.T0 + 3.0 * d.dT0 + 3.0 * d.d2T0
        + (3.0 * d.dA0 - d.d3A0 * math.log(math.sqrt(em1))) / em1**2
        - 6.0 * moment.value
    )
    return CoefficientValue(value, 6.0 * moment.abs_err + 1e-13 * abs(value))


def coeff_g_numeric(eps: float) -> CoefficientValue:
    parts = [coeff_g_sigma_numeric(p, eps) for p in Polarization]
    weights = [p.weight for p in Polarization]
    return CoefficientValue(
        sum(w * c.value for w, c in zip(weights, parts)), sum(w * c.abs_err for w, c in zip(weights, parts))
    )


# --- regimes --------------------------------------------------------------------

class Temperature(enum.Enum):
    LOW = "lowT"
    HIGH = "highT"
    CROSSOVER = "crossover"


class Distance(enum.Enum):
    SHORT = "short"
    INTERMEDIATE = "intermediate"
    LONG = "long"
    CROSSOVER = "crossover"


@dataclass(frozen=True)
class RegimeLabel:
    """Temperature and distance class plus the achieved ratio of each governing "<<" condition."""

    temperature: Temperature
    distance: Distance
    margins: dict[str, float] = field(default_factory=dict, compare=False)
    note: str = ""

    @property
    def is_crossover(self) -> bool:
        return self.temperature is Temperature.CROSSOVER or self.distance is Distance.CROSSOVER

    @property
    def name(self) -> str:
        if self.is_crossover:
            return "crossover"
        return f"{self.temperature.value}.{self.distance.value}"


def _ratio(small: float, large: float) -> float:
    if small == 0.0:
        return math.inf
    return large / small


def classify_dimensionless(zbar: float, bs: float, be: float, eps: float,
                           margin: float = DEFAULT_MARGIN) -> RegimeLabel:
    """Regime of (zbar, bs, be, eps); lengths in units of lambda0.

    Distances are tested as the pair {2z, 2z sqrt(eps - 1)} (only 2z for the
    conductor, whose non-equilibrium part vanishes and whose blocks depend on
    beta_e alone). A condition holds when its ratio reaches ``margin``.
    """
    for name, v in (("zbar", zbar), ("bs", bs), ("be", be)):
        if math.isnan(v) or v <= 0.0:
            raise InvalidInputError(f"{name} must be > 0, got {v!r}")
    if not math.isfinite(zbar):
        raise InvalidInputError("zbar must be finite")
    if not margin > 1.0:
        raise InvalidInputError(f"margin must exceed 1, got {margin!r}")
    conductor = math.isinf(eps)
    if not conductor and not eps > 1.0:
        raise DomainError(f"asymptotic regimes need eps > 1, got {eps!r}")
    two_z = 2.0 * zbar
    dist_lo = two_z if conductor else min(two_z, two_z * math.sqrt(eps - 1.0))
    dist_hi = two_z if conductor else max(two_z, two_z * math.sqrt(eps - 1.0))
    betas = (be,) if conductor else (bs, be)
    beta_lo, beta_hi = min(betas), max(betas)

    ratios: dict[str, float] = {
        "lambda0<<beta": beta_lo,
        "beta<<lambda0": _ratio(beta_hi, 1.0),
        "dist<<lambda0": _ratio(dist_hi, 1.0),
        "lambda0<<dist": dist_lo,
        "dist<<beta": _ratio(dist_hi, beta_lo),
        "beta<<dist": _ratio(beta_hi, dist_lo),
    }
    ok = {name: value >= margin for name, value in ratios.items()}
    if ok["lambda0<<beta"]:
        temperature = Temperature.LOW
        options = [
            (Distance.SHORT, ("dist<<lambda0",)),
            (Distance.INTERMEDIATE, ("lambda0<<dist", "dist<<beta")),
            (Distance.LONG, ("beta<<dist",)),
        ]
    elif ok["beta<<lambda0"]:
        temperature = Temperature.HIGH
        options = [
            (Distance.SHORT, ("dist<<beta",)),
            (Distance.INTERMEDIATE, ("beta<<dist", "dist<<lambda0")),
            (Distance.LONG, ("lambda0<<dist",)),
        ]
    else:
        return RegimeLabel(Temperature.CROSSOVER, Distance.CROSSOVER, ratios,
                           "thermal wavelength not separated from the transition wavelength")
    t_key = "lambda0<<beta" if temperature is Temperature.LOW else "beta<<lambda0"
    for distance, keys in options:
        if all(ok[k] for k in keys):
            margins = {t_key: ratios[t_key], **{k: ratios[k] for k in keys}}
            break
    else:
        return RegimeLabel(temperature, Distance.CROSSOVER, ratios,
                           "distance not separated from the governing length scales")
    if (not conductor and temperature is Temperature.HIGH and distance in (Distance.INTERMEDIATE, Distance.LONG)
            and eps < EPS_GUARD):
        # the f5/f7 blocks assume 2z sqrt(eps-1) is well separated; that degenerates as eps -> 1
        return RegimeLabel(temperature, Distance.CROSSOVER, margins,
                           f"eps < {EPS_GUARD}: high-temperature f5/f7 blocks are not trusted this close to eps = 1")
    return RegimeLabel(temperature, distance, margins)


def classify_regime(atom: AtomSpec, geom: Geometry, thermal: ThermalConfig, eps,
                    margin: float = DEFAULT_MARGIN) -> RegimeLabel:
    eps = _block_eps(eps)
    lam = atom.wavelength
    return classify_dimensionless(geom.z / lam, thermal.beta_s / lam, thermal.beta_e / lam, eps, margin)


# --- term algebra ---------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    """coef * zbar**power * shape(2 zbar), shape one of 1, cos, sin."""

    coef: float
    power: float
    shape: str = "1"

    def value(self, zbar: float) -> float:
        base = self.coef * zbar**self.power
        if self.shape == "cos":
            return base * math.cos(2.0 * zbar)
        if self.shape == "sin":
            return base * math.sin(2.0 * zbar)
        return base

    def derivative(self, zbar: float) -> float:
        c, p = self.coef, self.power
        lead = c * p * zbar ** (p - 1.0) if p != 0 else 0.0
        if self.shape == "cos":
            return lead * math.cos(2.0 * zbar) - 2.0 * c * zbar**p * math.sin(2.0 * zbar)
        if self.shape == "sin":
            return lead * math.sin(2.0 * zbar) + 2.0 * c * zbar**p * math.cos(2.0 * zbar)
        return lead


def _sum(terms: list[Term], zbar: float, derivative: bool) -> float:
    if derivative:
        return sum(t.derivative(zbar) for t in terms)
    return sum(t.value(zbar) for t in terms)


def _inv(beta: float, n: int) -> float:
    return 0.0 if math.isinf(beta) else beta ** (-n)


# --- blocks ---------------------------------------------------------------------

@dataclass(frozen=True)
class _Block:
    formula_id: str
    vac: list[Term]
    eq: list[Term]
    neq: list[Term]
    omits_contact_constant: bool


def _vacuum_terms(distance: Distance, eps: float, s: int) -> list[Term]:
    conductor = math.isinf(eps)
    if distance is Distance.SHORT:
        ratio = 1.0 if conductor else (eps - 1.0) / (eps + 1.0)
        return [Term(-ratio / 8.0, -3)]
    g = coeff_g(eps)
    if s == -1:
        return [Term(g / (16.0 * math.pi), -4)]
    amp = -1.0 if conductor else (1.0 - math.sqrt(eps)) / (1.0 + math.sqrt(eps))
    return [Term(-amp / 2.0, -1, "cos"), Term(amp / 2.0, -2, "sin"), Term(-g / (16.0 * math.pi), -4)]


def _dielectric_block(temperature: Temperature, distance: Distance, bs: float, be: float, eps: float,
                      s: int) -> _Block:
    sign = -s  # +1 ground, -1 excited: every thermal block flips with the state
    f = lambda k: coeff_f(k, eps).value  # noqa: E731
    state = "ground" if s == -1 else "excited"
    fid = f"{temperature.value}.{distance.value}.{state}.dielectric"
    contact = False
    if temperature is Temperature.LOW:
        vac = _vacuum_terms(Distance.SHORT if distance is Distance.SHORT else Distance.LONG, eps, s)
        if distance in (Distance.SHORT, Distance.INTERMEDIATE):
            eq = [Term(sign * 96.0 * ZETA5 / math.pi * f(1) * _inv(be, 5), 1),
                  Term(sign * 16.0 * math.pi**5 / 63.0 * f(2) * _inv(be, 6), 2)]
            neq = [Term(sign * 96.0 * ZETA5 / math.pi * f(1) * (_inv(bs, 5) - _inv(be, 5)), 1)]
            contact = True
        else:
            eq = [Term(-sign * (eps - 1.0) / (eps + 1.0) / 4.0 * _inv(be, 1), -3)]
            neq = [Term(-sign * math.pi / 12.0 * (eps + 1.0) / math.sqrt(eps - 1.0) * (_inv(bs, 2) - _inv(be, 2)), -2)]
    else:
        if distance is Distance.SHORT:
            vac = _vacuum_terms(Distance.SHORT, eps, s)
            c1 = 8.0 * ZETA3 / math.pi * f(1)
            c2 = 2.0 * math.pi**3 / 15.0
            eq = [Term(-sign * c1 * _inv(be, 3), 1), Term(-sign * c2 * (f(2) - f(3)) * _inv(be, 4), 2)]
            neq = [Term(-sign * c1 * (_inv(bs, 3) - _inv(be, 3)), 1),
                   Term(sign * c2 * f(3) * (_inv(bs, 4) - _inv(be, 4)), 2)]
            contact = True
        elif distance is Distance.INTERMEDIATE:
            vac = _vacuum_terms(Distance.SHORT, eps, s)
            eq = [Term(sign * f(4) / 4.0 * _inv(be, 1), -1)]
            neq = [Term(sign * f(5) / 4.0 * (_inv(bs, 1) - _inv(be, 1)), -1)]
        else:
            vac = _vacuum_terms(Distance.LONG, eps, s)
            eq = [Term(-sign * f(6) / 2.0 * _inv(be, 1), -1, "cos")]
            neq = [Term(sign * f(7) / 4.0 * (_inv(bs, 1) - _inv(be, 1)), -3)]
    return _Block(fid, vac, eq, neq, contact)


def _conductor_block(temperature: Temperature, distance: Distance, be: float, s: int) -> _Block:
    sign = -s
    state = "ground" if s == -1 else "excited"
    fid = f"conductor.{temperature.value}.{distance.value}.{state}"
    contact = False
    if temperature is Temperature.LOW:
        if distance is Distance.SHORT:
            vac = [Term(-1.0 / 8.0, -3)]
        elif s == -1:
            vac = [Term(-3.0 / (8.0 * math.pi), -4)]
        else:
            # the printed excited-state block keeps the next oscillatory order
            vac = [Term(0.5, -1, "cos"), Term(-0.25, -3, "cos"), Term(-0.5, -2, "sin"), Term(3.0 / (8.0 * math.pi), -4)]
        if distance is Distance.LONG:
            eq = [Term(-sign / 4.0 * _inv(be, 1), -3)]
        else:
            eq = [Term(-sign * 32.0 * math.pi**5 / 315.0 * _inv(be, 6), 2)]
            contact = True
    else:
        if distance is Distance.LONG:
            vac = _vacuum_terms(Distance.LONG, math.inf, s)
            b = _inv(be, 1)
            eq = [Term(-sign * b / 2.0, -1, "cos"), Term(sign * b / 2.0, -2, "sin"), Term(-sign * b / 4.0, -3)]
        else:
            vac = [Term(-1.0 / 8.0, -3)]
            if distance is Distance.SHORT:
                eq = [Term(sign * 4.0 * math.pi**3 / 75.0 * _inv(be, 4), 2)]
                contact = True
            else:
                eq = [Term(sign / 2.0 * _inv(be, 1), 1)]
    return _Block(fid, vac, eq, [], contact)


@dataclass(frozen=True)
class AsymptoticValue:
    """Closed-form shift or force with its provenance.

    ``parts`` holds the vacuum, equilibrium and non-equilibrium pieces in the
    same units as ``value``.
    """

    value: float
    regime: RegimeLabel
    formula_id: str
    parts: dict[str, float] = field(default_factory=dict)
    omits_contact_constant: bool = False


FORMULA_IDS = tuple(
    [f"{t}.{d}.{st}.dielectric" for t in ("lowT", "highT") for d in ("short", "intermediate", "long")
     for st in ("ground", "excited")]
    + [f"conductor.{t}.{d}.{st}" for t in ("lowT", "highT") for d in ("short", "intermediate", "long")
       for st in ("ground", "excited")]
)


def _block_eps(medium) -> float:
    if isinstance(medium, (int, float)) and not isinstance(medium, bool):
        return float(medium)
    medium = parse_medium(medium)
    if isinstance(medium, PerfectConductor):
        return math.inf
    if isinstance(medium, RealConstant):
        return medium.eps
    raise InvalidInputError("closed forms exist for real permittivity or the perfect conductor only")


def asymptotic_dimensionless(zbar: float, bs: float, be: float, eps: float, s: int,
                             regime: RegimeLabel | None = None, derivative: bool = False,
                             margin: float = DEFAULT_MARGIN) -> AsymptoticValue:
    """Closed-form shift (or its zbar-derivative) in shift units.

    Raises :class:`CrossoverRefusal` when the regime is Crossover.
    """
    if s not in (-1, 1):
        raise InvalidInputError("state sign must be -1 or +1")
    if regime is None:
        regime = classify_dimensionless(zbar, bs, be, eps, margin)
    if regime.is_crossover:
        why = regime.note or "no scale separation"
        raise CrossoverRefusal(f"no closed form in the crossover regime ({why}); use the numerical engine")
    if math.isinf(eps):
        block = _conductor_block(regime.temperature, regime.distance, be, s)
    else:
        block = _dielectric_block(regime.temperature, regime.distance, bs, be, eps, s)
    parts = {name: _sum(getattr(block, name), zbar, derivative) for name in ("vac", "eq", "neq")}
    return AsymptoticValue(sum(parts.values()), regime, block.formula_id, parts, block.omits_contact_constant)


def _si_inputs(atom: AtomSpec, medium, geom: Geometry, thermal: ThermalConfig):
    eps = _block_eps(medium)
    lam = atom.wavelength
    return geom.z / lam, thermal.beta_s / lam, thermal.beta_e / lam, eps, State.parse(atom.state).sign, lam


def _scaled(value: AsymptoticValue, factor: float) -> AsymptoticValue:
    return AsymptoticValue(value.value * factor, value.regime, value.formula_id,
                           {k: v * factor for k, v in value.parts.items()}, value.omits_contact_constant)


def asymptotic_shift(atom: AtomSpec, medium: MediumSpec | str | float, geom: Geometry, thermal: ThermalConfig,
                     regime: RegimeLabel | None = None, margin: float = DEFAULT_MARGIN) -> AsymptoticValue:
    """Closed-form boundary-dependent shift [J]."""
    zbar, bs, be, eps, s, _ = _si_inputs(atom, medium, geom, thermal)
    value = asymptotic_dimensionless(zbar, bs, be, eps, s, regime, margin=margin)
    return _scaled(value, ShiftUnit.for_atom(atom).scale)


def asymptotic_force(atom: AtomSpec, medium: MediumSpec | str | float, geom: Geometry, thermal: ThermalConfig,
                     regime: RegimeLabel | None = None, margin: float = DEFAULT_MARGIN) -> AsymptoticValue:
    """Closed-form force -d(shift)/dz [N], differentiated analytically."""
    zbar, bs, be, eps, s, lam = _si_inputs(atom, medium, geom, thermal)
    value = asymptotic_dimensionless(zbar, bs, be, eps, s, regime, derivative=True, margin=margin)
    return _scaled(value, -ShiftUnit.for_atom(atom).scale / lam)
