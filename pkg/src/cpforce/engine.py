"""Energy shift and Casimir-Polder force of a two-level atom near a half-space.

Internally everything is dimensionless: distances in units of
``lambda0 = c/omega0``, frequencies in units of ``omega0`` and energies in
units of :class:`~cpforce.model.ShiftUnit`. With ``x = omega/omega0``,
``q = 2 zbar``, ``k = q sqrt(eps - 1)`` and ``s = -1/+1`` for ground/excited,
the response summed over polarizations is::

    F(x) = int_0^1 [A(t) exp(-k x t) + T(t) cos(q x t)] dt

and the three parts of the shift are::

    vac = -(1/pi) int_0^inf x^3/(x - s) F(x) dx
    eq  =  (1/pi) PV int_0^inf w(x) n(be x) F(x) dx
    neq =  (1/pi) PV int_0^inf w(x) [n(bs x) - n(be x)] F_A(x) dx

with ``w(x) = -2 s x^3/(x^2 - 1)`` and n the Bose occupation. The vacuum
integral diverges at large x and is split as x^2 + s x + x/(x - s); the first
two moments have closed forms in terms of kernel endpoint data, and the last
one is reduced to a smooth t-integral by doing the x-integral analytically
(see :mod:`cpforce.special`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .kernels import (
    Kernel,
    KernelSet,
    cosine_transform,
    kernel_set,
    laplace_transform,
    sine_transform,
    subtracted_moment,
)
from .model import (
    AtomSpec,
    ComplexPermittivity,
    Geometry,
    InvalidInputError,
    MediumSpec,
    PartValue,
    PerfectConductor,
    RealConstant,
    ShiftBreakdown,
    ShiftUnit,
    State,
    ThermalConfig,
    bose,
    parse_medium,
)
from .quadrature import QuadResult, bose_cutoff, integrate_adaptive, integrate_pv
from .special import (
    cosine_resolvent_smooth,
    cosine_resolvent_smooth_log_derivative,
    laplace_resolvent,
    laplace_resolvent_log_derivative,
)

DEFAULT_TOL = 1e-10
MAX_HALF_PERIOD_POINTS = 50_000


@dataclass(frozen=True)
class EngineOptions:
    """Numerical settings shared by all parts.

    ``tol`` is the relative accuracy requested from every integral.
    ``include_g21`` adds the z-independent traveling-mode term to the
    non-equilibrium part; it is off by default and only there for completeness.
    """

    tol: float = DEFAULT_TOL
    include_g21: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.tol < 0.1:
            raise InvalidInputError(f"tolerance must lie in (0, 0.1), got {self.tol!r}")


def _real_eps(medium: MediumSpec | str | float) -> float:
    medium = parse_medium(medium)
    if isinstance(medium, PerfectConductor):
        return math.inf
    if isinstance(medium, ComplexPermittivity):
        raise InvalidInputError("energy shifts are defined for real permittivity or the perfect conductor only")
    assert isinstance(medium, RealConstant)
    return medium.eps


def _status(*results: QuadResult) -> str:
    bad = [r.message or "not converged" for r in results if not r.converged]
    return "ok" if not bad else "not converged: " + bad[0]


# --- vacuum part --------------------------------------------------------------

@lru_cache(maxsize=64)
def vacuum_moment_coefficients(eps: float) -> tuple[float, float]:
    """(G1, G2) with int x^2 F dx = -G1/(8 zbar^3) and int x F dx = G2/(4 zbar^2).

    Both frequency moments diverge; these are their values once oscillating
    boundary terms at infinite frequency are discarded. For a real dielectric
    G1 reduces to -pi (eps - 1)/(eps + 1).
    """
    ks = kernel_set(eps)
    T, A = ks.T, ks.A
    if ks.conductor:
        g1 = 0.5 * math.pi * T.derivative(0.0, 2)
        g2 = T(0.0) - subtracted_moment(T, 1, 2).value
        return float(g1), float(g2)
    r = ks.root
    dA0 = A.derivative(0.0, 1)
    g1 = 0.5 * math.pi * T.derivative(0.0, 2) + 2.0 / r**3 * (dA0 - subtracted_moment(A, 2, 3).value)
    combo = Kernel.combine([(1.0, T), (-1.0 / (eps - 1.0), A)], "T - A/(eps-1)")
    g2 = T(0.0) - subtracted_moment(combo, 1, 2).value + dA0 / (eps - 1.0) * math.log(r)
    return float(g1), float(g2)


def _geometric_points(scale: float, upper: float = 1.0) -> list[float]:
    pts = []
    x = scale
    while x < upper and len(pts) < 60:
        pts.append(x)
        x *= 2.0
    x = scale / 2.0
    while x > 1e-12 * upper and len(pts) < 120:
        pts.append(x)
        x /= 4.0
    return pts


def resolvent_integral(zbar: float, ks: KernelSet, s: int, tol: float, derivative: bool = False) -> QuadResult:
    """int_0^inf x/(x - s) F(x) dx, or its zbar-derivative.

    Doing the x-integral first leaves smooth t-integrals, an exact sine
    transform (excited state only) and half of the delta-function weight
    int_0^inf cos(q x t) dx = pi delta(q t) sitting at the end point t = 0.
    """
    q = 2.0 * zbar
    T, A = ks.T, ks.A
    total = QuadResult(0.0, 0.0, 0, True)
    if not A.zero:
        k = q * ks.root
        resolvent = laplace_resolvent_log_derivative if derivative else laplace_resolvent

        def a_part(t: np.ndarray) -> np.ndarray:
            return A(t) * resolvent(k * t, s)

        pts = _geometric_points(1.0 / k) + _geometric_points(A.rho)
        res = integrate_adaptive(a_part, 0.0, 1.0, tol * 1e-4 / max(k, 1.0), tol, pts)
        total = total + (res.scaled(1.0 / zbar) if derivative else res)
    if not T.zero:
        resolvent = cosine_resolvent_smooth_log_derivative if derivative else cosine_resolvent_smooth

        def t_part(t: np.ndarray) -> np.ndarray:
            return T(t) * resolvent(q * t, s)

        pts = _geometric_points(1.0 / q) + _geometric_points(min(T.rho, 1.0))
        res = integrate_adaptive(t_part, 0.0, 1.0, tol * 1e-4 / max(q, 1.0), tol, pts)
        total = total + (res.scaled(1.0 / zbar) if derivative else res)
        t0 = float(T(0.0))
        if derivative:
            extra = -math.pi * t0 / (2.0 * q * zbar)
            if s == 1:
                extra -= math.pi * 2.0 * float(cosine_transform(ks.T_times_t, q))
        else:
            extra = math.pi * t0 / (2.0 * q)
            if s == 1:
                extra -= math.pi * float(sine_transform(T, q))
        total = total + QuadResult(extra, 1e-15 * abs(extra), 0, True)
    return total


@dataclass(frozen=True)
class VacuumParts:
    """Vacuum shift split by frequency moment [J]."""

    vac1: PartValue
    vac2: PartValue
    vac3: PartValue

    @property
    def total(self) -> PartValue:
        parts = (self.vac1, self.vac2, self.vac3)
        bad = [p.status for p in parts if p.status != "ok"]
        return PartValue(sum(p.value for p in parts), sum(p.abs_err for p in parts), bad[0] if bad else "ok")


def vacuum_dimensionless(zbar: float, eps: float, s: int, tol: float = DEFAULT_TOL, derivative: bool = False):
    """(vac1, vac2, vac3) in shift units, or their zbar-derivatives."""
    if eps == 1.0:
        zero = PartValue(0.0)
        return zero, zero, zero
    g1, g2 = vacuum_moment_coefficients(eps)
    if derivative:
        v1 = -3.0 * g1 / (8.0 * math.pi * zbar**4)
        v2 = s * g2 / (2.0 * math.pi * zbar**3)
    else:
        v1 = g1 / (8.0 * math.pi * zbar**3)
        v2 = -s * g2 / (4.0 * math.pi * zbar**2)
    i3 = resolvent_integral(zbar, kernel_set(eps), s, tol, derivative)
    rel = 1e-13
    return (
        PartValue(v1, rel * abs(v1)),
        PartValue(v2, rel * abs(v2)),
        PartValue(-i3.value / math.pi, i3.abs_err / math.pi, _status(i3)),
    )


# --- thermal parts ------------------------------------------------------------

def _response(x: np.ndarray, zbar: float, ks: KernelSet, evanescent_only: bool, derivative: bool) -> np.ndarray:
    """F(x) (or F_A), or its zbar-derivative."""
    q = 2.0 * zbar
    out = np.zeros_like(x)
    if not ks.A.zero:
        k = q * ks.root
        if derivative:
            out -= (k * x / zbar) * laplace_transform(ks.A_times_t, k * x)
        else:
            out += laplace_transform(ks.A, k * x)
    if not evanescent_only and not ks.T.zero:
        if derivative:
            out -= (q * x / zbar) * sine_transform(ks.T_times_t, q * x)
        else:
            out += cosine_transform(ks.T, q * x)
    return out


def _thermal_quadrature(integrand, beta_min: float, q: float, tol: float, magnitude: float) -> QuadResult:
    ymax = bose_cutoff(tol)
    upper = ymax / beta_min
    pts = [y / beta_min for y in (1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0)]
    if q > 0.0:
        step = math.pi / q
        n = min(int(max(upper, 2.0) / step), MAX_HALF_PERIOD_POINTS)
        pts += list(step * np.arange(1, n + 1))
    abs_tol = tol * magnitude
    if upper < 0.5:
        return integrate_adaptive(integrand, 0.0, upper, abs_tol, tol, pts, max_intervals=200_000)
    upper = max(upper, 2.0)
    return integrate_pv(integrand, 0.0, upper, 1.0, abs_tol, tol, pts, radius=0.5, max_intervals=200_000)


def _bose_magnitude(beta: float) -> float:
    """Rough size of int x^3/(x^2 + 1) n(beta x) dx, used as an absolute error floor."""
    return min(math.pi**4 / (15.0 * beta**4), math.pi**2 / (6.0 * beta**2))


def equilibrium_dimensionless(
    zbar: float, be: float, eps: float, s: int, tol: float = DEFAULT_TOL, derivative: bool = False
) -> PartValue:
    """Equilibrium thermal part in shift units (or its zbar-derivative)."""
    if math.isinf(be) or eps == 1.0:
        return PartValue(0.0)
    ks = kernel_set(eps)

    def integrand(x: np.ndarray) -> np.ndarray:
        return x**3 / (x * x - 1.0) * bose(be * x) * _response(x, zbar, ks, False, derivative)

    f0 = abs(float(cosine_transform(ks.T, 0.0))) + abs(float(laplace_transform(ks.A, 0.0)))
    scale = f0 * (1.0 / zbar if derivative else 1.0)
    res = _thermal_quadrature(integrand, be, 2.0 * zbar, tol, scale * _bose_magnitude(be))
    factor = -2.0 * s / math.pi
    return PartValue(factor * res.value, abs(factor) * res.abs_err, _status(res))


@lru_cache(maxsize=256)
def bose_resonance_moment(beta: float, tol: float = DEFAULT_TOL) -> float:
    """PV int_0^inf x^3/(x^2 - 1) n(beta x) dx."""
    if math.isinf(beta):
        return 0.0

    def integrand(x: np.ndarray) -> np.ndarray:
        return x**3 / (x * x - 1.0) * bose(beta * x)

    return _thermal_quadrature(integrand, beta, 0.0, tol, _bose_magnitude(beta)).value


def response_at_contact(eps: float, evanescent_only: bool = False) -> float:
    """F(0) (or F_A(0)): the zbar -> 0 limit of the response at fixed frequency."""
    ks = kernel_set(eps)
    out = 0.0 if ks.A.zero else float(laplace_transform(ks.A, 0.0))
    if not evanescent_only and not ks.T.zero:
        out += float(cosine_transform(ks.T, 0.0))
    return out


def equilibrium_contact_term(be: float, eps: float, s: int, tol: float = DEFAULT_TOL) -> float:
    """zbar -> 0 limit of the equilibrium part, in shift units.

    Short-distance expansions in powers of zbar start with this constant;
    it does not contribute to the force.
    """
    if eps == 1.0:
        return 0.0
    return -2.0 * s / math.pi * bose_resonance_moment(be, tol) * response_at_contact(eps)


def nonequilibrium_contact_term(bs: float, be: float, eps: float, s: int, tol: float = DEFAULT_TOL) -> float:
    """zbar -> 0 limit of the non-equilibrium part (g21 excluded), in shift units."""
    if bs == be or eps == 1.0:
        return 0.0
    moment = bose_resonance_moment(bs, tol) - bose_resonance_moment(be, tol)
    return -2.0 * s / math.pi * moment * response_at_contact(eps, evanescent_only=True)


@lru_cache(maxsize=64)
def g21_coefficient(eps: float) -> float:
    """g21(omega) / (omega/c), a pure number for real eps."""
    from .green import g21
    from .model import C_LIGHT

    if math.isinf(eps):
        return 0.0
    return g21(C_LIGHT, eps) * 1.0


def nonequilibrium_dimensionless(
    zbar: float,
    bs: float,
    be: float,
    eps: float,
    s: int,
    tol: float = DEFAULT_TOL,
    derivative: bool = False,
    include_g21: bool = False,
) -> PartValue:
    """Non-equilibrium thermal part in shift units (or its zbar-derivative).

    The weight n(bs x) - n(be x) is formed pointwise, so equal temperatures
    give exactly zero and swapping them flips the sign exactly.
    """
    ks = kernel_set(eps)
    if bs == be or eps == 1.0 or (ks.A.zero and not include_g21):
        return PartValue(0.0)
    extra = 0.0 if (derivative or not include_g21) else 2.0 * math.pi * g21_coefficient(eps)

    def integrand(x: np.ndarray) -> np.ndarray:
        resp = _response(x, zbar, ks, True, derivative) + extra
        return x**3 / (x * x - 1.0) * (bose(bs * x) - bose(be * x)) * resp

    beta_min = min(bs, be)
    f0 = abs(float(laplace_transform(ks.A, 0.0))) + abs(extra)
    scale = f0 * (1.0 / zbar if derivative else 1.0)
    res = _thermal_quadrature(integrand, beta_min, 0.0, tol, scale * _bose_magnitude(beta_min))
    factor = -2.0 * s / math.pi
    return PartValue(factor * res.value, abs(factor) * res.abs_err, _status(res))


# --- public SI API ------------------------------------------------------------

@dataclass(frozen=True)
class _Setup:
    zbar: float
    bs: float
    be: float
    eps: float
    s: int
    unit: ShiftUnit
    wavelength: float


def _setup(atom: AtomSpec, medium, geom: Geometry, thermal: ThermalConfig | None = None) -> _Setup:
    eps = _real_eps(medium)
    lam = atom.wavelength
    thermal = thermal or ThermalConfig.zero()
    return _Setup(geom.z / lam, thermal.beta_s / lam, thermal.beta_e / lam, eps, atom.state.sign,
                  ShiftUnit.for_atom(atom), lam)


def shift_vac(atom: AtomSpec, medium, geom: Geometry, options: EngineOptions = EngineOptions()) -> VacuumParts:
    p = _setup(atom, medium, geom)
    parts = vacuum_dimensionless(p.zbar, p.eps, p.s, options.tol)
    u = p.unit.scale
    return VacuumParts(*(part.scaled(u) for part in parts))


def shift_eq(atom: AtomSpec, medium, geom: Geometry, thermal: ThermalConfig,
             options: EngineOptions = EngineOptions()) -> PartValue:
    p = _setup(atom, medium, geom, thermal)
    return equilibrium_dimensionless(p.zbar, p.be, p.eps, p.s, options.tol).scaled(p.unit.scale)


def shift_neq(atom: AtomSpec, medium, geom: Geometry, thermal: ThermalConfig,
              options: EngineOptions = EngineOptions()) -> PartValue:
    p = _setup(atom, medium, geom, thermal)
    part = nonequilibrium_dimensionless(p.zbar, p.bs, p.be, p.eps, p.s, options.tol,
                                        include_g21=options.include_g21)
    return part.scaled(p.unit.scale)


def total_shift(atom: AtomSpec, medium, geom: Geometry, thermal: ThermalConfig,
                options: EngineOptions = EngineOptions()) -> ShiftBreakdown:
    vac = shift_vac(atom, medium, geom, options).total
    eq = shift_eq(atom, medium, geom, thermal, options)
    neq = shift_neq(atom, medium, geom, thermal, options)
    return ShiftBreakdown(vac, eq, neq, ShiftUnit.for_atom(atom))


def shift_dimensionless(zbar: float, bs: float, be: float, eps: float, s: int,
                        options: EngineOptions = EngineOptions()) -> dict[str, PartValue]:
    """All parts in shift units; the workhorse behind sweeps and checks."""
    v1, v2, v3 = vacuum_dimensionless(zbar, eps, s, options.tol)
    vac = PartValue(v1.value + v2.value + v3.value, v1.abs_err + v2.abs_err + v3.abs_err, v3.status)
    return {
        "vac": vac,
        "eq": equilibrium_dimensionless(zbar, be, eps, s, options.tol),
        "neq": nonequilibrium_dimensionless(zbar, bs, be, eps, s, options.tol, include_g21=options.include_g21),
    }


class ForceMethod(enum.Enum):
    DIFFERENTIATE_UNDER_INTEGRAL = "differentiate_under_integral"
    CENTRAL_DIFFERENCE = "central_difference"


@dataclass(frozen=True)
class ForceBreakdown:
    """Force -dE/dz split like the shift [N]; positive values push away from the surface."""

    vac: PartValue
    eq: PartValue
    neq: PartValue
    method: ForceMethod
    status: str = "ok"
    cross_check: float | None = field(default=None)

    @property
    def total(self) -> float:
        return self.vac.value + self.eq.value + self.neq.value

    @property
    def total_err(self) -> float:
        return self.vac.abs_err + self.eq.abs_err + self.neq.abs_err


def force_dimensionless(zbar: float, bs: float, be: float, eps: float, s: int,
                        options: EngineOptions = EngineOptions()) -> dict[str, PartValue]:
    """-d/dzbar of every part, in shift units per lambda0."""
    v1, v2, v3 = vacuum_dimensionless(zbar, eps, s, options.tol, derivative=True)
    vac = PartValue(-(v1.value + v2.value + v3.value), v1.abs_err + v2.abs_err + v3.abs_err, v3.status)
    eq = equilibrium_dimensionless(zbar, be, eps, s, options.tol, derivative=True)
    neq = nonequilibrium_dimensionless(zbar, bs, be, eps, s, options.tol, derivative=True)
    return {"vac": vac, "eq": eq.scaled(-1.0), "neq": neq.scaled(-1.0)}


def central_difference_step(zbar: float, bs: float, be: float) -> float:
    """Step resolving the shortest z-scale: zbar itself, the resonance and thermal wavelengths."""
    return 1e-3 * min(zbar, 1.0, bs, be)


def force_central_difference_dimensionless(zbar: float, bs: float, be: float, eps: float, s: int,
                                           options: EngineOptions = EngineOptions()) -> dict[str, PartValue]:
    """Five-point central difference of the shift, part by part."""
    h = central_difference_step(zbar, bs, be)
    weights = {-2: 1.0, -1: -8.0, 1: 8.0, 2: -1.0}
    acc = {"vac": [0.0, 0.0], "eq": [0.0, 0.0], "neq": [0.0, 0.0]}
    status = "ok"
    for j, w in weights.items():
        parts = shift_dimensionless(zbar + j * h, bs, be, eps, s, options)
        for name, part in parts.items():
            acc[name][0] += w * part.value
            acc[name][1] += abs(w) * part.abs_err
            if part.status != "ok":
                status = part.status
    return {name: PartValue(-v / (12.0 * h), e / (12.0 * h), status) for name, (v, e) in acc.items()}


def force(atom: AtomSpec, medium, geom: Geometry, thermal: ThermalConfig,
          options: EngineOptions = EngineOptions(),
          method: ForceMethod = ForceMethod.DIFFERENTIATE_UNDER_INTEGRAL,
          cross_check: bool = False) -> ForceBreakdown:
    """Casimir-Polder force -d(shift)/dz.

    With ``cross_check`` the other method is run as well; if the totals differ
    by more than 1e-3 relative the status says so.
    """
    p = _setup(atom, medium, geom, thermal)
    method = ForceMethod(method)
    runners = {
        ForceMethod.DIFFERENTIATE_UNDER_INTEGRAL: force_dimensionless,
        ForceMethod.CENTRAL_DIFFERENCE: force_central_difference_dimensionless,
    }
    parts = runners[method](p.zbar, p.bs, p.be, p.eps, p.s, options)
    scale = p.unit.scale / p.wavelength
    si = {name: part.scaled(scale) for name, part in parts.items()}
    bad = [part.status for part in si.values() if part.status != "ok"]
    status = bad[0] if bad else "ok"
    other_total = None
    if cross_check:
        other = next(m for m in ForceMethod if m is not method)
        other_parts = runners[other](p.zbar, p.bs, p.be, p.eps, p.s, options)
        other_total = sum(part.value for part in other_parts.values()) * scale
        mine = sum(part.value for part in si.values())
        if abs(mine - other_total) > 1e-3 * max(abs(mine), abs(other_total)):
            status = "warning: force methods disagree"
    return ForceBreakdown(si["vac"], si["eq"], si["neq"], method, status, other_total)
