"""Numerical integration: adaptive Gauss-Kronrod, principal values, Bose-weighted
semi-infinite integrals, and a damped-regulator limit used as a test oracle.

Integrands are expected to be vectorized: they receive a 1-D numpy array of
abscissae and return an array of the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .model import bose

Integrand = Callable[[np.ndarray], np.ndarray]

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny

# 21-point Kronrod extension of the 10-point Gauss rule (positive half, centre last).
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208745929401,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# Full symmetric node set on [-1, 1] and weights aligned with it.
KRONROD_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_GAUSS_POS = np.arange(1, 10, 2)  # indices of the Gauss nodes within _XGK
GAUSS_WEIGHTS_FULL = np.zeros(21)
GAUSS_WEIGHTS_FULL[_GAUSS_POS] = _WG
GAUSS_WEIGHTS_FULL[20 - _GAUSS_POS] = _WG


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_err: float
    evals: int
    converged: bool
    message: str = ""

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(
            self.value + other.value,
            self.abs_err + other.abs_err,
            self.evals + other.evals,
            self.converged and other.converged,
            "; ".join(m for m in (self.message, other.message) if m),
        )

    def scaled(self, factor: float) -> "QuadResult":
        return QuadResult(self.value * factor, abs(self.abs_err * factor), self.evals, self.converged, self.message)


@dataclass(frozen=True)
class RegulatorSchedule:
    """Damping parameters for the e^{-delta*x} regulator, largest first."""

    deltas: tuple[float, ...]
    order: int = 2

    def __post_init__(self) -> None:
        deltas = tuple(float(d) for d in self.deltas)
        if len(deltas) < 3:
            raise ValueError("a regulator schedule needs at least 3 damping values")
        if any(d <= 0.0 for d in deltas):
            raise ValueError("damping values must be positive")
        if any(b >= a for a, b in zip(deltas, deltas[1:])):
            raise ValueError("damping values must be strictly decreasing")
        if not 1 <= self.order < len(deltas):
            raise ValueError("extrapolation order must be between 1 and len(deltas) - 1")
        object.__setattr__(self, "deltas", deltas)

    @classmethod
    def geometric(cls, start: float, ratio: float = 0.5, count: int = 5, order: int = 3) -> "RegulatorSchedule":
        return cls(tuple(start * ratio**k for k in range(count)), order)


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(edges: np.ndarray, n: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights over consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(n)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _as_vectorized(f: Callable) -> Integrand:
    def g(x: np.ndarray) -> np.ndarray:
        try:
            y = np.asarray(f(x), dtype=float)
            if y.shape == x.shape:
                return y
        except (TypeError, ValueError):
            pass
        return np.array([float(f(xi)) for xi in x.ravel()]).reshape(x.shape)

    return g


def _gk_batch(f: Integrand, left: np.ndarray, right: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Apply the 21-point rule to many intervals at once."""
    centre = 0.5 * (left + right)
    half = 0.5 * (right - left)
    x = centre[:, None] + half[:, None] * KRONROD_NODES[None, :]
    fx = f(x.ravel()).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)]
        raise FloatingPointError(f"integrand is not finite at x = {bad[:3]}")
    resk = fx @ KRONROD_WEIGHTS
    resg = fx @ GAUSS_WEIGHTS_FULL
    mean = 0.5 * resk
    resabs = np.abs(fx) @ KRONROD_WEIGHTS
    resasc = np.abs(fx - mean[:, None]) @ KRONROD_WEIGHTS
    err = np.abs(resk - resg)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc > 0) & (err > 0), scaled, err)
    roundoff = 50.0 * _EPS * resabs
    err = np.where(resabs > _TINY / (50.0 * _EPS), np.maximum(err, roundoff), err)
    return resk * half, np.abs(err * half), np.abs(resabs * half)


def integrate_adaptive(
    f: Callable,
    a: float,
    b: float,
    tol: float = 1e-10,
    rtol: float = 1e-10,
    points: Iterable[float] | None = None,
    max_intervals: int = 20000,
) -> QuadResult:
    """Globally adaptive 21-point Gauss-Kronrod integration of f over [a, b].

    Converges when the summed error estimate is below ``max(tol, rtol*|I|)``.
    Hitting ``max_intervals`` returns ``converged=False`` with the best value.
    """
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise ValueError(f"need finite a < b, got [{a}, {b}]")
    g = _as_vectorized(f)
    cuts = sorted({float(p) for p in (points or ()) if a < p < b})
    edges = np.array([a, *cuts, b])
    left, right = edges[:-1], edges[1:]
    vals, errs, _ = _gk_batch(g, left, right)
    evals = 21 * len(left)
    while True:
        total = float(np.sum(vals))
        err = float(np.sum(errs))
        target = max(tol, rtol * abs(total))
        if err <= target:
            return QuadResult(total, err, evals, True)
        n = len(vals)
        if n >= max_intervals:
            return QuadResult(total, err, evals, False, "interval limit reached")
        width = right - left
        splittable = width > 64.0 * _EPS * np.maximum(np.abs(left), np.abs(right)) + _TINY
        threshold = max(target / n, 0.05 * float(np.max(errs)))
        pick = (errs > threshold) & splittable
        if not np.any(pick):
            pick = splittable & (errs >= np.max(errs[splittable], initial=0.0))
            if not np.any(pick):
                return QuadResult(total, err, evals, False, "roundoff limit reached")
        room = max_intervals - n
        idx = np.flatnonzero(pick)
        if len(idx) > room:
            idx = idx[np.argsort(errs[idx])[::-1][:room]]
        mid = 0.5 * (left[idx] + right[idx])
        new_left = np.concatenate([left[idx], mid])
        new_right = np.concatenate([mid, right[idx]])
        nv, ne, _ = _gk_batch(g, new_left, new_right)
        evals += 21 * len(new_left)
        keep = np.ones(n, dtype=bool)
        keep[idx] = False
        left = np.concatenate([left[keep], new_left])
        right = np.concatenate([right[keep], new_right])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])


def integrate_pv(
    f: Callable,
    a: float,
    b: float,
    p: float,
    tol: float = 1e-10,
    rtol: float = 1e-10,
    points: Iterable[float] | None = None,
    radius: float | None = None,
    max_intervals: int = 20000,
) -> QuadResult:
    """Cauchy principal value of the integral of f over [a, b], simple pole at p.

    The pole is excised symmetrically. Outside the excision window the
    integral is ordinary; inside, the two mirror halves are added pointwise,
    which is regular, and the remaining sliver around the pole is removed by
    extrapolating the excision radius to zero.
    """
    if not a < p < b:
        raise ValueError("pole must lie strictly inside (a, b)")
    g = _as_vectorized(f)
    r = min(p - a, b - p) if radius is None else float(radius)
    r = min(r, p - a, b - p)
    pts = [q for q in (points or ()) if abs(q - p) > r]
    parts = []
    if p - r > a:
        parts.append(integrate_adaptive(g, a, p - r, tol / 4, rtol, pts, max_intervals))
    if p + r < b:
        parts.append(integrate_adaptive(g, p + r, b, tol / 4, rtol, pts, max_intervals))

    def folded(u: np.ndarray) -> np.ndarray:
        return g(p + u) + g(p - u)

    # The folded integrand is even in u, so J(d) = J(0) - a d - b d^3 - O(d^5) for the
    # integral over (d, r). Three radii fix a and b and leave an O(d^5) remainder.
    d1 = r * 2.0**-10
    d2, d3 = 0.5 * d1, 0.25 * d1
    core = integrate_adaptive(folded, d1, r, tol / 4, rtol, None, max_intervals)
    s1 = integrate_adaptive(folded, d2, d1, tol / 8, rtol, None, max_intervals)
    s2 = integrate_adaptive(folded, d3, d2, tol / 16, rtol, None, max_intervals)
    cubic = (s1.value - 2.0 * s2.value) * 64.0 / 42.0  # b d1^3
    linear = 2.0 * (s1.value - 0.875 * cubic)  # a d1
    inner = s1.value + s2.value + 0.25 * linear + cubic / 64.0
    extrapolated = QuadResult(
        core.value + inner,
        core.abs_err + 3.0 * (s1.abs_err + s2.abs_err) + abs(cubic) * (d1 / r) ** 2,
        core.evals + s1.evals + s2.evals,
        core.converged and s1.converged and s2.converged,
    )
    total = extrapolated
    for part in parts:
        total = total + part
    return total


def bose_cutoff(tol: float) -> float:
    """Upper limit y_max of the Bose variable y = beta*omega/c."""
    return 40.0 + 10.0 * math.log10(1.0 / max(tol, 1e-300))


def integrate_bose(
    g: Callable,
    beta_over_c: float,
    tol: float = 1e-10,
    rtol: float = 1e-10,
    points: Iterable[float] | None = None,
    y_max: float | None = None,
) -> QuadResult:
    """Integral over omega in (0, inf) of g(omega) / (exp(beta*omega/c) - 1).

    ``beta_over_c`` is beta/c (seconds); infinity gives exactly zero.
    """
    if beta_over_c <= 0.0 or math.isnan(beta_over_c):
        raise ValueError("beta/c must be positive")
    if math.isinf(beta_over_c):
        return QuadResult(0.0, 0.0, 0, True)
    gv = _as_vectorized(g)
    scale = 1.0 / beta_over_c
    ymax = bose_cutoff(tol) if y_max is None else float(y_max)

    def h(y: np.ndarray) -> np.ndarray:
        return gv(y * scale) * bose(y)

    y_points = [1e-6, 1e-4, 1e-2, 0.1, 1.0, 3.0, 10.0, 20.0]
    if points:
        y_points += [p * beta_over_c for p in points]
    y_points = [p for p in y_points if 0.0 < p < ymax]
    res = integrate_adaptive(h, 0.0, ymax, tol * beta_over_c, rtol, y_points)
    return res.scaled(scale)


def integrate_regulated(
    f_osc: Callable,
    schedule: RegulatorSchedule,
    period: float | None = None,
    tol: float = 1e-9,
    damping_cutoff: float = 60.0,
) -> QuadResult:
    """Limit delta -> 0 of the integral over (0, inf) of f(x) exp(-delta x).

    Oracle only. Each damped integral is truncated where the damping factor
    falls below exp(-damping_cutoff); ``period`` (the half-period of the
    fastest oscillation) seeds the panel grid. The delta -> 0 value comes from
    a polynomial fit in delta of degree ``schedule.order``; the spread between
    that fit and one of lower degree is the error estimate.
    """
    fv = _as_vectorized(f_osc)
    values = []
    evals = 0
    ok = True
    for delta in schedule.deltas:
        upper = damping_cutoff / delta
        if period:
            pts = list(np.arange(period, upper, period))
        else:
            pts = list(np.geomspace(min(1.0, upper / 10), upper, 12)[:-1])

        def damped(x: np.ndarray, d: float = delta) -> np.ndarray:
            return fv(x) * np.exp(-d * x)

        res = integrate_adaptive(damped, 0.0, upper, tol, 1e-12, pts, max_intervals=200000)
        values.append(res.value)
        evals += res.evals
        ok = ok and res.converged
    d = np.array(schedule.deltas)
    v = np.array(values)
    hi = np.polynomial.polynomial.polyfit(d, v, schedule.order)[0]
    lo = np.polynomial.polynomial.polyfit(d, v, schedule.order - 1)[0]
    err = abs(hi - lo)
    message = "" if ok else "damped integral did not converge"
    scale = max(np.max(np.abs(v)), _TINY)
    converged = ok and err <= max(1e-3 * scale, 100 * tol)
    if not converged and not message:
        message = "oracle inconclusive: extrapolation did not settle"
    return QuadResult(float(hi), float(err), evals, converged, message)
