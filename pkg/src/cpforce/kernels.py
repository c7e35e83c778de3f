"""Real-dielectric response kernels and their one-dimensional transforms.

The traveling-mode kernels T_par, T_perp and evanescent-mode kernels A_par,
A_perp live on t in [0, 1]. Written once against a tiny arithmetic protocol,
each kernel evaluates on numpy arrays and on :class:`~cpforce.taylor.Jet`
objects, so endpoint derivatives are exact up to rounding.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import DomainError, InvalidInputError
from .quadrature import QuadResult, gauss_legendre, integrate_adaptive
from .taylor import Jet, sqrt

JET_ORDER = 32
GL_ORDER = 20
_CHUNK_ELEMENTS = 4_000_000
_SERIES_CHUNK = 65536


class Polarization(enum.Enum):
    PARALLEL = "parallel"
    PERPENDICULAR = "perpendicular"

    @property
    def weight(self) -> int:
        return 2 if self is Polarization.PARALLEL else 1


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not math.isfinite(eps) or eps < 1.0:
        raise InvalidInputError(f"kernels need a finite real permittivity >= 1, got {eps!r}")
    return eps


def _t_parallel(t, eps: float):
    s = sqrt(eps - 1.0 + t * t)
    return 0.25 * ((t - s) / (t + s) - t * t * (eps * t - s) / (eps * t + s))


def _t_perpendicular(t, eps: float):
    s = sqrt(eps - 1.0 + t * t)
    return 0.5 * (1.0 - t * t) * (eps * t - s) / (eps * t + s)


def _a_parallel(t, eps: float):
    root = math.sqrt(eps - 1.0)
    rational = ((2.0 * eps + 1.0) * (eps - 1.0) * t * t + 1.0) / ((eps * eps - 1.0) * t * t + 1.0)
    return 0.5 * root * rational * t * sqrt(1.0 - t * t)


def _a_perpendicular(t, eps: float):
    root = math.sqrt(eps - 1.0)
    rational = ((eps - 1.0) * t * t + 1.0) / ((eps * eps - 1.0) * t * t + 1.0)
    return eps * root * rational * t * sqrt(1.0 - t * t)


def _conductor_t_parallel(t):
    return -0.25 * (1.0 + t * t)


def _conductor_t_perpendicular(t):
    return 0.5 * (1.0 - t * t)


_T_FUNCS = {Polarization.PARALLEL: _t_parallel, Polarization.PERPENDICULAR: _t_perpendicular}
_A_FUNCS = {Polarization.PARALLEL: _a_parallel, Polarization.PERPENDICULAR: _a_perpendicular}
_CONDUCTOR_T = {
    Polarization.PARALLEL: _conductor_t_parallel,
    Polarization.PERPENDICULAR: _conductor_t_perpendicular,
}


def _check_t(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0) or np.any(np.isnan(arr)):
        raise InvalidInputError("kernel argument t must lie in [0, 1]")
    return arr


def kernel_T(sigma: Polarization, t, eps: float):
    """Traveling-mode kernel T_sigma(t) for real permittivity eps."""
    eps = _check_eps(eps)
    arr = _check_t(t)
    if eps == 1.0:
        return np.zeros_like(arr)[()] if arr.ndim else 0.0
    out = _T_FUNCS[Polarization(sigma)](arr, eps)
    return out if arr.ndim else float(out)


def kernel_A(sigma: Polarization, t, eps: float):
    """Evanescent-mode kernel A_sigma(t) for real permittivity eps."""
    eps = _check_eps(eps)
    arr = _check_t(t)
    out = _A_FUNCS[Polarization(sigma)](arr, eps)
    return out if arr.ndim else float(out)


def conductor_kernel_T(sigma: Polarization, t):
    """Traveling-mode kernel with eps -> infinity taken first (A vanishes)."""
    arr = _check_t(t)
    out = _CONDUCTOR_T[Polarization(sigma)](arr)
    return out if arr.ndim else float(out)


class Kernel:
    """A function on [0, 1] plus what the transforms need to know about it.

    ``rho`` is a lower bound on the distance from t = 0 to the nearest complex
    singularity; ``sqrt_end`` marks a square-root zero at t = 1.
    """

    def __init__(self, func: Callable, rho: float, sqrt_end: bool = False, label: str = "", zero: bool = False):
        self._func = func
        self.rho = float(rho)
        self.sqrt_end = sqrt_end
        self.label = label
        self.zero = zero
        self._jets: dict[tuple[float, int], Jet] = {}
        self._grids: dict[tuple, np.ndarray] = {}

    def __call__(self, t):
        return self._func(t)

    def __repr__(self) -> str:
        return f"Kernel({self.label or 'anonymous'}, rho={self.rho:.3g})"

    def jet(self, t0: float, order: int = JET_ORDER) -> Jet:
        key = (float(t0), order)
        if key not in self._jets:
            if self.sqrt_end and t0 == 1.0:
                raise DomainError(f"{self.label} is not analytic at t = 1")
            self._jets[key] = self._func(Jet.variable(t0, order))
        return self._jets[key]

    def derivative(self, t0: float, k: int) -> float:
        return self.jet(t0, max(k, 3)).derivative(k)

    def times_t(self) -> "Kernel":
        f = self._func
        return Kernel(lambda t: t * f(t), self.rho, self.sqrt_end, f"t*{self.label}", self.zero)

    def values_on(self, key: tuple, nodes: np.ndarray) -> np.ndarray:
        if key not in self._grids:
            self._grids[key] = np.asarray(self._func(nodes), dtype=float)
        return self._grids[key]

    @staticmethod
    def combine(terms: list[tuple[float, "Kernel"]], label: str = "") -> "Kernel":
        live = [(w, k) for w, k in terms if w != 0.0 and not k.zero]
        if not live:
            return Kernel(lambda t: 0.0 * t, math.inf, False, label, zero=True)

        def f(t):
            acc = 0.0
            for w, k in live:
                acc = acc + w * k._func(t)
            return acc

        return Kernel(f, min(k.rho for _, k in live), any(k.sqrt_end for _, k in live), label)


def _rho_T(eps: float) -> float:
    return min(math.sqrt(eps - 1.0), 1.0 / math.sqrt(eps + 1.0))


def _rho_A(eps: float) -> float:
    return min(1.0, 1.0 / math.sqrt(eps * eps - 1.0))


def t_kernel(sigma: Polarization, eps: float) -> Kernel:
    eps = _check_eps(eps)
    sigma = Polarization(sigma)
    if eps == 1.0:
        return Kernel(lambda t: 0.0 * t, math.inf, label=f"T_{sigma.value}", zero=True)
    func = _T_FUNCS[sigma]
    return Kernel(lambda t: func(t, eps), _rho_T(eps), False, f"T_{sigma.value}")


def a_kernel(sigma: Polarization, eps: float) -> Kernel:
    eps = _check_eps(eps)
    sigma = Polarization(sigma)
    if eps == 1.0:
        return Kernel(lambda t: 0.0 * t, math.inf, label=f"A_{sigma.value}", zero=True)
    func = _A_FUNCS[sigma]
    return Kernel(lambda t: func(t, eps), _rho_A(eps), True, f"A_{sigma.value}")


def conductor_t_kernel(sigma: Polarization) -> Kernel:
    func = _CONDUCTOR_T[Polarization(sigma)]
    return Kernel(func, math.inf, False, f"T_{Polarization(sigma).value}_conductor")


@dataclass(frozen=True)
class KernelSet:
    """Weighted sums 2*K_par + K_perp that enter every shift formula.

    ``eps`` is ``math.inf`` for the perfect conductor, in which case the
    evanescent kernel is identically zero.
    """

    eps: float
    T: Kernel
    A: Kernel
    T_times_t: Kernel
    A_times_t: Kernel

    @property
    def conductor(self) -> bool:
        return math.isinf(self.eps)

    @property
    def root(self) -> float:
        """sqrt(eps - 1); infinite for the conductor."""
        return math.inf if self.conductor else math.sqrt(self.eps - 1.0)


_KERNEL_SET_CACHE: dict[float, KernelSet] = {}


def kernel_set(eps: float) -> KernelSet:
    eps = float(eps)
    if eps in _KERNEL_SET_CACHE:
        return _KERNEL_SET_CACHE[eps]
    if math.isinf(eps):
        T = Kernel.combine([(p.weight, conductor_t_kernel(p)) for p in Polarization], "T_w_conductor")
        A = Kernel(lambda t: 0.0 * t, math.inf, label="A_w_conductor", zero=True)
    else:
        T = Kernel.combine([(p.weight, t_kernel(p, eps)) for p in Polarization], "T_w")
        A = Kernel.combine([(p.weight, a_kernel(p, eps)) for p in Polarization], "A_w")
    ks = KernelSet(eps, T, A, T.times_t(), A.times_t())
    _KERNEL_SET_CACHE[eps] = ks
    return ks


@dataclass(frozen=True)
class KernelEndpointData:
    """Endpoint values and derivatives of T_sigma and A_sigma."""

    T0: float
    T1: float
    dT0: float
    dT1: float
    d2T0: float
    d2T1: float
    d3T0: float
    d3T1: float
    A0: float
    dA0: float
    d2A0: float
    d3A0: float
    rel_err: float = 0.0
    degenerate: bool = False


def kernel_endpoints(eps: float) -> dict[Polarization, KernelEndpointData]:
    """Exact endpoint derivatives for both polarizations.

    At eps = 1 every kernel vanishes and the data come back zero with
    ``degenerate=True``.
    """
    eps = _check_eps(eps)
    out = {}
    for sigma in Polarization:
        if eps == 1.0:
            out[sigma] = KernelEndpointData(*([0.0] * 12), rel_err=0.0, degenerate=True)
            continue
        T, A = t_kernel(sigma, eps), a_kernel(sigma, eps)
        j0, j1, a0 = T.jet(0.0, 8), T.jet(1.0, 8), A.jet(0.0, 8)
        # Rounding in the jet recurrences grows mildly with order; 1e-13 is a safe bound.
        out[sigma] = KernelEndpointData(
            j0.derivative(0), j1.derivative(0), j0.derivative(1), j1.derivative(1),
            j0.derivative(2), j1.derivative(2), j0.derivative(3), j1.derivative(3),
            a0.derivative(0), a0.derivative(1), a0.derivative(2), a0.derivative(3),
            rel_err=1e-13,
        )
    return out


# --- transforms -------------------------------------------------------------

def _edges(rho: float, length: float, t_max: float) -> np.ndarray:
    """Panels graded geometrically toward t = 0, then uniform of width ``length``."""
    length = min(length, t_max)
    start = min(rho, length) / 16.0
    edges = [0.0]
    x = start
    while x < length * (1 - 1e-12):
        edges.append(x)
        x *= 2.0
    x = edges[-1] if len(edges) > 1 else 0.0
    n = max(1, math.ceil((t_max - x) / length - 1e-9))
    edges.extend(np.linspace(x, t_max, n + 1)[1:].tolist())
    return np.array(edges)


def _kernel_rule(kernel: Kernel, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x, w = gauss_legendre(GL_ORDER)
    lo, hi = edges[:-1], edges[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    if kernel.sqrt_end and edges[-1] == 1.0:
        # t = 1 - v**2 removes the square-root zero at t = 1
        vmax = math.sqrt(1.0 - edges[-2])
        v = 0.5 * vmax * (x + 1.0)
        nodes[-1] = 1.0 - v * v
        weights[-1] = 0.5 * vmax * w * 2.0 * v
    return nodes.ravel(), weights.ravel()


def _series_sum(terms: np.ndarray, scale: np.ndarray, rel: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Optimally truncated sums of asymptotic series, row-wise.

    Truncation uses the envelope of two consecutive magnitudes so that exact
    zeros in odd or even series do not stop the sum early. Works on real or
    complex terms. Returns (value, error estimate, accepted mask).
    """
    mags = np.abs(terms)
    env = np.maximum(mags[:, :-1], mags[:, 1:])
    first = np.argmax(mags > 0.0, axis=1)
    env[np.arange(env.shape[1])[None, :] <= first[:, None]] = np.inf
    stop = np.argmin(env, axis=1)
    cols = np.arange(terms.shape[1])[None, :]
    value = np.where(cols < stop[:, None], terms, 0.0).sum(axis=1)
    err = env[np.arange(len(stop)), stop]
    ok = err <= rel * np.maximum(np.abs(value), scale)
    return value, err, ok


_ASYMPTOTIC_MIN = 30.0


def fourier_transform(kernel: Kernel, a) -> np.ndarray:
    """Complex integral over [0, 1] of K(t) exp(i a t), vectorized over a >= 0."""
    a = np.asarray(a, dtype=float)
    flat = a.ravel()
    if flat.size > _SERIES_CHUNK:
        parts = [fourier_transform(kernel, flat[i : i + _SERIES_CHUNK]) for i in range(0, flat.size, _SERIES_CHUNK)]
        return np.concatenate(parts).reshape(a.shape)
    out = np.zeros(flat.shape, dtype=complex)
    if kernel.zero or flat.size == 0:
        return out.reshape(a.shape)
    todo = np.ones(flat.shape, dtype=bool)
    big = flat >= _ASYMPTOTIC_MIN
    if np.any(big) and not kernel.sqrt_end:
        c0 = kernel.jet(0.0).c
        c1 = kernel.jet(1.0).c
        m = np.arange(len(c0))
        fact = np.array([math.factorial(k) for k in m], dtype=float)
        d0, d1 = c0 * fact, c1 * fact
        ab = flat[big]
        ia = 1j * ab[:, None]
        phase = np.exp(1j * ab)[:, None]
        with np.errstate(over="ignore", invalid="ignore"):
            terms = ((-1.0) ** m)[None, :] * (d1[None, :] * phase - d0[None, :]) / ia ** (m[None, :] + 1)
        terms = np.where(np.isfinite(terms), terms, np.inf)
        scale = (np.abs(d0[:3]).sum() + np.abs(d1[:3]).sum()) / ab
        val, err, ok = _series_sum(terms, scale, 1e-14)
        idx = np.flatnonzero(big)[ok]
        out[idx] = val[ok]
        todo[idx] = False
    rest = np.flatnonzero(todo)
    if rest.size:
        n_half = np.maximum(1.0, np.ceil(flat[rest] / math.pi))
        bucket = 2.0 ** np.ceil(np.log2(n_half))
        for nb in np.unique(bucket):
            sel = rest[bucket == nb]
            edges = _edges(kernel.rho, 1.0 / nb, 1.0)
            nodes, weights = _kernel_rule(kernel, edges)
            wk = weights * kernel.values_on(("osc", nb), nodes)
            step = max(1, _CHUNK_ELEMENTS // len(nodes))
            for i in range(0, len(sel), step):
                part = sel[i : i + step]
                out[part] = np.exp(1j * np.outer(flat[part], nodes)) @ wk
    return out.reshape(a.shape)


def cosine_transform(kernel: Kernel, a) -> np.ndarray:
    return fourier_transform(kernel, a).real


def sine_transform(kernel: Kernel, a) -> np.ndarray:
    return fourier_transform(kernel, a).imag


def laplace_transform(kernel: Kernel, p) -> np.ndarray:
    """Integral over [0, 1] of K(t) exp(-p t), vectorized over p >= 0."""
    p = np.asarray(p, dtype=float)
    flat = p.ravel()
    if flat.size > _SERIES_CHUNK:
        parts = [laplace_transform(kernel, flat[i : i + _SERIES_CHUNK]) for i in range(0, flat.size, _SERIES_CHUNK)]
        return np.concatenate(parts).reshape(p.shape)
    out = np.zeros(flat.shape)
    if kernel.zero or flat.size == 0:
        return out.reshape(p.shape)
    todo = np.ones(flat.shape, dtype=bool)
    big = flat >= (50.0 if kernel.sqrt_end else _ASYMPTOTIC_MIN)
    if np.any(big):
        c0 = kernel.jet(0.0).c
        m = np.arange(len(c0))
        fact = np.array([math.factorial(k) for k in m], dtype=float)
        d0 = c0 * fact
        pb = flat[big]
        with np.errstate(over="ignore", invalid="ignore"):
            terms = d0[None, :] / pb[:, None] ** (m[None, :] + 1)
            if not kernel.sqrt_end:
                d1 = kernel.jet(1.0).c * fact
                terms = terms - np.exp(-pb)[:, None] * d1[None, :] / pb[:, None] ** (m[None, :] + 1)
        terms = np.where(np.isfinite(terms), terms, np.inf)
        scale = np.abs(d0[:3]).sum() / pb**2
        val, err, ok = _series_sum(terms, scale, 1e-14)
        idx = np.flatnonzero(big)[ok]
        out[idx] = val[ok]
        todo[idx] = False
    rest = np.flatnonzero(todo)
    if rest.size:
        pr = flat[rest]
        bucket = np.where(pr < 1.0, 0.0, 2.0 ** np.floor(np.log2(np.maximum(pr, 1.0))))
        for pb in np.unique(bucket):
            sel = rest[bucket == pb]
            if pb == 0.0:
                edges = _edges(kernel.rho, 0.5, 1.0)
            else:
                edges = _edges(kernel.rho, min(0.5, 2.0 / pb), min(1.0, 50.0 / pb))
            nodes, weights = _kernel_rule(kernel, edges)
            wk = weights * kernel.values_on(("exp", pb), nodes)
            step = max(1, _CHUNK_ELEMENTS // len(nodes))
            for i in range(0, len(sel), step):
                part = sel[i : i + step]
                out[part] = np.exp(-np.outer(flat[part], nodes)) @ wk
    return out.reshape(p.shape)


def f_sigma(sigma: Polarization, z: float, omega, eps: float):
    """f_sigma(z, omega): evanescent plus traveling t-integral (dimensionless).

    ``z`` in metres, ``omega`` in rad/s (scalar or array).
    """
    from .model import C_LIGHT

    eps = _check_eps(eps)
    if z <= 0.0:
        raise InvalidInputError("z must be positive")
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0.0):
        raise InvalidInputError("omega must be non-negative")
    sigma = Polarization(sigma)
    q = 2.0 * z * omega / C_LIGHT
    value = laplace_transform(a_kernel(sigma, eps), q * math.sqrt(eps - 1.0)) + cosine_transform(
        t_kernel(sigma, eps), q
    )
    return value if omega.ndim else float(value)


def subtracted_moment(kernel: Kernel, n_subtract: int, power: int, tol: float = 1e-13) -> QuadResult:
    """Integral over [0, 1] of (K(t) - sum_{m<n} K_m t^m) / t^power.

    K_m are the Taylor coefficients at 0. Near t = 0 the remainder is summed
    from the Taylor series, avoiding the cancellation a direct evaluation
    suffers. Raises :class:`DomainError` if the integral diverges.
    """
    if kernel.zero:
        return QuadResult(0.0, 0.0, 0, True)
    c = kernel.jet(0.0).c
    tc = min(0.25, kernel.rho / 4.0)
    m = np.arange(len(c))
    size = np.abs(c) * tc**m
    ref = float(np.max(size[: max(n_subtract, 1) + 2]))
    series = 0.0
    for k in range(n_subtract, len(c)):
        e = k - power + 1
        if e <= 0:
            if size[k] > 1e-9 * ref:
                raise DomainError(
                    f"integral of {kernel.label} remainder diverges: coefficient t^{k} = {c[k]:.3e}"
                )
            continue
        series += c[k] * tc**e / e
    tail = abs(c[-1]) * tc ** max(len(c) - power, 1)
    poly = c[:n_subtract][::-1]

    def integrand(t: np.ndarray) -> np.ndarray:
        return (kernel(t) - np.polyval(poly, t)) / t**power

    direct = integrate_adaptive(integrand, tc, 1.0, tol, tol)
    return QuadResult(series + direct.value, direct.abs_err + tail, direct.evals, direct.converged)
