"""Half-space response functions for a general (complex) permittivity.

Normal wave numbers, Fresnel amplitudes and the traced kernels g11, g12, g21
that weight the field correlations at the atom. All functions here take SI
arguments; the kernels return values in 1/m.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import C_LIGHT, InvalidInputError, SingularityError
from .quadrature import QuadResult, integrate_adaptive


@dataclass(frozen=True)
class WaveNumbers:
    q1: complex
    q2: float
    beta1: complex
    beta2: complex


@dataclass(frozen=True)
class FresnelSet:
    rp: complex
    rs: complex
    tp: complex
    ts: complex


def _branch_sqrt(w: complex) -> complex:
    """Square root with Re >= 0 and Im >= 0.

    The principal root already has Re >= 0; flipping the sign when Im < 0
    would break Re >= 0, so the rule is applied as the pair (+-) that puts the
    root in the closed first quadrant, which exists whenever Im(w) >= 0.
    """
    root = cmath.sqrt(w)
    if root.imag < 0.0:
        root = -root
    if root.real < 0.0 and root.imag == 0.0:
        root = -root
    return root


def wave_numbers(omega: float, k_par: float, eps: complex) -> WaveNumbers:
    """beta_a = sqrt(q_a**2 - k_par**2) in the medium (a=1) and vacuum (a=2)."""
    if not omega > 0.0:
        raise InvalidInputError("omega must be > 0")
    if k_par < 0.0:
        raise InvalidInputError("k_par must be >= 0")
    eps = complex(eps)
    q2 = omega / C_LIGHT
    q1 = q2 * cmath.sqrt(eps)
    beta1 = _branch_sqrt(eps * q2 * q2 - k_par * k_par)
    beta2 = _branch_sqrt(complex(q2 * q2 - k_par * k_par))
    return WaveNumbers(q1, q2, beta1, beta2)


def fresnel(eps: complex, beta1: complex, beta2: complex) -> FresnelSet:
    """Reflection and transmission amplitudes for light leaving the medium side."""
    eps = complex(eps)
    den_p = eps * beta2 + beta1
    den_s = beta2 + beta1
    if den_p == 0 or den_s == 0:
        raise SingularityError("Fresnel denominator vanishes")
    return FresnelSet(
        rp=(eps * beta2 - beta1) / den_p,
        rs=(beta2 - beta1) / den_s,
        tp=2.0 * cmath.sqrt(eps) * beta2 / den_p,
        ts=2.0 * beta2 / den_s,
    )


def _check(z: float | None, omega: float, eps) -> complex:
    if z is not None and not z > 0.0:
        raise InvalidInputError("z must be > 0")
    if not omega > 0.0:
        raise InvalidInputError("omega must be > 0")
    eps = complex(eps)
    if eps.imag < 0.0:
        raise InvalidInputError("Im(eps) must be >= 0")
    return eps


def _oscillation_points(phase_rate: float, upper: float, cap: int = 4000) -> list[float]:
    """Half-period breakpoints of cos(phase_rate * t) on (0, upper)."""
    if phase_rate <= 0.0:
        return []
    step = math.pi / phase_rate
    n = min(int(upper / step), cap)
    return [step * k for k in range(1, n + 1)]


def _raise_if_bad(res: QuadResult, what: str) -> QuadResult:
    if not res.converged:
        raise ArithmeticError(f"{what} quadrature did not converge (achieved error {res.abs_err:.3g})")
    return res


def _g11_integrands(eps: complex, u: float):
    er = eps.real
    eps_abs2 = abs(eps) ** 2

    def cos_part(t: np.ndarray) -> np.ndarray:
        w = eps - 1.0 + t * t
        root = np.sqrt(w.astype(complex))
        aw = np.abs(w)
        first = (t * t - aw) / np.abs(t + root) ** 2
        second = (eps_abs2 * t * t - aw) * (1.0 - 2.0 * t * t) / np.abs(eps * t + root) ** 2
        return (first + second) * np.cos(u * t)

    def sin_part(t: np.ndarray) -> np.ndarray:
        w = eps - 1.0 + t * t
        root = np.sqrt(w.astype(complex))
        aw = np.abs(w)
        lead = t * np.sqrt(np.maximum(aw - (er - 1.0 + t * t), 0.0))
        bracket = 1.0 / np.abs(t + root) ** 2 - (aw + t * t - 1.0) * (1.0 - 2.0 * t * t) / np.abs(eps * t + root) ** 2
        return lead * bracket * np.sin(u * t)

    return cos_part, sin_part


def g11(z: float, omega: float, eps: complex, tol: float = 1e-10) -> float:
    """Traveling-mode part of g1 [1/m]."""
    eps = _check(z, omega, eps)
    if eps == 1.0:
        return 0.0
    u = 2.0 * omega * z / C_LIGHT
    cos_part, sin_part = _g11_integrands(eps, u)
    pts = _oscillation_points(u, 1.0)
    rho = min(1.0, math.sqrt(abs(eps - 1.0)), 1.0 / math.sqrt(abs(eps) + 1.0))
    pts += [rho * 2.0**-k for k in range(8)]
    a = _raise_if_bad(integrate_adaptive(cos_part, 0.0, 1.0, tol, tol, pts), "g11")
    total = a.value * omega / (4.0 * math.pi * C_LIGHT)
    if eps.imag != 0.0:
        b = _raise_if_bad(integrate_adaptive(sin_part, 0.0, 1.0, tol, tol, pts), "g11")
        total += b.value * omega / (2.0 * math.sqrt(2.0) * math.pi * C_LIGHT)
    return total


def g12(z: float, omega: float, eps: complex, tol: float = 1e-10) -> float:
    """Evanescent-mode part shared by g1 and g2 [1/m]."""
    eps = _check(z, omega, eps)
    if eps == 1.0:
        return 0.0
    u = 2.0 * omega * z / C_LIGHT
    er = eps.real
    upper = 60.0 / u
    if eps.imag == 0.0:
        # real fast path: the radicand is 2(eps - 1 - t^2) below t = sqrt(eps - 1), zero beyond
        upper = min(upper, math.sqrt(er - 1.0))

    def integrand(t: np.ndarray) -> np.ndarray:
        w = eps - 1.0 - t * t
        root = np.sqrt(w.astype(complex))
        aw = np.abs(w)
        lead = t * np.exp(-u * t) * np.sqrt(np.maximum(aw + (er - 1.0 - t * t), 0.0))
        bracket = (t * t + 1.0 + aw) * (2.0 * t * t + 1.0) / np.abs(1j * t * eps + root) ** 2 + 1.0 / np.abs(
            1j * t + root
        ) ** 2
        return lead * bracket

    scale = 1.0 / math.sqrt(abs(eps) + 1.0)
    pts = [scale * 2.0**k for k in range(-6, 40) if scale * 2.0**k < upper]
    if u > 0:
        pts += [k / u for k in (1, 4, 16) if k / u < upper]
    res = _raise_if_bad(integrate_adaptive(integrand, 0.0, upper, tol * 1e-3, tol, pts), "g12")
    return res.value * omega / (2.0 * math.sqrt(2.0) * math.pi * C_LIGHT)


def g21(omega: float, eps: complex, tol: float = 1e-10) -> float:
    """z-independent traveling-mode part of g2 [1/m].

    Provided for completeness; the shift assemblies never include it.
    """
    eps = _check(None, omega, eps)
    if eps == 1.0:
        return 0.0
    er = eps.real

    def integrand(t: np.ndarray) -> np.ndarray:
        w = eps - t
        root = np.sqrt(w.astype(complex))
        aw = np.abs(w)
        s1 = np.sqrt(1.0 - t)
        lead = np.sqrt(np.maximum(aw + (er - t), 0.0))
        return lead * ((t + aw) / np.abs(eps * s1 + root) ** 2 + 1.0 / np.abs(s1 + root) ** 2)

    res = _raise_if_bad(integrate_adaptive(integrand, 0.0, 1.0, tol, tol), "g21")
    return res.value * omega / (4.0 * math.sqrt(2.0) * math.pi * C_LIGHT)


def g1(z: float, omega: float, eps: complex, tol: float = 1e-10) -> float:
    return g11(z, omega, eps, tol) + g12(z, omega, eps, tol)


def _conductor_shape(u: np.ndarray) -> np.ndarray:
    """sin(u)/u**3 - cos(u)/u**2 - sin(u)/(2u), stable for small u."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) < 0.5
    us = u[small]
    acc = np.zeros_like(us)
    u2 = us * us
    power = np.ones_like(us)
    for k in range(1, 12):
        acc += (-1) ** (k + 1) * power * (2 * k / math.factorial(2 * k + 1) - 0.5 / math.factorial(2 * k - 1))
        power = power * u2
    out[small] = acc
    ub = u[~small]
    out[~small] = np.sin(ub) / ub**3 - np.cos(ub) / ub**2 - np.sin(ub) / (2.0 * ub)
    return out


def conductor_f(z: float, omega) -> np.ndarray | float:
    """Closed-form g1 of a perfectly conducting plane [1/m]."""
    if not z > 0.0:
        raise InvalidInputError("z must be > 0")
    omega_arr = np.asarray(omega, dtype=float)
    if np.any(omega_arr <= 0.0):
        raise InvalidInputError("omega must be > 0")
    u = 2.0 * omega_arr * z / C_LIGHT
    value = omega_arr / (math.pi * C_LIGHT) * _conductor_shape(u)
    return value if omega_arr.ndim else float(value)


def conductor_shape(u):
    """Dimensionless conductor g1: g1 = omega/(pi c) * conductor_shape(2 omega z / c)."""
    arr = np.asarray(u, dtype=float)
    out = _conductor_shape(np.atleast_1d(arr))
    return out.reshape(arr.shape) if arr.ndim else float(out[0])
