"""Frequency transforms of the vacuum resonance denominator.

For the vacuum part the frequency integral can be done in closed form for
each value of the kernel variable t. With ``s = -1`` (ground) or ``+1``
(excited, principal value)::

    laplace_resolvent(p, s) = int_0^inf x/(x - s) exp(-p x) dx
    cosine_resolvent(b, s)  = int_0^inf cos(b x)/(x - s) dx     (Abel limit)

Both are expressed through exponential integrals and the auxiliary sine and
cosine integral functions. Large arguments switch to asymptotic series so the
leading cancellations never happen in floating point.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sp

SERIES_START = 40.0
_N_TERMS = 40
_FACT = np.array([math.factorial(n) for n in range(2 * _N_TERMS + 2)], dtype=float)


def _sign(s: int) -> int:
    if s not in (-1, 1):
        raise ValueError("state sign must be -1 or +1")
    return s


def _split(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    return x, x > SERIES_START


def _laplace_series_coeffs(s: int) -> np.ndarray:
    """a_n with laplace_resolvent(p) ~ sum_{n>=1} a_n n! / p**(n+1)."""
    n = np.arange(1, _N_TERMS + 1)
    sign = -((-1.0) ** n) if s == -1 else -np.ones_like(n, dtype=float)
    return sign * _FACT[n]


def exp_resolvent(p, s: int):
    """J(p) = int_0^inf exp(-p x)/(x - s) dx for p > 0 (principal value if s = +1)."""
    s = _sign(s)
    p, big = _split(p)
    out = np.empty_like(p)
    small = ~big
    ps = p[small]
    with np.errstate(over="ignore"):
        if s == -1:
            out[small] = np.exp(ps) * sp.exp1(ps)
        else:
            out[small] = -np.exp(-ps) * sp.expi(ps)
    pb = p[big]
    n = np.arange(_N_TERMS)
    coef = ((-1.0) ** n if s == -1 else np.ones(_N_TERMS)) * _FACT[n]
    out[big] = (coef[None, :] / pb[:, None] ** (n[None, :] + 1)).sum(axis=1) * (1 if s == -1 else -1)
    return out


def laplace_resolvent(p, s: int):
    """int_0^inf x/(x - s) exp(-p x) dx = 1/p + s J(p)."""
    s = _sign(s)
    p, big = _split(p)
    out = np.empty_like(p)
    small = ~big
    out[small] = 1.0 / p[small] + s * exp_resolvent(p[small], s)
    pb = p[big]
    n = np.arange(1, _N_TERMS + 1)
    out[big] = (_laplace_series_coeffs(s)[None, :] / pb[:, None] ** (n[None, :] + 1)).sum(axis=1)
    return out


def laplace_resolvent_log_derivative(p, s: int):
    """p * d/dp laplace_resolvent(p, s)."""
    s = _sign(s)
    p, big = _split(p)
    out = np.empty_like(p)
    small = ~big
    ps = p[small]
    out[small] = -1.0 / ps - ps * exp_resolvent(ps, s) - s
    pb = p[big]
    n = np.arange(1, _N_TERMS + 1)
    coef = -(n + 1) * _laplace_series_coeffs(s)
    out[big] = (coef[None, :] / pb[:, None] ** (n[None, :] + 1)).sum(axis=1)
    return out


def aux_fg(b):
    """Auxiliary functions f(b) = Ci sin b - si cos b and g(b) = -Ci cos b - si sin b.

    ``si = Si - pi/2``. Both are smooth and non-oscillatory for b > 0.
    """
    b, big = _split(b)
    f = np.empty_like(b)
    g = np.empty_like(b)
    small = ~big
    bs = b[small]
    si, ci = sp.sici(bs)
    si = si - 0.5 * np.pi
    f[small] = ci * np.sin(bs) - si * np.cos(bs)
    g[small] = -ci * np.cos(bs) - si * np.sin(bs)
    bb = b[big][:, None]
    n = np.arange(_N_TERMS // 2)
    alt = (-1.0) ** n
    f[big] = (alt * _FACT[2 * n] / bb ** (2 * n + 1)).sum(axis=1)
    g[big] = (alt * _FACT[2 * n + 1] / bb ** (2 * n + 2)).sum(axis=1)
    return f, g


def cosine_resolvent_smooth(b, s: int):
    """Non-oscillatory part s*g(b) of int_0^inf cos(b x)/(x - s) dx.

    For the excited state the full transform also has -pi sin(b), which
    callers add through an exact sine transform.
    """
    s = _sign(s)
    return s * aux_fg(b)[1]


def cosine_resolvent_smooth_log_derivative(b, s: int):
    """b * d/db of :func:`cosine_resolvent_smooth`, i.e. s*(b f(b) - 1)."""
    s = _sign(s)
    b, big = _split(b)
    out = np.empty_like(b)
    small = ~big
    f, _ = aux_fg(b[small])
    out[small] = b[small] * f - 1.0
    bb = b[big][:, None]
    n = np.arange(1, _N_TERMS // 2)
    out[big] = ((-1.0) ** n * _FACT[2 * n] / bb ** (2 * n)).sum(axis=1)
    return s * out
