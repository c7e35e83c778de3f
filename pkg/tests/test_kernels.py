import math

import numpy as np
import pytest
from scipy.integrate import quad, simpson

from cpforce.engine import vacuum_moment_coefficients
from cpforce.kernels import (
    Kernel,
    Polarization,
    a_kernel,
    cosine_transform,
    f_sigma,
    kernel_A,
    kernel_endpoints,
    kernel_set,
    kernel_T,
    laplace_transform,
    sine_transform,
    subtracted_moment,
    t_kernel,
)
from cpforce.model import C_LIGHT, DomainError, InvalidInputError

PAR, PERP = Polarization.PARALLEL, Polarization.PERPENDICULAR
EPS_GRID = [1.2, 2.0, 4.0, 10.0, 16.0, 100.0]


@pytest.mark.parametrize("eps", EPS_GRID)
def test_traveling_kernels_at_normal_end(eps):
    np.testing.assert_allclose(kernel_T(PAR, 0.0, eps), -0.25, rtol=1e-15)
    np.testing.assert_allclose(kernel_T(PERP, 0.0, eps), -0.5, rtol=1e-15)


@pytest.mark.parametrize("eps", [2.0, 4.0, 10.0])
def test_traveling_kernels_at_grazing_end(eps):
    se = math.sqrt(eps)
    total = 2 * kernel_T(PAR, 1.0, eps) + kernel_T(PERP, 1.0, eps)
    np.testing.assert_allclose(total, (1 - se) / (1 + se), rtol=1e-14)
    assert kernel_T(PERP, 1.0, eps) == 0.0


def test_kernels_vanish_without_interface():
    t = np.linspace(0, 1, 11)
    for sigma in Polarization:
        assert np.all(kernel_T(sigma, t, 1.0) == 0.0)
        assert np.all(kernel_A(sigma, t, 1.0) == 0.0)


@pytest.mark.parametrize("eps", EPS_GRID)
def test_evanescent_kernels_vanish_at_both_ends(eps):
    for sigma in Polarization:
        assert kernel_A(sigma, 0.0, eps) == 0.0
        assert kernel_A(sigma, 1.0, eps) == 0.0


@pytest.mark.parametrize("eps", [1.2, 2.0, 4.0, 16.0])
def test_evanescent_slopes_at_zero(eps):
    h = 1e-6
    root = math.sqrt(eps - 1)
    expected = {PAR: root / 2, PERP: eps * root}
    d = kernel_endpoints(eps)
    for sigma in Polarization:
        fd = (kernel_A(sigma, h, eps) - kernel_A(sigma, 0.0, eps)) / h
        np.testing.assert_allclose(fd, expected[sigma], rtol=1e-5)
        np.testing.assert_allclose(d[sigma].dA0, expected[sigma], rtol=1e-13)


@pytest.mark.parametrize("eps", [1.2, 2.0, 4.0, 16.0, 100.0])
def test_slope_relation_between_kernels(eps):
    for sigma, d in kernel_endpoints(eps).items():
        np.testing.assert_allclose((eps - 1) * d.dT0, d.dA0, rtol=1e-8)


@pytest.mark.parametrize("eps", [2.0, 5.0])
def test_endpoint_derivatives_against_finite_differences(eps):
    h = 1e-3
    d = kernel_endpoints(eps)
    for sigma in Polarization:
        T = t_kernel(sigma, eps)
        # one-sided fourth-order stencils at t = 0 and t = 1
        fwd1 = (-25 * T(0.0) + 48 * T(h) - 36 * T(2 * h) + 16 * T(3 * h) - 3 * T(4 * h)) / (12 * h)
        bwd1 = (25 * T(1.0) - 48 * T(1 - h) + 36 * T(1 - 2 * h) - 16 * T(1 - 3 * h) + 3 * T(1 - 4 * h)) / (12 * h)
        np.testing.assert_allclose(fwd1, d[sigma].dT0, rtol=1e-7, atol=1e-9)
        np.testing.assert_allclose(bwd1, d[sigma].dT1, rtol=1e-7, atol=1e-9)
        h2 = 1e-4
        fwd2 = (2 * T(0.0) - 5 * T(h2) + 4 * T(2 * h2) - T(3 * h2)) / h2**2
        np.testing.assert_allclose(fwd2, d[sigma].d2T0, rtol=1e-4, atol=1e-5)


def test_endpoints_degenerate_without_interface():
    d = kernel_endpoints(1.0)
    assert all(v.degenerate and v.dT0 == 0.0 for v in d.values())


@pytest.mark.parametrize("eps", [1.5, 2.0, 4.0, 30.0])
def test_curvature_gives_van_der_waals_coefficient(eps):
    g1, _ = vacuum_moment_coefficients(eps)
    np.testing.assert_allclose(g1, -math.pi * (eps - 1) / (eps + 1), rtol=1e-10)


def _f_sigma_oracle(sigma, q, eps):
    # composite Simpson; the evanescent part uses t = sin(v) to tame the square-root end
    t = np.linspace(0, 1, 100_001)
    trav = simpson(kernel_T(sigma, t, eps) * np.cos(q * t), x=t)
    v = np.linspace(0, math.pi / 2, 100_001)
    tv = np.sin(v)
    root = math.sqrt(eps - 1)
    evan = simpson(kernel_A(sigma, tv, eps) * np.exp(-q * root * tv) * np.cos(v), x=v)
    return trav + evan


@pytest.mark.parametrize("sigma", list(Polarization))
def test_f_sigma_against_composite_rule(sigma):
    eps, q = 2.0, 5.0
    omega = 1e15
    z = q * C_LIGHT / (2 * omega)
    np.testing.assert_allclose(f_sigma(sigma, z, omega, eps), _f_sigma_oracle(sigma, q, eps), rtol=1e-9)


def test_f_sigma_static_limit():
    eps = 3.0
    for sigma in Polarization:
        ta = quad(lambda t: kernel_T(sigma, t, eps), 0, 1, epsabs=1e-14)[0]
        aa = quad(lambda t: kernel_A(sigma, t, eps), 0, 1, epsabs=1e-14)[0]
        np.testing.assert_allclose(f_sigma(sigma, 1e-6, 0.0, eps), ta + aa, rtol=1e-10)


def test_f_sigma_zero_without_interface():
    assert f_sigma(PAR, 1e-6, 1e15, 1.0) == 0.0


@pytest.mark.parametrize("a", [0.0, 0.3, 3.0, 40.0, 400.0, 5000.0])
def test_transforms_against_quad(a):
    eps = 4.0
    ks = kernel_set(eps)
    kw = dict(limit=2000, epsabs=1e-14, epsrel=1e-12)
    if a == 0.0:
        c = quad(ks.T, 0, 1, **kw)[0]
        s = 0.0
    else:
        c = quad(ks.T, 0, 1, weight="cos", wvar=a, **kw)[0]
        s = quad(ks.T, 0, 1, weight="sin", wvar=a, **kw)[0]
    lap = quad(lambda t: ks.A(t) * math.exp(-a * t), 0, 1, points=[min(1.0, 1 / max(a, 1e-9))], **kw)[0]
    np.testing.assert_allclose(cosine_transform(ks.T, a), c, rtol=1e-9, atol=1e-14)
    np.testing.assert_allclose(sine_transform(ks.T, a), s, rtol=1e-9, atol=1e-14)
    np.testing.assert_allclose(laplace_transform(ks.A, a), lap, rtol=1e-9, atol=1e-16)


def test_transforms_are_vectorised():
    ks = kernel_set(2.0)
    a = np.array([0.1, 1.0, 10.0, 100.0])
    np.testing.assert_allclose(cosine_transform(ks.T, a), [cosine_transform(ks.T, float(x)) for x in a], rtol=1e-13)


def test_subtracted_moment_polynomial():
    k = Kernel(lambda t: 1 + 2 * t + 3 * t**2 + t**3, rho=10.0, label="cubic")
    # (K - 1 - 2t)/t^2 = 3 + t, integral 3.5
    np.testing.assert_allclose(subtracted_moment(k, 2, 2).value, 3.5, rtol=1e-13)
    with pytest.raises(DomainError):
        subtracted_moment(k, 1, 2)


def test_conductor_kernel_set():
    ks = kernel_set(math.inf)
    t = np.linspace(0, 1, 7)
    np.testing.assert_allclose(ks.T(t), -t * t, atol=1e-15)
    assert ks.A.zero and ks.conductor


def test_invalid_inputs():
    with pytest.raises(InvalidInputError):
        kernel_T(PAR, 1.5, 2.0)
    with pytest.raises(InvalidInputError):
        kernel_A(PAR, 0.5, 0.5)
    with pytest.raises(DomainError):
        a_kernel(PAR, 2.0).jet(1.0)
