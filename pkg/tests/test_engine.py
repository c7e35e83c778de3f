import math

import numpy as np
import pytest
from scipy.integrate import quad

from cpforce import engine
from cpforce.asymptotics import coeff_g
from cpforce.model import (
    AtomSpec,
    ComplexPermittivity,
    Geometry,
    InvalidInputError,
    PerfectConductor,
    RealConstant,
    ShiftUnit,
    ThermalConfig,
)

INF = math.inf
GROUND, EXCITED = -1, 1


def total(parts):
    return sum(p.value for p in parts.values())


def test_short_distance_van_der_waals():
    eps, zbar = 2.0, 0.01
    expected = -(eps - 1) / (eps + 1) / (8 * zbar**3)
    np.testing.assert_allclose(total(engine.shift_dimensionless(zbar, INF, INF, eps, GROUND)), expected, rtol=0.02)


def test_short_distance_thermal_correction_negligible():
    eps, zbar = 2.0, 0.01
    expected = -(eps - 1) / (eps + 1) / (8 * zbar**3)
    parts = engine.shift_dimensionless(zbar, 100.0, 100.0, eps, GROUND)
    np.testing.assert_allclose(total(parts), expected, rtol=0.02)
    assert abs(parts["eq"].value) < 1e-6 * abs(expected)


def test_long_distance_casimir_polder_dielectric():
    zbar = 10.0
    expected = coeff_g(2.0) / (16 * math.pi * zbar**4)
    value = total(engine.shift_dimensionless(zbar, INF, INF, 2.0, GROUND))
    assert value < 0.0
    np.testing.assert_allclose(value, expected, rtol=0.02)


def test_long_distance_conductor():
    zbar = 10.0
    value = total(engine.shift_dimensionless(zbar, INF, INF, INF, GROUND))
    np.testing.assert_allclose(value, -3 / (8 * math.pi * zbar**4), rtol=0.02)


def test_equilibrium_zero_temperature():
    assert engine.equilibrium_dimensionless(1.0, INF, 2.0, GROUND).value == 0.0


def test_equilibrium_state_antisymmetry():
    g = engine.equilibrium_dimensionless(5.0, 500.0, 2.0, GROUND).value
    e = engine.equilibrium_dimensionless(5.0, 500.0, 2.0, EXCITED).value
    assert g == -e


def test_nonequilibrium_vanishes_at_equal_temperatures():
    assert engine.nonequilibrium_dimensionless(3.0, 7.0, 7.0, 2.0, GROUND).value == 0.0


def test_nonequilibrium_swap_flips_sign():
    a = engine.nonequilibrium_dimensionless(3.0, 5.0, 9.0, 4.0, EXCITED).value
    b = engine.nonequilibrium_dimensionless(3.0, 9.0, 5.0, 4.0, EXCITED).value
    assert a == -b and a != 0.0


def test_nonequilibrium_low_temperature_long_distance():
    zbar, bs, be, eps = 2500.0, 100.0, 200.0, 2.0
    expected = -math.pi / 12 * (eps + 1) / math.sqrt(eps - 1) * (1 / bs**2 - 1 / be**2) / zbar**2
    np.testing.assert_allclose(engine.nonequilibrium_dimensionless(zbar, bs, be, eps, GROUND).value, expected, rtol=0.05)


def _bose_difference_moment(bs, be):
    """PV int x/(x^2 - 1) [n(bs x) - n(be x)] dx by scipy's Cauchy-weight quadrature."""

    def dn(x):
        return 1 / math.expm1(bs * x) - 1 / math.expm1(be * x)

    def near(x):
        return 1 / bs - 1 / be if x == 0.0 else dn(x) * x / (x + 1)

    a = quad(near, 0, 2, weight="cauchy", wvar=1.0, epsabs=1e-15, epsrel=1e-13, limit=500)[0]
    b = quad(lambda x: x / (x * x - 1) * dn(x), 2, 100 / min(bs, be), epsabs=1e-15, epsrel=1e-13, limit=500)[0]
    return a + b


@pytest.mark.parametrize("zbar,bs,be", [(1e6, 0.01, 0.02), (1e5, 1.0, 3.0)])
def test_nonequilibrium_large_distance_limit(zbar, bs, be):
    # F_A(x) -> A'(0)/(k x)^2 once k x >> 1, leaving a single Bose-weighted PV moment
    eps = 2.0
    k = 2 * zbar * math.sqrt(eps - 1)
    slope = (eps + 1) * math.sqrt(eps - 1)
    expected = 2 * slope / (math.pi * k * k) * _bose_difference_moment(bs, be)
    np.testing.assert_allclose(engine.nonequilibrium_dimensionless(zbar, bs, be, eps, GROUND).value, expected,
                               rtol=1e-4)


def test_conductor_has_no_nonequilibrium_part():
    assert engine.nonequilibrium_dimensionless(2.0, 1.0, 5.0, INF, GROUND).value == 0.0


def test_no_interface_gives_zero():
    parts = engine.shift_dimensionless(1.0, 2.0, 5.0, 1.0, EXCITED)
    assert all(p.value == 0.0 for p in parts.values())


def test_contact_terms_are_distance_limits():
    eps, be, bs = 2.0, 50.0, 20.0
    eq = engine.equilibrium_dimensionless(1e-6, be, eps, GROUND).value
    np.testing.assert_allclose(eq, engine.equilibrium_contact_term(be, eps, GROUND), rtol=1e-4)
    neq = engine.nonequilibrium_dimensionless(1e-6, bs, be, eps, GROUND).value
    np.testing.assert_allclose(neq, engine.nonequilibrium_contact_term(bs, be, eps, GROUND), rtol=1e-4)


def test_short_distance_force():
    eps, zbar = 2.0, 0.01
    expected = -3 * (eps - 1) / (eps + 1) / (8 * zbar**4)
    np.testing.assert_allclose(total(engine.force_dimensionless(zbar, 100.0, 100.0, eps, GROUND)), expected, rtol=0.02)


def test_low_temperature_long_distance_force():
    zbar, bs, be, eps = 2500.0, 100.0, 200.0, 2.0
    expected = -math.pi / 6 * (eps + 1) / math.sqrt(eps - 1) * (1 / bs**2 - 1 / be**2) / zbar**3
    value = total(engine.force_dimensionless(zbar, bs, be, eps, GROUND))
    np.testing.assert_allclose(value, expected, rtol=0.05)
    assert value < 0.0  # hotter substrate attracts
    assert total(engine.force_dimensionless(zbar, be, bs, eps, GROUND)) > 0.0


def test_conductor_thermal_force_lifshitz_like():
    zbar, be = 3000.0, 100.0
    eq = engine.force_dimensionless(zbar, be, be, INF, GROUND)["eq"].value
    np.testing.assert_allclose(eq, -3 / (4 * be * zbar**4), rtol=0.03)


@pytest.mark.parametrize("args", [(0.3, 2.0, 5.0, 3.0, EXCITED), (4.0, 10.0, 3.0, 2.0, GROUND),
                                  (1.5, 1.0, 1.0, INF, EXCITED)])
def test_force_methods_agree(args):
    a = total(engine.force_dimensionless(*args))
    b = total(engine.force_central_difference_dimensionless(*args))
    np.testing.assert_allclose(a, b, rtol=1e-6)


def test_si_wrappers_scale_consistently():
    atom = AtomSpec.from_wavelength(780e-9, 5.3e-39, "excited")
    thermal = ThermalConfig(5e-6, 12e-6)
    geom = Geometry(1.3e-6)
    unit = ShiftUnit.for_atom(atom)
    lam = atom.wavelength
    dimless = engine.shift_dimensionless(geom.z / lam, thermal.beta_s / lam, thermal.beta_e / lam, 3.0, EXCITED)
    si = engine.total_shift(atom, RealConstant(3.0), geom, thermal)
    np.testing.assert_allclose(si.total, unit.to_si(total(dimless)), rtol=1e-12)
    f = engine.force(atom, RealConstant(3.0), geom, thermal, cross_check=True)
    assert f.status == "ok"
    np.testing.assert_allclose(f.cross_check, f.total, rtol=1e-6)


def test_conductor_medium_accepted():
    atom = AtomSpec.from_wavelength(780e-9, 5.3e-39)
    b = engine.total_shift(atom, PerfectConductor(), Geometry(1e-6), ThermalConfig.from_temperatures(300, 10))
    assert b.neq.value == 0.0


def test_complex_permittivity_rejected():
    atom = AtomSpec.from_wavelength(780e-9, 5.3e-39)
    with pytest.raises(InvalidInputError):
        engine.total_shift(atom, ComplexPermittivity(2.0, 0.1), Geometry(1e-6), ThermalConfig.zero())


def test_engine_options_validate_tolerance():
    with pytest.raises(InvalidInputError):
        engine.EngineOptions(tol=0.0)
