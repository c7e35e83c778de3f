import itertools
import json
import math
from importlib import resources

import numpy as np
import pytest

from cpforce import engine
from cpforce.asymptotics import (
    FORMULA_IDS,
    ZETA3,
    ZETA5,
    CrossoverRefusal,
    Distance,
    RegimeLabel,
    Temperature,
    asymptotic_dimensionless,
    asymptotic_force,
    asymptotic_shift,
    classify_dimensionless,
    classify_regime,
    coeff_f,
    coeff_g,
    coeff_g_numeric,
)
from cpforce.model import AtomSpec, DomainError, Geometry, PerfectConductor, RealConstant, ShiftUnit, ThermalConfig

INF = math.inf
GROUND, EXCITED = -1, 1


def test_zeta_constants():
    n = np.arange(1, 1_000_001, dtype=float)
    np.testing.assert_allclose(ZETA3, np.sum(n**-3.0), rtol=1e-12)
    np.testing.assert_allclose(ZETA5, np.sum(n**-5.0), rtol=1e-15)


def test_coefficients_at_unit_permittivity():
    for k in (1, 4, 6):
        assert coeff_f(k, 1.0).value == 0.0
    assert coeff_f(5, 1.0).value == 2.0
    with pytest.raises(DomainError):
        coeff_f(7, 1.0)


def test_coefficients_reject_conductor():
    with pytest.raises(DomainError):
        coeff_f(1, INF)


def test_integral_coefficients_match_frozen_reference():
    ref = json.loads(resources.files("cpforce").joinpath("data/reference.json").read_text())
    for key, value in ref["coeff_f"].items():
        k, eps = key.split("@")
        np.testing.assert_allclose(coeff_f(int(k), float(eps)).value, value, rtol=1e-10)


def test_g_conductor():
    assert coeff_g(INF) == -6.0


@pytest.mark.parametrize("eps", [2.0, 4.0, 10.0])
def test_g_closed_form_matches_numeric_assembly(eps):
    np.testing.assert_allclose(coeff_g(eps), coeff_g_numeric(eps).value, rtol=1e-6)


def test_g_negative_on_grid():
    assert all(coeff_g(e) < 0 for e in np.linspace(1.1, 100.0, 50))


def test_g_tends_to_conductor_value():
    np.testing.assert_allclose(coeff_g(1e12), -6.0, rtol=1e-4)


@pytest.mark.parametrize("eps", [50.0, 999.0, 1e3, 1e5, 1e9])
def test_g_matches_high_precision_closed_form(eps):
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 60
    e = mpmath.mpf(eps)
    se, rm, rp = mpmath.sqrt(e), mpmath.sqrt(e - 1), mpmath.sqrt(e + 1)
    ref = (
        (-6 * e**2 + 3 * e**1.5 + 4 * e + 3 * se - 10) / (e - 1)
        + 3 * (2 * e**3 - 4 * e**2 + 3 * e + 1) / (e - 1) ** 1.5 * mpmath.log(se + rm)
        + 6 * e**2 / rp * mpmath.log((1 + rp) / (e + mpmath.sqrt(e * (e + 1))))
    )
    np.testing.assert_allclose(coeff_g(eps), float(ref), rtol=1e-9)


# --- classifier ----------------------------------------------------------------------

def test_classify_low_temperature_short():
    label = classify_dimensionless(0.01, 100.0, 100.0, 2.0)
    assert (label.temperature, label.distance) == (Temperature.LOW, Distance.SHORT)
    assert all(m >= 50 for m in label.margins.values())


def test_classify_high_temperature_long():
    label = classify_dimensionless(10.0, 0.01, 0.01, 2.0)
    assert (label.temperature, label.distance) == (Temperature.HIGH, Distance.LONG)


def test_classify_crossover():
    label = classify_dimensionless(1.0, 1.0, 1.0, 2.0)
    assert label.is_crossover and label.name == "crossover"
    with pytest.raises(CrossoverRefusal):
        asymptotic_dimensionless(1.0, 1.0, 1.0, 2.0, GROUND)


def test_classify_guard_near_unit_permittivity():
    label = classify_dimensionless(0.005, 2e-5, 4e-5, 1.1)
    assert label.distance is Distance.CROSSOVER and "eps" in label.note


def test_margin_controls_classification():
    assert classify_dimensionless(0.05, 100.0, 100.0, 2.0, margin=5).distance is Distance.SHORT
    assert classify_dimensionless(0.05, 100.0, 100.0, 2.0, margin=50).is_crossover


def test_classify_regime_si():
    atom = AtomSpec.from_wavelength(1e-6, 1e-39)
    label = classify_regime(atom, Geometry(1e-8), ThermalConfig(1e-4, 1e-4), RealConstant(2.0))
    assert label.name == "lowT.short"


# --- printed totals ------------------------------------------------------------------

def test_low_temperature_long_ground_total():
    zbar, bs, be, eps = 1e4, 100.0, 200.0, 3.0
    a = asymptotic_dimensionless(zbar, bs, be, eps, GROUND)
    printed = -((eps + 1) / math.sqrt(eps - 1) * math.pi / (12 * zbar**2) * (1 / bs**2 - 1 / be**2)
                - coeff_g(eps) / (16 * math.pi * zbar**4))
    np.testing.assert_allclose(a.value - a.parts["eq"], printed, rtol=1e-13)
    assert a.formula_id == "lowT.long.ground.dielectric"


def test_high_temperature_intermediate_ground_total():
    zbar, bs, be, eps = 0.005, 2e-5, 4e-5, 4.0
    a = asymptotic_dimensionless(zbar, bs, be, eps, GROUND)
    f5 = coeff_f(5, eps).value
    printed = -((eps - 1) / (eps + 1) / (8 * zbar**3) - (f5 / bs - 2 / be) / (4 * zbar))
    np.testing.assert_allclose(a.value, printed, rtol=1e-13)


def test_conductor_low_temperature_long_ground():
    zbar, be = 1e4, 100.0
    a = asymptotic_dimensionless(zbar, be, be, INF, GROUND)
    np.testing.assert_allclose(a.parts["eq"], -1 / (4 * be * zbar**3), rtol=1e-14)
    assert a.parts["neq"] == 0.0


def test_low_temperature_states_are_antisymmetric_in_thermal_parts():
    g = asymptotic_dimensionless(0.005, 500.0, 1000.0, 2.0, GROUND)
    e = asymptotic_dimensionless(0.005, 500.0, 1000.0, 2.0, EXCITED)
    assert g.parts["eq"] == -e.parts["eq"]
    assert g.parts["neq"] == -e.parts["neq"]


# --- forces --------------------------------------------------------------------------

BLOCK_POINTS = {
    (Temperature.LOW, Distance.SHORT): (0.05, 500.0, 1000.0),
    (Temperature.LOW, Distance.INTERMEDIATE): (40.0, 1e5, 2e5),
    (Temperature.LOW, Distance.LONG): (3e3, 100.0, 200.0),
    (Temperature.HIGH, Distance.SHORT): (1e-4, 1e-3, 2e-3),
    (Temperature.HIGH, Distance.INTERMEDIATE): (0.03, 2e-5, 4e-5),
    (Temperature.HIGH, Distance.LONG): (37.3, 0.01, 0.02),
}


def _five_point(fun, x, h):
    return (fun(x - 2 * h) - 8 * fun(x - h) + 8 * fun(x + h) - fun(x + 2 * h)) / (12 * h)


@pytest.mark.parametrize("key,eps,s", [(k, e, s) for k in BLOCK_POINTS for e in (2.0, INF) for s in (GROUND, EXCITED)])
def test_block_derivative_matches_finite_difference(key, eps, s):
    zbar, bs, be = BLOCK_POINTS[key]
    label = RegimeLabel(*key)
    h = 1e-3 * min(zbar, 0.5)

    def value(z):
        return asymptotic_dimensionless(z, bs, be, eps, s, regime=label).value

    exact = asymptotic_dimensionless(zbar, bs, be, eps, s, regime=label, derivative=True).value
    np.testing.assert_allclose(exact, _five_point(value, zbar, h), rtol=1e-8)


def test_every_formula_id_is_reachable():
    seen = set()
    for key, eps, s in itertools.product(BLOCK_POINTS, (2.0, INF), (GROUND, EXCITED)):
        zbar, bs, be = BLOCK_POINTS[key]
        seen.add(asymptotic_dimensionless(zbar, bs, be, eps, s, regime=RegimeLabel(*key)).formula_id)
    assert seen == set(FORMULA_IDS)


def test_si_shift_and_force_scaling():
    atom = AtomSpec.from_wavelength(1e-6, 5e-39)
    geom, thermal = Geometry(5e-9), ThermalConfig(5e-4, 1e-3)
    unit = ShiftUnit.for_atom(atom)
    dimless = asymptotic_dimensionless(5e-3, 500.0, 1000.0, 2.0, GROUND)
    shift = asymptotic_shift(atom, RealConstant(2.0), geom, thermal)
    np.testing.assert_allclose(shift.value, unit.to_si(dimless.value), rtol=1e-13)
    force = asymptotic_force(atom, RealConstant(2.0), geom, thermal)
    deriv = asymptotic_dimensionless(5e-3, 500.0, 1000.0, 2.0, GROUND, derivative=True)
    np.testing.assert_allclose(force.value, -unit.scale / 1e-6 * deriv.value, rtol=1e-13)
    cond = asymptotic_shift(atom, PerfectConductor(), geom, thermal)
    assert cond.formula_id.startswith("conductor.")


REGIME_CASES = [
    (0.005, 500.0, 1000.0, 2.0),
    (1e4, 100.0, 200.0, 2.0),
    (1e-6, 1e-3, 2e-3, 4.0),
    (0.005, 2e-5, 4e-5, 4.0),
    (100.0, 0.01, 0.02, 2.0),
    (30.0, INF, INF, INF),
]


@pytest.mark.parametrize("case", REGIME_CASES)
@pytest.mark.parametrize("s", [GROUND, EXCITED])
def test_closed_forms_track_engine(case, s):
    zbar, bs, be, eps = case
    a = asymptotic_dimensionless(zbar, bs, be, eps, s)
    numeric = sum(p.value for p in engine.shift_dimensionless(zbar, bs, be, eps, s).values())
    if a.omits_contact_constant:
        numeric -= engine.equilibrium_contact_term(be, eps, s) + engine.nonequilibrium_contact_term(bs, be, eps, s)
    np.testing.assert_allclose(numeric, a.value, rtol=0.05)
