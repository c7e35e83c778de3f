import math

import numpy as np
import pytest

from cpforce.model import (
    C_LIGHT,
    HBAR,
    AtomSpec,
    ComplexPermittivity,
    DomainError,
    Geometry,
    InvalidInputError,
    PartValue,
    PerfectConductor,
    RealConstant,
    ShiftBreakdown,
    ShiftUnit,
    State,
    ThermalConfig,
    bose,
    nondimensionalize,
    parse_medium,
)


def test_state_sign():
    assert State.GROUND.sign == -1
    assert State.EXCITED.sign == 1
    assert State.parse("excited") is State.EXCITED


def test_atom_from_wavelength_round_trip():
    atom = AtomSpec.from_wavelength(780e-9, 5.3e-39, "excited")
    np.testing.assert_allclose(atom.wavelength, 780e-9, rtol=1e-15)
    assert atom.omega_ab == atom.omega0
    assert atom.with_state("ground").omega_ab == -atom.omega0


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_atom_rejects_bad_frequency(bad):
    with pytest.raises(InvalidInputError):
        AtomSpec(bad, 1e-39)


def test_media():
    assert isinstance(parse_medium("conductor"), PerfectConductor)
    assert parse_medium(2) == RealConstant(2.0)
    assert parse_medium("2.5+0.1j") == ComplexPermittivity(2.5, 0.1)
    with pytest.raises(InvalidInputError):
        RealConstant(0.5)
    with pytest.raises(InvalidInputError):
        ComplexPermittivity(2.0, -0.1)
    with pytest.raises(InvalidInputError):
        parse_medium("glass")


def test_thermal_wavelengths():
    th = ThermalConfig.from_temperatures(300.0, 0.0)
    assert math.isinf(th.beta_e)
    np.testing.assert_allclose(th.beta_s, HBAR * C_LIGHT / (1.380649e-23 * 300.0), rtol=1e-12)
    np.testing.assert_allclose(th.temperatures, (300.0, 0.0), rtol=1e-12)
    assert th.swapped() == ThermalConfig(th.beta_e, th.beta_s)
    with pytest.raises(InvalidInputError):
        ThermalConfig.from_temperatures(-1.0, 2.0)


def test_nondimensionalize_unit_ratios():
    atom = AtomSpec.from_wavelength(1e-6, 1e-39)
    p = nondimensionalize(atom, RealConstant(2.0), ThermalConfig(10e-6, 10e-6), Geometry(1e-6))
    np.testing.assert_allclose([p.zbar, p.bs, p.be], [1.0, 10.0, 10.0], rtol=1e-14)
    np.testing.assert_allclose([p.a("e"), p.b("e")], [0.2, 0.2], rtol=1e-14)


def test_nondimensionalize_no_evanescent_scale():
    atom = AtomSpec.from_wavelength(1e-6, 1e-39)
    p = nondimensionalize(atom, RealConstant(1.0), ThermalConfig(1e-5, 1e-5), Geometry(3e-6))
    assert p.a() == 0.0


def test_nondimensionalize_rubidium_like():
    atom = AtomSpec.from_wavelength(780e-9, 1e-39)
    p = nondimensionalize(atom, RealConstant(4.0), ThermalConfig(7.6e-6, 7.6e-6), Geometry(7.8e-6))
    np.testing.assert_allclose(p.zbar, 10.0, rtol=1e-14)
    np.testing.assert_allclose(p.y0("e"), 9.743589743589743, rtol=1e-14)
    np.testing.assert_allclose(p.a("e"), 3.555262183957169, rtol=1e-14)
    np.testing.assert_allclose(p.b("e"), 2.0526315789473686, rtol=1e-14)


def test_shift_unit_round_trip():
    atom = AtomSpec.from_wavelength(780e-9, 5.3e-39)
    unit = ShiftUnit.for_atom(atom)
    np.testing.assert_allclose(unit.from_si(unit.to_si(0.123)), 0.123, rtol=1e-15)
    np.testing.assert_allclose(unit.force_scale(atom), unit.scale / 780e-9, rtol=1e-15)


def test_breakdown_totals():
    unit = ShiftUnit(2.0)
    b = ShiftBreakdown(PartValue(1.0, 0.1), PartValue(2.0, 0.2), PartValue(-0.5, 0.05, "not converged"), unit)
    assert b.total == 2.5
    np.testing.assert_allclose(b.total_err, 0.35)
    assert b.status != "ok"


def test_bose_limits():
    np.testing.assert_allclose(bose(1e-8), 1e8 - 0.5, rtol=1e-9)
    assert bose(800.0) == 0.0
    np.testing.assert_allclose(bose(np.log(2.0)), 1.0, rtol=1e-14)


def test_domain_error_is_value_error():
    assert issubclass(DomainError, ValueError)
