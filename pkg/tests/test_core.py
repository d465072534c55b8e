import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import constants

from lambdacool.core import (
    AngularFrequency,
    MechanicalParams,
    OpticalCavityParams,
    cascade_coupling,
    drive_amplitude,
    effective_cavity_response,
    feedback_coupling,
    hz,
    validate_cavity,
)
from lambdacool.errors import (
    InputCouplingExceedsTotal,
    NegativePower,
    NonPositiveLinewidth,
    SingularResponse,
    ValidationError,
)

finite_hz = st.floats(min_value=-1e15, max_value=1e15, allow_nan=False, allow_infinity=False)


@given(finite_hz)
def test_unit_round_trip(f):
    back = AngularFrequency.from_hz(f).hz
    assert back == pytest.approx(f, rel=1e-15, abs=0.0)


def test_angular_frequency_rejects_non_finite():
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(ValidationError):
            AngularFrequency(bad)


def test_from_rad_s_is_identity():
    assert float(AngularFrequency.from_rad_s(1.2345)) == 1.2345


def test_validate_cavity_accepts_fig8_values():
    cav = OpticalCavityParams.from_power(hz(240e3), 200e-9, kappa_in=hz(120e3))
    assert validate_cavity(cav) is cav


def test_validate_cavity_errors_name_field():
    with pytest.raises(NonPositiveLinewidth) as exc:
        validate_cavity(OpticalCavityParams(0.0, 0.0))
    assert exc.value.field == "kappa"
    with pytest.raises(InputCouplingExceedsTotal) as exc:
        validate_cavity(OpticalCavityParams(1.0, 1.5))
    assert exc.value.field == "kappa_in"
    with pytest.raises(NegativePower) as exc:
        validate_cavity(OpticalCavityParams(1.0, 0.5, input_power=-1.0))
    assert exc.value.field == "input_power"


def test_drive_amplitude_hand_value():
    # sqrt(P kappa_in / (hbar omega)) written out with CODATA constants
    h = 6.62607015e-34
    nu = 299792458.0 / 780e-9
    expected = math.sqrt(2e-7 * (2 * math.pi * 120e3) / (h * nu))
    assert drive_amplitude(200e-9, hz(120e3), 780e-9) == pytest.approx(expected, rel=1e-9)
    assert drive_amplitude(0.0, hz(120e3)) == 0.0


def test_from_power_matches_drive_amplitude():
    cav = OpticalCavityParams.from_power(hz(240e3), 200e-9)
    assert cav.kappa_in == pytest.approx(0.5 * cav.kappa, rel=1e-15)
    assert cav.drive == pytest.approx(drive_amplitude(200e-9, cav.kappa_in), rel=1e-12)


def test_mechanical_derived_quantities():
    m = MechanicalParams(omega_m=hz(300e3), quality_factor=5e7, g0=hz(200), bath_temperature=300.0)
    assert m.gamma_mech == m.omega_m / m.quality_factor
    n = constants.k * 300.0 / (constants.hbar * m.omega_m)
    assert m.n_bath == pytest.approx(n, rel=1e-15)
    assert m.x_zpt is None
    m2 = MechanicalParams(hz(300e3), 5e7, hz(200), 300.0, effective_mass=1e-12)
    assert m2.x_zpt == pytest.approx(math.sqrt(constants.hbar / (2e-12 * m.omega_m)))


def test_couplings():
    assert feedback_coupling(4.0, 9.0) == pytest.approx(6.0)
    assert cascade_coupling(8.0, 1.0) == pytest.approx(2.0)


def test_response_lorentzian_random_points():
    rng = np.random.default_rng(1)
    for _ in range(100):
        d = rng.uniform(-1e8, 1e8)
        k = rng.uniform(1e3, 1e8)
        eta = rng.uniform(0, 1e7)
        got = effective_cavity_response(d, k, 0.0, eta)
        assert got == pytest.approx(eta / (-1j * d + k / 2), rel=1e-14)


def test_response_monotone_in_detuning():
    d = np.linspace(0, 50.0, 1000)
    mag = np.abs(effective_cavity_response(d, 1.0, 0.0, 1.0))
    assert np.all(np.diff(mag) < 0)
    mag_neg = np.abs(effective_cavity_response(-d, 1.0, 0.0, 1.0))
    np.testing.assert_array_equal(mag, mag_neg)


def test_response_singular_at_gain_threshold():
    with pytest.raises(SingularResponse):
        effective_cavity_response(0.0, 2.0, -1j, 1.0)


@settings(max_examples=50)
@given(st.floats(1e3, 1e9), st.floats(-1e9, 1e9), st.floats(0, 1e9))
def test_absorbing_medium_never_amplifies(kappa, detuning, im_chi):
    bare = abs(effective_cavity_response(detuning, kappa, 0.0, 1.0))
    dressed = abs(effective_cavity_response(detuning, kappa, 1j * im_chi, 1.0))
    assert dressed <= bare * (1 + 1e-12)
