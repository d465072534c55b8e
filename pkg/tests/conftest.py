import warnings

import pytest

from lambdacool import EitMediumParams, MechanicalParams, RirMediumParams, hz
from lambdacool.sweep import _system, load_preset

GAMMA_E = hz(6.07e6)


def fig3_medium(rabi=6.0, **kw):
    return EitMediumParams(n_atoms=1e8, rabi_control=rabi * GAMMA_E, rabi_single_atom=hz(100e3),
                           gamma_e=GAMMA_E, delta_a=500 * GAMMA_E, **kw)


def fig5_medium(rabi=2.6, temperature=21e-6, gamma_coh=hz(10e3), n_atoms=1e8, **kw):
    return RirMediumParams(n_atoms=n_atoms, rabi_control=rabi * GAMMA_E, rabi_single_atom=hz(500e3),
                           delta_a=-15 * GAMMA_E, omega_r=hz(3.77e3), gamma_coh=gamma_coh,
                           temperature=temperature, gamma_e=GAMMA_E, medium_length=0.5e-3, **kw)


def preset_system(figure, **overrides):
    cfg = load_preset(figure, overrides or None)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return cfg, _system(cfg)


@pytest.fixture
def mech():
    return MechanicalParams(omega_m=hz(300e3), quality_factor=5e7, g0=hz(200),
                            bath_temperature=300.0)
