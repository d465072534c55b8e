"""Shared parameter types, unit conventions and the single-cavity response.

All rates, detunings and frequencies are stored in angular units (rad/s).
Configuration files carry values in Hz and are multiplied by 2*pi on load,
matching the ``2*pi x value`` way experimental parameters are quoted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from .errors import (
    InputCouplingExceedsTotal,
    NegativePower,
    NonPositiveLinewidth,
    SingularResponse,
    ValidationError,
)

HBAR = constants.hbar
K_B = constants.k
C_LIGHT = constants.c
TWO_PI = 2.0 * math.pi

#: Wavelength used when a config gives input power but no wavelength (Rb D2).
DEFAULT_WAVELENGTH = 780e-9

#: Relative size (in units of kappa/2) below which a response denominator
#: is treated as singular.
SINGULAR_RTOL = 1e-12


class AngularFrequency(float):
    """A float in rad/s that refuses NaN/Inf.

    Behaves as a plain float in arithmetic; the class only adds the two
    constructors and the ``hz`` view.
    """

    def __new__(cls, value):
        value = float(value)
        if not math.isfinite(value):
            raise ValidationError("frequency", f"must be finite, got {value!r}")
        return super().__new__(cls, value)

    @classmethod
    def from_hz(cls, value_hz):
        return cls(TWO_PI * float(value_hz))

    @classmethod
    def from_rad_s(cls, value):
        return cls(value)

    @property
    def hz(self):
        return float(self) / TWO_PI

    def __repr__(self):
        return f"AngularFrequency(2pi x {self.hz:.6g} Hz)"


def hz(value_hz):
    """Shorthand for :meth:`AngularFrequency.from_hz`."""
    return AngularFrequency.from_hz(value_hz)


def to_hz(omega):
    return np.asarray(omega) / TWO_PI if np.ndim(omega) else float(omega) / TWO_PI


def drive_amplitude(power, kappa_in, wavelength=DEFAULT_WAVELENGTH):
    """Cavity drive rate ``sqrt(P * kappa_in / (hbar * omega))`` in sqrt(photons/s).

    ``omega = 2*pi*c / wavelength`` is the optical carrier frequency.
    """
    if power < 0:
        raise NegativePower("input_power", f"must be >= 0, got {power!r}")
    if kappa_in <= 0:
        raise NonPositiveLinewidth("kappa_in", f"must be > 0, got {kappa_in!r}")
    if wavelength <= 0:
        raise ValidationError("drive_wavelength", f"must be > 0, got {wavelength!r}")
    omega = TWO_PI * C_LIGHT / wavelength
    return math.sqrt(power * kappa_in / (HBAR * omega))


@dataclass(frozen=True)
class OpticalCavityParams:
    """One driven optical cavity.

    ``kappa`` is the full energy decay rate, ``kappa_in`` the part leaving
    through the input mirror and ``detuning`` the drive minus the cavity
    resonance.  ``drive`` is normally derived from ``input_power`` via
    :meth:`from_power`.
    """

    kappa: float
    kappa_in: float
    detuning: float = 0.0
    drive: float = 0.0
    input_power: float = 0.0
    drive_wavelength: float = DEFAULT_WAVELENGTH

    @classmethod
    def from_power(cls, kappa, input_power, kappa_in=None, detuning=0.0,
                   wavelength=DEFAULT_WAVELENGTH):
        """Build a cavity whose drive follows from the input power.

        ``kappa_in`` defaults to ``kappa / 2`` (symmetric two-mirror cavity).
        """
        if kappa_in is None:
            kappa_in = 0.5 * kappa
        params = cls(
            kappa=AngularFrequency(kappa),
            kappa_in=AngularFrequency(kappa_in),
            detuning=AngularFrequency(detuning),
            drive=0.0,
            input_power=float(input_power),
            drive_wavelength=float(wavelength),
        )
        validate_cavity(params)
        eta = drive_amplitude(input_power, kappa_in, wavelength)
        return cls(params.kappa, params.kappa_in, params.detuning, eta,
                   params.input_power, params.drive_wavelength)


def validate_cavity(params):
    """Return ``params`` unchanged if its invariants hold, else raise."""
    if not params.kappa > 0:
        raise NonPositiveLinewidth("kappa", f"must be > 0, got {params.kappa!r}")
    if not params.kappa_in > 0:
        raise NonPositiveLinewidth("kappa_in", f"must be > 0, got {params.kappa_in!r}")
    if params.kappa_in > params.kappa:
        raise InputCouplingExceedsTotal(
            "kappa_in", f"{params.kappa_in!r} exceeds total kappa {params.kappa!r}")
    if params.input_power < 0:
        raise NegativePower("input_power", f"must be >= 0, got {params.input_power!r}")
    if params.drive < 0:
        raise NegativePower("drive", f"must be >= 0, got {params.drive!r}")
    if not params.drive_wavelength > 0:
        raise ValidationError("drive_wavelength", "must be > 0")
    return params


@dataclass(frozen=True)
class MechanicalParams:
    omega_m: float
    quality_factor: float
    g0: float
    bath_temperature: float
    effective_mass: float | None = None

    def __post_init__(self):
        if not self.omega_m > 0:
            raise ValidationError("omega_m", "must be > 0")
        if not self.quality_factor > 0:
            raise ValidationError("quality_factor", "must be > 0")
        if self.g0 < 0:
            raise ValidationError("g0", "must be >= 0")
        if self.bath_temperature < 0:
            raise ValidationError("bath_temperature", "must be >= 0")
        if self.effective_mass is not None and not self.effective_mass > 0:
            raise ValidationError("effective_mass", "must be > 0")

    @property
    def gamma_mech(self):
        """Intrinsic mechanical damping ``omega_m / Q``."""
        return self.omega_m / self.quality_factor

    @property
    def n_bath(self):
        """Thermal occupation in the high-temperature limit, ``k_B T / (hbar omega_m)``."""
        return K_B * self.bath_temperature / (HBAR * self.omega_m)

    @property
    def x_zpt(self):
        if self.effective_mass is None:
            return None
        return math.sqrt(HBAR / (2.0 * self.effective_mass * self.omega_m))


def feedback_coupling(kappa_in_a, kappa_in_m):
    """Inter-cavity coupling for mode-matched mirrors, ``sqrt(kappa_l,ca * kappa_l,cm)``."""
    return AngularFrequency(math.sqrt(kappa_in_a * kappa_in_m))


def cascade_coupling(kappa_a, kappa_cm):
    """Running-wave coupling of a free-space medium, ``sqrt(kappa_a * kappa_cm / 2)``."""
    return AngularFrequency(math.sqrt(kappa_a * kappa_cm / 2.0))


def susceptibility_close(a, b, rtol=1e-12, atol=0.0):
    """Field-wise comparison of two complex susceptibilities."""
    a = complex(a)
    b = complex(b)
    scale = max(abs(a), abs(b))
    tol = atol + rtol * scale
    return abs(a.real - b.real) <= tol and abs(a.imag - b.imag) <= tol


def effective_cavity_response(detuning, kappa, chi, drive, singular_rtol=SINGULAR_RTOL):
    """Steady intracavity amplitude ``drive / (-i*detuning + kappa/2 - i*chi)``.

    Works element-wise on arrays.  Raises :class:`SingularResponse` when the
    denominator modulus falls below ``singular_rtol * kappa / 2`` anywhere.
    """
    den = -1j * np.asarray(detuning) + 0.5 * kappa - 1j * np.asarray(chi)
    if np.any(np.abs(den) < singular_rtol * 0.5 * kappa):
        raise SingularResponse(
            "response denominator vanishes (gain balances cavity loss)")
    out = drive / den
    return complex(out) if np.ndim(out) == 0 else out
