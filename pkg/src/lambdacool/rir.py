"""Recoil-induced resonance susceptibility of a thermal 1-D gas.

Conventions for this scheme: ``delta_a = omega_0 - omega_1`` (control
detuning from the atomic line) and ``delta = omega_2 - omega_1`` (coupling
minus control).  Momentum ``p`` is measured in units of the two-photon
recoil ``2*hbar*k0`` and treated as continuous; thermal sums are trapezoid
quadratures on a uniform grid whose spacing divides one recoil exactly, so
``p +- 1`` always lands on a grid point.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import C_LIGHT, HBAR, K_B, AngularFrequency, effective_cavity_response
from .errors import GridTooNarrow, ValidationError

#: Minimum half-width of the momentum grid, in thermal standard deviations.
MIN_SIGMAS = 6.0
DEFAULT_SIGMAS = 10.0


@dataclass(frozen=True)
class RirMediumParams:
    n_atoms: float
    rabi_control: float
    rabi_single_atom: float
    delta_a: float
    omega_r: float
    gamma_coh: float
    temperature: float
    gamma_e: float
    medium_length: float
    gamma_pop: float | None = None

    def __post_init__(self):
        if self.gamma_pop is None:
            object.__setattr__(self, "gamma_pop", self.gamma_coh / 10.0)
        if not self.omega_r > 0:
            raise ValidationError("omega_r", "must be > 0")
        if not self.gamma_coh > 0:
            raise ValidationError("gamma_coh", "must be > 0")
        if not self.temperature > 0:
            raise ValidationError("temperature", "must be > 0")
        if not self.medium_length > 0:
            raise ValidationError("medium_length", "must be > 0")
        if self.delta_a == 0:
            raise ValidationError("delta_a", "must be nonzero")
        if self.n_atoms < 0:
            raise ValidationError("n_atoms", "must be >= 0")
        for name in ("rabi_control", "rabi_single_atom", "gamma_e"):
            AngularFrequency(getattr(self, name))
        if abs(self.beta) > 0.3:
            warnings.warn(f"|beta| = {abs(self.beta):.3g} is not small; adiabatic "
                          "elimination of the excited state is questionable", stacklevel=3)

    @property
    def beta(self):
        """Normalized control strength ``Omega / Delta_a``."""
        return self.rabi_control / self.delta_a

    @property
    def kappa_a(self):
        """Free-space decay rate ``c / L_a``."""
        return C_LIGHT / self.medium_length

    @property
    def sigma_p(self):
        return thermal_sigma(self.temperature, self.omega_r)


def thermal_sigma(temperature, omega_r):
    """Standard deviation of the thermal momentum distribution, ``sqrt(k_B T / (8 hbar omega_r))``."""
    return math.sqrt(K_B * temperature / (8.0 * HBAR * omega_r))


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform symmetric momentum grid with normalized thermal weights."""

    p_values: np.ndarray
    weights: np.ndarray
    p_max: float
    n_points: int
    steps_per_recoil: int

    @property
    def spacing(self):
        return 1.0 / self.steps_per_recoil


def steps_for(omega_r, gamma_coh, sigma, min_steps=4):
    """Grid steps per recoil unit.

    Two constraints: ``gamma_coh`` spans at least four of the frequency
    steps ``8*omega_r*dp``, and the Gaussian is sampled at least four times
    per standard deviation.
    """
    m_coh = math.ceil(32.0 * omega_r / gamma_coh) if gamma_coh > 0 else min_steps
    m_gauss = math.ceil(4.0 / sigma)
    return max(min_steps, m_coh, m_gauss)


def thermal_distribution(temperature, omega_r, p_max=None, steps_per_recoil=None,
                         gamma_coh=None):
    """Thermal ground-state momentum distribution ``~ exp(-4 hbar omega_r p^2 / k_B T)``.

    ``p_max`` defaults to ten thermal widths; anything below six raises
    :class:`GridTooNarrow`.  ``steps_per_recoil`` defaults to
    :func:`steps_for` (which needs ``gamma_coh``; without it only the
    Gaussian-sampling constraint applies).
    """
    if not temperature > 0:
        raise ValidationError("temperature", "must be > 0")
    if not omega_r > 0:
        raise ValidationError("omega_r", "must be > 0")
    sigma = thermal_sigma(temperature, omega_r)
    if p_max is None:
        p_max = DEFAULT_SIGMAS * sigma
    if p_max < MIN_SIGMAS * sigma:
        raise GridTooNarrow(f"p_max={p_max:.4g} is below {MIN_SIGMAS:g} sigma_p ({sigma:.4g})")
    if steps_per_recoil is None:
        steps_per_recoil = steps_for(omega_r, gamma_coh if gamma_coh else 0.0, sigma)
    m = int(steps_per_recoil)
    if m < 1:
        raise ValidationError("steps_per_recoil", "must be >= 1")
    half = math.ceil(p_max * m)
    p = np.arange(-half, half + 1, dtype=float) / m
    energy = 4.0 * HBAR * omega_r * p * p / (K_B * temperature)
    dens = np.exp(-energy)
    # uniform-grid trapezoid with negligible end values: weights are point masses
    trap = np.full(p.size, 1.0 / m)
    trap[0] = trap[-1] = 0.5 / m
    w = dens * trap
    w /= w.sum()
    return MomentumGrid(p_values=p, weights=w, p_max=half / m, n_points=p.size,
                        steps_per_recoil=m)


def medium_grid(medium, p_max=None, steps_per_recoil=None):
    return thermal_distribution(medium.temperature, medium.omega_r, p_max=p_max,
                                steps_per_recoil=steps_per_recoil,
                                gamma_coh=medium.gamma_coh)


def background_chi(medium):
    """Off-resonant light shift ``E_a^2 N / Delta_a`` (purely dispersive)."""
    return medium.rabi_single_atom ** 2 * medium.n_atoms / medium.delta_a


def raman_strength(medium):
    """``(beta * E_a)^2 * N``, the prefactor of the recoil sums."""
    return (medium.beta * medium.rabi_single_atom) ** 2 * medium.n_atoms


def chi_rir(medium, grid, delta):
    """RIR susceptibility at two-photon detuning ``delta`` (scalar or array).

    ``Im(chi) < 0`` is gain.  The thermal sums run over ``grid``.
    """
    d = np.asarray(delta, dtype=float)
    s = _kernels.recoil_sum(d, grid.p_values, grid.weights, medium.omega_r, medium.gamma_coh)
    out = background_chi(medium) + raman_strength(medium) * s
    return complex(out) if out.ndim == 0 else out


def refine_grid(medium, delta, rtol=1e-6, grid=None, max_doublings=8):
    """Double the grid density until ``chi_rir`` at ``delta`` moves by less than ``rtol``.

    Returns ``(grid, chi)``.  The relative change is measured against the
    scale of the recoil part so that a large dispersive background cannot
    hide a poorly resolved resonance.
    """
    if grid is None:
        grid = medium_grid(medium)
    chi = chi_rir(medium, grid, delta)
    scale = max(np.max(np.abs(np.asarray(chi) - background_chi(medium))),
                raman_strength(medium) / medium.gamma_coh * 1e-12, 1e-300)
    for _ in range(max_doublings):
        finer = thermal_distribution(medium.temperature, medium.omega_r, p_max=grid.p_max,
                                     steps_per_recoil=2 * grid.steps_per_recoil)
        chi_f = chi_rir(medium, finer, delta)
        change = np.max(np.abs(np.asarray(chi_f) - np.asarray(chi))) / scale
        grid, chi = finer, chi_f
        if change < rtol:
            return grid, chi
    return grid, chi


def rir_medium_field(medium, drive, delta, cavity_detuning=0.0, grid=None, kappa=None):
    """Steady coupling-field amplitude after a free-space RIR medium.

    ``kappa`` defaults to the free-space rate ``c / L_a``.
    """
    if grid is None:
        grid = medium_grid(medium)
    if kappa is None:
        kappa = medium.kappa_a
    chi = chi_rir(medium, grid, delta)
    return effective_cavity_response(cavity_detuning, kappa, chi, drive)


def steady_coherences(medium, grid, delta, field):
    """Closed-form steady coherences between adjacent momentum classes.

    Returns ``(zeta_plus, zeta_minus)`` on the grid for a held field
    ``field`` and thermal populations ``N * weights``.
    """
    n = grid.n_points
    m = grid.steps_per_recoil
    pops = medium.n_atoms * grid.weights
    up = np.zeros(n)
    down = np.zeros(n)
    up[:n - m] = pops[m:]
    down[m:] = pops[:n - m]
    p = grid.p_values
    g = medium.beta * medium.rabi_single_atom
    wr = medium.omega_r
    zeta_minus = 1j * g * (down - pops) / (4j * wr * (2 * p - 1) + 1j * delta - medium.gamma_coh) * field
    zeta_plus = -1j * g * (up - pops) / (4j * wr * (2 * p + 1) + 1j * delta + medium.gamma_coh) * np.conj(field)
    return zeta_plus, zeta_minus


def contract_coherences(medium, zeta_plus, zeta_minus, field):
    """Susceptibility implied by steady coherences through the field equation.

    Each adjacent pair appears once as ``zeta_minus(p)`` and once as
    ``conj(zeta_plus(p - 1))``; the two are averaged.
    """
    g = medium.beta * medium.rabi_single_atom
    coh = 0.5 * (np.sum(zeta_minus) + np.sum(np.conj(zeta_plus)))
    return background_chi(medium) + g * coh / field


def zero_temperature_im(medium, delta):
    """``Im(chi)`` for all atoms at rest: two Lorentzians at ``delta = -+4 omega_r``."""
    d = np.asarray(delta, dtype=float)
    gc = medium.gamma_coh
    wr = medium.omega_r
    return -raman_strength(medium) * gc * (1.0 / (gc ** 2 + (d + 4 * wr) ** 2)
                                          - 1.0 / (gc ** 2 + (d - 4 * wr) ** 2))
