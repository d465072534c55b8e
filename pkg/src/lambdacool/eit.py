"""EIT susceptibility of a three-level Lambda ensemble and the dressed cavity.

Sign convention: ``Im(chi) > 0`` is absorption.  The field obeys
``d<a>/dt = (i*Delta_ca - kappa/2)<a> + eta + i*chi*<a>``, so the atoms add
``Im(chi)`` to the amplitude decay and ``Re(chi)`` to the detuning.
Detunings follow the spin-scheme convention: ``delta_a = omega_2 - omega_eg``
and the two-photon detuning ``delta = delta_a - delta_c``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .core import AngularFrequency, effective_cavity_response, hz
from .errors import DegenerateDenominator, GridTooCoarse, ValidationError

#: Ground-metastable coherence decay used when none is configured.
DEFAULT_GAMMA_GM = hz(100.0)

_TINY = 1e-300


@dataclass(frozen=True)
class EitMediumParams:
    """Atomic ensemble for the spin (Zeeman) Lambda scheme.

    ``n_ground`` defaults to ``n_atoms`` (all atoms in ``|g>``).  ``gamma_gm``
    is the ground-metastable coherence decay, kept separate from the
    mechanical damping that shares its symbol in the optomechanics literature.
    """

    n_atoms: float
    rabi_control: float
    rabi_single_atom: float
    gamma_e: float
    delta_a: float
    gamma_gm: float = DEFAULT_GAMMA_GM
    n_ground: float | None = None
    n_meta: float = 0.0

    def __post_init__(self):
        if self.n_ground is None:
            object.__setattr__(self, "n_ground", float(self.n_atoms) - float(self.n_meta))
        if self.n_atoms < 0 or self.n_ground < 0 or self.n_meta < 0:
            raise ValidationError("n_atoms", "populations must be >= 0")
        if abs(self.n_ground + self.n_meta - self.n_atoms) > 1e-9 * max(self.n_atoms, 1.0):
            raise ValidationError("n_ground", "n_ground + n_meta must equal n_atoms")
        if not self.gamma_e > 0:
            raise ValidationError("gamma_e", "must be > 0")
        if self.gamma_gm < 0:
            raise ValidationError("gamma_gm", "must be >= 0")
        for name in ("rabi_control", "rabi_single_atom", "delta_a"):
            AngularFrequency(getattr(self, name))

    def shifted(self, shift):
        """Same medium seen by light detuned by ``shift``: ``delta_a`` moves with it."""
        return replace(self, delta_a=self.delta_a + shift)


def chi_eit(medium, delta, general=False):
    """EIT susceptibility at two-photon detuning ``delta`` (scalar or array).

    The default path is the closed Re/Im pair for an ensemble entirely in
    ``|g>``.  ``general=True`` evaluates the complex expression that also
    keeps a metastable population ``n_meta``.
    """
    if general:
        return _chi_eit_general(medium, delta)
    if medium.n_meta:
        warnings.warn("n_meta is ignored unless general=True", stacklevel=2)
    d = np.asarray(delta, dtype=float)
    e2n = medium.rabi_single_atom ** 2 * medium.n_atoms
    om2 = medium.rabi_control ** 2
    da = medium.delta_a
    ge = medium.gamma_e
    gm = medium.gamma_gm
    two_photon = d * d + 0.25 * gm * gm
    den = (da * da + 0.25 * ge * ge) * two_photon + om2 * om2 - 2.0 * om2 * (da * d - 0.25 * ge * gm)
    if np.any(den < _TINY):
        raise DegenerateDenominator("EIT denominator underflows")
    re = -e2n * (da * two_photon - om2 * d) / den
    im = e2n * (0.5 * ge * two_photon + 0.5 * om2 * gm) / den
    out = re + 1j * im
    return complex(out) if out.ndim == 0 else out


def _chi_eit_general(medium, delta):
    d = np.asarray(delta, dtype=float)
    e2 = medium.rabi_single_atom ** 2
    om2 = medium.rabi_control ** 2
    ge = medium.gamma_e
    raman = d + 0.5j * medium.gamma_gm
    delta_c = medium.delta_a - d
    # metastable atoms feed |g><m| through the control-driven |e><m| coherence
    pop = medium.n_ground + om2 * medium.n_meta / ((delta_c + 0.5j * ge) * raman)
    den = medium.delta_a + 0.5j * ge - om2 / raman
    if np.any(np.abs(den) < _TINY):
        raise DegenerateDenominator("EIT denominator underflows")
    out = -e2 * pop / den
    return complex(out) if out.ndim == 0 else out


def stark_shift(medium):
    """Two-photon detuning of the light-shifted atomic resonance, ``Omega^2 / Delta_a``."""
    return medium.rabi_control ** 2 / medium.delta_a


def eit_cavity_field(cavity, medium, delta, detuning=None):
    """Steady field of the atom-filled cavity.

    ``detuning`` overrides ``cavity.detuning`` and may be an array (it then
    broadcasts against ``delta``).
    """
    if detuning is None:
        detuning = cavity.detuning
    chi = chi_eit(medium, delta)
    return effective_cavity_response(detuning, cavity.kappa, chi, cavity.drive)


def locked_field(cavity, medium, detuning):
    """Field with the two-photon resonance locked to the cavity: ``delta = Delta_ca``."""
    return eit_cavity_field(cavity, medium, detuning, detuning=detuning)


@dataclass(frozen=True)
class Linewidth:
    """Numerical FWHM of ``|<a>|^2`` plus the two pointwise diagnostics.

    ``kappa_af_full = kappa + Im(chi)`` and ``kappa_af_half = kappa/2 + Im(chi)``
    are both reported because the two conventions appear in the literature.
    """

    fwhm: float
    kappa_af_full: float
    kappa_af_half: float
    left: float
    right: float


def eit_effective_linewidth(cavity, medium, n_grid=4000, span=4.0, xtol_rel=1e-10):
    """FWHM of the locked (``delta = Delta_ca``) cavity intensity around resonance.

    The scan uses a geometric grid from ``1e-7 kappa`` to ``span * kappa`` on
    each side so that features ~1000x narrower than the bare cavity are
    bracketed, then refines each half-maximum crossing with Brent's method.
    """
    kappa = cavity.kappa

    def intensity(x):
        return abs(locked_field(cavity, medium, x)) ** 2

    peak = intensity(0.0)
    half = 0.5 * peak
    offsets = np.geomspace(1e-7 * kappa, span * kappa, n_grid)
    edges = []
    for sign in (+1.0, -1.0):
        xs = sign * offsets
        vals = np.abs(locked_field(cavity, medium, xs)) ** 2
        below = np.nonzero(vals < half)[0]
        if below.size == 0:
            raise GridTooCoarse("half maximum not reached inside the scan span")
        k = below[0]
        lo = 0.0 if k == 0 else xs[k - 1]
        hi = xs[k]
        root = brentq(lambda x: intensity(x) - half, lo, hi,
                      xtol=xtol_rel * abs(hi) + 1e-300, rtol=4 * np.finfo(float).eps)
        edges.append(root)
    right, left = edges
    chi0 = chi_eit(medium, 0.0)
    return Linewidth(
        fwhm=right - left,
        kappa_af_full=kappa + chi0.imag,
        kappa_af_half=0.5 * kappa + chi0.imag,
        left=left,
        right=right,
    )
