"""Dynamical back-action of a hybrid atom-optomechanical system.

Two topologies are supported.  In *feedback* the optomechanical cavity
output drives an atom-filled cavity that couples back with strength ``J``.
In *cascade* the drive first crosses a free-space atomic medium and the
filtered field pumps the optomechanical cavity.  ``Bare`` is the plain
optomechanical cavity (``J = 0``).

All functions accept scalar or array detunings; the ``*_curve`` helpers
evaluate whole sweeps in one vectorized pass.  The shifted detuning
``delta_cm_tilde`` is the independent variable throughout; the implied
static displacement is available from :func:`implied_displacement` for
self-consistency checks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .core import cascade_coupling, drive_amplitude, effective_cavity_response, feedback_coupling
from .eit import chi_eit
from .errors import ParametricInstability, SingularResponse, ValidationError
from .rir import chi_rir, medium_grid


class Topology(enum.Enum):
    FEEDBACK = "feedback"
    CASCADE = "cascade"
    BARE = "bare"


@dataclass(frozen=True)
class OperatingPoint:
    """Detunings at the carrier.  ``BARE`` forces ``J = 0`` wherever it is used."""

    delta_cm_tilde: float
    delta_ca: float = 0.0
    delta_two_photon: float = 0.0
    topology: Topology = Topology.FEEDBACK


@dataclass(frozen=True)
class SidebandResponse:
    a_plus: complex
    a_minus: complex
    chi_plus: complex
    chi_minus: complex


@dataclass(frozen=True)
class CoolingResult:
    """Cooling figures of merit at one operating point.

    ``k_opt`` is in N/m when the mechanical mode has an effective mass and
    is ``k_opt / m`` (rad^2/s^2) otherwise; ``k_opt_per_mass`` says which.
    ``n_min`` is ``nan`` when the point is not stable.
    """

    gamma_opt: float
    gamma_stokes: float
    gamma_anti_stokes: float
    k_opt: float
    n_min: float
    xi: float
    stable: bool
    field_c: complex
    g_linear: float
    k_opt_per_mass: bool = True


# --- medium responses ---------------------------------------------------------------

@dataclass(frozen=True)
class EitResponse:
    """EIT medium seen by the coupling beam.

    Shifting the beam frequency moves both the two-photon detuning and
    ``delta_a`` because both are referenced to the coupling-beam frequency.
    """

    medium: object
    general: bool = False

    def chi(self, delta, shift=0.0):
        medium = self.medium.shifted(shift) if shift else self.medium
        return chi_eit(medium, np.asarray(delta) + shift, general=self.general)


@dataclass(frozen=True)
class RirResponse:
    """RIR medium; a beam frequency shift moves only the two-photon detuning."""

    medium: object
    grid: object = None

    def __post_init__(self):
        if self.grid is None:
            object.__setattr__(self, "grid", medium_grid(self.medium))

    def chi(self, delta, shift=0.0):
        return chi_rir(self.medium, self.grid, np.asarray(delta, dtype=float) + shift)


class NoMedium:
    """Empty medium, ``chi = 0`` at every frequency."""

    def chi(self, delta, shift=0.0):
        d = np.asarray(delta, dtype=float)
        return 0j if d.ndim == 0 else np.zeros(d.shape, dtype=complex)


# --- feedback topology -------------------------------------------------------------

def _feedback_term(J, kappa_ca, delta_ca, chi):
    den = 1j * (delta_ca + chi) - 0.5 * kappa_ca
    return J * J / den


def feedback_steady_field(cavity_m, cavity_a, chi, J, point):
    """Steady optomechanical field ``<c>`` with the atomic cavity as feedback.

    ``chi`` is the medium susceptibility at the carrier.  The atomic cavity
    adds ``-J^2 / (i(Delta_ca + chi) - kappa_ca/2)`` to the response
    denominator.
    """
    if point.topology is Topology.BARE:
        J = 0.0
    den = (-1j * np.asarray(point.delta_cm_tilde)
           - _feedback_term(J, cavity_a.kappa, np.asarray(point.delta_ca), chi)
           + 0.5 * cavity_m.kappa)
    if np.any(np.abs(den) < 1e-12 * 0.5 * cavity_m.kappa):
        raise SingularResponse("feedback response denominator vanishes")
    out = cavity_m.drive / den
    return complex(out) if np.ndim(out) == 0 else out


def feedback_sidebands(cavity_m, cavity_a, response, J, point, omega_m):
    """``A(+-)`` with the medium probed at the carrier shifted by ``+-omega_m``."""
    if point.topology is Topology.BARE:
        J = 0.0
    d2 = np.asarray(point.delta_two_photon, dtype=float)
    chi_p = response.chi(d2, omega_m)
    chi_m = response.chi(d2, -omega_m)
    base = -1j * np.asarray(point.delta_cm_tilde) + 0.5 * cavity_m.kappa
    a_p = base - _feedback_term(J, cavity_a.kappa, point.delta_ca + omega_m, chi_p)
    a_m = base - _feedback_term(J, cavity_a.kappa, point.delta_ca - omega_m, chi_m)
    return SidebandResponse(a_plus=a_p, a_minus=a_m, chi_plus=chi_p, chi_minus=chi_m)


def sideband_rates(sidebands, g_squared, omega_m):
    """``(gamma_anti_stokes, gamma_stokes, im_part)`` from ``A(+-)``.

    ``im_part`` is ``Im[1/(A+ - i w) - 1/(A-* - i w)]``, the spring-shift kernel.
    """
    up = 1.0 / (sidebands.a_plus - 1j * omega_m)
    down = 1.0 / (np.conj(sidebands.a_minus) - 1j * omega_m)
    g_as = 2.0 * g_squared * up.real
    g_s = 2.0 * g_squared * down.real
    return g_as, g_s, (up - down).imag


def n_min(gamma_stokes, gamma_opt, mech):
    """Minimum steady phonon number ``(G_S + g_m n_bath) / (G_opt + g_m)``."""
    total = gamma_opt + mech.gamma_mech
    if not total > 0:
        raise ParametricInstability(
            f"gamma_opt + gamma_mech = {total:.4g} <= 0; no steady occupation")
    return (gamma_stokes + mech.gamma_mech * mech.n_bath) / total


def _n_min_array(gamma_stokes, gamma_opt, mech):
    total = gamma_opt + mech.gamma_mech
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (gamma_stokes + mech.gamma_mech * mech.n_bath) / total
    return np.where(total > 0, out, np.nan)


def _result(mech, sidebands, field_c, max_photons=None):
    g2 = mech.g0 ** 2 * abs(field_c) ** 2
    g_as, g_s, im_part = sideband_rates(sidebands, g2, mech.omega_m)
    g_opt = g_as - g_s
    k_per_mass = 2.0 * mech.omega_m * g2 * im_part
    has_mass = mech.effective_mass is not None
    stable = bool(g_opt + mech.gamma_mech > 0)
    if max_photons is not None and abs(field_c) ** 2 > max_photons:
        stable = False
    return CoolingResult(
        gamma_opt=float(g_opt),
        gamma_stokes=float(g_s),
        gamma_anti_stokes=float(g_as),
        k_opt=float(k_per_mass * mech.effective_mass if has_mass else k_per_mass),
        n_min=n_min(g_s, g_opt, mech) if stable else math.nan,
        xi=math.nan,
        stable=stable,
        field_c=complex(field_c),
        g_linear=float(mech.g0 * abs(field_c)),
        k_opt_per_mass=not has_mass,
    )


def feedback_cooling(mech, sidebands, g_linear=None, field_c=None, max_photons=None):
    """Cooling result from the feedback sidebands.

    Pass either ``field_c`` (preferred; recorded in the result) or the
    linearized coupling ``g_linear = g0 |<c>|``.
    """
    if field_c is None:
        if g_linear is None:
            raise ValidationError("field_c", "need field_c or g_linear")
        field_c = g_linear / mech.g0 if mech.g0 else 0.0
    return _result(mech, sidebands, field_c, max_photons)


# --- cascade topology --------------------------------------------------------------

def cascade_drive(medium_field, J, eta_c=0.0):
    """Effective optomechanical drive ``eta_c - i J <a_p>``."""
    return eta_c - 1j * J * np.asarray(medium_field)


def bare_sidebands(cavity_m, delta_cm_tilde):
    """``A(+-)`` of the uncoupled optomechanical cavity."""
    a = -1j * np.asarray(delta_cm_tilde) + 0.5 * cavity_m.kappa
    return SidebandResponse(a_plus=a, a_minus=a, chi_plus=0j, chi_minus=0j)


def cascade_cooling(mech, cavity_m, drive, point, max_photons=None):
    """Cooling with the atom-filtered drive; sidebands see the bare cavity."""
    field_c = effective_cavity_response(point.delta_cm_tilde, cavity_m.kappa, 0.0, drive)
    return _result(mech, bare_sidebands(cavity_m, point.delta_cm_tilde), field_c, max_photons)


def implied_displacement(mech, field_c):
    """Static normalized displacement ``<x>`` implied by the field (diagnostic)."""
    n = np.abs(field_c) ** 2
    return -2.0 * mech.g0 * n * mech.omega_m / (mech.omega_m ** 2 + 0.25 * mech.gamma_mech ** 2)


def improvement_factor(n_min_bare, n_min_hybrid):
    """``xi = n_min(bare) / n_min(hybrid)``."""
    if not (n_min_bare > 0 and n_min_hybrid > 0):
        raise ValidationError("n_min", "both occupations must be > 0")
    return n_min_bare / n_min_hybrid


# --- whole systems -----------------------------------------------------------------

@dataclass(frozen=True)
class CoolingCurve:
    """Vectorized cooling results over a detuning sweep."""

    delta_cm_tilde: np.ndarray
    field_c: np.ndarray
    gamma_opt: np.ndarray
    gamma_stokes: np.ndarray
    gamma_anti_stokes: np.ndarray
    k_opt: np.ndarray
    n_min: np.ndarray
    stable: np.ndarray


@dataclass(frozen=True)
class FeedbackSystem:
    """Optomechanical cavity with an atom-filled feedback cavity.

    Locking: ``Delta_ca = delta_cm_tilde + ca_offset`` (or ``ca_offset`` alone
    when ``track_cavity`` is false) and the medium two-photon detuning is
    ``delta_cm_tilde + two_photon_offset``.  ``J`` defaults to
    ``sqrt(kappa_in_ca * kappa_in_cm)``.
    """

    mech: object
    cavity_m: object
    cavity_a: object
    response: object
    coupling: float | None = None
    ca_offset: float = 0.0
    two_photon_offset: float = 0.0
    track_cavity: bool = True
    max_photons: float | None = None

    @property
    def J(self):
        if self.coupling is not None:
            return self.coupling
        return feedback_coupling(self.cavity_a.kappa_in, self.cavity_m.kappa_in)

    def point(self, delta_cm_tilde, topology=Topology.FEEDBACK):
        d = np.asarray(delta_cm_tilde, dtype=float)
        ca = d + self.ca_offset if self.track_cavity else np.full_like(d, self.ca_offset)
        return OperatingPoint(d, ca, d + self.two_photon_offset, topology)

    def bare(self):
        return replace(self, coupling=0.0, response=NoMedium())

    def curve(self, delta_cm_tilde):
        pt = self.point(delta_cm_tilde)
        chi0 = self.response.chi(pt.delta_two_photon)
        field_c = feedback_steady_field(self.cavity_m, self.cavity_a, chi0, self.J, pt)
        sb = feedback_sidebands(self.cavity_m, self.cavity_a, self.response, self.J, pt,
                                self.mech.omega_m)
        return _curve(self.mech, pt.delta_cm_tilde, sb, field_c, self.max_photons)

    def evaluate(self, delta_cm_tilde):
        pt = self.point(float(delta_cm_tilde))
        chi0 = self.response.chi(pt.delta_two_photon)
        field_c = feedback_steady_field(self.cavity_m, self.cavity_a, chi0, self.J, pt)
        sb = feedback_sidebands(self.cavity_m, self.cavity_a, self.response, self.J, pt,
                                self.mech.omega_m)
        return feedback_cooling(self.mech, sb, field_c=field_c, max_photons=self.max_photons)


@dataclass(frozen=True)
class CascadeSystem:
    """Free-space medium whose output pumps the optomechanical cavity.

    ``input_power`` drives the medium through ``kappa_in = kappa_a / 2``;
    ``eta_c`` is any direct drive of the optomechanical cavity (default 0).
    The medium two-photon detuning is ``delta_cm_tilde + two_photon_offset``.

    ``baseline`` selects the ``J = 0`` comparison: ``"same_eta_c"`` drives
    the bare cavity with ``cavity_m.drive``; ``"filtered"`` uses the
    atom-free medium output instead.
    """

    mech: object
    cavity_m: object
    response: object
    kappa_a: float
    input_power: float
    drive_wavelength: float
    eta_c: float = 0.0
    two_photon_offset: float = 0.0
    baseline: str = "same_eta_c"
    max_photons: float | None = None

    def __post_init__(self):
        if self.baseline not in ("same_eta_c", "filtered"):
            raise ValidationError("baseline", f"unknown baseline {self.baseline!r}")

    @property
    def J(self):
        return cascade_coupling(self.kappa_a, self.cavity_m.kappa)

    @property
    def eta_a(self):
        return drive_amplitude(self.input_power, 0.5 * self.kappa_a, self.drive_wavelength)

    def drive(self, delta_cm_tilde, response=None):
        response = self.response if response is None else response
        d = np.asarray(delta_cm_tilde, dtype=float) + self.two_photon_offset
        chi = response.chi(d)
        a_p = effective_cavity_response(0.0, self.kappa_a, chi, self.eta_a)
        return cascade_drive(a_p, self.J, self.eta_c)

    def curve(self, delta_cm_tilde):
        d = np.asarray(delta_cm_tilde, dtype=float)
        drive = self.drive(d)
        field_c = effective_cavity_response(d, self.cavity_m.kappa, 0.0, drive)
        return _curve(self.mech, d, bare_sidebands(self.cavity_m, d), field_c, self.max_photons)

    def evaluate(self, delta_cm_tilde):
        d = float(delta_cm_tilde)
        pt = OperatingPoint(d, 0.0, d + self.two_photon_offset, Topology.CASCADE)
        return cascade_cooling(self.mech, self.cavity_m, complex(self.drive(d)), pt,
                               self.max_photons)

    def bare(self):
        if self.baseline == "filtered":
            return replace(self, response=NoMedium())
        return BareSystem(self.mech, self.cavity_m, self.max_photons)


@dataclass(frozen=True)
class BareSystem:
    """Plain optomechanical cavity driven with ``cavity_m.drive``."""

    mech: object
    cavity_m: object
    max_photons: float | None = None

    def curve(self, delta_cm_tilde):
        d = np.asarray(delta_cm_tilde, dtype=float)
        field_c = effective_cavity_response(d, self.cavity_m.kappa, 0.0, self.cavity_m.drive)
        return _curve(self.mech, d, bare_sidebands(self.cavity_m, d), field_c, self.max_photons)

    def evaluate(self, delta_cm_tilde):
        d = float(delta_cm_tilde)
        pt = OperatingPoint(d, 0.0, 0.0, Topology.BARE)
        return cascade_cooling(self.mech, self.cavity_m, self.cavity_m.drive, pt, self.max_photons)

    def bare(self):
        return self


def _curve(mech, d, sb, field_c, max_photons):
    d = np.atleast_1d(d)
    field_c = np.broadcast_to(np.atleast_1d(field_c), d.shape)
    g2 = mech.g0 ** 2 * np.abs(field_c) ** 2
    g_as, g_s, im_part = sideband_rates(sb, g2, mech.omega_m)
    g_as = np.broadcast_to(g_as, d.shape)
    g_s = np.broadcast_to(g_s, d.shape)
    g_opt = g_as - g_s
    k = 2.0 * mech.omega_m * g2 * im_part
    if mech.effective_mass is not None:
        k = k * mech.effective_mass
    stable = g_opt + mech.gamma_mech > 0
    if max_photons is not None:
        stable &= np.abs(field_c) ** 2 <= max_photons
    nm = np.where(stable, _n_min_array(g_s, g_opt, mech), np.nan)
    return CoolingCurve(d, field_c, g_opt, g_s, g_as, np.broadcast_to(k, d.shape), nm, stable)


# --- optimization ------------------------------------------------------------------

@dataclass(frozen=True)
class Optimum:
    delta_cm_tilde: float
    n_min: float
    result: CoolingResult


def optimize_n_min(system, span=3.0, n_grid=2001, xtol=1e-4):
    """Minimize ``n_min`` over ``|delta_cm_tilde| <= span * omega_m``.

    A uniform grid locates the best stable point, then a bounded Brent
    search (golden section with parabolic steps) refines it inside the
    neighbouring grid cells to ``xtol * omega_m``.
    """
    wm = system.mech.omega_m
    grid = np.linspace(-span * wm, span * wm, n_grid)
    curve = system.curve(grid)
    nm = np.where(np.isfinite(curve.n_min), curve.n_min, np.inf)
    i = int(np.argmin(nm))
    if not np.isfinite(nm[i]):
        raise ParametricInstability("no stable operating point in the scanned range")
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, n_grid - 1)]

    def objective(x):
        v = system.curve(np.array([x])).n_min[0]
        return v if np.isfinite(v) else np.inf

    best_x, best_n = grid[i], nm[i]
    if hi > lo:
        res = minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                              options={"xatol": xtol * wm})
        if res.fun < best_n:
            best_x, best_n = float(res.x), float(res.fun)
    return Optimum(float(best_x), float(best_n), system.evaluate(best_x))


@dataclass(frozen=True)
class Comparison:
    hybrid: Optimum
    bare: Optimum
    xi: float


def compare_with_bare(system, span=3.0, n_grid=2001, xtol=1e-4):
    """Optimal ``n_min`` of the hybrid and its ``J = 0`` baseline, and their ratio."""
    hyb = optimize_n_min(system, span, n_grid, xtol)
    bare = optimize_n_min(system.bare(), span, n_grid, xtol)
    xi = improvement_factor(bare.n_min, hyb.n_min)
    return Comparison(
        hybrid=Optimum(hyb.delta_cm_tilde, hyb.n_min, replace(hyb.result, xi=xi)),
        bare=bare,
        xi=xi,
    )
