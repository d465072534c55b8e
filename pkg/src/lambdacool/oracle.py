"""Time-domain integrators used to check the closed-form steady states.

EIT: the rotating-frame equations for the cavity field and the ``ge``,
``gm`` and ``em`` coherences are linear at first order in the single-atom
coupling, so they are advanced with the exact matrix exponential over
steps that double in length until the residual vanishes.

RIR: populations and adjacent-momentum coherences on a momentum grid are
integrated with an explicit 8th-order Runge-Kutta scheme (DOP853) under a
held coupling field.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from . import _kernels
from .core import OpticalCavityParams, hz
from .eit import EitMediumParams, eit_cavity_field
from .errors import NoConvergence, ValidationError
from .rir import RirMediumParams, background_chi, chi_rir, medium_grid, raman_strength


@dataclass(frozen=True)
class EitState:
    a: complex = 0j
    sigma_ge: complex = 0j
    sigma_gm: complex = 0j
    sigma_em: complex = 0j
    n_ground: float = 0.0
    n_meta: float = 0.0

    def vector(self):
        return np.array([self.a, self.sigma_ge, self.sigma_gm, self.sigma_em], dtype=complex)


@dataclass(frozen=True)
class EitRun:
    times: np.ndarray
    states: np.ndarray  # rows: [a, sigma_ge, sigma_gm, sigma_em]
    steady: EitState
    residual: float


def eit_generator(cavity, medium, delta, detuning=None):
    """Linear generator ``(M, b)`` of ``dy/dt = M y + b`` for ``y = [a, s_ge, s_gm, s_em]``.

    Each coherence is taken in the frame of the fields that drive it, so
    the steady state is a fixed point.  ``s_em`` is driven only by the
    control field; its product with ``a`` in the ``s_gm`` equation is the
    first-order term and is linearized by holding ``s_em`` at its steady
    value there (the ``s_em`` row still relaxes dynamically).
    """
    if detuning is None:
        detuning = cavity.detuning
    e = medium.rabi_single_atom
    om = medium.rabi_control
    ge = medium.gamma_e
    da = medium.delta_a
    delta_c = da - delta
    s_em_ss = om * medium.n_meta / (delta_c + 0.5j * ge)
    m = np.array([
        [1j * detuning - 0.5 * cavity.kappa, -1j * e, 0, 0],
        [-1j * e * medium.n_ground, 1j * da - 0.5 * ge, -1j * om, 0],
        [-1j * e * s_em_ss, -1j * om, 1j * delta - 0.5 * medium.gamma_gm, 0],
        [0, 0, 0, 1j * delta_c - 0.5 * ge],
    ], dtype=complex)
    b = np.array([cavity.drive, 0, 0, -1j * om * medium.n_meta], dtype=complex)
    return m, b


def _adiabatic_generator(m, b):
    """Eliminate the field (row 0) assuming it follows the atoms instantly."""
    m00 = m[0, 0]
    keep = slice(1, None)
    m_red = m[keep, keep] - np.outer(m[keep, 0], m[0, keep]) / m00
    b_red = b[keep] - m[keep, 0] * b[0] / m00
    return m_red, b_red


def integrate_eit(cavity, medium, delta, initial=None, t_end=10.0, rtol=1e-10,
                  first_step=None, max_step=None, adiabatic_field=False, detuning=None,
                  dump=None):
    """Integrate the EIT equations until the steady state is reached.

    Steps start at ``first_step`` (default ``1e-3 / kappa``) and double
    until ``max_step`` (default ``1e4 / kappa``).  Since each step is exact, the state is steady once
    two consecutive steps change every component by less than ``rtol``
    relative; reaching ``t_end`` first raises :class:`NoConvergence`.  The
    returned ``residual`` is ``|M y + b| / (|M| |y| + |b|)``.  ``dump``
    names a CSV file for the trajectory.
    """
    if not rtol > 0:
        raise ValidationError("rtol", "must be > 0")
    if initial is None:
        initial = EitState(n_ground=medium.n_ground, n_meta=medium.n_meta)
    m, b = eit_generator(cavity, medium, delta, detuning)
    y = initial.vector()
    if adiabatic_field:
        m, b = _adiabatic_generator(m, b)
        y = y[1:]
    n = y.size
    aug = np.zeros((n + 1, n + 1), dtype=complex)
    aug[:n, :n] = m
    aug[:n, n] = b
    norm_m = np.linalg.norm(m, 2)
    norm_b = np.linalg.norm(b)
    h = first_step if first_step is not None else 1e-3 / cavity.kappa
    # very long steps make expm lose accuracy on this stiff, oscillatory generator
    max_step = 1e4 / cavity.kappa if max_step is None else max_step
    t = 0.0
    times = [t]
    traj = [y.copy()]
    cache = {}

    def residual(v):
        return np.linalg.norm(m @ v + b) / (norm_m * np.linalg.norm(v) + norm_b + 1e-300)

    def change(new, old):
        scale = np.maximum(np.abs(new), 1e-300)
        return float(np.max(np.abs(new - old) / scale))

    quiet = 0
    res = residual(y)
    while quiet < 2:
        if t >= t_end:
            raise NoConvergence(f"EIT state still moving at t_end={t_end:g} s")
        h = min(h, max_step, t_end - t)
        prop = cache.get(h)
        if prop is None:
            prop = cache[h] = expm(aug * h)
        y_new = prop[:n, :n] @ y + prop[:n, n]
        quiet = quiet + 1 if change(y_new, y) < rtol else 0
        y = y_new
        t += h
        times.append(t)
        traj.append(y.copy())
        h *= 2.0
    res = residual(y)
    states = np.array(traj)
    if adiabatic_field:
        a = (b_field(cavity, m_full=eit_generator(cavity, medium, delta, detuning), y=states))
        states = np.column_stack([a, states])
    steady = EitState(*states[-1], n_ground=medium.n_ground, n_meta=medium.n_meta)
    times = np.array(times)
    if dump:
        _dump_csv(dump, times, states, ["a", "sigma_ge", "sigma_gm", "sigma_em"])
    return EitRun(times=times, states=states, steady=steady, residual=res)


def b_field(cavity, m_full, y):
    """Adiabatic field ``a`` from atomic rows ``y`` (``[s_ge, s_gm, s_em]``)."""
    m, b = m_full
    return -(b[0] + y @ m[0, 1:]) / m[0, 0]


# --- RIR -----------------------------------------------------------------------------

@dataclass(frozen=True)
class RirState:
    a: complex
    populations: np.ndarray
    zeta_plus: np.ndarray
    zeta_minus: np.ndarray


@dataclass(frozen=True)
class RirRun:
    times: np.ndarray
    steady: RirState
    residual: float
    population_drift: float


def integrate_rir(medium, grid, delta, field, initial=None, t_end=None, rtol=1e-12,
                  atol=None, steady_tol=1e-10, max_step=np.inf, dump=None):
    """Integrate RIR populations and coherences with the field held at ``field``.

    Populations relax to the thermal distribution at ``medium.gamma_pop``.
    ``t_end`` defaults to ``30 / min(gamma_coh, gamma_pop)``.  The steady
    state is accepted when the time derivative, scaled by the largest rate
    in the problem, is below ``steady_tol`` of the state norm.
    """
    if not medium.gamma_pop > 0:
        raise ValidationError("gamma_pop", "must be > 0")
    n = grid.n_points
    shift = grid.steps_per_recoil
    p = grid.p_values
    wr = medium.omega_r
    freq_plus = np.ascontiguousarray(4.0 * wr * (2 * p + 1) + delta)
    freq_minus = np.ascontiguousarray(4.0 * wr * (2 * p - 1) + delta)
    pi_th = np.ascontiguousarray(medium.n_atoms * grid.weights).astype(complex)
    coupling = complex(medium.beta * medium.rabi_single_atom * field)
    if initial is None:
        y0 = np.concatenate([pi_th, np.zeros(2 * n, dtype=complex)])
    else:
        y0 = np.concatenate([np.asarray(initial.populations, dtype=complex),
                             np.asarray(initial.zeta_plus, dtype=complex),
                             np.asarray(initial.zeta_minus, dtype=complex)])
    if t_end is None:
        t_end = 30.0 / min(medium.gamma_coh, medium.gamma_pop)
    if atol is None:
        # coherences scale as N |coupling| / gamma_coh; resolve them well below rtol
        zeta_scale = medium.n_atoms * min(1.0, abs(coupling) / medium.gamma_coh)
        if zeta_scale == 0.0:
            # no coherences to resolve; populations set the scale
            zeta_scale = max(medium.n_atoms, 1.0)
        atol = 1e-3 * rtol * zeta_scale

    def rhs(_t, y):
        return _kernels.rir_rhs(y, n, shift, freq_plus, freq_minus, medium.gamma_coh,
                                medium.gamma_pop, coupling, pi_th)

    sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", rtol=rtol, atol=atol,
                    max_step=max_step, dense_output=False)
    if not sol.success:
        raise NoConvergence(f"DOP853 failed: {sol.message}")
    y = sol.y[:, -1]
    rate = np.max(np.abs(freq_plus)) + np.max(np.abs(freq_minus)) + medium.gamma_coh
    res = np.linalg.norm(rhs(0.0, y)) / (rate * np.linalg.norm(y))
    if res > steady_tol:
        raise NoConvergence(f"RIR residual {res:.3g} > {steady_tol:g} at t_end={t_end:g} s")
    pops = y[:n].real
    drift = abs(pops.sum() - medium.n_atoms) / medium.n_atoms
    if dump:
        _dump_csv(dump, sol.t, sol.y.T, [f"y{i}" for i in range(3 * n)])
    steady = RirState(a=complex(field), populations=pops, zeta_plus=y[n:2 * n],
                      zeta_minus=y[2 * n:])
    return RirRun(times=sol.t, steady=steady, residual=res, population_drift=drift)


def rir_chi_from_state(medium, state):
    """Susceptibility implied by integrated coherences (same contraction as the closed form)."""
    g = medium.beta * medium.rabi_single_atom
    coh = 0.5 * (np.sum(state.zeta_minus) + np.sum(np.conj(state.zeta_plus)))
    return background_chi(medium) + g * coh / state.a


def _dump_csv(path, times, states, names):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["t"]
        for nm in names:
            header += [f"re_{nm}", f"im_{nm}"]
        w.writerow(header)
        for t, row in zip(times, states):
            out = [repr(float(t))]
            for z in row:
                out += [repr(float(np.real(z))), repr(float(np.imag(z)))]
            w.writerow(out)


# --- randomized closed-form comparisons ------------------------------------------------

@dataclass(frozen=True)
class CheckRecord:
    kind: str
    params: dict
    error: float


def random_eit_check(rng):
    """One random EIT point: oracle field vs the closed-form dressed-cavity field."""
    ge = hz(6.07e6)
    medium = EitMediumParams(
        n_atoms=10 ** rng.uniform(6, 9), rabi_control=rng.uniform(2, 8) * ge,
        rabi_single_atom=hz(rng.uniform(10e3, 100e3)), gamma_e=ge,
        delta_a=rng.choice([-1, 1]) * rng.uniform(100, 1000) * ge)
    kappa = hz(rng.uniform(10e6, 100e6))
    cavity = OpticalCavityParams(kappa, 0.5 * kappa, drive=1e6)
    stark = medium.rabi_control ** 2 / abs(medium.delta_a)
    delta = rng.uniform(-3, 3) * stark
    run = integrate_eit(cavity, medium, delta, detuning=delta)
    ref = eit_cavity_field(cavity, medium, delta, detuning=delta)
    params = {"n_atoms": medium.n_atoms, "rabi_control": medium.rabi_control,
              "delta_a": medium.delta_a, "kappa": kappa, "delta": delta}
    return CheckRecord("eit", params, abs(run.steady.a / ref - 1.0))


def random_rir_check(rng, field=1e-6):
    """One random RIR point: contracted oracle coherences vs the closed-form ``chi``."""
    ge = hz(6.07e6)
    medium = RirMediumParams(
        n_atoms=10 ** rng.uniform(7, 9), rabi_control=rng.uniform(1.0, 3.0) * ge,
        rabi_single_atom=hz(rng.uniform(100e3, 500e3)), delta_a=-rng.uniform(10, 30) * ge,
        omega_r=hz(3.77e3), gamma_coh=hz(rng.uniform(5e3, 20e3)),
        temperature=rng.uniform(2e-6, 21e-6), gamma_e=ge, medium_length=0.5e-3)
    grid = medium_grid(medium)
    delta = hz(rng.uniform(-300e3, 300e3))
    run = integrate_rir(medium, grid, delta, field, t_end=30.0 / medium.gamma_coh)
    chi_o = rir_chi_from_state(medium, run.steady)
    chi_c = chi_rir(medium, grid, delta)
    scale = max(abs(chi_c - background_chi(medium)), 1e-3 * raman_strength(medium) / medium.gamma_coh)
    params = {"n_atoms": medium.n_atoms, "rabi_control": medium.rabi_control,
              "temperature": medium.temperature, "gamma_coh": medium.gamma_coh, "delta": delta}
    return CheckRecord("rir", params, abs(chi_o - chi_c) / scale)


def oracle_check(n_eit=20, n_rir=20, seed=0):
    """Run the randomized comparisons; returns the list of :class:`CheckRecord`."""
    rng = np.random.default_rng(seed)
    records = [random_eit_check(rng) for _ in range(n_eit)]
    records += [random_rir_check(rng) for _ in range(n_rir)]
    return records
