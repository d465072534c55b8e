"""Hot numeric loops with a numba path and a pure-numpy fallback.

The numba path is used when numba imports and ``LAMBDACOOL_DISABLE_NUMBA``
is unset or ``0``.  Both paths compute the same sums in the same order of
magnitude of rounding; tests run them against each other.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_CHUNK = 1 << 20  # elements per broadcast block in the numpy path


def _env_disabled():
    return os.environ.get("LAMBDACOOL_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")


_backend = "numba" if (numba is not None and not _env_disabled()) else "numpy"


def get_backend():
    return _backend


def set_backend(name):
    """Switch between ``"numba"`` and ``"numpy"`` at runtime; returns the old name."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and numba is None:
        raise RuntimeError("numba is not importable")
    old, _backend = _backend, name
    return old


# --- thermal recoil sum --------------------------------------------------------

def _recoil_sum_numpy(delta, p, w, omega_r, gamma):
    delta = np.ascontiguousarray(delta, dtype=np.float64)
    out = np.empty(delta.shape, dtype=np.complex128)
    shift_plus = 4.0 * omega_r * (2.0 * p + 1.0)
    shift_minus = 4.0 * omega_r * (2.0 * p - 1.0)
    rows = max(1, _CHUNK // max(p.size, 1))
    for start in range(0, delta.size, rows):
        d = delta[start:start + rows, None]
        dp = d + shift_plus
        dm = d + shift_minus
        term = 1.0 / (dp + 1j * gamma) - 1.0 / (dm + 1j * gamma)
        out[start:start + rows] = term @ w
    return out


if numba is not None:
    @numba.njit(cache=True, fastmath=False)
    def _recoil_sum_numba(delta, p, w, omega_r, gamma):
        out = np.empty(delta.size, dtype=np.complex128)
        g2 = gamma * gamma
        for i in range(delta.size):
            acc_re = 0.0
            acc_im = 0.0
            for j in range(p.size):
                dp = delta[i] + 4.0 * omega_r * (2.0 * p[j] + 1.0)
                dm = delta[i] + 4.0 * omega_r * (2.0 * p[j] - 1.0)
                lp = 1.0 / (g2 + dp * dp)
                lm = 1.0 / (g2 + dm * dm)
                acc_re += w[j] * (dp * lp - dm * lm)
                acc_im += w[j] * (lp - lm)
            out[i] = complex(acc_re, -gamma * acc_im)
        return out
else:  # pragma: no cover
    _recoil_sum_numba = None


def recoil_sum(delta, p, w, omega_r, gamma):
    """``sum_j w_j [1/(D+_j + i*gamma) - 1/(D-_j + i*gamma)]`` for each delta.

    ``D+-_j = delta + 4*omega_r*(2 p_j +- 1)``.  Returns a complex array with
    the shape of ``delta``.
    """
    delta = np.asarray(delta, dtype=np.float64)
    flat = np.ascontiguousarray(delta.ravel())
    p = np.ascontiguousarray(p, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if _backend == "numba":
        out = _recoil_sum_numba(flat, p, w, float(omega_r), float(gamma))
    else:
        out = _recoil_sum_numpy(flat, p, w, float(omega_r), float(gamma))
    return out.reshape(delta.shape)


# --- RIR population/coherence right-hand side -----------------------------------

def _rir_rhs_numpy(y, n, shift, freq_plus, freq_minus, gamma_coh, gamma_pop,
                   coupling, pi_th):
    pops = y[:n]
    zp = y[n:2 * n]
    zm = y[2 * n:]
    up = np.zeros(n, dtype=np.complex128)
    down = np.zeros(n, dtype=np.complex128)
    up[:n - shift] = pops[shift:]      # population at p + 1
    down[shift:] = pops[:n - shift]    # population at p - 1
    x = 1j * coupling * (zp - np.conj(zm))
    dpops = x + np.conj(x) - gamma_pop * (pops - pi_th)
    dzp = -(1j * freq_plus + gamma_coh) * zp - 1j * np.conj(coupling) * (up - pops)
    dzm = (1j * freq_minus - gamma_coh) * zm - 1j * coupling * (down - pops)
    return np.concatenate((dpops, dzp, dzm))


if numba is not None:
    @numba.njit(cache=True)
    def _rir_rhs_numba(y, n, shift, freq_plus, freq_minus, gamma_coh, gamma_pop,
                       coupling, pi_th):
        out = np.empty(3 * n, dtype=np.complex128)
        cc = np.conj(coupling)
        for j in range(n):
            pop = y[j]
            zp = y[n + j]
            zm = y[2 * n + j]
            up = y[j + shift] if j + shift < n else 0.0j
            down = y[j - shift] if j - shift >= 0 else 0.0j
            x = 1j * coupling * (zp - np.conj(zm))
            out[j] = x + np.conj(x) - gamma_pop * (pop - pi_th[j])
            out[n + j] = -(1j * freq_plus[j] + gamma_coh) * zp - 1j * cc * (up - pop)
            out[2 * n + j] = (1j * freq_minus[j] - gamma_coh) * zm - 1j * coupling * (down - pop)
        return out
else:  # pragma: no cover
    _rir_rhs_numba = None


def rir_rhs(y, n, shift, freq_plus, freq_minus, gamma_coh, gamma_pop, coupling, pi_th):
    """Time derivative of the packed ``[populations, zeta+, zeta-]`` state.

    ``coupling`` is ``beta * E_a * <a>`` with the field held constant;
    ``shift`` is the number of grid steps in one unit of momentum.
    """
    if _backend == "numba":
        return _rir_rhs_numba(y, n, shift, freq_plus, freq_minus, float(gamma_coh),
                              float(gamma_pop), complex(coupling), pi_th)
    return _rir_rhs_numpy(y, n, shift, freq_plus, freq_minus, gamma_coh, gamma_pop,
                          coupling, pi_th)
