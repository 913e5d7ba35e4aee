"""Hot numeric inner loops shared by the mean-field and propagation modules.

Every kernel is compiled with numba when it is importable.  Setting the
environment variable ``DIMER_OTOC_NO_NUMBA=1`` (before import) selects the
pure-Python/numpy fallback path: the very same functions, just not jitted.
``benchmarks/bench_kernels.py`` compares the two paths.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("DIMER_OTOC_NO_NUMBA", "0").lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False

if not USE_NUMBA:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(func):
            return func

        return deco


# Integration status codes (kernels cannot raise rich exceptions under numba).
OK = 0
SINGULAR_Z = 1          # |z| reached the coordinate singularity at 1
STEP_UNDERFLOW = 2      # adaptive step shrank below the representable floor

_Z_LIMIT = 1.0 - 1e-10

# Dormand-Prince 5(4) tableau.
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)


@njit(cache=True)
def _rhs(cos_t, sin_t, y, dy):
    """Flow of (z, phi) plus the variational (tangent) 2x2 block.

    y = (z, phi, m00, m01, m10, m11); returns a status code.
    """
    z = y[0]
    phi = y[1]
    if z > _Z_LIMIT or z < -_Z_LIMIT:
        return SINGULAR_Z
    s2 = 1.0 - z * z
    root = np.sqrt(s2)
    sin_p = np.sin(phi)
    cos_p = np.cos(phi)

    dy[0] = -4.0 * cos_t * root * sin_p
    dy[1] = 4.0 * cos_t * z * cos_p / root - 2.0 * sin_t * z

    # Analytic Jacobian of the flow; note j11 = -j00 (divergence-free).
    j00 = 4.0 * cos_t * z * sin_p / root
    j01 = -4.0 * cos_t * root * cos_p
    j10 = 4.0 * cos_t * cos_p / (s2 * root) - 2.0 * sin_t
    j11 = -j00

    dy[2] = j00 * y[2] + j01 * y[4]
    dy[3] = j00 * y[3] + j01 * y[5]
    dy[4] = j10 * y[2] + j11 * y[4]
    dy[5] = j10 * y[3] + j11 * y[5]
    return OK


@njit(cache=True)
def integrate_tangent(cos_t, sin_t, z0, phi0, t_eval, tol):
    """Adaptive Dormand-Prince 5(4) integration of the reduced flow.

    Co-integrates the monodromy matrix from the identity and samples the full
    state at the (ascending, nonnegative) times ``t_eval``.  Returns
    ``(samples, status)`` with samples of shape ``(len(t_eval), 6)``.
    """
    n_eval = len(t_eval)
    out = np.empty((n_eval, 6))

    y = np.empty(6)
    y[0] = z0
    y[1] = phi0
    y[2] = 1.0
    y[3] = 0.0
    y[4] = 0.0
    y[5] = 1.0

    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    k5 = np.empty(6)
    k6 = np.empty(6)
    k7 = np.empty(6)
    ytmp = np.empty(6)
    ynew = np.empty(6)

    status = _rhs(cos_t, sin_t, y, k1)
    if status != OK:
        return out, status

    t = 0.0
    h = 1e-4
    h_min = 1e-14
    atol = tol * 1e-2

    for idx in range(n_eval):
        target = t_eval[idx]
        while t < target:
            if h > target - t:
                h = target - t
            if h < h_min:
                return out, STEP_UNDERFLOW

            # FSAL: k1 already holds f(t, y).
            for i in range(6):
                ytmp[i] = y[i] + h * _A21 * k1[i]
            if _rhs(cos_t, sin_t, ytmp, k2) != OK:
                h *= 0.5
                continue
            for i in range(6):
                ytmp[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
            if _rhs(cos_t, sin_t, ytmp, k3) != OK:
                h *= 0.5
                continue
            for i in range(6):
                ytmp[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
            if _rhs(cos_t, sin_t, ytmp, k4) != OK:
                h *= 0.5
                continue
            for i in range(6):
                ytmp[i] = y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i]
                                      + _A54 * k4[i])
            if _rhs(cos_t, sin_t, ytmp, k5) != OK:
                h *= 0.5
                continue
            for i in range(6):
                ytmp[i] = y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                                      + _A64 * k4[i] + _A65 * k5[i])
            if _rhs(cos_t, sin_t, ytmp, k6) != OK:
                h *= 0.5
                continue
            for i in range(6):
                ynew[i] = y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i]
                                      + _B5 * k5[i] + _B6 * k6[i])
            if _rhs(cos_t, sin_t, ynew, k7) != OK:
                h *= 0.5
                continue

            err = 0.0
            for i in range(6):
                e_i = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i]
                           + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
                ay = abs(y[i])
                ayn = abs(ynew[i])
                scale = atol + tol * (ay if ay > ayn else ayn)
                e_i /= scale
                err += e_i * e_i
            err = np.sqrt(err / 6.0)

            if err <= 1.0:
                t += h
                for i in range(6):
                    y[i] = ynew[i]
                    k1[i] = k7[i]
                factor = 5.0 if err == 0.0 else 0.9 * err ** -0.2
                if factor > 5.0:
                    factor = 5.0
                h *= factor
            else:
                factor = 0.9 * err ** -0.2
                if factor < 0.2:
                    factor = 0.2
                h *= factor
        for i in range(6):
            out[idx, i] = y[i]
    return out, OK


@njit(cache=True)
def twa_moments(cos_t, sin_t, z0s, phi0s, half_n, t_eval, tol):
    """Streaming first/second moments of (half_n * m01)^2 over Wigner samples.

    Returns (sum, sum of squares, per-sample-failure count); samples are
    consumed strictly in order, so results are reproducible bit-for-bit.
    """
    nt = len(t_eval)
    s1 = np.zeros(nt)
    s2 = np.zeros(nt)
    n_fail = 0
    for j in range(len(z0s)):
        samples, status = integrate_tangent(cos_t, sin_t, z0s[j], phi0s[j], t_eval, tol)
        if status != OK:
            n_fail += 1
            continue
        for i in range(nt):
            d = half_n * samples[i, 3]
            v = d * d
            s1[i] += v
            s2[i] += v * v
    return s1, s2, n_fail


@njit(cache=True)
def tridiag_matvec(diag, off, v):
    """y = T v for a symmetric tridiagonal T (complex vector v)."""
    n = len(diag)
    out = np.empty(n, dtype=np.complex128)
    for i in range(n):
        acc = diag[i] * v[i]
        if i > 0:
            acc += off[i - 1] * v[i - 1]
        if i < n - 1:
            acc += off[i] * v[i + 1]
        out[i] = acc
    return out


@njit(cache=True)
def chebyshev_apply(diag_s, off_s, coeffs, psi):
    """sum_k coeffs[k] T_k(H_scaled) psi via the Chebyshev recurrence.

    diag_s/off_s hold the tridiagonal Hamiltonian already scaled to spectrum
    within [-1, 1].
    """
    t_prev = psi.copy()
    acc = coeffs[0] * t_prev
    if len(coeffs) == 1:
        return acc
    t_cur = tridiag_matvec(diag_s, off_s, t_prev)
    acc = acc + coeffs[1] * t_cur
    for k in range(2, len(coeffs)):
        t_next = 2.0 * tridiag_matvec(diag_s, off_s, t_cur) - t_prev
        acc = acc + coeffs[k] * t_next
        t_prev = t_cur
        t_cur = t_next
    return acc
