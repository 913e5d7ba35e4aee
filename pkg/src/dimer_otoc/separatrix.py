"""Closed-form separatrix dynamics and the analytic classical OTOC O(t).

Everything here lives in the unstable regime gamma = tan(theta) > 2, where
the antihom fixed point is hyperbolic and the separatrix (the energy shell
through it) bounds the linearized region.  The squeezing parameter omega of
the initial Gaussian Wigner function is an explicit argument throughout;
omega = 1 is the unsqueezed coherent state.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss

from .hilbert import DimerParams
from .meanfield import antihom_is_unstable, stability_exponent

__all__ = [
    "TimeScales",
    "scale_a",
    "time_scales",
    "separatrix_z",
    "n_of_t",
    "classical_otoc",
    "otoc_short_asymptote",
    "otoc_long_asymptote",
    "regime_schedule",
    "separatrix_polyline",
]


@dataclass(frozen=True)
class TimeScales:
    """lambda_s, the scale a, and the derived tau_s / tau_L / tau_E hierarchy.

    alpha = tau_L / tau_E classifies the localization cases: ~0 delocalized
    (no double-rate window), in (0, 1) the transition case, ~1 well localized
    (no single-rate window).
    """

    lambda_s: float
    omega: float
    a: float
    tau_s: float
    tau_L: float
    tau_E: float
    alpha: float


def _require_unstable(params: DimerParams) -> float:
    if not antihom_is_unstable(params):
        raise ValueError(
            f"stable regime (gamma = {params.gamma:.3f} <= 2): no separatrix dynamics")
    return stability_exponent(params)


def scale_a(params: DimerParams, omega: float, n_particles: int | None = None) -> float:
    """Dimensionless width scale of the initial state along the unstable direction."""
    lam = _require_unstable(params)
    if omega <= 0:
        raise ValueError("omega must be positive")
    n = params.n_particles if n_particles is None else n_particles
    s = np.sin(params.theta)
    c = np.cos(params.theta)
    return float((s / lam) / np.sqrt(8.0 * omega * n)
                 * np.sqrt(omega ** 2 + 16.0 * c ** 2 / lam ** 2))


def time_scales(params: DimerParams, omega: float = 1.0,
                n_particles: int | None = None) -> TimeScales:
    lam = _require_unstable(params)
    n = params.n_particles if n_particles is None else n_particles
    a = scale_a(params, omega, n)
    tau_s = 1.0 / lam
    tau_l = -np.log(a) / lam
    tau_e = np.log(n) / lam
    return TimeScales(lambda_s=lam, omega=omega, a=a, tau_s=tau_s,
                      tau_L=tau_l, tau_E=tau_e, alpha=tau_l / tau_e)


def separatrix_z(params: DimerParams, z_start: float, t_elapsed: float) -> float:
    """Motion along one separatrix branch starting from z_start at t = 0."""
    lam = _require_unstable(params)
    s = np.sin(params.theta)
    z_max = lam / s
    if z_start == 0.0:
        raise ValueError("z_start must be nonzero (the fixed point never moves)")
    if abs(z_start) > z_max:
        raise ValueError(
            f"|z_start| = {abs(z_start):.4f} exceeds the separatrix turning point "
            f"lambda_s/sin(theta) = {z_max:.4f}")
    u = np.arccosh(z_max / abs(z_start))
    return float(np.sign(z_start) * z_max / np.cosh(u - lam * t_elapsed))


def n_of_t(params: DimerParams, n0: float, phi0: float, n_particles: int,
           t) -> np.ndarray:
    """Separatrix-approximation occupation offset n_t from initial (n0, phi0)."""
    lam = _require_unstable(params)
    s, c = np.sin(params.theta), np.cos(params.theta)
    t = np.asarray(t, dtype=np.float64)
    x = (s / lam) * (n0 / n_particles - 2.0 * c * phi0 / lam) * np.sinh(lam * t)
    return (n_particles * lam / s) * x / (1.0 + x ** 2)


# Quadrature nodes are fixed so results are deterministic; 201-point rules
# resolve both the narrow-Gaussian (small t, Gauss-Hermite in the scaled
# variable) and the flat (large t, Gauss-Legendre on the tangent map) regimes.
_GH_NODES, _GH_WEIGHTS = hermgauss(201)
_GL_THETA, _GL_W = leggauss(201)
_GL_THETA = _GL_THETA * (np.pi / 2.0)
_GL_W = _GL_W * (np.pi / 2.0)


def _profile(x: np.ndarray) -> np.ndarray:
    return (1.0 - x ** 2) ** 2 / (1.0 + x ** 2) ** 4


def _gaussian_weighted_integral(sigma: float) -> float:
    """integral of (1-x^2)^2/(1+x^2)^4 exp(-(x/sigma)^2) dx over the real line."""
    if sigma <= 1.0:
        # x = sigma*u: sigma * int f(sigma u) e^{-u^2} du, Gauss-Hermite.
        return float(sigma * np.sum(_GH_WEIGHTS * _profile(sigma * _GH_NODES)))
    # x = tan(theta): the profile collapses to cos^2(2 theta) cos^2(theta).
    integrand = np.cos(2.0 * _GL_THETA) ** 2 * np.cos(_GL_THETA) ** 2 \
        * np.exp(-(np.tan(_GL_THETA) / sigma) ** 2)
    return float(np.sum(_GL_W * integrand))


def bare_integral_constant() -> float:
    """The sigma -> infinity limit of the profile integral (analytically pi/4)."""
    return float(np.sum(_GL_W * np.cos(2.0 * _GL_THETA) ** 2 * np.cos(_GL_THETA) ** 2))


def classical_otoc(params: DimerParams, omega: float, n_particles: int | None = None,
                   t=0.0, a_override: float | None = None) -> np.ndarray:
    """Analytic classical OTOC O(t) by quadrature of the separatrix average."""
    lam = _require_unstable(params)
    n = params.n_particles if n_particles is None else n_particles
    a = scale_a(params, omega, n) if a_override is None else a_override
    c = np.cos(params.theta)
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    out = np.zeros_like(t_arr)
    pref = 2.0 * c ** 2 * n ** 2 / (np.sqrt(np.pi) * a * lam ** 2)
    for i, ti in enumerate(t_arr):
        if ti == 0.0:
            continue  # exact limit of the closed form
        sh = np.sinh(lam * ti)
        out[i] = pref * sh * _gaussian_weighted_integral(2.0 * a * sh)
    return out if np.ndim(t) else float(out[0])


def otoc_short_asymptote(params: DimerParams, n_particles: int | None = None, t=0.0):
    """O(t) ~ 4 cos^2(theta) (N/lambda_s)^2 sinh^2(lambda_s t) for t << tau_L."""
    lam = _require_unstable(params)
    n = params.n_particles if n_particles is None else n_particles
    c = np.cos(params.theta)
    t = np.asarray(t, dtype=np.float64)
    return 4.0 * c ** 2 * (n / lam) ** 2 * np.sinh(lam * t) ** 2


def otoc_long_asymptote(params: DimerParams, omega: float,
                        n_particles: int | None = None, t=0.0):
    """O(t) ~ cos^2(theta) sqrt(pi) N^2 e^{lambda_s t} / (4 a lambda_s^2) for t >> tau_L."""
    lam = _require_unstable(params)
    n = params.n_particles if n_particles is None else n_particles
    a = scale_a(params, omega, n)
    c = np.cos(params.theta)
    t = np.asarray(t, dtype=np.float64)
    return c ** 2 * np.sqrt(np.pi) * n ** 2 / (4.0 * a * lam ** 2) * np.exp(lam * t)


def regime_schedule(ts: TimeScales, t: float) -> str:
    """Label the growth regime of Eq.-(5)-style piecewise behavior at time t.

    Degenerate orderings (tau_L < tau_s, or tau_L >= tau_E) collapse the
    corresponding exponential window to empty.
    """
    b1 = ts.tau_s
    b2 = min(max(ts.tau_L, ts.tau_s), ts.tau_E)
    if t < b1:
        return "polynomial"
    if t < b2:
        return "double-rate"
    if t < ts.tau_E:
        return "single-rate"
    return "post-ehrenfest"


def separatrix_polyline(params: DimerParams, n_points: int = 400) -> np.ndarray:
    """Sampled (z, phi) points of the separatrix energy shell through (0, 0)."""
    lam = _require_unstable(params)
    s = np.sin(params.theta)
    gamma = params.gamma
    z_max = lam / s
    z = np.linspace(-z_max, z_max, n_points)
    with np.errstate(invalid="ignore"):
        cos_phi = (1.0 - (gamma / 4.0) * z ** 2) / np.sqrt(1.0 - z ** 2)
    cos_phi = np.clip(cos_phi, -1.0, 1.0)
    phi = np.arccos(cos_phi)
    upper = np.column_stack([z, phi])
    lower = np.column_stack([z[::-1], -phi[::-1]])
    return np.vstack([upper, lower])
