"""Phase-space methods: Husimi distributions, Wigner sampling, TWA OTOC.

The truncated-Wigner OTOC estimator averages (d n_t / d phi_0)^2 over
classical trajectories whose initial conditions are drawn from the Gaussian
Wigner function of the (possibly squeezed) coherent state; the derivative is
taken from the co-integrated monodromy matrix, never from finite differences
of neighbouring trajectories.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .hilbert import DimerParams, StateVector
from .meanfield import PhasePoint, antihom_is_unstable
from .propagate import OtocSeries

__all__ = [
    "PhaseGrid",
    "husimi",
    "wigner_sample",
    "twa_otoc",
    "TwaError",
]


class TwaError(RuntimeError):
    pass


@dataclass(frozen=True)
class PhaseGrid:
    """Husimi density sampled on a rectangular (z, phi) grid."""

    z_values: np.ndarray = field(repr=False)
    phi_values: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self):
        if np.any(self.density < 0):
            raise ValueError("Husimi density must be nonnegative")

    def argmax_point(self) -> PhasePoint:
        i, j = np.unravel_index(np.argmax(self.density), self.density.shape)
        return PhasePoint(float(self.z_values[i]), float(self.phi_values[j]))

    def save_csv(self, path) -> None:
        zz, pp = np.meshgrid(self.z_values, self.phi_values, indexing="ij")
        np.savetxt(path,
                   np.column_stack([zz.ravel(), pp.ravel(), self.density.ravel()]),
                   delimiter=",", header="z,phi,q", comments="")

    def save_binary(self, path) -> None:
        """Row-major float64 dump plus a small JSON header next to it."""
        path = str(path)
        self.density.astype(np.float64).tofile(path)
        header = {
            "shape": list(self.density.shape),
            "z_range": [float(self.z_values[0]), float(self.z_values[-1])],
            "phi_range": [float(self.phi_values[0]), float(self.phi_values[-1])],
            "time": self.time,
            "dtype": "float64",
            "order": "C",
        }
        with open(path + ".json", "w") as fh:
            json.dump(header, fh, indent=2)


def husimi(params: DimerParams, state: StateVector,
           n_z: int = 201, n_phi: int = 201, z_pad: float = 1e-3,
           time: float = 0.0) -> PhaseGrid:
    """|<xi(z, phi)|psi>|^2 over the reduced phase space, overlaps in log space.

    The coherent-state amplitude factorizes as A_k(z) e^{i(N-k) theta_rel}, so
    each z row reduces to a matrix-vector product over the phi phases.
    """
    n = params.n_particles
    k = np.arange(n + 1, dtype=np.float64)
    log_binom = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)

    z_values = np.linspace(-1.0 + z_pad, 1.0 - z_pad, n_z)
    phi_values = np.linspace(-np.pi, np.pi, n_phi, endpoint=False)
    theta_rel = -(phi_values + np.pi)
    # phase matrix conj(e^{i(N-k) theta_rel}) of shape (n_phi, N+1)
    phases = np.exp(-1j * np.outer(theta_rel, n - k))

    density = np.empty((n_z, n_phi))
    psi = state.amplitudes
    for i, z in enumerate(z_values):
        log_mod2 = log_binom + k * np.log((1.0 + z) / 2.0) \
            + (n - k) * np.log((1.0 - z) / 2.0)
        mod = np.exp(0.5 * (log_mod2 - np.max(log_mod2)))
        mod /= np.linalg.norm(mod)
        overlaps = phases @ (mod * psi)
        density[i] = np.abs(overlaps) ** 2
    return PhaseGrid(z_values=z_values, phi_values=phi_values,
                     density=density, time=time)


def wigner_sample(params: DimerParams, omega: float, count: int,
                  seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw (z, phi) pairs from the Gaussian Wigner model of the initial state.

    W(n, phi) ~ exp(-2 n^2/(omega N) - N omega phi^2 / 2), i.e. independent
    Gaussians with Var(n) = omega*N/4 and Var(phi) = 1/(omega*N); returned as
    z = 2n/N.  Deterministic for a fixed seed.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    n = params.n_particles
    rng = np.random.default_rng(seed)
    n_samples = rng.normal(0.0, np.sqrt(omega * n) / 2.0, size=count)
    phi_samples = rng.normal(0.0, 1.0 / np.sqrt(omega * n), size=count)
    return 2.0 * n_samples / n, phi_samples


def twa_otoc(params: DimerParams, omega: float, times, count: int, seed: int,
             tol: float = 1e-8, max_failure_fraction: float = 0.01) -> OtocSeries:
    """Monte-Carlo classical OTOC O(t) = <(d n_t / d phi_0)^2> over Wigner samples."""
    if not antihom_is_unstable(params):
        raise ValueError("TWA OTOC targets the unstable regime gamma > 2")
    if count < 2:
        raise ValueError("count must be at least 2")
    times = np.ascontiguousarray(times, dtype=np.float64)
    z0, phi0 = wigner_sample(params, omega, count, seed)
    half_n = params.n_particles / 2.0
    s1, s2, n_fail = _kernels.twa_moments(
        np.cos(params.theta), np.sin(params.theta), z0, phi0, half_n, times, tol)
    if n_fail > max_failure_fraction * count:
        raise TwaError(f"{n_fail}/{count} sample trajectories failed to integrate")
    n_ok = count - n_fail
    mean = s1 / n_ok
    var = np.clip(s2 / n_ok - mean ** 2, 0.0, None) * n_ok / max(n_ok - 1, 1)
    stderr = np.sqrt(var / n_ok)
    return OtocSeries(times=times, values=mean, params_snapshot=params,
                      state_label=f"twa(omega={omega}, count={count}, seed={seed})",
                      stderr=stderr)
