"""Classical mean-field limit of the dimer on the reduced (z, phi) chart.

z = 2n/N is the population imbalance and phi the relative phase measured
from the antihom fixed point.  The flow is

    dz/dt   = -4 cos(theta) sqrt(1 - z^2) sin(phi)
    dphi/dt =  4 cos(theta) z cos(phi) / sqrt(1 - z^2) - 2 sin(theta) z

which is independent of N.  Tangent (monodromy) matrices are co-integrated
from the analytic Jacobian of this flow.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .hilbert import DimerParams

__all__ = [
    "PhasePoint",
    "Trajectory",
    "TangentFrame",
    "FixedPointReport",
    "SingularityError",
    "IntegrationError",
    "classical_energy",
    "eom",
    "eom_jacobian",
    "integrate",
    "monodromy",
    "find_fixed_points",
    "stability_exponent",
    "antihom_is_unstable",
    "linearized_evolution",
]


class SingularityError(ValueError):
    """The |z| = 1 coordinate singularity was reached."""


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class PhasePoint:
    z: float
    phi: float

    def __post_init__(self):
        if abs(self.z) > 1.0 + 1e-12:
            raise ValueError(f"|z| must be <= 1, got z={self.z}")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)

    def point(self, i: int) -> PhasePoint:
        return PhasePoint(float(self.z[i]), float(self.phi[i]))

    def save_csv(self, path, params: DimerParams) -> None:
        h = classical_energy_arrays(params, self.z, self.phi)
        np.savetxt(path, np.column_stack([self.times, self.z, self.phi, h]),
                   delimiter=",", header="t,z,phi,h", comments="")


@dataclass(frozen=True)
class TangentFrame:
    """2x2 monodromy matrix in (z, phi) coordinates at one trajectory sample."""

    time: float
    m: np.ndarray = field(repr=False)

    @property
    def dn_dphi0(self) -> float:
        """d z_t / d phi_0; multiply by N/2 for d n_t / d phi_0."""
        return float(self.m[0, 1])


@dataclass(frozen=True)
class FixedPointReport:
    location: PhasePoint
    classification: str  # "stable-center" or "hyperbolic"
    exponent: float      # lambda_s if hyperbolic, oscillation frequency if center
    jacobian: np.ndarray = field(repr=False)


def classical_energy(params: DimerParams, p: PhasePoint) -> float:
    """Energy per particle h(z, phi)."""
    return float(classical_energy_arrays(params, np.asarray(p.z), np.asarray(p.phi)))


def classical_energy_arrays(params: DimerParams, z, phi):
    c, s = np.cos(params.theta), np.sin(params.theta)
    return 2.0 * c * np.sqrt(1.0 - np.asarray(z) ** 2) * np.cos(phi) \
        + s * (np.asarray(z) ** 2 / 2.0 + 0.5)


def eom(params: DimerParams, p: PhasePoint) -> tuple[float, float]:
    if abs(p.z) >= 1.0:
        raise SingularityError(f"dphi/dt diverges at |z| = 1 (z={p.z})")
    c, s = np.cos(params.theta), np.sin(params.theta)
    root = np.sqrt(1.0 - p.z ** 2)
    dz = -4.0 * c * root * np.sin(p.phi)
    dphi = 4.0 * c * p.z * np.cos(p.phi) / root - 2.0 * s * p.z
    return dz, dphi


def eom_jacobian(params: DimerParams, p: PhasePoint) -> np.ndarray:
    if abs(p.z) >= 1.0:
        raise SingularityError(f"Jacobian diverges at |z| = 1 (z={p.z})")
    c, s = np.cos(params.theta), np.sin(params.theta)
    z, phi = p.z, p.phi
    s2 = 1.0 - z * z
    root = np.sqrt(s2)
    j00 = 4.0 * c * z * np.sin(phi) / root
    j01 = -4.0 * c * root * np.cos(phi)
    j10 = 4.0 * c * np.cos(phi) / (s2 * root) - 2.0 * s
    return np.array([[j00, j01], [j10, -j00]])


def _run_kernel(params: DimerParams, p0: PhasePoint, t_eval: np.ndarray, tol: float):
    samples, status = _kernels.integrate_tangent(
        np.cos(params.theta), np.sin(params.theta), p0.z, p0.phi, t_eval, tol)
    if status == _kernels.SINGULAR_Z:
        raise SingularityError("orbit reached |z| > 1 - 1e-10")
    if status == _kernels.STEP_UNDERFLOW:
        raise IntegrationError("adaptive step underflow (orbit too close to |z| = 1?)")
    return samples


def _time_grid(t_final: float, n_samples: int) -> np.ndarray:
    if t_final < 0:
        raise ValueError("t_final must be nonnegative")
    return np.linspace(0.0, t_final, n_samples)


def integrate(params: DimerParams, p0: PhasePoint, t_final: float,
              tol: float = 1e-10, n_samples: int = 400) -> Trajectory:
    """Adaptive embedded RK 5(4) solution sampled on a uniform grid."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    t_eval = _time_grid(t_final, n_samples)
    samples = _run_kernel(params, p0, t_eval, tol)
    return Trajectory(times=t_eval, z=samples[:, 0], phi=samples[:, 1])


def monodromy(params: DimerParams, p0: PhasePoint, t_final: float,
              tol: float = 1e-10, n_samples: int = 400
              ) -> tuple[Trajectory, list[TangentFrame]]:
    """Trajectory plus the co-integrated monodromy matrices M(t), M(0) = 1."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    t_eval = _time_grid(t_final, n_samples)
    samples = _run_kernel(params, p0, t_eval, tol)
    traj = Trajectory(times=t_eval, z=samples[:, 0], phi=samples[:, 1])
    frames = [TangentFrame(time=float(t_eval[i]),
                           m=samples[i, 2:6].reshape(2, 2).copy())
              for i in range(t_eval.size)]
    return traj, frames


def stability_exponent(params: DimerParams) -> float:
    """lambda_s = 4 cos(theta) sqrt(gamma/2 - 1) of the antihom fixed point.

    Returns 0 in the stable regime gamma = tan(theta) <= 2 (see
    ``antihom_is_unstable`` for the classification flag).
    """
    gamma = params.gamma
    if gamma <= 2.0:
        return 0.0
    return float(4.0 * np.cos(params.theta) * np.sqrt(gamma / 2.0 - 1.0))


def antihom_is_unstable(params: DimerParams) -> bool:
    return params.gamma > 2.0


def _classify(params: DimerParams, p: PhasePoint) -> FixedPointReport:
    jac = eom_jacobian(params, p)
    eigs = np.linalg.eigvals(jac)
    growth = float(np.max(eigs.real))
    if growth > 1e-9:
        return FixedPointReport(p, "hyperbolic", growth, jac)
    freq = float(np.max(np.abs(eigs.imag)))
    return FixedPointReport(p, "stable-center", freq, jac)


def find_fixed_points(params: DimerParams, grid: int = 64,
                      newton_steps: int = 50) -> list[FixedPointReport]:
    """Stationary points of the flow: the hom/antihom pair plus any
    self-trapped centers located by Newton iteration on a coarse seed grid."""
    found: list[PhasePoint] = [PhasePoint(0.0, 0.0), PhasePoint(0.0, np.pi)]

    z_seeds = np.linspace(-0.97, 0.97, grid)
    phi_seeds = np.linspace(-np.pi, np.pi, grid, endpoint=False)
    for z0 in z_seeds:
        for phi0 in phi_seeds:
            x = np.array([z0, phi0])
            ok = False
            for _ in range(newton_steps):
                p = PhasePoint(float(np.clip(x[0], -0.999999, 0.999999)), float(x[1]))
                f = np.array(eom(params, p))
                if np.linalg.norm(f) < 1e-12:
                    ok = True
                    break
                jac = eom_jacobian(params, p)
                try:
                    step = np.linalg.solve(jac, f)
                except np.linalg.LinAlgError:
                    break
                if np.linalg.norm(step) > 0.5:
                    step *= 0.5 / np.linalg.norm(step)
                x = x - step
                if abs(x[0]) > 0.999999:
                    break
            if not ok:
                continue
            cand = PhasePoint(float(x[0]),
                              float((x[1] + np.pi) % (2.0 * np.pi) - np.pi))
            if all(np.hypot(cand.z - q.z,
                            np.angle(np.exp(1j * (cand.phi - q.phi)))) > 1e-6
                   for q in found):
                found.append(cand)

    return [_classify(params, p) for p in found]


def linearized_evolution(params: DimerParams, z0: float, phi0: float,
                         t: float) -> tuple[float, float]:
    """Closed-form flow of the linearization at the antihom fixed point."""
    if not antihom_is_unstable(params):
        raise ValueError("linearized evolution requires the unstable regime gamma > 2")
    lam = stability_exponent(params)
    c = np.cos(params.theta)
    ch, sh = np.cosh(lam * t), np.sinh(lam * t)
    z_t = z0 * ch - (4.0 * c * phi0 / lam) * sh
    phi_t = phi0 * ch - (lam * z0 / (4.0 * c)) * sh
    return float(z_t), float(phi_t)


def phase_portrait_grid(params: DimerParams, n_z: int = 201, n_phi: int = 201):
    """Gridded energy h(z, phi) for contour (phase-portrait) export."""
    z = np.linspace(-0.999, 0.999, n_z)
    phi = np.linspace(-np.pi, np.pi, n_phi)
    zz, pp = np.meshgrid(z, phi, indexing="ij")
    return z, phi, classical_energy_arrays(params, zz, pp)
