"""Conserved-N Fock basis, Hamiltonian, and initial states of the two-site dimer.

The basis index k = 0..N is the occupation of site 1 (site 2 holds N - k).
Units: epsilon0 = hbar = 1, so time is measured in hbar/epsilon0.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

__all__ = [
    "DimerParams",
    "StateVector",
    "TridiagonalHamiltonian",
    "build_hamiltonian",
    "coherent_state",
    "number_operator_apply",
    "squeeze_by_backward_evolution",
]


@dataclass(frozen=True)
class DimerParams:
    """System definition: mixing angle theta, particle number N, energy scale.

    The parametrization J = eps0*cos(theta), g = eps0*(2/N)*sin(theta) pins
    J^2 + (g*N/2)^2 = eps0^2 and compactifies the parameter space to
    theta in [-pi/2, pi/2].
    """

    theta: float
    n_particles: int
    epsilon0: float = 1.0

    def __post_init__(self):
        if not -np.pi / 2 <= self.theta <= np.pi / 2:
            raise ValueError(f"theta must lie in [-pi/2, pi/2], got {self.theta}")
        if self.n_particles < 1:
            raise ValueError(f"n_particles must be >= 1, got {self.n_particles}")
        if self.epsilon0 <= 0:
            raise ValueError(f"epsilon0 must be positive, got {self.epsilon0}")

    @property
    def j_hop(self) -> float:
        return self.epsilon0 * np.cos(self.theta)

    @property
    def g_int(self) -> float:
        return self.epsilon0 * (2.0 / self.n_particles) * np.sin(self.theta)

    @property
    def gamma(self) -> float:
        """Nonlinearity parameter tan(theta) = g*N/(2*J)."""
        return np.tan(self.theta)

    @property
    def dim(self) -> int:
        return self.n_particles + 1


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitudes over the fixed-N Fock basis."""

    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        object.__setattr__(self, "amplitudes", amp)
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state norm deviates from 1 by {abs(norm - 1.0):.3e}")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def save_csv(self, path) -> None:
        data = np.column_stack([self.amplitudes.real, self.amplitudes.imag])
        np.savetxt(path, data, delimiter=",", header="re,im", comments="")


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    """Symmetric real tridiagonal Hamiltonian in the fixed-N sector."""

    diag: np.ndarray = field(repr=False)
    offdiag: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.ascontiguousarray(self.diag, dtype=np.float64)
        e = np.ascontiguousarray(self.offdiag, dtype=np.float64)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)
        if e.size != d.size - 1:
            raise ValueError("offdiag must have one entry fewer than diag")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("non-finite Hamiltonian entries")

    @property
    def dim(self) -> int:
        return self.diag.size

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        out = self.diag * amplitudes
        out[:-1] += self.offdiag * amplitudes[1:]
        out[1:] += self.offdiag * amplitudes[:-1]
        return out


def build_hamiltonian(params: DimerParams) -> TridiagonalHamiltonian:
    """Fixed-N matrix of -2J(a1+ a2 + a2+ a1) + (g/2)(n1(n1-1) + n2(n2-1))."""
    n = params.n_particles
    k = np.arange(n + 1, dtype=np.float64)
    diag = (params.g_int / 2.0) * (k * (k - 1.0) + (n - k) * (n - k - 1.0))
    kk = k[:-1]
    offdiag = -2.0 * params.j_hop * np.sqrt((kk + 1.0) * (n - kk))
    return TridiagonalHamiltonian(diag, offdiag)


def coherent_state(params: DimerParams, z: float, phi: float) -> StateVector:
    """Number-projected coherent state centered at the phase-space point (z, phi).

    Amplitudes c_k ~ sqrt(binom(N,k)) xi1^k xi2^(N-k) with xi1 = sqrt((1+z)/2)
    and xi2 = sqrt((1-z)/2) e^{i theta_rel}, theta_rel = -(phi + pi); this maps
    the antihom fixed point (0, 0) onto xi = (1, -1)/sqrt(2).  Moduli are
    accumulated in log space so N up to 1e5 does not overflow.
    """
    if abs(z) > 1.0:
        raise ValueError(f"|z| must be <= 1, got z={z}")
    n = params.n_particles
    k = np.arange(n + 1, dtype=np.float64)

    log_binom = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    # 0 * log(0) terms at z = +/-1 select a single Fock state.
    with np.errstate(divide="ignore", invalid="ignore"):
        log_p1 = np.log((1.0 + z) / 2.0)
        log_p2 = np.log((1.0 - z) / 2.0)
        log_mod2 = log_binom.copy()
        log_mod2 += np.where(k > 0, k * log_p1, 0.0)
        log_mod2 += np.where(k < n, (n - k) * log_p2, 0.0)

    theta_rel = -(phi + np.pi)
    log_mod2 -= np.max(log_mod2)
    amp = np.exp(0.5 * log_mod2) * np.exp(1j * (n - k) * theta_rel)
    amp /= np.linalg.norm(amp)
    return StateVector(amp)


def number_operator_apply(state: StateVector) -> np.ndarray:
    """Apply n1 in the Fock basis; returns raw (unnormalized) amplitudes."""
    k = np.arange(state.dim, dtype=np.float64)
    return k * state.amplitudes


def squeeze_by_backward_evolution(params: DimerParams, state: StateVector,
                                  t0: float, propagator=None) -> StateVector:
    """Return U(t0)|state>, with t0 < 0 squeezing along the unstable manifold."""
    if t0 == 0.0:
        return state
    from . import propagate

    if propagator is None:
        propagator = propagate.make_propagator(build_hamiltonian(params))
    return propagate.evolve(propagator, state, t0)
