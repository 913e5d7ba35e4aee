"""Exact quantum time evolution and the out-of-time-order correlator C(t).

Two interchangeable backends: a one-shot symmetric tridiagonal
eigendecomposition (default up to N ~ 1e4) and a Chebyshev polynomial
expansion of exp(-iHt) whose cost per application is linear in the basis
size.  C(t) = || (n1(t) n1 - n1 n1(t)) |psi> ||^2 is evaluated through four
state evolutions per time, so it is real and nonnegative by construction.
"""

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import jv

from . import _kernels
from .hilbert import DimerParams, StateVector, TridiagonalHamiltonian

__all__ = [
    "PropagationError",
    "Propagator",
    "OtocSeries",
    "make_propagator",
    "evolve",
    "otoc",
]

_BACKEND_ALIASES = {
    "eig": "eigendecomposition",
    "eigendecomposition": "eigendecomposition",
    "cheb": "chebyshev",
    "chebyshev": "chebyshev",
}

_MAX_CHEBYSHEV_TERMS = 2_000_000


class PropagationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Propagator:
    backend: str
    # eigendecomposition backend
    eigenvalues: np.ndarray | None = field(default=None, repr=False)
    eigenvectors: np.ndarray | None = field(default=None, repr=False)
    # chebyshev backend
    diag_scaled: np.ndarray | None = field(default=None, repr=False)
    offdiag_scaled: np.ndarray | None = field(default=None, repr=False)
    e_min: float = 0.0
    e_max: float = 0.0
    tol: float = 1e-10

    @property
    def dim(self) -> int:
        if self.backend == "eigendecomposition":
            return self.eigenvalues.size
        return self.diag_scaled.size


def make_propagator(hamiltonian: TridiagonalHamiltonian,
                    backend: str = "eigendecomposition",
                    tol: float = 1e-10) -> Propagator:
    """Prepare a reusable propagator for the given tridiagonal Hamiltonian."""
    try:
        backend = _BACKEND_ALIASES[backend]
    except KeyError:
        raise ValueError(f"unknown backend {backend!r}") from None

    if backend == "eigendecomposition":
        try:
            energies, vectors = scipy.linalg.eigh_tridiagonal(
                hamiltonian.diag, hamiltonian.offdiag)
        except scipy.linalg.LinAlgError as exc:
            raise PropagationError(f"tridiagonal eigensolver failed: {exc}") from exc
        return Propagator(backend="eigendecomposition",
                          eigenvalues=energies, eigenvectors=vectors, tol=tol)

    # Gershgorin disc bounds, padded by 1% of the span.
    d, e = hamiltonian.diag, hamiltonian.offdiag
    radius = np.zeros_like(d)
    radius[:-1] += np.abs(e)
    radius[1:] += np.abs(e)
    lo = float(np.min(d - radius))
    hi = float(np.max(d + radius))
    pad = 0.01 * (hi - lo + 1e-30)
    lo -= pad
    hi += pad
    half_span = 0.5 * (hi - lo)
    center = 0.5 * (hi + lo)
    return Propagator(backend="chebyshev",
                      diag_scaled=(d - center) / half_span,
                      offdiag_scaled=e / half_span,
                      e_min=lo, e_max=hi, tol=tol)


def _chebyshev_coefficients(prop: Propagator, t: float) -> np.ndarray:
    half_span = 0.5 * (prop.e_max - prop.e_min)
    center = 0.5 * (prop.e_max + prop.e_min)
    y = half_span * t
    n_terms = int(abs(y) + 12.0 * (abs(y) ** (1.0 / 3.0) + 1.0) + 20.0)
    if n_terms > _MAX_CHEBYSHEV_TERMS:
        raise PropagationError(
            f"Chebyshev series needs {n_terms} terms for t={t}; "
            "slice the evolution into shorter time steps")
    k = np.arange(n_terms + 1)
    bessel = jv(k, y)
    coeffs = np.where(k == 0, 1.0, 2.0) * (-1j) ** k * bessel
    # Drop the negligible tail beyond the Bessel turnover.
    keep = n_terms + 1
    floor = prop.tol * 1e-3
    while keep > 2 and abs(coeffs[keep - 1]) < floor and abs(coeffs[keep - 2]) < floor:
        keep -= 1
    return np.exp(-1j * center * t) * coeffs[:keep]


def _evolve_raw(prop: Propagator, amplitudes: np.ndarray, t: float) -> np.ndarray:
    if t == 0.0:
        return amplitudes.copy()
    if prop.backend == "eigendecomposition":
        w = prop.eigenvectors.T @ amplitudes
        return prop.eigenvectors @ (np.exp(-1j * prop.eigenvalues * t) * w)
    coeffs = _chebyshev_coefficients(prop, t)
    return _kernels.chebyshev_apply(prop.diag_scaled, prop.offdiag_scaled,
                                    np.ascontiguousarray(coeffs, dtype=np.complex128),
                                    np.ascontiguousarray(amplitudes, dtype=np.complex128))


def evolve(prop: Propagator, state: StateVector, t: float) -> StateVector:
    """Return exp(-iHt)|state>; negative t propagates backward."""
    if not np.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    amp = _evolve_raw(prop, state.amplitudes, t)
    norm = np.linalg.norm(amp)
    if abs(norm - 1.0) > max(10.0 * prop.tol, 1e-10):
        raise PropagationError(
            f"norm drifted to {norm} at t={t}; tighten the tolerance or slice the evolution")
    return StateVector(amp / norm)


@dataclass(frozen=True)
class OtocSeries:
    """Time series of the squared-commutator OTOC plus its provenance."""

    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    params_snapshot: DimerParams | None = None
    state_label: str = ""
    stderr: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        t = np.ascontiguousarray(self.times, dtype=np.float64)
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if np.any(v < -1e-12):
            raise ValueError("OTOC values must be nonnegative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", np.clip(v, 0.0, None))

    def save_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.times, self.values]),
                   delimiter=",", header="t,C", comments="")

    def save_json(self, path) -> None:
        doc = {
            "times": self.times.tolist(),
            "values": self.values.tolist(),
            "state_label": self.state_label,
        }
        if self.params_snapshot is not None:
            doc["params"] = {
                "theta": self.params_snapshot.theta,
                "n_particles": self.params_snapshot.n_particles,
                "epsilon0": self.params_snapshot.epsilon0,
            }
        if self.stderr is not None:
            doc["stderr"] = np.asarray(self.stderr).tolist()
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)


def _number_weights(dim: int, operator: str) -> np.ndarray:
    k = np.arange(dim, dtype=np.float64)
    if operator == "site1":
        return k
    if operator == "half_difference":
        return k - 0.5 * (dim - 1)
    raise ValueError(f"unknown operator {operator!r}")


def _otoc_eig(prop: Propagator, psi: np.ndarray, times: np.ndarray,
              weights: np.ndarray, chunk: int = 64) -> np.ndarray:
    vecs = prop.eigenvectors
    energies = prop.eigenvalues
    w_psi = vecs.T @ psi
    w_npsi = vecs.T @ (weights * psi)
    values = np.empty(times.size)
    for start in range(0, times.size, chunk):
        ts = times[start:start + chunk]
        phases = np.exp(-1j * np.outer(energies, ts))
        a = vecs @ (phases * w_psi[:, None])
        b = vecs @ (phases * w_npsi[:, None])
        c = vecs @ (phases.conj() * (vecs.T @ (weights[:, None] * b)))
        e = vecs @ (phases.conj() * (vecs.T @ (weights[:, None] * a)))
        d = weights[:, None] * e
        values[start:start + ts.size] = np.sum(np.abs(c - d) ** 2, axis=0)
    return values


def _otoc_chebyshev(prop: Propagator, psi: np.ndarray, times: np.ndarray,
                    weights: np.ndarray) -> np.ndarray:
    values = np.empty(times.size)
    a = psi.copy()
    b = weights * psi
    t_prev = 0.0
    for j, t in enumerate(times):
        dt = t - t_prev
        if dt != 0.0:
            a = _evolve_raw(prop, a, dt)
            b = _evolve_raw(prop, b, dt)
            t_prev = t
        c = _evolve_raw(prop, weights * b, -t)
        e = _evolve_raw(prop, weights * a, -t)
        values[j] = np.sum(np.abs(c - weights * e) ** 2)
    return values


def otoc(prop: Propagator, state: StateVector, times,
         params: DimerParams | None = None, state_label: str = "",
         operator: str = "site1") -> OtocSeries:
    """C(t) = ||(n(t) n - n n(t))|psi>||^2 on an ascending time grid."""
    times = np.ascontiguousarray(times, dtype=np.float64)
    if times.ndim != 1 or np.any(np.diff(times) < 0):
        raise ValueError("times must be a 1-d ascending array")
    weights = _number_weights(prop.dim, operator)
    psi = state.amplitudes
    if prop.backend == "eigendecomposition":
        values = _otoc_eig(prop, psi, times, weights)
    else:
        values = _otoc_chebyshev(prop, psi, times, weights)
    # Roundoff can leave tiny negative values at early times.
    values = np.clip(values, 0.0, None)
    return OtocSeries(times=times, values=values, params_snapshot=params,
                      state_label=state_label)


def default_time_grid(tau_ehrenfest: float, n_points: int = 400) -> np.ndarray:
    """Uniform grid on [0, 1.5 * tau_E], the default for figure reproduction."""
    return np.linspace(0.0, 1.5 * tau_ehrenfest, n_points)
