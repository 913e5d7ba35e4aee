"""Fock-basis construction, coherent states, and squeezing."""

import numpy as np
import pytest
from scipy.special import comb

from dimer_otoc import hilbert, phasespace, propagate
from dimer_otoc.hilbert import (DimerParams, StateVector, build_hamiltonian,
                                coherent_state, number_operator_apply,
                                squeeze_by_backward_evolution)


def dense_hamiltonian(params):
    """Brute-force dense matrix from ladder-operator matrix elements."""
    n = params.n_particles
    dim = n + 1
    h = np.zeros((dim, dim))
    for k in range(dim):
        n1, n2 = k, n - k
        h[k, k] = (params.g_int / 2.0) * (n1 * (n1 - 1) + n2 * (n2 - 1))
        if k + 1 <= n:
            # a1+ a2 |n1, n2> = sqrt((n1+1) n2) |n1+1, n2-1>
            amp = np.sqrt((n1 + 1) * n2)
            h[k + 1, k] += -2.0 * params.j_hop * amp
            h[k, k + 1] += -2.0 * params.j_hop * amp
    return h


class TestDimerParams:
    def test_theta_range_enforced(self):
        with pytest.raises(ValueError):
            DimerParams(theta=2.0, n_particles=10)
        with pytest.raises(ValueError):
            DimerParams(theta=-2.0, n_particles=10)

    def test_n_particles_positive(self):
        with pytest.raises(ValueError):
            DimerParams(theta=0.5, n_particles=0)

    def test_epsilon0_positive(self):
        with pytest.raises(ValueError):
            DimerParams(theta=0.5, n_particles=10, epsilon0=-1.0)

    def test_parametrization_constraint(self):
        # j_hop^2 + (g_int N / 2)^2 = epsilon0^2 exactly.
        for theta in np.linspace(-np.pi / 2, np.pi / 2, 17):
            p = DimerParams(theta=float(theta), n_particles=37, epsilon0=2.5)
            assert p.j_hop ** 2 + (p.g_int * p.n_particles / 2) ** 2 == \
                pytest.approx(p.epsilon0 ** 2, rel=1e-14)

    def test_gamma_definition(self):
        p = DimerParams(theta=1.1, n_particles=50)
        assert p.gamma == pytest.approx(p.g_int * p.n_particles / (2 * p.j_hop),
                                        rel=1e-12)

    def test_dim(self):
        assert DimerParams(theta=0.0, n_particles=7).dim == 8


class TestStateVector:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            StateVector(np.array([1.0, 1.0]))

    def test_overlap(self):
        a = StateVector(np.array([1.0, 0.0]))
        b = StateVector(np.array([0.0, 1.0j]))
        assert a.overlap(a) == pytest.approx(1.0)
        assert a.overlap(b) == pytest.approx(0.0)

    def test_save_csv(self, tmp_path):
        path = tmp_path / "state.csv"
        StateVector(np.array([1.0, 0.0])).save_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "re,im"
        assert len(lines) == 3


class TestBuildHamiltonian:
    def test_n1_hopping_only(self):
        # N=1, theta=0: J=1, g=0 -> d=[0,0], e=[-2].
        h = build_hamiltonian(DimerParams(theta=0.0, n_particles=1))
        np.testing.assert_allclose(h.diag, [0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(h.offdiag, [-2.0], rtol=1e-15)

    def test_n2_interaction_only(self):
        # N=2, theta=pi/2: J=0, g=1 -> d=[1,0,1], e=[0,0].
        h = build_hamiltonian(DimerParams(theta=np.pi / 2, n_particles=2))
        np.testing.assert_allclose(h.diag, [1.0, 0.0, 1.0], atol=1e-15)
        np.testing.assert_allclose(h.offdiag, [0.0, 0.0], atol=1e-15)

    def test_n2_hopping_only(self):
        h = build_hamiltonian(DimerParams(theta=0.0, n_particles=2))
        np.testing.assert_allclose(h.diag, [0.0, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(h.offdiag,
                                   [-2 * np.sqrt(2), -2 * np.sqrt(2)], rtol=1e-15)

    def test_matches_dense_ladder_oracle(self):
        for theta, n in [(0.3, 5), (1.35, 12), (-0.9, 8)]:
            p = DimerParams(theta=theta, n_particles=n)
            h = build_hamiltonian(p)
            dense = dense_hamiltonian(p)
            np.testing.assert_allclose(np.diag(dense), h.diag, atol=1e-12)
            np.testing.assert_allclose(np.diag(dense, 1), h.offdiag, atol=1e-12)

    def test_site_exchange_symmetry(self):
        h = build_hamiltonian(DimerParams(theta=1.2, n_particles=9))
        np.testing.assert_allclose(h.diag, h.diag[::-1], rtol=1e-13)

    def test_offdiag_nonpositive_for_positive_hopping(self):
        h = build_hamiltonian(DimerParams(theta=0.4, n_particles=20))
        assert np.all(h.offdiag <= 0)

    def test_apply_equals_dense_matvec(self):
        p = DimerParams(theta=0.8, n_particles=10)
        h = build_hamiltonian(p)
        rng = np.random.default_rng(1)
        v = rng.normal(size=p.dim) + 1j * rng.normal(size=p.dim)
        np.testing.assert_allclose(h.apply(v.copy()), dense_hamiltonian(p) @ v,
                                   rtol=1e-12)


class TestCoherentState:
    def test_n2_center_amplitudes(self):
        # (a1+ - a2+)^2 |0>/2 -> amplitudes (1, -sqrt(2), 1)/2.
        st = coherent_state(DimerParams(theta=1.35, n_particles=2), 0.0, 0.0)
        amp = st.amplitudes
        np.testing.assert_allclose(np.abs(amp) ** 2, [0.25, 0.5, 0.25], rtol=1e-12)
        rel = amp / amp[0]
        np.testing.assert_allclose(rel.imag, 0.0, atol=1e-12)
        assert rel[1].real < 0 and rel[2].real > 0

    def test_z_one_is_fock_state(self):
        st = coherent_state(DimerParams(theta=0.5, n_particles=6), 1.0, 0.7)
        expected = np.zeros(7)
        expected[6] = 1.0
        np.testing.assert_allclose(np.abs(st.amplitudes), expected, atol=1e-12)

    def test_z_out_of_range(self):
        with pytest.raises(ValueError):
            coherent_state(DimerParams(theta=0.5, n_particles=6), 1.5, 0.0)

    def test_large_n_binomial(self):
        n = 1000
        st = coherent_state(DimerParams(theta=1.35, n_particles=n), 0.0, 0.0)
        probs = np.abs(st.amplitudes) ** 2
        assert abs(probs.sum() - 1.0) < 1e-12
        assert np.argmax(probs) == n // 2
        # Center of the binomial matches the exact value.
        k = n // 2
        assert probs[k] == pytest.approx(comb(n, k, exact=True) * 0.5 ** n,
                                         rel=1e-10)

    def test_offcenter_matches_binomial(self):
        n, z = 40, 0.3
        st = coherent_state(DimerParams(theta=1.0, n_particles=n), z, 0.2)
        k = np.arange(n + 1)
        expected = comb(n, k) * ((1 + z) / 2) ** k * ((1 - z) / 2) ** (n - k)
        np.testing.assert_allclose(np.abs(st.amplitudes) ** 2, expected, rtol=1e-10)


class TestNumberOperator:
    def test_fock_eigenvector(self):
        amp = np.zeros(8)
        amp[3] = 1.0
        st = StateVector(amp)
        np.testing.assert_allclose(number_operator_apply(st), 3.0 * amp, atol=1e-15)

    def test_uniform_n2(self):
        st = StateVector(np.full(3, 1 / np.sqrt(3)))
        np.testing.assert_allclose(number_operator_apply(st),
                                   np.array([0.0, 1.0, 2.0]) / np.sqrt(3), rtol=1e-14)

    def test_coherent_center_mean_is_half_n(self):
        for n in (4, 51, 400):
            st = coherent_state(DimerParams(theta=1.35, n_particles=n), 0.0, 0.0)
            mean = np.vdot(st.amplitudes, number_operator_apply(st)).real
            assert mean == pytest.approx(n / 2.0, rel=1e-12)


class TestSqueeze:
    def test_t0_zero_is_identity(self):
        p = DimerParams(theta=1.35, n_particles=30)
        st = coherent_state(p, 0.0, 0.0)
        assert squeeze_by_backward_evolution(p, st, 0.0) is st

    def test_forward_evolution_recovers_state(self):
        p = DimerParams(theta=1.35, n_particles=100)
        st = coherent_state(p, 0.0, 0.0)
        prop = propagate.make_propagator(build_hamiltonian(p))
        sq = squeeze_by_backward_evolution(p, st, -2.0, prop)
        back = propagate.evolve(prop, sq, 2.0)
        assert abs(st.overlap(back)) == pytest.approx(1.0, abs=1e-8)

    def test_squeezing_narrows_unstable_direction(self):
        # Backward evolution contracts the Husimi blob along the unstable
        # eigendirection of the hyperbolic fixed point.  The width is probed
        # by a 1-d Husimi slice through the fixed point along that direction
        # (global moments would be dominated by the long ridge the same
        # evolution stretches out along the stable manifold).  The squeezed
        # slice saturates the Husimi kernel resolution, a factor ~1/sqrt(2)
        # below the coherent-state width.
        from dimer_otoc import meanfield, separatrix

        p = DimerParams(theta=1.35, n_particles=1000)
        ts = separatrix.time_scales(p, 1.0)
        st = coherent_state(p, 0.0, 0.0)
        sq = squeeze_by_backward_evolution(p, st, -ts.tau_E / 2.0)

        jac = meanfield.eom_jacobian(p, meanfield.PhasePoint(0.0, 0.0))
        eigvals, eigvecs = np.linalg.eig(jac)
        u = np.real(eigvecs[:, np.argmax(eigvals.real)])
        u /= np.linalg.norm(u)

        s_grid = np.linspace(-0.1, 0.1, 401)

        def slice_width(state):
            dens = np.array([abs(coherent_state(p, float(s * u[0]),
                                                float(s * u[1])).overlap(state)) ** 2
                             for s in s_grid])
            above = s_grid[dens >= 0.5 * dens.max()]
            return above.max() - above.min()

        assert slice_width(sq) < 0.8 * slice_width(st)
