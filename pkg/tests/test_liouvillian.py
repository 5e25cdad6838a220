import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from sgc_chi import DensityMatrix, SystemParams, build_liouvillian, equations_of_motion, evolve, steady_state
from sgc_chi.core import random_density_matrix
from sgc_chi.errors import IntegrationError, NonUniqueSteadyState
import sgc_chi.liouvillian as liouvillian_module


def lindblad_rhs(params, rho):
    """Matrix-form master equation, written without vectorisation."""
    oc, op, dp = params.omega_c, params.omega_p, params.delta_p
    h = np.array([[dp, -oc, -op], [-oc, dp, 0], [-op, 0, 0]], dtype=complex)
    s = [np.zeros((3, 3), complex), np.zeros((3, 3), complex)]
    s[0][1, 0] = s[1][2, 0] = 1
    g = [[2 * params.gamma2, 2 * params.p * math.sqrt(params.gamma2 * params.gamma3)],
         [2 * params.p * math.sqrt(params.gamma2 * params.gamma3), 2 * params.gamma3]]
    out = -1j * (h @ rho - rho @ h)
    for i in range(2):
        for j in range(2):
            a = s[j].conj().T @ s[i]
            out += g[i][j] * (s[i] @ rho @ s[j].conj().T - 0.5 * (a @ rho + rho @ a))
    return out


def random_hermitian(rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    return m + m.conj().T


params_strategy = st.builds(
    SystemParams,
    gamma2=st.floats(0.1, 5.0),
    gamma3=st.floats(0.1, 5.0),
    p=st.floats(-1.0, 1.0),
    omega_c0=st.floats(0.0, 10.0),
    omega_p0=st.floats(0.0, 5.0),
    delta_p=st.floats(-20.0, 20.0),
)


class TestEquationsOfMotion:
    def test_trap_state(self, ref_point):
        d = equations_of_motion(ref_point.with_(omega_p0=0.0), DensityMatrix.pure(3))
        np.testing.assert_array_equal(d, np.zeros((3, 3)))

    def test_pure_decay(self):
        params = SystemParams(gamma2=1.0, gamma3=1.0, p=0.0, omega_c0=0.0, omega_p0=0.0, delta_p=3.0)
        d = equations_of_motion(params, DensityMatrix.pure(1))
        expected = np.diag([-4.0, 2.0, 2.0]).astype(complex)
        np.testing.assert_array_equal(d, expected)

    def test_sgc_source(self):
        params = SystemParams(gamma2=1.0, gamma3=1.0, p=0.5, omega_c0=0.0, omega_p0=0.0, delta_p=0.0)
        d = equations_of_motion(params, DensityMatrix.pure(1))
        assert d[1, 2] == 1.0 and d[2, 1] == 1.0

    def test_matches_matrix_lindblad(self, sgc_point, rng):
        for _ in range(10):
            rho = random_density_matrix(rng)
            np.testing.assert_allclose(equations_of_motion(sgc_point, rho), lindblad_rhs(sgc_point, rho.rho),
                                       atol=1e-13)

    @settings(max_examples=50, deadline=None)
    @given(params=params_strategy, seed=st.integers(0, 2**32 - 1))
    def test_trace_and_hermiticity(self, params, seed):
        rho = random_hermitian(np.random.default_rng(seed))
        d = equations_of_motion(params, rho)
        assert abs(np.trace(d)) <= 1e-13 * max(1.0, np.abs(d).max())
        assert np.max(np.abs(d - d.conj().T)) <= 1e-12 * max(1.0, np.abs(d).max())

    @settings(max_examples=30, deadline=None)
    @given(params=params_strategy, alpha=st.floats(-2, 2), seed=st.integers(0, 2**32 - 1))
    def test_linearity(self, params, alpha, seed):
        r = np.random.default_rng(seed)
        a, b = random_hermitian(r), random_hermitian(r)
        lhs = equations_of_motion(params, alpha * a + (1 - alpha) * b)
        rhs = alpha * equations_of_motion(params, a) + (1 - alpha) * equations_of_motion(params, b)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12 * max(1.0, np.abs(lhs).max()))


class TestLiouvillian:
    def test_shape_and_immutable(self, ref_point):
        lv = build_liouvillian(ref_point)
        assert lv.l.shape == (9, 9)
        with pytest.raises(ValueError):
            lv.l[0, 0] = 1

    def test_trap_in_kernel(self, ref_point):
        lv = build_liouvillian(ref_point.with_(omega_p0=0.0))
        np.testing.assert_array_equal(lv.l @ DensityMatrix.pure(3).vec(), np.zeros(9))

    @settings(max_examples=50, deadline=None)
    @given(params=params_strategy)
    def test_trace_preserving(self, params):
        assert build_liouvillian(params).trace_defect() <= 1e-12

    def test_matches_equations_of_motion(self, sgc_point, rng):
        lv = build_liouvillian(sgc_point)
        for _ in range(20):
            rho = random_density_matrix(rng)
            np.testing.assert_allclose(lv.apply(rho), equations_of_motion(sgc_point, rho), atol=1e-12, rtol=0)

    @settings(max_examples=30, deadline=None)
    @given(params=params_strategy, seed=st.integers(0, 2**32 - 1))
    def test_matches_equations_of_motion_anywhere(self, params, seed):
        rho = random_hermitian(np.random.default_rng(seed))
        lv = build_liouvillian(params)
        np.testing.assert_allclose(lv.apply(rho), equations_of_motion(params, rho), atol=1e-12 * 50, rtol=1e-12)

    def test_hermiticity_compatible(self, sgc_point, rng):
        lv = build_liouvillian(sgc_point)
        out = lv.apply(random_hermitian(rng))
        assert np.max(np.abs(out - out.conj().T)) <= 1e-12


class TestSteadyState:
    def test_pumped_into_trap(self, ref_point):
        rho = steady_state(ref_point.with_(omega_p0=0.0))
        np.testing.assert_allclose(rho.rho, np.diag([0, 0, 1]), atol=1e-14)

    @pytest.mark.parametrize("p", [0.0, 0.5, 0.99])
    def test_ref_point_physical(self, ref_point, p):
        params = ref_point.with_(p=p)
        rho = steady_state(params)
        assert np.max(np.abs(build_liouvillian(params).l @ rho.vec())) <= 1e-10
        assert rho.violations() == []

    def test_kernel_of_generator(self, sgc_point):
        # the solve must land in the null space found by SVD
        l = build_liouvillian(sgc_point).l
        _, s, vh = np.linalg.svd(l)
        assert s[-1] < 1e-12 * s[0] and s[-2] > 1e-6
        null = vh[-1].conj()
        null = null / null[[0, 4, 8]].sum()
        np.testing.assert_allclose(steady_state(sgc_point).vec(), null, atol=1e-12)

    def test_no_fields_degenerate(self, ref_point):
        params = ref_point.with_(omega_c0=0.0, omega_p0=0.0, delta_p=1.5)
        s = np.linalg.svd(build_liouvillian(params).l, compute_uv=False)
        assert np.sum(s < 1e-12) == 2  # rho22 and rho33 are both stationary
        with pytest.raises(NonUniqueSteadyState) as info:
            steady_state(params)
        assert info.value.rcond < 1e-12

    def test_unit_alignment_degenerate(self, ref_point):
        with pytest.raises(NonUniqueSteadyState):
            steady_state(ref_point.with_(p=1.0))

    def test_dark_state_on_resonance(self, ref_point):
        params = ref_point.with_(delta_p=0.0, omega_p0=0.7)
        oc, op = params.omega_c, params.omega_p
        dark = np.array([0, -op, oc]) / math.hypot(oc, op)
        np.testing.assert_allclose(steady_state(params).rho, np.outer(dark, dark), atol=1e-13)


class TestEvolve:
    def test_fixed_point(self, ref_point):
        traj = evolve(ref_point.with_(omega_p0=0.0), DensityMatrix.pure(3), 5.0)
        for state in traj.states:
            np.testing.assert_array_equal(state.rho, DensityMatrix.pure(3).rho)
        assert traj.converged

    def test_times_increasing(self, ref_point):
        traj = evolve(ref_point, DensityMatrix.pure(2), 3.0)
        assert np.all(np.diff(traj.times) > 0)
        assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(3.0)
        assert len(traj.states) == len(traj.times)

    def test_trace_conserved(self, sgc_point, rng):
        traj = evolve(sgc_point, random_density_matrix(rng), 30.0)
        assert max(s.trace_defect for s in traj.states) <= 1e-10
        assert max(s.hermiticity_defect for s in traj.states) <= 1e-10

    def test_matches_propagator(self, sgc_point):
        # exact solution through the matrix exponential
        rho0 = DensityMatrix.diagonal([1 / 3] * 3)
        traj = evolve(sgc_point, rho0, 10.0, stop_when_converged=False)
        l = build_liouvillian(sgc_point).l
        exact = scipy.linalg.expm(l * traj.times[-1]) @ rho0.vec()
        np.testing.assert_allclose(traj.final.vec(), exact, atol=1e-8)

    def test_converges_to_steady_state(self, ref_point):
        traj = evolve(ref_point, DensityMatrix.diagonal([1 / 3] * 3), 100.0)
        assert traj.converged
        assert traj.final_residual < 1e-10
        assert np.max(np.abs(traj.final.rho - steady_state(ref_point).rho)) <= 1e-8

    def test_not_converged_flag(self, sgc_point):
        traj = evolve(sgc_point, DensityMatrix.pure(2), 2.0)
        assert not traj.converged
        assert traj.final_residual > 1e-10

    def test_positivity(self, rng):
        for _ in range(5):
            params = SystemParams(gamma3=float(rng.uniform(0.3, 2)), p=float(rng.uniform(-1, 1)),
                                  omega_c0=float(rng.uniform(0, 5)), omega_p0=float(rng.uniform(0, 2)),
                                  delta_p=float(rng.uniform(-5, 5)))
            traj = evolve(params, random_density_matrix(rng, rank=1), 10.0)
            assert min(s.min_eigenvalue for s in traj.states) >= -1e-8

    def test_rejects_nonpositive_time(self, ref_point):
        with pytest.raises(ValueError):
            evolve(ref_point, DensityMatrix.pure(3), 0.0)

    def test_step_underflow_reports_last_state(self, ref_point, monkeypatch):
        class Failing(liouvillian_module.RK45):
            calls = 0

            def step(self):
                Failing.calls += 1
                if Failing.calls > 3:
                    self.status = "failed"
                    return "Required step size is less than spacing between numbers."
                return super().step()

        monkeypatch.setattr(liouvillian_module, "RK45", Failing)
        with pytest.raises(IntegrationError) as info:
            evolve(ref_point, DensityMatrix.pure(2), 1.0)
        assert info.value.last_time > 0
        assert info.value.last_state.trace_defect < 1e-10
        assert "step size" in str(info.value)
