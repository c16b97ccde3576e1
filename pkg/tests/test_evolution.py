import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracheat.evolution import (
    EvolutionProblem,
    Nonlinearity,
    SchemeConfig,
    caputo_l1_weights,
    evaluate_mild,
    solve,
    solve_scalar_l1,
    sup_norm_error,
)
from fracheat.grid import GridFunction, Mesh, restrict
from fracheat.kernel import apply_operator, kernel_weights
from fracheat.special import mittag_leffler


def _gaussian(mesh):
    return restrict(lambda x: math.exp(-x * x / 4.0), mesh)


class TestL1Weights:
    def test_first_weight(self):
        alpha, dt = 0.5, 0.01
        b = caputo_l1_weights(alpha, 10, dt)
        assert b[0] == pytest.approx(dt ** (-alpha) / math.gamma(2.0 - alpha), rel=1e-14)

    def test_positive_strictly_decreasing(self):
        b = caputo_l1_weights(0.5, 100, 0.01)
        assert np.all(b > 0.0)
        assert np.all(np.diff(b) < 0.0)

    def test_alpha_near_one_collapses_to_backward_difference(self):
        dt = 0.01
        b = caputo_l1_weights(0.999, 50, dt)
        assert b[0] == pytest.approx(1.0 / dt, rel=2e-2)
        assert abs(b[1]) < 1e-2 * b[0]

    def test_rejects_alpha_one(self):
        with pytest.raises(ValueError):
            caputo_l1_weights(1.0, 10, 0.01)

    @given(alpha=st.floats(0.05, 0.95))
    @settings(max_examples=25, deadline=None)
    def test_weights_decreasing_any_alpha(self, alpha):
        b = caputo_l1_weights(alpha, 40, 0.02)
        assert np.all(np.diff(b) < 0.0)


class TestScalarL1:
    @pytest.mark.parametrize("alpha", [0.3, 0.7])
    def test_error_decreases_with_dt(self, alpha):
        errs = []
        for dt in (1e-2, 5e-3, 2.5e-3):
            tt, y = solve_scalar_l1(alpha, 1.0, 1.0, dt)
            ref = np.array([mittag_leffler(alpha, -t ** alpha) for t in tt])
            errs.append(np.max(np.abs(y - ref)))
        assert errs[0] > errs[1] > errs[2]

    def test_final_time_value(self):
        tt, y = solve_scalar_l1(0.6, 2.0, 1.0, 1e-3)
        ref = mittag_leffler(0.6, -2.0)
        assert y[-1] == pytest.approx(ref, abs=5e-3)


class TestBackwardEuler:
    def test_zero_data_zero_forcing_stays_zero(self):
        mesh = Mesh(h=0.5, a=-10.0, b=10.0)
        nl = Nonlinearity(f=lambda u: -u ** 3, df=lambda u: -3.0 * u * u)
        prob = EvolutionProblem(
            s=0.5, alpha=1.0, mesh=mesh,
            u0=GridFunction(mesh, np.zeros(mesh.n_points)),
            t_horizon=0.1, nonlinearity=nl,
        )
        traj = solve(prob, SchemeConfig(stepper="backward_euler", dt=0.02))
        assert traj.final.sup_norm() == 0.0

    def test_sup_norm_stability_homogeneous(self):
        rng = np.random.default_rng(5)
        mesh = Mesh(h=0.5, a=-10.0, b=10.0)
        prob = EvolutionProblem(
            s=0.7, alpha=1.0, mesh=mesh,
            u0=GridFunction(mesh, rng.uniform(-1.0, 1.0, mesh.n_points)),
            t_horizon=0.2,
        )
        traj = solve(prob, SchemeConfig(stepper="backward_euler", dt=0.02,
                                        snapshot_times=(0.02, 0.1, 0.2)))
        norms = [prob.u0.sup_norm()] + [
            traj.snapshots[t].sup_norm() for t in sorted(traj.snapshots)
        ]
        assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))

    def test_implicit_residual_small(self):
        mesh = Mesh(h=0.5, a=-10.0, b=10.0)
        prob = EvolutionProblem(s=0.6, alpha=1.0, mesh=mesh, u0=_gaussian(mesh),
                                t_horizon=0.01)
        traj = solve(prob, SchemeConfig(stepper="backward_euler", dt=0.01))
        residual = float(traj.log[0].split(",")[4])
        assert residual < 1e-10

    def test_plane_wave_amplitude_scaling(self):
        # one homogeneous step: center amplitude scales by 1/(1 + dt * symbol)
        s, h, om, dt = 0.6, 0.1, 1.3, 0.01
        mesh = Mesh(h=h, a=-400.0, b=400.0)
        u0 = restrict(lambda x: math.cos(om * x), mesh)
        prob = EvolutionProblem(s=s, alpha=1.0, mesh=mesh, u0=u0, t_horizon=dt)
        traj = solve(prob, SchemeConfig(stepper="backward_euler", dt=dt))
        sym = (4.0 * math.sin(om * h / 2.0) ** 2 / h ** 2) ** s
        sl = mesh.window_slice(-2.0, 2.0)
        expected = u0.values[sl] / (1.0 + dt * sym)
        assert np.max(np.abs(traj.final.values[sl] - expected)) < 1e-5

    def test_newton_quadratic_convergence_semilinear(self):
        mesh = Mesh(h=0.5, a=-10.0, b=10.0)
        bump = restrict(lambda x: 0.5 * math.exp(-x * x), mesh)
        nl = Nonlinearity(f=lambda u: -u ** 3, df=lambda u: -3.0 * u * u)
        prob = EvolutionProblem(s=0.5, alpha=1.0, mesh=mesh, u0=bump,
                                t_horizon=0.05, nonlinearity=nl)
        traj = solve(prob, SchemeConfig(stepper="backward_euler", dt=0.05))
        newton_iters = int(traj.log[0].split(",")[2])
        assert 0 < newton_iters <= 5

    def test_alpha_mismatch_rejected(self):
        mesh = Mesh(h=0.5, a=-5.0, b=5.0)
        prob = EvolutionProblem(s=0.5, alpha=0.7, mesh=mesh, u0=_gaussian(mesh))
        with pytest.raises(ValueError):
            solve(prob, SchemeConfig(stepper="backward_euler", dt=0.1))


class TestL1Caputo:
    def test_matches_mild_reference(self):
        mesh = Mesh(h=0.5, a=-20.0, b=20.0)
        prob = EvolutionProblem(s=0.6, alpha=0.7, mesh=mesh, u0=_gaussian(mesh),
                                t_horizon=0.5)
        traj = solve(prob, SchemeConfig(stepper="l1_caputo", dt=2e-3))
        ref = evaluate_mild(prob, 0.5)
        assert np.max(np.abs(traj.final.values - ref.values)) < 1e-3

    def test_scalar_mode_decay(self):
        # single lattice mode: L1 trajectory tracks E_{alpha,1}(-lambda t^alpha)
        alpha, lam = 0.6, 1.7
        tt, y = solve_scalar_l1(alpha, lam, 1.0, 1e-3)
        ref = mittag_leffler(alpha, -lam)
        assert y[-1] == pytest.approx(ref, abs=5e-3)

    def test_alpha_one_rejected(self):
        mesh = Mesh(h=0.5, a=-5.0, b=5.0)
        prob = EvolutionProblem(s=0.5, alpha=1.0, mesh=mesh, u0=_gaussian(mesh))
        with pytest.raises(ValueError):
            solve(prob, SchemeConfig(stepper="l1_caputo", dt=0.1))


class TestMildReference:
    def test_rejects_nonlinearity(self):
        mesh = Mesh(h=0.5, a=-5.0, b=5.0)
        nl = Nonlinearity(f=lambda u: -u ** 3, df=lambda u: -3.0 * u * u)
        prob = EvolutionProblem(s=0.5, alpha=1.0, mesh=mesh, u0=_gaussian(mesh),
                                nonlinearity=nl)
        with pytest.raises(ValueError):
            evaluate_mild(prob, 0.5)

    def test_backward_euler_converges_to_mild(self):
        mesh = Mesh(h=0.25, a=-40.0, b=40.0)
        prob = EvolutionProblem(s=0.6, alpha=1.0, mesh=mesh, u0=_gaussian(mesh),
                                t_horizon=0.5)
        ref = evaluate_mild(prob, 0.5)
        gaps = []
        for dt in (4e-3, 2e-3, 1e-3):
            traj = solve(prob, SchemeConfig(stepper="backward_euler", dt=dt))
            gaps.append(np.max(np.abs(traj.final.values - ref.values)))
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[0] / gaps[2] == pytest.approx(4.0, rel=0.25)


class TestTrajectory:
    def test_snapshot_csv_format(self):
        import io

        mesh = Mesh(h=1.0, a=-1.0, b=1.0)
        prob = EvolutionProblem(s=0.5, alpha=1.0, mesh=mesh,
                                u0=GridFunction(mesh, np.array([0.0, 1.0, 0.0])),
                                t_horizon=0.1)
        traj = solve(prob, SchemeConfig(stepper="backward_euler", dt=0.05,
                                        snapshot_times=(0.05, 0.1)))
        buf = io.StringIO()
        traj.snapshots_to_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "t,x,value"
        assert len(lines) == 1 + 2 * mesh.n_points

    def test_log_line_format(self):
        mesh = Mesh(h=0.5, a=-5.0, b=5.0)
        prob = EvolutionProblem(s=0.5, alpha=1.0, mesh=mesh, u0=_gaussian(mesh),
                                t_horizon=0.1)
        traj = solve(prob, SchemeConfig(stepper="backward_euler", dt=0.05))
        for line in traj.log:
            step, t, ni, ci, res = line.split(",")
            assert int(step) >= 1 and float(t) > 0.0
            assert int(ni) >= 0 and int(ci) >= 0 and float(res) >= 0.0


class TestSupNormError:
    def test_identical_zero(self):
        mesh = Mesh(h=0.5, a=-5.0, b=5.0)
        u = _gaussian(mesh)
        assert sup_norm_error(u, lambda t, x: np.exp(-x * x / 4.0), 0.0) == 0.0

    def test_constant_offset(self):
        mesh = Mesh(h=0.5, a=-5.0, b=5.0)
        u = GridFunction(mesh, np.zeros(mesh.n_points))
        assert sup_norm_error(u, lambda t, x: 0.25 * np.ones_like(x), 0.0) == 0.25


class TestNonlinearity:
    def test_requires_f_zero_at_zero(self):
        with pytest.raises(ValueError):
            Nonlinearity(f=lambda u: u + 1.0, df=lambda u: np.ones_like(u))

    def test_local_lipschitz_spot_check(self):
        rng = np.random.default_rng(2)
        nl = Nonlinearity(f=lambda u: -u ** 3, df=lambda u: -3.0 * u * u,
                          lipschitz_bound=3.0)
        m = nl.lipschitz_bound
        for _ in range(200):
            a, b = rng.uniform(-1.0, 1.0, 2)
            assert abs(nl.f(a) - nl.f(b)) <= m * abs(a - b) + 1e-12
