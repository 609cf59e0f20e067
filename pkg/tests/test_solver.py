"""Solve pipeline: initial fit, reports, reproducibility, studies."""

import io

import numpy as np
import pytest

from parelm.basis import sample_basis
from parelm.problems import ProblemSpec, problem_a, problem_b, problem_c
from parelm.solver import (
    SolveConfig,
    convergence_study,
    default_grid,
    fit_initial,
    linf_error,
    observed_orders,
    solve,
    study_rows,
    write_csv,
)


def zero_problem():
    zero = lambda t: 0.0
    return ProblemSpec(
        nu=1.0,
        f=lambda t, x: np.zeros_like(np.asarray(x, float)),
        u0=lambda x: np.zeros_like(np.asarray(x, float)),
        g_lo=zero,
        g_hi=zero,
        x_domain=(0.0, 1.0),
        t0=0.0,
        t_final=1.0,
    )


class TestFitInitial:
    def test_zero_data_gives_zero_weights(self):
        p = zero_problem()
        basis = sample_basis(40, p.x_domain, 1000)
        w0 = fit_initial(basis, default_grid(p, 40), p)
        assert np.linalg.norm(w0) == 0.0

    def test_two_mode_fit_quality_at_default_budget(self):
        # measured 3.56e-6 for this configuration; asserted with headroom
        p = problem_a(3)
        basis = sample_basis(40, p.x_domain, 1000)
        w0 = fit_initial(basis, default_grid(p, 40), p)
        xs = np.linspace(0, 1, 5000)
        err = np.max(np.abs(basis.eval(0, xs) @ w0 - p.u0(xs)))
        assert err <= 5e-6

    def test_wider_row_budget_fits_better(self):
        p = problem_a(3)
        basis = sample_basis(40, p.x_domain, 1000)
        xs = np.linspace(0, 1, 5000)
        errs = {}
        for flag in (True, False):
            w0 = fit_initial(basis, default_grid(p, 40, boundary_rows_in_m=flag), p)
            errs[flag] = np.max(np.abs(basis.eval(0, xs) @ w0 - p.u0(xs)))
        assert errs[False] < errs[True]

    def test_discontinuous_data_fit_at_interior_midpoint(self):
        p = problem_b()
        basis = sample_basis(40, p.x_domain, 1000)
        w0 = fit_initial(basis, default_grid(p, 40), p)
        assert basis.network_value(w0, 1.0) == pytest.approx(1.0, abs=1e-3)


class TestSolve:
    def test_backward_euler_on_problem_c(self):
        report = solve(problem_c(), SolveConfig(scheme_id="BE", n_neurons=40, dt=0.1))
        assert report.nt == 10
        assert report.linf_error_final is not None
        assert report.linf_error_final < 1e-6

    def test_bdf2_solve_count_includes_starter(self):
        report = solve(problem_a(3), SolveConfig(scheme_id="BDF2", n_neurons=40, dt=0.1))
        assert report.nt == 17  # 8 starter substeps replace the first coarse step

    def test_nt_at_least_step_count(self):
        for scheme in ("BE", "TR", "BDF3"):
            report = solve(problem_a(3), SolveConfig(scheme_id=scheme, n_neurons=40, dt=0.05))
            assert report.nt >= 20

    def test_bitwise_reproducibility(self):
        cfg = SolveConfig(scheme_id="BDF2", n_neurons=40, dt=0.05, seed=1000)
        r1 = solve(problem_a(3), cfg)
        r2 = solve(problem_a(3), cfg)
        assert r1.linf_error_final == r2.linf_error_final
        assert r1.nt == r2.nt
        np.testing.assert_array_equal(r1.final_weights, r2.final_weights)
        assert r1.residual_norms == r2.residual_norms
        assert r1.basis_digest == r2.basis_digest

    def test_final_error_recomputable_from_stored_weights(self):
        p = problem_a(3)
        cfg = SolveConfig(scheme_id="BDF2", n_neurons=40, dt=0.05)
        report = solve(p, cfg)
        basis = sample_basis(40, p.x_domain, cfg.seed)
        again = linf_error(basis, report.final_weights, p, report.final_time, cfg.n_error_points)
        assert abs(again - report.linf_error_final) <= 1e-14

    def test_theta_one_equals_bdf1_error_trajectory(self):
        p = problem_a(3)
        r_be = solve(p, SolveConfig(scheme_id="BE", n_neurons=40, dt=0.05))
        r_b1 = solve(p, SolveConfig(scheme_id="BDF1", n_neurons=40, dt=0.05))
        assert abs(r_be.linf_error_final - r_b1.linf_error_final) <= 1e-10
        np.testing.assert_allclose(r_be.residual_norms, r_b1.residual_norms, atol=1e-13)

    def test_missing_exact_solution_leaves_error_absent(self):
        report = solve(zero_problem(), SolveConfig(scheme_id="BE", n_neurons=40, dt=0.25))
        assert report.linf_error_final is None
        assert report.nt == 4
        row = report.csv_row()
        assert row[4] == ""

    def test_tfinal_override(self):
        report = solve(problem_c(), SolveConfig(scheme_id="BE", n_neurons=40, dt=0.1, t_final=0.5))
        assert report.nt == 5
        assert report.final_time == pytest.approx(0.5)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SolveConfig(scheme_id="nope", n_neurons=40, dt=0.1)
        with pytest.raises(ValueError):
            SolveConfig(scheme_id="BE", n_neurons=4, dt=0.1)
        with pytest.raises(ValueError):
            SolveConfig(scheme_id="BE", n_neurons=40, dt=0.0)
        with pytest.raises(ValueError):
            SolveConfig(scheme_id="BE", n_neurons=40, dt=0.1, m_start=0)

    def test_spatial_convergence_to_the_floor(self):
        # fixed small dt isolates the spatial error: going from 10 to 40
        # neurons must gain at least two orders of magnitude
        p = problem_a(3)
        e10 = solve(p, SolveConfig(scheme_id="BDF3", n_neurons=10, dt=1e-3)).linf_error_final
        e40 = solve(p, SolveConfig(scheme_id="BDF3", n_neurons=40, dt=1e-3)).linf_error_final
        assert e10 / e40 >= 100


class TestObservedOrders:
    def test_dyadic_pairs(self):
        orders = observed_orders([0.1, 0.05, 0.025], [4.0, 1.0, 0.25])
        assert orders[0] is None
        assert orders[1] == pytest.approx(2.0)
        assert orders[2] == pytest.approx(2.0)

    def test_non_dyadic_and_missing_yield_none(self):
        assert observed_orders([0.1, 0.04], [1.0, 0.5]) == [None, None]
        assert observed_orders([0.1, 0.05], [1.0, None]) == [None, None]


class TestConvergenceStudy:
    def test_bdf3_temporal_study_medians_order_three(self):
        p = problem_a(3)
        reports = convergence_study(p, "BDF3", 40, dt_list=[1 / 10, 1 / 20, 1 / 40, 1 / 80])
        orders = [o for o in observed_orders([r.dt for r in reports],
                                             [r.linf_error_final for r in reports]) if o is not None]
        assert len(orders) == 3
        assert 2.6 <= float(np.median(orders)) <= 3.4

    def test_spatial_sweep_has_no_order_column(self):
        p = problem_a(3)
        reports = convergence_study(p, "BE", 40, n_list=[10, 20], base_config=SolveConfig(
            scheme_id="BE", n_neurons=40, dt=0.1))
        rows = study_rows(reports)
        assert [r[7] for r in rows] == ["", ""]

    def test_parallel_matches_serial(self):
        p = problem_c()
        serial = convergence_study(p, "TR", 40, dt_list=[0.1, 0.05])
        threaded = convergence_study(p, "TR", 40, dt_list=[0.1, 0.05], jobs=2)
        for a, b in zip(serial, threaded):
            assert a.linf_error_final == b.linf_error_final
            np.testing.assert_array_equal(a.final_weights, b.final_weights)

    def test_rejects_bad_refinement_arguments(self):
        p = problem_c()
        with pytest.raises(ValueError):
            convergence_study(p, "BE", 40)
        with pytest.raises(ValueError):
            convergence_study(p, "BE", 40, dt_list=[0.1], n_list=[10])
        with pytest.raises(ValueError):
            convergence_study(p, "BE", 40, dt_list=[])


class TestCsvOutput:
    def test_deterministic_without_timestamp(self):
        p = problem_c()
        reports = convergence_study(p, "BE", 40, dt_list=[0.1, 0.05])
        bufs = []
        for _ in range(2):
            buf = io.StringIO()
            write_csv(study_rows(reports, with_walltime=False), buf, timestamp=False)
            bufs.append(buf.getvalue())
        assert bufs[0] == bufs[1]
        assert bufs[0].splitlines()[0] == "scheme,N,dt,Nt,linf_error,walltime_s,seed,observed_order"

    def test_timestamp_header_present_by_default(self):
        buf = io.StringIO()
        write_csv([], buf, timestamp=True)
        assert buf.getvalue().startswith("# generated ")
