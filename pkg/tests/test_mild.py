"""Tests for the successive-approximation solver and its diagnostics."""

import numpy as np
import pytest

from mhdlab import (
    ConstantsLedger,
    ParameterError,
    ScalarField,
    SolverParams,
    SpectralField,
    calibrate_constants,
    corollary6_check,
    divergence,
    existence_times,
    heat_propagate,
    lemma4_bound_check,
    picard_solve,
    scheme_step,
    solve_total_pressure,
    strip_bound_check,
    sup_norm,
)
from mhdlab.mild import MildSolution
from conftest import random_divfree


@pytest.fixture(scope="module")
def params2(grid2):
    return SolverParams(grid=grid2, nu=1.0, mu=1.0, substeps=12)


class TestParams:
    def test_rejects_bad_diffusivities(self, grid2):
        with pytest.raises(ParameterError):
            SolverParams(grid=grid2, nu=0.0)
        with pytest.raises(ParameterError):
            SolverParams(grid=grid2, mu=-1.0)

    def test_rejects_few_substeps(self, grid2):
        with pytest.raises(ParameterError):
            SolverParams(grid=grid2, substeps=3)

    def test_ledger_floor(self):
        with pytest.raises(ParameterError):
            ConstantsLedger(c1=0.01)
        led = ConstantsLedger(c1=1.5, c3=2.0)
        assert led.c_mu == 2.0


class TestExistenceTimes:
    def test_printed_formulas(self):
        # A = 2 with unit constants
        ts = existence_times(1.5, 0.5, ConstantsLedger())
        assert ts.t1 == pytest.approx(1.0 / 16.0)
        assert ts.t2 == pytest.approx(1.0 / 64.0)
        assert ts.t4 == pytest.approx(1.0 / 64.0)

    def test_beta_one_is_t4(self):
        ts = existence_times(1.0, 1.0, ConstantsLedger())
        assert ts.t_beta(1.0) == pytest.approx(ts.t4)

    def test_beta_shrinks_toward_half(self):
        ts = existence_times(1.0, 1.0, ConstantsLedger())
        assert ts.t_beta(0.6) < ts.t_beta(0.8) < ts.t_beta(1.0)
        assert ts.t_beta(0.500001) < 1e-10 * ts.t4

    def test_zero_data_is_unbounded(self):
        ts = existence_times(0.0, 0.0, ConstantsLedger())
        assert ts.t1 == np.inf and ts.t2 == np.inf and ts.t4 == np.inf

    def test_t3_closure(self):
        ts = existence_times(1.0, 1.0, ConstantsLedger(c3=2.0))
        assert ts.t3(0.0, 5.0) == 5.0
        assert ts.t3(0.5, 5.0) == pytest.approx(min(5.0, 1.0 / 16.0))

    def test_rejects_negative_norms(self):
        with pytest.raises(ParameterError):
            existence_times(-1.0, 0.0, ConstantsLedger())


class TestSchemeStep:
    def test_level_one_is_heat_flow(self, grid2, params2):
        # the scheme starts from identically zero approximations
        u0 = random_divfree(grid2, seed=20, amplitude=0.5)
        b0 = random_divfree(grid2, seed=21, amplitude=0.3)
        zeros_v = SpectralField.zeros(grid2)
        zeros_s = ScalarField.zeros(grid2)
        t = 0.05
        n = 8
        u1, b1, _ = scheme_step(
            [zeros_v] * n, [zeros_v] * n, [zeros_s] * n, u0, b0, params2, t
        )
        hu = heat_propagate(u0, params2.nu, t)
        hb = heat_propagate(b0, params2.mu, t)
        assert np.abs(u1.spectral - hu.spectral).max() <= 1e-14
        assert np.abs(b1.spectral - hb.spectral).max() <= 1e-14

    def test_constant_data_is_exact(self, grid2, params2):
        c = 0.8
        u0 = SpectralField.from_physical(
            grid2, np.full((2,) + grid2.shape, c), divergence_free=True
        )
        b0 = SpectralField.zeros(grid2)
        sol, _ = picard_solve(u0, b0, params2, 0.1)
        assert sol.status == "converged"
        for f in sol.u:
            assert np.abs(f.physical - c).max() <= 1e-12

    def test_equal_data_cancels_velocity_source(self, grid2, params2):
        # with U0 = B0 and nu = mu the level-1 products cancel, so the
        # level-2 velocity is a pure heat flow; compare by direct evaluation
        u0 = random_divfree(grid2, seed=22, amplitude=0.4)
        n = 8
        t = 0.02
        hu = [heat_propagate(u0, params2.nu, s) for s in np.linspace(0, t, n)]
        pressures = [solve_total_pressure(f, f) for f in hu]
        u2, _, _ = scheme_step(hu, hu, pressures, u0, u0, params2, t)
        expect = heat_propagate(u0, params2.nu, t)
        assert np.abs(u2.spectral - expect.spectral).max() <= 1e-13

    def test_empty_node_grid_rejected(self, grid2, params2):
        u0 = SpectralField.zeros(grid2)
        with pytest.raises(ParameterError):
            scheme_step([], [], [], u0, u0, params2, 0.1)

    def test_grid_mismatch_rejected(self, grid2, params2):
        from mhdlab import Grid

        other = SpectralField.zeros(Grid(dim=2, n=64))
        u0 = SpectralField.zeros(grid2)
        with pytest.raises(ParameterError):
            scheme_step([other], [u0], [ScalarField.zeros(grid2)], u0, u0, params2, 0.0)


class TestPicardSolve:
    def test_zero_data_converges_immediately(self, grid2, params2):
        sol, rep = picard_solve(
            SpectralField.zeros(grid2), SpectralField.zeros(grid2), params2, 0.5
        )
        assert sol.status == "converged"
        assert sol.levels == 1
        assert all(sup_norm(f) == 0 for f in sol.u)

    def test_small_data_contracts(self, grid2, params2):
        led = ConstantsLedger()
        u0 = random_divfree(grid2, seed=23, amplitude=0.5)
        b0 = random_divfree(grid2, seed=24, amplitude=0.25)
        ts = existence_times(sup_norm(u0), sup_norm(b0), led)
        sol, rep = picard_solve(u0, b0, params2, ts.t2 / 2, ledger=led)
        assert sol.status == "converged"
        assert rep.alpha_hat <= 0.75
        assert rep.lemma4_ok_per_level is not None and all(rep.lemma4_ok_per_level)

    def test_geometric_increment_decay(self, grid2, params2):
        led = ConstantsLedger()
        u0 = random_divfree(grid2, seed=25, amplitude=0.6)
        b0 = random_divfree(grid2, seed=26, amplitude=0.2)
        ts = existence_times(sup_norm(u0), sup_norm(b0), led)
        _, rep = picard_solve(u0, b0, params2, ts.t2 / 2)
        inc = rep.increments
        floor = 1e-9
        for i in range(len(inc) - 1):
            if inc[i] > floor:
                assert inc[i + 1] <= rep.alpha_hat * inc[i] * (1.0 + 1e-9)
        assert rep.alpha_hat < 1.0

    def test_divergence_free_preserved(self, grid2, params2):
        u0 = random_divfree(grid2, seed=27, amplitude=0.5)
        b0 = random_divfree(grid2, seed=28, amplitude=0.3)
        sol, _ = picard_solve(u0, b0, params2, 0.02)
        for f in (*sol.u, *sol.b):
            s = sup_norm(f)
            if s > 0:
                assert sup_norm(divergence(f)) <= 1e-8 * s

    def test_magnetic_degeneration_is_exact(self, grid2, params2):
        # every magnetic source carries a factor of B
        u0 = random_divfree(grid2, seed=29, amplitude=0.5)
        sol, _ = picard_solve(u0, SpectralField.zeros(grid2), params2, 0.05)
        for f in sol.b:
            assert np.abs(f.spectral).max() == 0.0

    def test_explicit_diverged_status(self, grid2, params2):
        u0 = random_divfree(grid2, seed=30, amplitude=8.0)
        b0 = random_divfree(grid2, seed=31, amplitude=8.0)
        sol, rep = picard_solve(u0, b0, params2, 2.0, n_max=8)
        assert sol.status == "diverged"
        assert not rep.converged

    def test_quadrature_refinement(self, grid2):
        # discrete fixed points approach each other at the trapezoid rate
        u0 = random_divfree(grid2, seed=32, amplitude=0.5)
        b0 = random_divfree(grid2, seed=33, amplitude=0.3)
        t_end = 0.05
        finals = {}
        for m in (6, 11, 21):
            params = SolverParams(grid=grid2, nu=1.0, mu=1.0, substeps=m)
            sol, _ = picard_solve(u0, b0, params, t_end, tol=1e-12)
            finals[m] = (sol.u[-1], sol.b[-1])
        err_coarse = sup_norm(finals[6][0] - finals[21][0]) + sup_norm(
            finals[6][1] - finals[21][1]
        )
        err_fine = sup_norm(finals[11][0] - finals[21][0]) + sup_norm(
            finals[11][1] - finals[21][1]
        )
        assert err_fine <= err_coarse / 3.0

    def test_rejects_non_divergence_free_data(self, grid2, params2):
        x, _ = grid2.coords
        bad = SpectralField.from_physical(grid2, np.stack([np.sin(x), np.zeros_like(x)]))
        with pytest.raises(ParameterError):
            picard_solve(bad, SpectralField.zeros(grid2), params2, 0.1)


class TestLemma4Check:
    def test_zero_data_trivially_true(self):
        rep = lemma4_bound_check(((0.0, 0.0),), 0.0, 0.0, ConstantsLedger())
        assert rep.passed

    def test_heat_flow_level_passes(self, grid2, params2):
        u0 = random_divfree(grid2, seed=34, amplitude=0.5)
        b0 = random_divfree(grid2, seed=35, amplitude=0.4)
        sol, _ = picard_solve(u0, b0, params2, 0.02, n_max=1)
        rep = lemma4_bound_check(sol.history, sup_norm(u0), sup_norm(b0), ConstantsLedger())
        assert rep.passed

    def test_inflated_history_fails(self):
        rep = lemma4_bound_check(((10.0, 5.0),), 1.0, 1.0, ConstantsLedger())
        assert not rep.passed
        assert rep.bound == pytest.approx(4.0)

    def test_empty_history_rejected(self):
        with pytest.raises(ParameterError):
            lemma4_bound_check((), 1.0, 1.0, ConstantsLedger())


class TestCorollary6Check:
    def test_zero_magnetic_field_passes(self, grid2, params2):
        u0 = random_divfree(grid2, seed=36, amplitude=0.5)
        sol, _ = picard_solve(u0, SpectralField.zeros(grid2), params2, 0.05)
        rep = corollary6_check(sol, 0.0, ConstantsLedger())
        assert rep.passed and rep.max_b == 0.0

    def test_heat_flow_magnetic_field_passes_with_margin(self, grid2, params2):
        b0 = random_divfree(grid2, seed=37, amplitude=0.5)
        sol, _ = picard_solve(SpectralField.zeros(grid2), b0, params2, 0.05)
        rep = corollary6_check(sol, sup_norm(b0), ConstantsLedger())
        assert rep.passed
        assert rep.max_b <= rep.bound / 2.0 * (1 + 1e-9)  # heat flow contracts

    def test_constructed_violation(self, grid2):
        big = SpectralField.from_physical(
            grid2, np.full((2,) + grid2.shape, 3.0), divergence_free=True
        )
        zero = SpectralField.zeros(grid2)
        p = ScalarField.zeros(grid2)
        fake = MildSolution(
            times=(0.0, 0.001),
            u=(zero, zero),
            b=(big, big),
            pressure=(p, p),
            history=((0.0, 3.0),),
            status="converged",
            levels=1,
        )
        rep = corollary6_check(fake, 1.0, ConstantsLedger())
        assert not rep.passed


class TestCalibration:
    def test_zero_sample_gives_unit_constants(self, grid2, params2):
        z = SpectralField.zeros(grid2)
        led = calibrate_constants([(z, z)], params2)
        assert (led.c1, led.c2, led.c3, led.c4) == (1.0, 1.0, 1.0, 1.0)
        assert led.provenance == ("calibrated",) * 4

    def test_constant_sample_gives_unit_constants(self, grid2, params2):
        c = SpectralField.from_physical(
            grid2, np.full((2,) + grid2.shape, 0.7), divergence_free=True
        )
        led = calibrate_constants([(c, SpectralField.zeros(grid2))], params2)
        assert (led.c1, led.c2, led.c3, led.c4) == (1.0, 1.0, 1.0, 1.0)

    def test_calibrated_ledger_passes_on_held_out_data(self, grid2, params2):
        samples = [
            (random_divfree(grid2, seed=40 + i, amplitude=0.5),
             random_divfree(grid2, seed=60 + i, amplitude=0.3))
            for i in range(3)
        ]
        led = calibrate_constants(samples, params2)
        u0 = random_divfree(grid2, seed=99, amplitude=0.5)
        b0 = random_divfree(grid2, seed=98, amplitude=0.3)
        ts = existence_times(sup_norm(u0), sup_norm(b0), led)
        t_end = min(ts.t2, ts.t4) / 2
        sol, rep = picard_solve(u0, b0, params2, t_end, ledger=led)
        assert sol.status == "converged"
        assert rep.alpha_hat <= 0.75
        assert all(rep.lemma4_ok_per_level)
        assert corollary6_check(sol, sup_norm(b0), led).passed
        assert strip_bound_check(sol, 1.0, led).passed

    def test_empty_sample_rejected(self, params2):
        with pytest.raises(ParameterError):
            calibrate_constants([], params2)
