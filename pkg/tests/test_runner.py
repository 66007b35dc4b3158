import dataclasses
import math

import numpy as np
import pytest

from vortex_tunnel import runner
from vortex_tunnel.errors import ConvergenceError, FitDomainError, SweepError
from vortex_tunnel.runner import calibrate, fit_exponential, run_single, run_sweep


class TestFitExponential:
    def test_exact(self):
        pts = [(m, 2.0 * math.exp(-m)) for m in (3, 4, 5, 6, 7)]
        fit = fit_exponential(pts)
        assert fit.amplitude == pytest.approx(2.0, rel=1e-12)
        assert fit.rate == pytest.approx(1.0, rel=1e-12)
        assert fit.residual <= 1e-12

    def test_negative_amplitude(self):
        fit = fit_exponential([(m, -3.0 * math.exp(-0.5 * m)) for m in (1, 2, 3)])
        assert fit.amplitude == pytest.approx(-3.0) and fit.rate == pytest.approx(0.5)

    def test_noise(self):
        rng = np.random.default_rng(7)
        M = np.arange(3.0, 8.0)
        eps = 1e-3 * rng.standard_normal(M.size)
        fit = fit_exponential(list(zip(M, np.exp(-M + eps))))
        assert fit.rate == pytest.approx(1.0, abs=0.01)
        assert fit.residual <= 5e-3

    def test_sign_change(self):
        with pytest.raises(FitDomainError):
            fit_exponential([(1, 1.0), (2, -0.5), (3, 0.1)])

    def test_too_few_points(self):
        with pytest.raises(FitDomainError):
            fit_exponential([(1, 1.0), (2, 0.5)])


class TestRunSingle:
    def test_halving_schedule(self, small_config):
        run = run_single(small_config, 2.0)
        dts = [h[0] for h in run.history]
        assert dts == [small_config.dt / 2**i for i in range(len(dts))]
        assert run.dt_used == dts[-1]
        assert run.wronskian_drift <= small_config.wronskian_tol
        # same sample times at every level
        assert run.series.t[1] - run.series.t[0] == pytest.approx(small_config.dt * small_config.sample_stride)

    def test_converged_within_tolerance(self, small_config):
        run = run_single(small_config, 2.0)
        (_, q_prev, _), (_, q_last, _) = run.history[-2:]
        assert abs(q_last - q_prev) <= small_config.convergence_tol * max(abs(run.Q), abs(run.Q_integral))

    def test_null_drive(self, small_config):
        cfg = small_config.replace(pulse=dataclasses.replace(small_config.pulse, C=0.0))
        run = run_single(cfg, 2.0, uv_coeff=0.0215)
        assert np.all(run.series.q_bare == 0.0)
        assert np.max(np.abs(run.series.N_total)) <= 1e-12
        assert run.Q == pytest.approx(0.0215 * 4.0, abs=1e-15)

    def test_no_halvings_cannot_converge(self, small_config):
        with pytest.raises(ConvergenceError) as info:
            run_single(small_config.replace(max_halvings=0), 2.0)
        assert len(info.value.history) == 1

    def test_per_mode(self, small_config):
        run = run_single(small_config, 2.0, per_mode=True)
        assert run.series.n_k.shape == (len(run.series.t), 7)


def test_calibrate_zeroes_transport(small_config):
    c = calibrate(small_config, M_cal=3.0)
    run = run_single(small_config, 3.0, uv_coeff=c)
    assert run.Q == pytest.approx(0.0, abs=1e-12)


class TestSweep:
    def test_fit_and_order(self, small_config):
        result, runs = run_sweep(small_config)
        assert [e.M0 for e in result.entries] == [1.0, 1.5, 2.0]
        assert result.has_fit
        assert len(runs) == 3

    def test_thread_count_irrelevant(self, small_config):
        a, _ = run_sweep(small_config, threads=1)
        b, _ = run_sweep(small_config, threads=3)
        assert a == b

    def test_single_point_has_no_fit(self, small_config):
        result, _ = run_sweep(small_config.replace(sweep=(2.0,)))
        assert len(result.entries) == 1 and not result.has_fit

    def test_sum_over_transverse_modes(self, small_config):
        cfg = small_config.replace(sweep=(2.0,), m_y=(0, 1))
        result, runs = run_sweep(cfg)
        assert result.entries[0].Q == sum(r.Q for r in runs)
        assert {r.m_y for r in runs} == {0, 1}

    @pytest.mark.parametrize("threads", [1, 2])
    def test_partial_results_on_failure(self, small_config, monkeypatch, threads):
        real = runner.run_single

        def flaky(config, M0, **kw):
            if M0 == 1.5:
                raise ConvergenceError("forced", [])
            return real(config, M0, **kw)

        monkeypatch.setattr(runner, "run_single", flaky)
        with pytest.raises(SweepError) as info:
            run_sweep(small_config, threads=threads)
        partial, runs = info.value.partial
        assert 1.0 in [e.M0 for e in partial.entries]
        assert 1.5 not in [e.M0 for e in partial.entries]
