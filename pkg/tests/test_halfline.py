import math

import numpy as np
import pytest

from fracweyl.quadcore import QuadratureSpec, integrate, laplace
from fracweyl.halfline import (FractionalOrder, HalfLineModel, DirichletLineModel,
                               KernelValue, GAMMA_READINGS, DEFAULT_GAMMA_READING,
                               dispersion, gamma_reading_residuals,
                               TruncationUnstableError)


class TestDispersion:
    def test_examples(self):
        assert dispersion(0.0, 0.5) == 0.0
        assert dispersion(3.0, 0.5) == pytest.approx(1.0, rel=1e-14)
        assert dispersion(1.0, 0.25) == pytest.approx(2.0 ** 0.25 - 1.0, rel=1e-14)

    def test_monotone(self):
        e = np.linspace(0.0, 30.0, 200)
        assert np.all(np.diff(dispersion(e, 0.7)) > 0)


class TestFractionalOrder:
    def test_validation(self):
        with pytest.raises(ValueError):
            FractionalOrder(1.0, 2)
        with pytest.raises(ValueError):
            FractionalOrder(0.5, 1)


class TestPhaseShift:
    def test_small_lambda(self, model_half):
        assert abs(model_half.phase(1e-6)) < 1e-4

    def test_large_lambda_limit(self, model_half):
        assert model_half.phase(1e6) == pytest.approx(math.pi / 8.0, abs=1e-3)

    @pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
    def test_increasing(self, s):
        m = HalfLineModel(FractionalOrder(s, 2))
        assert m.phase(2.0) > m.phase(1.0)

    def test_monotone_and_bounded_on_grid(self, model_half):
        grid = np.logspace(-3, 3, 151)
        th = model_half.phase_vec(grid)
        assert np.all(np.diff(th) >= -1e-12)
        assert np.all(th < math.pi * (1.0 - 0.5) / 4.0)
        assert np.all(th > 0)

    def test_derivative_at_zero(self, model_half):
        # the closed integral form of the derivative at the bottom
        spec = QuadratureSpec()
        ref = integrate(
            lambda z: np.log(0.5 * z * z / (np.sqrt(1.0 + z * z) - 1.0)) / z ** 2,
            0.0, math.inf, spec).value / math.pi
        fd = model_half.phase(1e-5) / 1e-5
        assert fd == pytest.approx(ref, rel=1e-3)


class TestSpectralDensity:
    def test_vanishes_below_one(self, model_half):
        assert model_half.gamma_values(1.0, 0.5)[0] == 0.0
        assert np.all(model_half.gamma_values(1.0, np.array([0.2, 0.99])) == 0.0)

    def test_nonnegative(self, model_half):
        xi = np.geomspace(1.0 + 1e-6, 50.0, 60)
        assert np.all(model_half.gamma_values(2.0, xi) >= 0.0)

    def test_laplace_tail_unit_bound(self, model_half):
        for lam in (0.3, 1.0, 4.0, 15.0):
            g = model_half.laplace_tail(lam, np.linspace(0.0, 10.0, 41))
            assert np.all(g >= -1e-12)
            assert np.all(g <= 1.0 + 1e-9)

    def test_tail_at_zero_equals_sine_of_phase(self, model_half):
        # the boundary value of the eigenfunction vanishes
        for lam in (0.5, 2.0, 7.9):
            assert model_half.laplace_tail(lam, 0.0) == pytest.approx(
                math.sin(model_half.phase(lam)), abs=5e-8)

    def test_reading_selection(self):
        res = gamma_reading_residuals(0.5, points=((1.0, 1.0), (2.0, 0.7)))
        assert res[DEFAULT_GAMMA_READING]["closure_residual"] < 1e-6
        assert res[DEFAULT_GAMMA_READING]["unit_bound_excess"] < 1e-9
        for reading in GAMMA_READINGS:
            if reading != DEFAULT_GAMMA_READING:
                assert res[reading]["closure_residual"] > 1e-3

    def test_double_laplace_consistency(self, model_half):
        # numeric double transform against the closed form at (2, 0.7)
        lam, t = 2.0, 0.7
        spec = QuadratureSpec(rel_tol=1e-9)
        xi, c = model_half.gamma_table(lam)
        g_num = integrate(
            lambda u: np.exp(-t * u) * (np.exp(-np.multiply.outer(u, xi)) @ c),
            0.0, math.inf, spec).value
        assert g_num == pytest.approx(model_half.closed_form_double_laplace(lam, t),
                                      rel=1e-5)

    def test_table_matches_adaptive_laplace(self, model_half):
        # the fixed density table reproduces an adaptive transform
        lam = 1.3
        for x in (0.5, 2.0):
            direct = laplace(lambda xi: model_half.gamma_values(lam, xi), x,
                             QuadratureSpec(rel_tol=1e-9))
            assert direct == pytest.approx(model_half.laplace_tail(lam, x), rel=1e-6)


class TestClosedFormDoubleLaplace:
    def test_limit_at_zero(self, model_half):
        lam = 1.3
        s = 0.5
        th = model_half.phase(lam)
        lim = math.cos(th) / lam - math.sqrt(
            s * (1 + lam ** 2) ** (s - 1.0) / ((1 + lam ** 2) ** s - 1.0))
        assert model_half.closed_form_double_laplace(lam, 1e-9) == pytest.approx(
            lim, abs=1e-8)

    def test_decay(self, model_half):
        assert abs(model_half.closed_form_double_laplace(1.0, 1e3)) < 1e-2

    def test_cross_check_low_order(self):
        m = HalfLineModel(FractionalOrder(0.3, 2))
        lam, t = 1.0, 1.0
        xi, c = m.gamma_table(lam)
        g_num = integrate(
            lambda u: np.exp(-t * u) * (np.exp(-np.multiply.outer(u, xi)) @ c),
            0.0, math.inf, QuadratureSpec(rel_tol=1e-9)).value
        assert g_num == pytest.approx(m.closed_form_double_laplace(lam, t), rel=1e-5)


class TestOuterFunction:
    def test_at_zero(self, model_half):
        assert model_half.outer_function(2.0, 0.0) == 1.0

    def test_derivative_vanishes_large_lambda(self, model_half):
        fd = (model_half.outer_function(1e3, 1e-4) - 1.0) / 1e-4
        assert abs(fd) < 0.05

    def test_derivative_small_lambda_matches_phase_slope(self, model_half):
        ref = integrate(
            lambda z: np.log(0.5 * z * z / (np.sqrt(1.0 + z * z) - 1.0)) / z ** 2,
            0.0, math.inf, QuadratureSpec()).value / math.pi
        fd = (model_half.outer_function(1e-3, 1e-6) - 1.0) / 1e-6
        assert fd == pytest.approx(ref, abs=5e-3)


class TestEigenfunction:
    def test_bound_on_grid(self, model_half):
        lams = np.geomspace(0.1, 20.0, 10)
        ts = np.linspace(0.0, 12.0, 10)
        for lam in lams:
            vals = model_half.eigenfunction(lam, ts)
            assert np.all(np.abs(vals) <= 2.0 + 1e-9)

    def test_boundary_value_vanishes(self, model_half):
        for lam in (0.4, 1.0, 5.0):
            assert abs(model_half.eigenfunction(lam, 0.0)) < 5e-7

    def test_sine_asymptotics(self, model_half):
        lam, x = 1.0, 100.0
        th = model_half.phase(lam)
        assert model_half.eigenfunction(lam, x) == pytest.approx(
            math.sin(lam * x + th), abs=1e-8)

    def test_weak_eigenfunction_pairing(self, model_half):
        # (F, A chi) = eigenvalue (F, chi) for a bump test function,
        # computed through the Fourier multiplier on a large periodic box
        s = 0.5
        L, N = 400.0, 2 ** 17
        dx = 2 * L / N
        x = -L + dx * np.arange(N)
        k = 2.0 * math.pi * np.fft.fftfreq(N, d=dx)
        t = (x - 4.0) / 2.0
        chi = np.zeros_like(x)
        inside = np.abs(t) < 1
        chi[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
        a_chi = np.fft.ifft((1.0 + k * k) ** s * np.fft.fft(chi)).real
        pos = x >= 0
        for lam in (0.7, 2.0):
            f = np.asarray(model_half.eigenfunction(lam, x[pos]))
            lhs = float(np.sum(f * a_chi[pos])) * dx
            rhs = (1.0 + lam ** 2) ** s * float(np.sum(f * chi[pos])) * dx
            assert lhs == pytest.approx(rhs, rel=2e-4)


class TestKernels:
    def test_spectral_window_zero(self, model_half):
        assert model_half.projector_kernel(1.0, 2.0, 0.5) == 0.0
        assert model_half.riesz_kernel_diag(1.0, 1.0) == 0.0
        assert model_half.riesz_kernel_line(0.7) == 0.0
        assert model_half.kernel_gap(1.0, 1.0) == 0.0

    def test_line_kernel_closed_form(self, model_half):
        oracle = (math.sqrt(3.0) - math.log(2.0 + math.sqrt(3.0)) / 2.0) / math.pi
        assert model_half.riesz_kernel_line(2.0) == pytest.approx(oracle, rel=1e-10)

    def test_line_kernel_monotone(self, model_half):
        mus = np.linspace(1.1, 6.0, 25)
        vals = [model_half.riesz_kernel_line(m) for m in mus]
        assert np.all(np.diff(vals) > 0)

    def test_diag_nonnegative(self, model_half):
        for t in (0.3, 1.0, 4.0):
            for mu in (1.5, 3.0, 6.0):
                assert model_half.riesz_kernel_diag(t, mu) >= 0.0

    def test_diag_approaches_line(self, model_half):
        gap_far = abs(model_half.kernel_gap(50.0, 4.0))
        gap_near = abs(model_half.kernel_gap(0.5, 4.0))
        assert gap_far < 1e-2
        assert gap_far < 0.05 * gap_near

    def test_projector_bound(self, model_half):
        mu = 4.0
        bound = 8.0 / math.pi * math.sqrt(mu ** 2 - 1.0)
        for t in (0.2, 1.0, 3.0):
            for u in (0.5, 2.0):
                assert abs(model_half.projector_kernel(t, u, mu)) <= bound

    def test_projector_idempotence(self, model_half):
        # integral of e(t,.)e(.,u) over a long truncated window, period
        # averaged and Richardson extrapolated, reproduces e(t,u)
        t_, u_, mu = 1.0, 2.0, 4.0
        ref = model_half.projector_kernel(t_, u_, mu)
        dw = 0.02
        ws = np.arange(dw / 2.0, 240.0, dw)
        prod = (model_half.projector_profile(t_, ws, mu)
                * model_half.projector_profile(u_, ws, mu))
        cum = np.cumsum(prod) * dw
        per = math.pi / math.sqrt(mu ** 2 - 1.0)

        def cesaro(T):
            i0, i1 = int((T - 4 * per) / dw), int(T / dw)
            return float(cum[i0:i1].mean())

        val = 2.0 * cesaro(240.0) - cesaro(120.0)
        assert val == pytest.approx(ref, abs=1e-3)


class TestBoundaryLayer:
    def test_decay(self, model_half):
        assert abs(model_half.boundary_layer(100.0)) < 1e-3 * abs(
            model_half.boundary_layer(0.1))

    def test_halfpower_moment_finite(self, model_half):
        ts = np.geomspace(1e-3, 60.0, 40)
        vals = np.array([abs(model_half.boundary_layer(t)) for t in ts])
        moment = np.trapezoid(np.sqrt(ts) * vals, ts)
        assert np.isfinite(moment)
        assert moment < 1.0


class TestEnergyShift:
    def test_near_bottom(self, model_half):
        assert 0.0 <= model_half.energy_shift(1.001) < 1e-2

    @pytest.mark.parametrize("mu", [2.0, 4.0, 8.0])
    def test_positive(self, model_half, mu):
        assert model_half.energy_shift(mu) > 0.0

    def test_against_direct_t_integration(self, model_half):
        # independent route: integrate the kernel gap over t directly
        mu = 4.0
        dt = 0.02
        ts = np.arange(dt / 2.0, 160.0, dt)
        vals = np.array([model_half.kernel_gap(t, mu) for t in ts])
        cum = np.cumsum(vals) * dt
        per = math.pi / math.sqrt(mu ** 2 - 1.0)

        def cesaro(T):
            i0, i1 = int((T - 3 * per) / dt), int(T / dt)
            return float(cum[i0:i1].mean())

        direct = (2.0 * cesaro(160.0) - cesaro(80.0)) / mu
        assert direct == pytest.approx(model_half.energy_shift(mu), rel=2e-3)

    def test_local_model_closed_form(self):
        for mu in (1.5, 3.0, 9.0):
            assert DirichletLineModel.energy_shift(mu) == pytest.approx(
                (mu - 1.0) / (4.0 * mu), rel=1e-14)


class TestCountingShift:
    def test_fixed_cutoff_vanishes_at_bottom(self, model_half):
        res = model_half.counting_shift(1.0 + 1e-7, t_cut=40.0)
        assert abs(res.value) < 1e-2

    def test_derivative_relation(self, model_half):
        # d(mu zeta)/dmu equals the counting shift
        mu, h = 4.0, 0.02
        dmz = (model_half.energy_shift(mu + h) * (mu + h)
               - model_half.energy_shift(mu - h) * (mu - h)) / (2.0 * h)
        res = model_half.counting_shift(mu, t_cut=80.0)
        assert res.value == pytest.approx(dmz, rel=2e-2)

    def test_reports_doubling_delta(self, model_half):
        res = model_half.counting_shift(4.0, t_cut=20.0)
        assert math.isfinite(res.doubling_delta)
        assert res.t_cut == 20.0

    def test_unstable_tolerance_raises(self, model_half):
        with pytest.raises(TruncationUnstableError):
            model_half.counting_shift(4.0, t_cut=20.0, unstable_tol=1e-9)


class TestKernelValueRecord:
    def test_window_invariant(self):
        KernelValue(1.0, 2.0, 0.5, 0.0)
        with pytest.raises(ValueError):
            KernelValue(1.0, 2.0, 0.5, 0.3)
        with pytest.raises(ValueError):
            KernelValue(-1.0, 2.0, 2.0, 0.3)


class TestModelHygiene:
    def test_cache_is_pure_acceleration(self, model_half):
        fresh = HalfLineModel(FractionalOrder(0.5, 2))
        lam = 1.7
        xi_a, c_a = model_half.gamma_table(lam)
        xi_b, c_b = fresh.gamma_table(lam)
        assert np.array_equal(xi_a, xi_b)
        assert np.array_equal(c_a, c_b)

    def test_unknown_reading_rejected(self):
        with pytest.raises(ValueError):
            HalfLineModel(FractionalOrder(0.5, 2), gamma_reading="nope")
