import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rwdiff import (
    DegenerateClockError,
    DegenerateVelocityError,
    ExpansionModel,
    IntegratorConfig,
    NumericalRankError,
    ParameterError,
    PseudoNormBlowupError,
    SamplePath,
    SphericalState,
    TemporalState,
    UnitTangentState,
    clock,
    geodesic_flow,
    noise_square_root,
    pseudo_norm_defect,
    simulate_full_direct,
    simulate_full_factorized,
    simulate_spherical,
    simulate_temporal,
    sphere_step,
    step_temporal,
    to_full,
)
from rwdiff.dynamics import diffusion_matrix
from rwdiff.statistics import level_crossings, sphere_uniformity

E1 = np.array([1.0, 0.0, 0.0])
G_MINUS = np.diag([-1.0, 1.0, 1.0, 1.0])


def first_integral(path, model):
    return np.exp(np.asarray(model.log_alpha(path.t))) * path.speed


def geodesic_displacement(t0, tdot0):
    """|x_inf - x_0| along the sigma = 0 flow for alpha = exp(t)."""
    return math.exp(-t0) * math.sqrt((tdot0 - 1) / (tdot0 + 1))


class TestConfig:
    def test_defaults(self):
        cfg = IntegratorConfig()
        assert (cfg.step, cfg.sigma, cfg.horizon) == (1e-3, 1.0, 2000.0)
        assert cfg.pn_tolerance == pytest.approx(0.05)
        assert cfg.n_steps == 2_000_000

    def test_with_resets_tolerance(self):
        cfg = IntegratorConfig(step=1e-3).with_(step=2e-3)
        assert cfg.pn_tolerance == pytest.approx(0.1)

    @pytest.mark.parametrize("kwargs", [
        dict(step=0.0), dict(step=-1e-3), dict(sigma=-1.0), dict(step=1.0, horizon=0.5),
        dict(stride=0), dict(max_dc=0.0), dict(pn_tolerance=-1.0), dict(scheme="milstein"),
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ParameterError):
            IntegratorConfig(**kwargs)


class TestStepTemporal:
    @pytest.mark.parametrize("scheme", ["implicit", "euler"])
    def test_rest_is_fixed_without_noise(self, expo, scheme):
        cfg = IntegratorConfig(sigma=0.0, horizon=1.0, scheme=scheme)
        s = TemporalState(1.0, 1.0)
        for _ in range(10):
            s2 = step_temporal(s, expo, cfg, 0.0)
            assert s2.tdot == 1.0 and s2.t == s.t + cfg.step
            s = s2

    def test_rest_is_fixed_lifted(self, expo):
        cfg = IntegratorConfig(sigma=0.0, horizon=1.0)
        s = step_temporal(TemporalState(1.0, 1.0), expo, cfg, np.zeros(3))
        assert s.tdot == 1.0

    @given(st.floats(1.0, 20.0), st.floats(0.01, 5.0))
    def test_euler_is_deterministic_euler(self, tdot, t):
        model = ExpansionModel.power_exponential(1.0, 2.0)
        cfg = IntegratorConfig(sigma=0.0, horizon=1.0, scheme="euler")
        s = step_temporal(TemporalState(t, tdot), model, cfg, 0.0)
        expected = tdot - model.hubble(t) * (tdot * tdot - 1) * cfg.step
        assert s.tdot == pytest.approx(max(expected, 1.0), rel=1e-14)
        assert s.t == t + tdot * cfg.step

    @given(st.floats(1.0, 10.0), st.floats(-0.2, 0.2))
    def test_implicit_close_to_euler(self, tdot, db):
        cfg = IntegratorConfig(step=1e-4, horizon=1.0)
        model = ExpansionModel.pure_exponential(1.0)
        dB = db * math.sqrt(cfg.step)
        a = step_temporal(TemporalState(1.0, tdot), model, cfg, dB).tdot
        b = step_temporal(TemporalState(1.0, tdot), model, cfg.with_(scheme="euler"), dB).tdot
        # the two schemes agree to first order in the step
        assert abs(a - b) <= 5e-3 * tdot**2

    @pytest.mark.parametrize("scheme", ["implicit", "euler"])
    def test_first_integral_conserved_to_first_order(self, expo, scheme):
        drifts = []
        for step in (2e-3, 1e-3):
            cfg = IntegratorConfig(step=step, sigma=0.0, horizon=5.0)
            path = simulate_temporal(TemporalState(1.0, 3.0), expo, cfg, 0, scheme=scheme)
            k = first_integral(path, expo)
            drifts.append(np.max(np.abs(k / k[0] - 1)))
        assert drifts[0] < 0.05
        assert 0.4 <= drifts[1] / drifts[0] <= 0.6


class TestSimulateTemporal:
    def test_zero_horizon(self, expo):
        cfg = IntegratorConfig(horizon=0.0)
        for scheme in ("lifted", "implicit", "euler"):
            path = simulate_temporal(TemporalState(1.0, 1.5), expo, cfg, 0, scheme=scheme)
            assert len(path) == 1 and path.t[0] == 1.0 and path.tdot[0] == 1.5

    @pytest.mark.parametrize("scheme", ["lifted", "implicit", "euler"])
    def test_path_shape_and_monotone(self, power2, scheme):
        cfg = IntegratorConfig(horizon=20.0, stride=7)
        path = simulate_temporal(TemporalState(0.5, 1.0), power2, cfg, 3, scheme=scheme)
        assert path.s[-1] == pytest.approx(20.0)
        assert np.all(np.diff(path.s) > 0)
        path.check_invariants()
        assert np.all(path.tdot >= 1.0)
        np.testing.assert_allclose(path.speed**2, (path.tdot - 1) * (path.tdot + 1), rtol=1e-9, atol=1e-12)

    def test_bitwise_reproducible(self, expo):
        cfg = IntegratorConfig(horizon=10.0)
        a = simulate_temporal(TemporalState(1.0, 1.5), expo, cfg, np.random.default_rng(9))
        b = simulate_temporal(TemporalState(1.0, 1.5), expo, cfg, np.random.default_rng(9))
        assert a.tdot.tobytes() == b.tdot.tobytes() and a.t.tobytes() == b.t.tobytes()

    def test_t_min_guard(self, expo):
        from rwdiff import DomainError
        with pytest.raises(DomainError):
            simulate_temporal(TemporalState(1e-12, 1.5), expo, IntegratorConfig(horizon=1.0), 0)

    @pytest.mark.parametrize("scheme", ["lifted", "implicit"])
    def test_short_run_mean_is_plausible(self, expo, nu, scheme):
        cfg = IntegratorConfig(horizon=300.0, stride=10)
        path = simulate_temporal(TemporalState(1.0, 1.5), expo, cfg, 11, scheme=scheme)
        assert abs(path.t[-1] / path.s[-1] - nu.mean) < 0.15


class TestClock:
    def _constant_path(self, tdot, n=31, step=0.1):
        s = np.arange(n) * step
        return SamplePath(step, s, 1 + tdot * s, np.full(n, tdot), np.full(n, math.sqrt(tdot * tdot - 1)))

    def test_constant_speed(self):
        c = clock(self._constant_path(math.sqrt(2)), 1.0)
        assert c[0] == 0.0
        assert c[-1] == pytest.approx(3.0, rel=1e-12)

    def test_scales_with_sigma_squared(self):
        path = self._constant_path(2.0)
        np.testing.assert_allclose(clock(path, 3.0), 9 * clock(path, 1.0))

    def test_no_noise(self):
        np.testing.assert_array_equal(clock(self._constant_path(2.0), 0.0), 0.0)

    def test_start_at_rest_half_weights(self):
        path = self._constant_path(math.sqrt(2), n=3, step=1.0)
        path.speed[0] = 0.0
        path.tdot[0] = 1.0
        c = clock(path, 1.0)
        assert c[1] == pytest.approx(0.5) and c[2] == pytest.approx(1.5)

    def test_interior_rest_is_an_error(self):
        path = self._constant_path(2.0)
        path.speed[5] = 0.0
        with pytest.raises(DegenerateClockError):
            clock(path, 1.0)

    def test_nondecreasing_on_simulated_path(self, expo):
        path = simulate_temporal(TemporalState(1.0, 1.5), expo, IntegratorConfig(horizon=20.0), 2)
        c = clock(path, 1.0)
        assert c[0] == 0.0 and np.all(np.diff(c) >= 0)

    @pytest.mark.parametrize("seed", range(5))
    def test_agrees_with_kernel_clock_away_from_rest(self, seed):
        # 1/(tdot^2 - 1) is smooth while tdot stays well above 1; near
        # tdot = 1 grid samples of it have infinite variance and only the
        # kernel's per-segment integral is reliable
        slow = ExpansionModel.pure_exponential(0.05)
        cfg = IntegratorConfig(sigma=0.3, horizon=1.0)
        path = simulate_spherical(SphericalState(TemporalState(1.0, 4.0), E1), slow, cfg, seed)
        assert path.speed.min() > 1.0
        np.testing.assert_allclose(clock(path, 0.3), path.clock, rtol=2e-3, atol=1e-12)


def _brute_force_sphere(theta0, total, dt, n, rng):
    """Euler + projection for dTheta = (I - Theta Theta^T) dW - Theta dt on S^2."""
    th = np.tile(theta0, (n, 1))
    for _ in range(int(round(total / dt))):
        dw = rng.standard_normal((n, 3)) * math.sqrt(dt)
        dw -= np.sum(dw * th, axis=1, keepdims=True) * th
        th = th + dw - th * dt
        th /= np.linalg.norm(th, axis=1, keepdims=True)
    return th


class TestSphere:
    def test_zero_increment(self, rng):
        th = np.array([0.0, 0.6, 0.8])
        np.testing.assert_array_equal(sphere_step(th, 0.0, rng), th)

    def test_rejects_bad_input(self, rng):
        with pytest.raises(ParameterError):
            sphere_step(np.array([1.0, 1.0, 0.0]), 0.1, rng)
        with pytest.raises(ParameterError):
            sphere_step(E1, -0.1, rng)

    @given(st.floats(1e-6, 50.0), st.integers(0, 2**32))
    def test_stays_on_sphere(self, dc, seed):
        out = sphere_step(E1, dc, np.random.default_rng(seed), max_dc=0.05)
        assert abs(np.linalg.norm(out) - 1) < 1e-12

    def test_decay_rate_established_by_brute_force(self):
        # the decay constant is measured first with an independent fine-step integrator
        rng = np.random.default_rng(1)
        total = 1.0
        th = _brute_force_sphere(E1, total, 1e-3, 4000, rng)
        cos = th[:, 0]
        rate = -math.log(cos.mean()) / total
        assert rate == pytest.approx(1.0, abs=4 * cos.std() / cos.mean() / math.sqrt(len(cos)) + 2e-3)

    @pytest.mark.parametrize("total", [0.1, 0.5, 1.0, 2.0])
    def test_mean_cosine_decays_exponentially(self, total):
        rng = np.random.default_rng(int(total * 100))
        cos = np.array([sphere_step(E1, total, rng, max_dc=0.01)[0] for _ in range(20_000)])
        se = cos.std(ddof=1) / math.sqrt(len(cos))
        assert abs(cos.mean() - math.exp(-total)) <= 4 * se + 1e-3

    def test_matches_brute_force_law(self):
        from rwdiff import two_sample_ks
        rng = np.random.default_rng(8)
        a = _brute_force_sphere(E1, 0.7, 1e-3, 3000, rng)[:, 0]
        b = np.array([sphere_step(E1, 0.7, rng, max_dc=0.01)[0] for _ in range(3000)])
        assert two_sample_ks(a, b)[1]

    def test_second_harmonic_decay(self):
        # E[theta_x^2] = 1/3 + 2/3 exp(-3C) for the degree-2 harmonic
        rng = np.random.default_rng(12)
        x = np.array([sphere_step(E1, 0.4, rng, max_dc=0.01)[0] for _ in range(20_000)]) ** 2
        se = x.std(ddof=1) / math.sqrt(len(x))
        assert abs(x.mean() - (1 / 3 + 2 / 3 * math.exp(-1.2))) <= 4 * se + 1e-3

    def test_uniform_after_long_clock(self):
        # under uniformity 3 n |mean|^2 is chi-square(3); check the whole law of
        # the statistic over many independent ensembles, not one draw of it
        from scipy import stats
        stat = []
        for seed in range(150):
            rng = np.random.default_rng([3, seed])
            samples = np.array([sphere_step(E1, 10.0, rng, max_dc=0.05) for _ in range(200)])
            length, _ = sphere_uniformity(samples)
            stat.append(3 * len(samples) * length**2)
        assert stats.kstest(stat, stats.chi2(3).cdf).pvalue > 1e-3


class TestSpherical:
    def test_no_noise_freezes_theta(self, expo):
        e = SphericalState.from_direction(1.0, 2.0, [1.0, 2.0, 2.0])
        path = simulate_spherical(e, expo, IntegratorConfig(sigma=0.0, horizon=10.0, stride=100), 0)
        np.testing.assert_array_equal(path.theta, np.tile(e.theta, (len(path), 1)))
        np.testing.assert_array_equal(path.clock, 0.0)

    def test_streams_are_independent(self, expo):
        e = SphericalState(TemporalState(1.0, 1.5), E1)
        cfg = IntegratorConfig(horizon=10.0, stride=50)
        g = lambda k: np.random.default_rng(k)  # noqa: E731
        a = simulate_spherical(e, expo, cfg, (g(1), g(2)))
        b = simulate_spherical(e, expo, cfg, (g(1), g(3)))
        c = simulate_spherical(e, expo, cfg, (g(1), g(2)))
        np.testing.assert_array_equal(a.tdot, b.tdot)
        np.testing.assert_array_equal(a.clock, b.clock)
        assert not np.array_equal(a.theta, b.theta)
        assert a.theta.tobytes() == c.theta.tobytes()

    def test_invariants(self, power2):
        path = simulate_spherical(SphericalState(TemporalState(0.3, 1.0), E1), power2,
                                  IntegratorConfig(horizon=30.0, stride=10), 5)
        path.check_invariants()
        np.testing.assert_allclose(np.linalg.norm(path.theta, axis=1), 1.0, atol=1e-12)
        assert path.clock[0] == 0.0

    def test_clock_matches_temporal_path(self, expo):
        e = SphericalState(TemporalState(1.0, 1.5), E1)
        cfg = IntegratorConfig(horizon=10.0, stride=10)
        rt = np.random.default_rng(42)
        sph = simulate_spherical(e, expo, cfg, (rt, np.random.default_rng(0)))
        tmp = simulate_temporal(e.temporal, expo, cfg, np.random.default_rng(42))
        np.testing.assert_array_equal(sph.tdot, tmp.tdot)

    def test_cap_watch(self, expo):
        e = SphericalState(TemporalState(1.0, 1.5), E1)
        cfg = IntegratorConfig(horizon=100.0, stride=1000)
        path = simulate_spherical(e, expo, cfg, 1, watch_cap=(E1, 0.2, 10.0))
        entry = path.diagnostics["cap_entry"]
        assert entry == -1 or 10.0 <= entry <= 100.0
        never = simulate_spherical(e, expo, cfg.with_(horizon=5.0), 1, watch_cap=(E1, 0.2, 10.0))
        assert never.diagnostics["cap_entry"] == -1


class TestFactorized:
    def test_defect_is_zero(self, power2):
        u0 = to_full(SphericalState(TemporalState(0.5, 2.0), E1), np.zeros(3), power2)
        path = simulate_full_factorized(u0, power2, IntegratorConfig(horizon=20.0, stride=20), 3)
        path.check_invariants()
        for i in range(len(path)):
            u = path.full_state(i, power2)
            assert abs(pseudo_norm_defect(u, power2)) <= 1e-13 * u.tdot**2

    def test_geodesic_limit_point(self, expo):
        t0, tdot0 = 1.0, 3.0
        theta = np.array([0.0, 0.6, 0.8])
        u0 = to_full(SphericalState(TemporalState(t0, tdot0), theta), np.zeros(3), expo)
        path = simulate_full_factorized(u0, expo, IntegratorConfig(sigma=0.0, horizon=40.0, stride=1000), 0)
        dx = path.x[-1]
        np.testing.assert_allclose(dx / np.linalg.norm(dx), theta, atol=1e-14)
        assert np.linalg.norm(dx) == pytest.approx(geodesic_displacement(t0, tdot0), rel=2e-3)

    def test_tail_bound_along_paths(self, expo):
        u0 = to_full(SphericalState(TemporalState(1.0, 1.5), E1), np.zeros(3), expo)
        for seed in range(5):
            path = simulate_full_factorized(u0, expo, IntegratorConfig(horizon=40.0, stride=100), seed)
            tail = expo.inv_alpha_tail(path.t)
            moved = np.linalg.norm(path.x[-1] - path.x, axis=1)
            assert np.all(moved <= tail + 1e-15)

    def test_rest_start(self, expo):
        u0 = UnitTangentState(1.0, np.zeros(3), 1.0, np.zeros(3))
        with pytest.raises(DegenerateVelocityError):
            simulate_full_factorized(u0, expo, IntegratorConfig(sigma=0.0, horizon=1.0), 0)
        path = simulate_full_factorized(u0, expo, IntegratorConfig(horizon=1.0), 0)
        assert np.all(path.tdot[1:] > 1)

    def test_rejects_off_shell_start(self, expo):
        u0 = UnitTangentState(1.0, np.zeros(3), 2.0, E1)
        with pytest.raises(ParameterError):
            simulate_full_factorized(u0, expo, IntegratorConfig(horizon=1.0), 0)


def _random_state(model, t, r, direction):
    e = SphericalState.from_direction(t, math.cosh(r), direction)
    return to_full(e, np.zeros(3), model)


states = st.builds(
    lambda t, r, d: _random_state(ExpansionModel.power_exponential(1.0, 1.0), t, r, d),
    st.floats(0.01, 8.0), st.floats(0.0, 6.0),
    st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: np.linalg.norm(v) > 0.1),
)


class TestNoiseSquareRoot:
    @given(states, st.floats(0.1, 3.0))
    def test_factorises_covariance(self, u, sigma):
        model = ExpansionModel.power_exponential(1.0, 1.0)
        b = noise_square_root(u, model, sigma).matrix
        sig = diffusion_matrix(u, model, sigma)
        scale = sigma**2 * u.tdot**2
        assert np.linalg.norm(b @ b.T - sig) <= 1e-12 * scale

    @given(states)
    def test_kernel_direction(self, u):
        model = ExpansionModel.power_exponential(1.0, 1.0)
        b = noise_square_root(u, model, 1.0).matrix
        alpha = model.alpha(u.t)
        g_xi = np.concatenate([[-u.tdot], alpha**2 * u.xdot])
        assert np.linalg.norm(b.T @ g_xi) <= 1e-12 * u.tdot**2

    def test_many_random_states(self, rng, power2):
        worst = 0.0
        for _ in range(10_000):
            u = _random_state(power2, rng.uniform(0.01, 8), rng.uniform(0, 6), rng.standard_normal(3))
            b = noise_square_root(u, power2, 1.0).matrix
            worst = max(worst, np.linalg.norm(b @ b.T - diffusion_matrix(u, power2, 1.0)) / u.tdot**2)
        assert worst <= 1e-12

    def test_at_rest(self, expo):
        u = UnitTangentState(2.0, np.zeros(3), 1.0, np.zeros(3))
        b = noise_square_root(u, expo, 1.0)
        np.testing.assert_array_equal(b.matrix[0], 0.0)
        np.testing.assert_allclose(b.covariance()[1:, 1:], np.eye(3) / expo.alpha(2.0) ** 2, rtol=1e-14)

    def test_covariance_kernel_algebra(self, expo):
        # Sigma g xi = sigma^2 (g^-1 g xi + xi (xi^T g xi)) = sigma^2 (xi - xi) = 0
        u = _random_state(expo, 1.0, 1.3, [1.0, -2.0, 0.5])
        xi = np.concatenate([[u.tdot], u.xdot])
        g = np.diag([-1.0] + [expo.alpha(u.t) ** 2] * 3)
        assert xi @ g @ xi == pytest.approx(-1.0, rel=1e-13)
        assert np.linalg.norm(diffusion_matrix(u, expo, 1.0) @ g @ xi) < 1e-12

    def test_collapse_is_reported(self, expo):
        u = UnitTangentState(1.0, np.zeros(3), 1.0, [np.nan, 0.0, 0.0])
        with pytest.raises((NumericalRankError, ValueError)):
            noise_square_root(u, expo, 1.0)


class TestDirect:
    def test_matches_geodesic_without_noise(self, expo):
        u0 = _random_state(expo, 1.0, 1.2, [1.0, 1.0, 0.0])
        gaps = []
        for step in (2e-3, 1e-3):
            cfg = IntegratorConfig(step=step, sigma=0.0, horizon=5.0, stride=int(round(0.5 / step)))
            d = simulate_full_direct(u0, expo, cfg, 0)
            g = geodesic_flow(u0, expo, cfg)
            gaps.append(max(np.max(np.abs(d.tdot - g.tdot)), np.max(np.abs(d.x - g.x))))
        assert gaps[1] < 5e-3
        assert 0.4 <= gaps[1] / gaps[0] <= 0.6

    def test_defect_monitored(self, expo):
        u0 = _random_state(expo, 1.0, 1.0, E1)
        path = simulate_full_direct(u0, expo, IntegratorConfig(horizon=5.0, stride=100), 2)
        assert 0 < path.diagnostics["max_defect"] <= 50 * 1e-3
        path.check_invariants()
        for i in range(len(path)):
            assert abs(pseudo_norm_defect(path.full_state(i, expo), expo)) < 1e-9 * path.tdot[i] ** 2

    def test_blowup_raises(self, expo):
        u0 = _random_state(expo, 1.0, 1.0, E1)
        with pytest.raises(PseudoNormBlowupError) as info:
            simulate_full_direct(u0, expo, IntegratorConfig(horizon=5.0, pn_tolerance=1e-9), 2)
        assert info.value.step_index is not None

    def test_reproducible(self, expo):
        u0 = _random_state(expo, 1.0, 1.0, E1)
        cfg = IntegratorConfig(horizon=2.0)
        a = simulate_full_direct(u0, expo, cfg, np.random.default_rng(3))
        b = simulate_full_direct(u0, expo, cfg, np.random.default_rng(3))
        assert a.x.tobytes() == b.x.tobytes()


class TestGeodesic:
    def test_comoving(self, power2):
        u0 = UnitTangentState(0.5, np.array([1.0, 2.0, 3.0]), 1.0, np.zeros(3))
        path = geodesic_flow(u0, power2, IntegratorConfig(sigma=0.0, horizon=10.0, stride=100))
        np.testing.assert_allclose(path.t, 0.5 + path.s, rtol=1e-12)
        np.testing.assert_array_equal(path.x, np.tile(u0.x, (len(path), 1)))
        np.testing.assert_array_equal(path.tdot, 1.0)

    @pytest.mark.parametrize("model", [ExpansionModel.pure_exponential(1.0),
                                       ExpansionModel.power_exponential(1.0, 2.0)])
    def test_first_integral(self, model):
        u0 = _random_state(model, 1.0, 2.0, [0.3, -0.4, 1.0])
        path = geodesic_flow(u0, model, IntegratorConfig(sigma=0.0, horizon=100.0, stride=100))
        logk = path.diagnostics["log_first_integral"]
        assert np.max(np.abs(np.expm1(logk - logk[0]))) <= 1e-8

    def test_redshift(self, expo):
        u0 = _random_state(expo, 1.0, 3.0, E1)
        path = geodesic_flow(u0, expo, IntegratorConfig(sigma=0.0, horizon=30.0, stride=100))
        assert np.all(np.diff(path.tdot) <= 0)
        assert path.tdot[-1] - 1 < 1e-20

    def test_closed_form(self, expo):
        t0, tdot0 = 1.0, 2.5
        u0 = _random_state(expo, t0, math.acosh(tdot0), E1)
        path = geodesic_flow(u0, expo, IntegratorConfig(sigma=0.0, horizon=40.0, stride=1000))
        kk = math.exp(t0) * math.sqrt(tdot0**2 - 1)
        np.testing.assert_allclose(path.tdot, np.sqrt(1 + kk**2 * np.exp(-2 * path.t)), rtol=1e-10)
        assert path.x[-1, 0] == pytest.approx(geodesic_displacement(t0, tdot0), rel=1e-10)

    def test_euler_method(self, expo):
        u0 = _random_state(expo, 1.0, 1.0, E1)
        path = geodesic_flow(u0, expo, IntegratorConfig(sigma=0.0, horizon=5.0, stride=100), method="euler")
        logk = path.diagnostics["log_first_integral"]
        assert 0 < np.max(np.abs(logk - logk[0])) < 0.05
        with pytest.raises(ParameterError):
            geodesic_flow(u0, expo, IntegratorConfig(horizon=1.0), method="leapfrog")


@pytest.mark.slow
def test_tdot_levels_recur(expo):
    cfg = IntegratorConfig(horizon=2000.0, stride=10)
    runs = 100
    good = 0
    for seed in range(runs):
        path = simulate_temporal(TemporalState(1.0, 1.5), expo, cfg, np.random.default_rng([7, seed]))
        good += all(level_crossings(path.tdot, level) >= 20 for level in (1.1, 5.0))
    assert good >= 0.99 * runs
