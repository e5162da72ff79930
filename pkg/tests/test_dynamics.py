import numpy as np
import pytest

from conftest import band_limited
from elsasser_mhd.dynamics import (
    BLOWUP,
    CFL_VIOLATION,
    COMPLETED,
    CflViolation,
    IntegratorConfig,
    advection,
    diffusion_step,
    nonlinear_term,
    recover_pressure,
    simulate,
    step,
)
from elsasser_mhd.fields import ElsasserState, FluidParams, InitialDataSpec, initial_elsasser, make_params
from elsasser_mhd.spectral import (
    PhysicalVectorField,
    SpectralVectorField,
    dealias_two_thirds,
    divergence_max,
    get_grid,
    leray_project,
    to_physical,
    to_spectral,
)


def _field(grid, fn):
    x1, x2, x3 = grid.nodes
    return to_spectral(PhysicalVectorField(grid, np.stack(np.broadcast_arrays(*fn(x1, x2, x3))).astype(float)))


def _zero(grid):
    return SpectralVectorField.zeros(grid)


class TestNonlinear:
    def test_zero_minus(self, grid16, rng):
        wp = leray_project(band_limited(grid16, rng, kmax=4))
        n_plus, n_minus = nonlinear_term(ElsasserState(wp, _zero(grid16)))
        assert not n_plus.coeffs.any()
        assert not n_minus.coeffs.any()

    def test_single_mode_advection(self, grid16):
        a, b = 0.7, 1.3
        wp = _field(grid16, lambda x, y, z: (0 * x, a * np.cos(x), 0 * x))
        wm = _field(grid16, lambda x, y, z: (b * np.cos(z), 0 * x, 0 * x))
        expected = _field(grid16, lambda x, y, z: (0 * x, -a * b * np.cos(z) * np.sin(x), 0 * x))
        got = advection(wm, wp)
        assert np.abs(got.coeffs - expected.coeffs).max() < 1e-15
        # already solenoidal, so the projection leaves minus the advection
        n_plus, _ = nonlinear_term(ElsasserState(wp, wm))
        assert np.abs(n_plus.coeffs + expected.coeffs).max() < 1e-15

    @staticmethod
    def _fd_error(n):
        grid = get_grid(n)
        x1, x2, x3 = grid.nodes

        def w(x, y, z):
            return (
                np.sin(y) * np.cos(2 * z),
                np.cos(x + z) + 0 * y,
                np.sin(2 * x) * np.cos(y),
            )

        values = np.stack(np.broadcast_arrays(*w(x1, x2, x3)))
        h = 2 * np.pi / n

        def d(f, axis):
            r = lambda s: np.roll(f, -s, axis=axis)
            return (-r(2) + 8 * r(1) - 8 * r(-1) + r(-2)) / (12 * h)

        fd = np.stack([sum(values[j] * d(values[i], j) for j in range(3)) for i in range(3)])
        g = to_spectral(PhysicalVectorField(grid, values))
        spectral = to_physical(advection(g, g)).values
        return np.abs(fd - spectral).max()

    def test_fourth_order_fd_agreement(self):
        e32, e64 = self._fd_error(32), self._fd_error(64)
        assert e32 < 1e-3
        assert 14 < e32 / e64 < 18

    def test_output_dealiased_and_solenoidal(self, grid32, rng):
        wp = leray_project(band_limited(grid32, rng, kmax=10))
        wm = leray_project(band_limited(grid32, rng, kmax=10))
        n_plus, n_minus = nonlinear_term(ElsasserState(wp, wm))
        for f in (n_plus, n_minus):
            assert np.array_equal(dealias_two_thirds(f).coeffs, f.coeffs)
            assert divergence_max(f) < 1e-12 * max(1.0, np.abs(f.coeffs).max())


class TestDiffusion:
    def test_equal_numbers_single_factor(self, grid16, rng):
        p = make_params(2, 2)
        wp, wm = band_limited(grid16, rng), band_limited(grid16, rng)
        out = diffusion_step(ElsasserState(wp, wm), p, 0.1)
        factor = np.exp(-p.kappa * grid16.k_squared * 0.1)
        np.testing.assert_allclose(out.w_plus.coeffs, factor * wp.coeffs, rtol=1e-14)
        np.testing.assert_allclose(out.w_minus.coeffs, factor * wm.coeffs, rtol=1e-14)
        assert out.time == pytest.approx(0.1)

    def test_primitive_rates(self, grid16, rng):
        p = make_params(3, 0.5)
        u, b = band_limited(grid16, rng), band_limited(grid16, rng)
        out = diffusion_step(ElsasserState(u + b, u - b), p, 0.05)
        k2 = grid16.k_squared
        u1 = 0.5 * (out.w_plus.coeffs + out.w_minus.coeffs)
        b1 = 0.5 * (out.w_plus.coeffs - out.w_minus.coeffs)
        np.testing.assert_allclose(u1, np.exp(-k2 * 0.05 / 3) * u.coeffs, rtol=1e-13, atol=1e-16)
        np.testing.assert_allclose(b1, np.exp(-k2 * 0.05 / 0.5) * b.coeffs, rtol=1e-13, atol=1e-16)

    def test_zero_step_identity(self, grid16, rng):
        e = ElsasserState(band_limited(grid16, rng), band_limited(grid16, rng), 0.3)
        out = diffusion_step(e, make_params(1, 2), 0.0)
        assert np.array_equal(out.w_plus.coeffs, e.w_plus.coeffs)
        assert out.time == 0.3

    @pytest.mark.parametrize("dt1, dt2", [(0.01, 0.02), (0.3, 0.05), (1e-4, 0.5)])
    def test_composition(self, grid16, rng, dt1, dt2):
        p = make_params(1.5, 0.7)
        e = ElsasserState(band_limited(grid16, rng), band_limited(grid16, rng))
        a = diffusion_step(diffusion_step(e, p, dt1), p, dt2)
        b = diffusion_step(e, p, dt1 + dt2)
        scale = np.abs(e.w_plus.coeffs).max()
        assert np.abs(a.w_plus.coeffs - b.w_plus.coeffs).max() <= 1e-13 * scale
        assert np.abs(a.w_minus.coeffs - b.w_minus.coeffs).max() <= 1e-13 * scale

    def test_negative_dt(self, grid16):
        with pytest.raises(ValueError):
            diffusion_step(ElsasserState(_zero(grid16), _zero(grid16)), make_params(1, 1), -1.0)


class TestStep:
    def test_heat_case(self, grid16):
        p = make_params(1, 1)
        e = initial_elsasser(InitialDataSpec(b_scale=1.0), grid16, p)
        out = step(e, p, IntegratorConfig(dt=0.01))
        assert not out.w_minus.coeffs.any()
        expected = e.w_plus.coeffs * np.exp(-grid16.k_squared * 0.01)
        assert np.abs(out.w_plus.coeffs - expected).max() < 1e-15

    def test_zero_state(self, grid16):
        e = ElsasserState(_zero(grid16), _zero(grid16))
        out = step(e, make_params(1, 1), IntegratorConfig(dt=0.1))
        assert not out.w_plus.coeffs.any() and not out.w_minus.coeffs.any()
        assert out.time == 0.1

    def test_cfl_violation_raised(self, grid16):
        p = make_params(1, 1)
        e = initial_elsasser(InitialDataSpec(amplitude=10.0, b_scale=0.0), grid16, p)
        with pytest.raises(CflViolation):
            step(e, p, IntegratorConfig(dt=1.0))

    def test_energy_decreases_each_step(self, grid16):
        p = make_params(10, 8)
        e = initial_elsasser(InitialDataSpec(b_scale=0.5, b_noise=0.1), grid16, p)
        res = simulate(e, p, IntegratorConfig(dt=0.01, t_end=0.5))
        energy = res.series.column("energy_u") + res.series.column("energy_b")
        assert np.all(np.diff(energy) < 0)


class TestPressure:
    def test_zero_minus(self, grid16, rng):
        e = ElsasserState(leray_project(band_limited(grid16, rng)), _zero(grid16))
        assert not recover_pressure(e).coeffs.any()

    def test_self_aligned_shear(self, grid16):
        w = _field(grid16, lambda x, y, z: (0 * x, np.cos(x), 0 * x))
        assert np.abs(recover_pressure(ElsasserState(w, w)).coeffs).max() < 1e-16

    def test_crossed_shear(self, grid16):
        wm = _field(grid16, lambda x, y, z: (np.cos(y), 0 * x, 0 * x))
        wp = _field(grid16, lambda x, y, z: (0 * x, np.cos(x), 0 * x))
        p = recover_pressure(ElsasserState(wp, wm)).to_physical()
        x1, x2, _ = grid16.nodes
        expected = 0.5 * np.sin(x1) * np.sin(x2) + 0 * p
        assert np.abs(p - expected).max() < 1e-14

    def test_gradient_balances_projection(self, grid32, rng):
        # -(W-.grad)W+ = N+ + grad P, so grad P is the removed gradient part
        wp = leray_project(band_limited(grid32, rng, kmax=6))
        wm = leray_project(band_limited(grid32, rng, kmax=6))
        wp.coeffs[:, 0, 0, 0] = 0
        wm.coeffs[:, 0, 0, 0] = 0
        e = ElsasserState(wp, wm)
        n_plus, _ = nonlinear_term(e)
        p = recover_pressure(e)
        grad_p = 1j * grid32.wavenumbers * p.coeffs
        raw = -advection(wm, wp).coeffs
        residual = raw - n_plus.coeffs - grad_p
        residual[:, 0, 0, 0] = 0
        assert np.abs(residual).max() < 1e-12 * np.abs(raw).max()


class TestSimulate:
    def test_immediate_blowup(self, grid16):
        p = make_params(1, 1)
        e = initial_elsasser(InitialDataSpec(), grid16, p)
        res = simulate(e, p, IntegratorConfig(dt=0.01, t_end=0.1, blowup_threshold=1e-9))
        assert res.status == BLOWUP
        assert res.steps_taken == 0

    def test_cfl_status(self, grid16):
        p = make_params(1, 1)
        e = initial_elsasser(InitialDataSpec(amplitude=10.0, b_scale=0.0), grid16, p)
        res = simulate(e, p, IntegratorConfig(dt=1.0, t_end=2.0))
        assert res.status == CFL_VIOLATION

    def test_heat_decay(self, grid16):
        p = make_params(2, 2)
        e = initial_elsasser(InitialDataSpec(b_scale=1.0), grid16, p)
        res = simulate(e, p, IntegratorConfig(dt=0.01, t_end=0.2))
        assert res.status == COMPLETED
        assert res.final.time >= 0.2 - 0.005
        expected = e.w_plus.coeffs * np.exp(-p.kappa * grid16.k_squared * res.final.time)
        assert np.abs(res.final.w_plus.coeffs - expected).max() < 1e-10 * np.abs(expected).max()
        assert [r.which for r in res.conditions] == ["thm1-2.1", "thm1-2.2", "thm2-2.7", "thm2-2.8"]

    def test_divergence_residual(self, grid16):
        p = make_params(5, 3)
        e = initial_elsasser(InitialDataSpec(kind="random-solenoidal", k0=2, b_scale=0.4, b_noise=0.5), grid16, p)
        res = simulate(e, p, IntegratorConfig(dt=0.01, t_end=0.2))
        assert res.status == COMPLETED
        assert res.series.column("div_max").max() < 1e-10

    def test_monitor_cadence(self, grid16):
        p = make_params(1, 1)
        e = initial_elsasser(InitialDataSpec(), grid16, p)
        res = simulate(e, p, IntegratorConfig(dt=0.01, t_end=0.1, monitor_every=3))
        np.testing.assert_allclose(res.series.column("t"), [0, 0.03, 0.06, 0.09, 0.1])

    def test_deterministic(self, grid16):
        p = FluidParams.from_kappa_lambda(1.0, 0.2)
        spec = InitialDataSpec(kind="random-solenoidal", seed=9, k0=2, b_noise=0.3)
        runs = [simulate(initial_elsasser(spec, grid16, p), p, IntegratorConfig(dt=0.01, t_end=0.1)) for _ in range(2)]
        assert np.array_equal(runs[0].final.w_plus.coeffs, runs[1].final.w_plus.coeffs)
        assert [r.csv_values() for r in runs[0].series.rows] == [r.csv_values() for r in runs[1].series.rows]
