"""Acceptance gate: each test checks one criterion at n=32 and reports a PASS/FAIL line."""

import io
import itertools
import math
from pathlib import Path

import numpy as np
import pytest

from elsasser_mhd.conditions import ConditionParams, evaluate_thm1_from_norms, evaluate_thm2_from_norms
from elsasser_mhd.config import ConfigError, parse_config, parse_sweep_config
from elsasser_mhd.dynamics import IntegratorConfig, simulate
from elsasser_mhd.fields import (
    FluidParams,
    InitialDataSpec,
    from_elsasser,
    generate_initial,
    initial_elsasser,
    make_params,
    to_elsasser,
)
from elsasser_mhd.io import checkpoint_read, checkpoint_write, write_timeseries
from elsasser_mhd.norms import MonitorRow, MonitorSeries, hs_norm, lp_norm
from elsasser_mhd.spectral import (
    PhysicalVectorField,
    fractional_multiplier,
    get_grid,
    leray_project,
    to_spectral,
)
from elsasser_mhd.sweep import run_sweep, sweep_columns, write_sweep_table
from elsasser_mhd.verification import (
    check_apriori_thm1,
    check_apriori_thm2,
    check_energy_balance,
    check_scaling_equivalence,
    heat_oracle,
    self_convergence,
)

pytestmark = pytest.mark.slow

N = 32
CP = ConditionParams(epsilon0=0.01, c0=1.0)
DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def grid():
    return get_grid(N)


def _rel(a, b):
    return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))


def test_algebraic_layer(grid, criterion):
    rng = np.random.default_rng(2024)
    worst = {}

    spec = InitialDataSpec(kind="random-solenoidal", seed=7, k0=4, b_scale=0.4, b_noise=0.6)
    prim = generate_initial(spec, grid)
    back = from_elsasser(to_elsasser(prim))
    worst["elsasser_round_trip"] = max(_rel(back.u.coeffs, prim.u.coeffs), _rel(back.b.coeffs, prim.b.coeffs))

    ident = 0.0
    for re, rm in rng.uniform(1e-2, 1e3, size=(200, 2)):
        p = make_params(re, rm)
        ident = max(ident, abs((p.kappa + p.lam) * re - 1), abs((p.kappa - p.lam) * rm - 1))
    worst["kappa_lambda_identities"] = ident

    g = to_spectral(PhysicalVectorField(grid, rng.standard_normal((3, N, N, N))))
    g.coeffs[:, 0, 0, 0] = 0
    once = leray_project(g)
    worst["leray_idempotence"] = _rel(leray_project(once).coeffs, once.coeffs)
    phi = rng.standard_normal(grid.spectral_shape) + 1j * rng.standard_normal(grid.spectral_shape)
    grad = to_spectral(PhysicalVectorField(grid, np.zeros((3, N, N, N))))
    grad.coeffs[...] = 1j * grid.wavenumbers * phi
    worst["leray_annihilation"] = float(np.abs(leray_project(grad).coeffs).max() / np.abs(grad.coeffs).max())

    values = rng.standard_normal((3, N, N, N))
    quad = math.sqrt(np.sum(values**2) * grid.cell_volume)
    worst["parseval"] = abs(quad - hs_norm(to_spectral(PhysicalVectorField(grid, values)), 0.0)) / quad

    comp = 0.0
    for s, t in [(0.5, 1.0), (-1.0, 2.5), (1.5, -0.5), (-0.75, -0.75)]:
        a = fractional_multiplier(fractional_multiplier(once, s), t).coeffs
        b = fractional_multiplier(once, s + t).coeffs
        comp = max(comp, _rel(a, b))
    worst["multiplier_composition"] = comp

    tolerances = {
        "elsasser_round_trip": 1e-15,
        "kappa_lambda_identities": 1e-13,
        "leray_idempotence": 1e-15,
        "leray_annihilation": 1e-12,
        "parseval": 1e-12,
        "multiplier_composition": 1e-13,
    }
    ok = all(worst[k] <= tolerances[k] for k in tolerances)
    detail = ", ".join(f"{k}={worst[k]:.1e}" for k in tolerances)
    assert criterion("algebraic layer", ok, detail)


def test_norm_fixtures(grid, criterion):
    x = grid.nodes[0]
    values = np.zeros((3, N, N, N))
    values[1] = np.cos(x) + 0 * grid.nodes[1]
    h12 = hs_norm(to_spectral(PhysicalVectorField(grid, values)), 0.5)
    e_h12 = abs(h12 / math.sqrt((2 * np.pi) ** 3 / 2) - 1)

    const = np.zeros((3, N, N, N))
    const[0] = 1.0
    e_const = abs(lp_norm(PhysicalVectorField(grid, const), 3.0) / (2 * np.pi) - 1)

    # mean |u_TG|^2 = 1/4, so the energy is (2 pi)^3 / 8
    tg = generate_initial(InitialDataSpec(kind="taylor-green"), grid)
    energy = 0.5 * hs_norm(tg.u, 0.0) ** 2
    e_tg = abs(energy / ((2 * np.pi) ** 3 / 8) - 1)

    ok = max(e_h12, e_const, e_tg) <= 1e-12
    assert criterion("norm fixtures", ok, f"h12={e_h12:.1e}, l3 const={e_const:.1e}, tg energy={e_tg:.1e}")


def test_heat_oracle(grid, criterion):
    report = heat_oracle(grid, make_params(1, 1), IntegratorConfig(dt=1e-3, t_end=1.0), tol=1e-10)
    d = report.details
    ok = report.passed and d["steps"] == 1000 and d["vanishing_variable_max"] == 0.0
    detail = f"max rel deviation={d['max_relative_deviation']:.1e}, |W-|max={d['vanishing_variable_max']}, steps={d['steps']}"
    assert criterion("heat oracle", ok, detail)


def test_apriori_inequalities(grid, criterion):
    lines = []
    ok = True

    p = make_params(1, 1)
    e = initial_elsasser(InitialDataSpec(kind="taylor-green", b_scale=1.0, b_noise=0.02), grid, p)
    run = simulate(e, p, IntegratorConfig(dt=1e-3, t_end=0.3), CP)
    r1 = check_apriori_thm1(run.series, CP, tol=1e-6)
    ok &= run.status == "completed" and r1.applicable and r1.passed
    lines.append(f"L3 bound margin={r1.margin:.2e} ({r1.status})")

    for lam in (0.05, -0.05):
        p = FluidParams.from_kappa_lambda(1.0, lam)
        e = initial_elsasser(InitialDataSpec(kind="taylor-green", amplitude=0.05, b_noise=0.005), grid, p)
        run = simulate(e, p, IntegratorConfig(dt=1e-3, t_end=0.3), CP)
        r2 = check_apriori_thm2(run.series, CP, tol=1e-6)
        ok &= run.status == "completed" and r2.applicable and r2.passed
        lines.append(f"H1/2 bound lambda/kappa={lam:+.2f} margin={r2.margin:.2e} ({r2.status})")
    assert criterion("a priori inequalities", ok, "; ".join(lines))


def test_implication_and_swap(criterion):
    eps0 = CP.epsilon0
    bound = eps0**0.25
    violations = 0
    swap_mismatch = 0
    held = 0
    ratios = np.linspace(0.0, 0.95, 10)
    big = np.logspace(-3, 0.5, 10)
    small = np.logspace(-4, 0, 10)
    for ratio, a, b in itertools.product(ratios, big, small):
        p = FluidParams.from_kappa_lambda(1.0, ratio)
        r = evaluate_thm2_from_norms(p, a, b, CP, "2.7")
        r_swapped = evaluate_thm2_from_norms(p, b, a, CP, "2.8")
        swap_mismatch += r.lhs != r_swapped.lhs or r.holds != r_swapped.holds
        for rep in (r, evaluate_thm2_from_norms(p, a, b, CP, "2.8")):
            held += rep.holds
            violations += rep.holds and abs(p.lam) / p.kappa > bound
        q = FluidParams.from_kappa_lambda(1.0, 0.0)
        t1 = evaluate_thm1_from_norms(q, a, b, CP, "2.1")
        t2 = evaluate_thm1_from_norms(q, b, a, CP, "2.2")
        swap_mismatch += t1.lhs != t2.lhs or t1.holds != t2.holds
    ok = violations == 0 and swap_mismatch == 0 and held > 0
    detail = f"1000 points, holds={held}, ratio violations={violations}, swap mismatches={swap_mismatch}"
    assert criterion("condition implication", ok, detail)


def test_energy_identity(grid, criterion):
    p = make_params(10, 8)
    e = initial_elsasser(InitialDataSpec(kind="taylor-green", b_scale=0.5), grid, p)
    run = simulate(e, p, IntegratorConfig(dt=1e-3, t_end=0.25))
    report = check_energy_balance(run.series, p, tol=0.0)
    rate = report.details["relative_residual_per_unit_time"]
    ok = run.status == "completed" and rate < 1e-6
    assert criterion("energy identity", ok, f"residual per unit time={rate:.2e}")


def test_scaling_equivalence(grid, criterion):
    # kappa = 2 rescales by a power of two, which is exact in floating point;
    # the kappa = 1.5 companion run exercises a rounding-level comparison
    diffs = {}
    for kappa, lam, t_end in ((2.0, 0.2, 0.1), (1.5, 0.2, 0.05)):
        p = FluidParams.from_kappa_lambda(kappa, lam)
        e = initial_elsasser(InitialDataSpec(kind="taylor-green", b_scale=0.5), grid, p)
        report = check_scaling_equivalence(e, p, IntegratorConfig(dt=5e-4, t_end=t_end), tol=0.0)
        diffs[kappa] = report.details.get("max_relative_difference", math.inf)
    ok = all(d < 1e-5 for d in diffs.values())
    detail = ", ".join(f"kappa={k}: max relative difference={d:.2e}" for k, d in diffs.items())
    assert criterion("scaling equivalence", ok, detail)


def test_self_convergence(grid, criterion):
    p = make_params(10, 8)
    e = initial_elsasser(InitialDataSpec(kind="taylor-green", b_scale=0.5), grid, p)
    res = self_convergence(e, p, IntegratorConfig(dt=0.02, t_end=0.5))
    ok = res.applicable and not res.exact_linear and 1.8 <= res.order <= 2.2
    detail = f"order={res.order:.3f}, successive={[round(x, 3) for x in res.difference_orders]}"
    assert criterion("self-convergence", ok, detail)


def test_io(grid, tmp_path, criterion):
    checks = {}

    rows = (
        MonitorRow(0.0, 1.5, 0.25, 2.0, 0.125, 0.0, 0.0, 0.0, 3.0, 0.75, 0.015625, 0.015625, 0.0),
        MonitorRow(0.1, 1.25, 0.25, 1.75, 0.0625, 0.5, 0.001, 0.1, 2.5, 0.5, 0.015625, 0.016625, 1e-15),
    )
    path = write_timeseries(MonitorSeries(make_params(1, 1), rows), tmp_path / "ts.csv")
    checks["csv golden"] = path.read_bytes() == (DATA / "golden_timeseries.csv").read_bytes()

    p = FluidParams(2.0, 0.5, 1.0)
    e = initial_elsasser(InitialDataSpec(kind="random-solenoidal", seed=3, k0=5, b_noise=0.3), grid, p)
    state = simulate(e, p, IntegratorConfig(dt=1e-3, t_end=0.003)).final
    back, _ = checkpoint_read(checkpoint_write(state, p, tmp_path / "s.chk"))
    checks["checkpoint bit-exact"] = (
        np.array_equal(back.w_plus.coeffs, state.w_plus.coeffs)
        and np.array_equal(back.w_minus.coeffs, state.w_minus.coeffs)
        and back.time == state.time
    )

    keyed = True
    for text, key in [("grid.n = 24", "grid.n"), ("params.re = 0", "params.re"), ("foo.bar = 1", "foo.bar")]:
        try:
            parse_config(text)
            keyed = False
        except ConfigError as exc:
            keyed &= exc.key == key and str(exc).startswith(key + ":")
    checks["keyed config diagnostics"] = keyed

    text = (
        "grid.n = 16\ninitial.kind = random-solenoidal\ninitial.seed = 11\n"
        "sweep.axes.params.rm = [1.0, 0.8]\nsweep.axes.initial.b_noise = [0.0, 0.1]\n"
    )
    tables = []
    for extra in ("", "sweep.workers = 2\n"):
        sc = parse_sweep_config(text + extra)
        buf = io.StringIO()
        write_sweep_table(run_sweep(sc), sweep_columns(sc), buf)
        tables.append(buf.getvalue())
    checks["sweep reproducible"] = tables[0] == tables[1]

    ok = all(checks.values())
    assert criterion("io", ok, ", ".join(f"{k}={'ok' if v else 'bad'}" for k, v in checks.items()))
