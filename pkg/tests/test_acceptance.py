"""End-to-end acceptance checks for the whole laboratory.

Each test prints a single summary line with the measured value and its
target before asserting, so a full run doubles as a results table.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from dshock.cascade import SchemeParams, SystemSpec
from dshock.diagnostics import estimate_delta_power, l1_norm, shock_area, weak_residual
from dshock.expressions import AnalyticExpr, constant
from dshock.grid import Field, integrate, make_field, make_grid
from dshock.ladder import (
    ladder_sizes,
    run_convergence_study,
    run_residual_study,
    scale_parameters,
    scale_scenario,
)
from dshock.mollifier import bump, bump_derivative
from dshock.scenario import InitialSpec, Scenario, format_scenario, parse_scenario, snapshot_csv_text
from dshock.timeint import run, stable_dt
from dshock.transport import transport_rhs
from dshock.velocity import VelocitySpec
from conftest import TWO_PI, load_bundled


def report(criterion, ok, detail):
    print(f"[{criterion}] {'PASS' if ok else 'FAIL'}: {detail}")


# -----------------------------------------------------------------------
# 1. exact discrete conservation of source-free transport


def test_conservation_exact_over_1000_steps():
    n = 2048
    g = make_grid(1, n)
    eps = g.spacing
    nodes = g.nodes()
    u = make_field(g, 1.5 * np.sin(nodes) + 0.5 * np.cos(3 * nodes))
    x = make_field(g, 1.0 + 0.5 * np.sin(nodes) + 0.2 * np.cos(7 * nodes))
    dt = 0.45 * eps / float(np.max(np.abs(u.values)))
    mass0 = integrate(x)
    t0 = time.perf_counter()
    for _ in range(1000):
        rhs = transport_rhs(x, u, eps, b=2.0)
        x = make_field(g, x.values + dt * rhs.values)
    elapsed = time.perf_counter() - t0
    drift = abs(integrate(x) - mass0) / max(1.0, abs(mass0))
    ok = drift <= 1e-12 and elapsed < 1.0
    report("criterion 1", ok,
           f"mass drift {drift:.3e} (<= 1e-12), runtime {elapsed:.3f}s (< 1s)")
    assert drift <= 1e-12
    assert elapsed < 1.0


# -----------------------------------------------------------------------
# 2. L1 monotonicity under the CFL constraint


def test_l1_monotone_under_cfl_100_random_cases():
    rng = np.random.default_rng(20240817)
    g = make_grid(1, 64)
    eps = g.spacing
    worst = -math.inf
    for _ in range(100):
        u = make_field(g, rng.uniform(-2.0, 2.0, size=64))
        x = make_field(g, rng.normal(size=64))
        dt = rng.uniform(0.1, 1.0) * eps / float(np.max(np.abs(u.values)))
        rhs = transport_rhs(x, u, eps)
        x1 = make_field(g, x.values + dt * rhs.values)
        worst = max(worst, l1_norm(x1) - l1_norm(x))
    ok = worst <= 1e-12
    report("criterion 2", ok, f"max L1 increase {worst:.3e} (<= 1e-12)")
    assert worst <= 1e-12


# -----------------------------------------------------------------------
# 3 & 6. the delta-power table and the w growth bound share one ladder


@pytest.fixture(scope="module")
def table_ladders():
    """Riemann-table ladder (eps_start 4e-3, 4 levels) for n = 2..5.

    Returns {n: [(epsilon, primitive area of w(., 1), L1 norm of w(., 1))]}.
    """
    base = load_bundled("ps3_riemann_table.cfg")
    sizes = ladder_sizes(4e-3, 4)
    results = {}
    for n in (2, 3, 4, 5):
        scen = scale_scenario(base, n)
        rows = []
        for cells in sizes:
            traj = run(replace(
                scen, params=scen.params.with_epsilon(TWO_PI / cells)))
            assert not traj.diverged, f"n={n} diverged at {cells} cells"
            w = Field(traj.grid, traj.snapshots[-1].fields["w"])
            rows.append((traj.params.epsilon, shock_area(w), l1_norm(w)))
        results[n] = rows
    return results


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_table_area_ratios(table_ladders, n):
    rows = table_ladders[n]
    areas = [a for _, a, _ in rows]
    ratios = [b / a for a, b in zip(areas, areas[1:])]
    mean_ratio = sum(ratios) / len(ratios)
    alpha_hat = estimate_delta_power([(e, a) for e, a, _ in rows])
    target_ratio = 2.0 ** (n - 2)
    target_power = float(n - 1)
    ok = (abs(mean_ratio - target_ratio) <= 0.2 * target_ratio
          and abs(alpha_hat - target_power) <= 0.3)
    report("criterion 3", ok,
           f"n={n}: mean area ratio {mean_ratio:.3f} (target {target_ratio}"
           f" +-20%), alpha_hat {alpha_hat:.3f} (target {target_power} +-0.3)")
    assert abs(mean_ratio - target_ratio) <= 0.2 * target_ratio
    assert abs(alpha_hat - target_power) <= 0.3


def test_table_absolute_area_n2(table_ladders):
    area = table_ladders[2][-1][1]
    ok = abs(area - 0.090) <= 0.25 * 0.090
    report("criterion 3 (secondary)", ok,
           f"n=2 finest-level area {area:.4f} (target 0.090 +-25%)")
    assert abs(area - 0.090) <= 0.25 * 0.090


@pytest.mark.parametrize("n", [2, 3])
def test_w_growth_bound(table_ladders, n):
    rows = table_ladders[n]
    l1s = [l for _, _, l in rows]
    growth = sum(math.log2(b / a) for a, b in zip(l1s, l1s[1:])) / (len(l1s) - 1)
    alpha, _ = scale_parameters(n)
    bound = (n + 1) * alpha + 0.2
    ok = growth <= bound
    report("criterion 6", ok,
           f"n={n}: L1(w) growth exponent {growth:.3f} (<= {bound:.3f})")
    assert growth <= bound


# -----------------------------------------------------------------------
# 4. weak-asymptotic residual decay


@pytest.fixture(scope="module")
def ps3_residual_trajectories():
    base = load_bundled("ps3_riemann_table.cfg")
    t = base.t_end
    base = replace(base, snapshot_times=[0.0, 0.5 * t, t])
    trajs = []
    for cells in ladder_sizes(4e-3, 3):
        traj = run(replace(base, params=base.params.with_epsilon(TWO_PI / cells)))
        assert not traj.diverged
        trajs.append(traj)
    return trajs


@pytest.mark.parametrize("equation", ["v", "w"])
def test_residual_decay_ps3(ps3_residual_trajectories, equation):
    residuals = [weak_residual(t, equation) for t in ps3_residual_trajectories]
    decays = [math.log2(a / b) for a, b in zip(residuals, residuals[1:])]
    order = sum(decays) / len(decays)
    strictly = all(b < a for a, b in zip(residuals, residuals[1:]))
    ok = strictly and (equation != "v" or order >= 0.0)
    detail = (f"eq {equation}: residuals {['%.3g' % r for r in residuals]}, "
              f"order {order:.3f}")
    if equation == "v":
        detail += " (>= (alpha-beta)-0.15 = 0.0)"
    report("criterion 4", ok, detail)
    assert strictly
    if equation == "v":
        assert order >= (0.3 - 0.15) - 0.15


def test_residual_decay_z_equation():
    base = load_bundled("ps3_riemann_table.cfg")
    ps4 = replace(
        base,
        system=replace(base.system, family="PS4"),
        params=replace(base.params, alpha=0.08, beta=0.04, gamma=0.33),
        velocity=replace(base.velocity, beta=0.04),
    ).validate()
    rep = run_residual_study(ps4, "z", eps_start=4e-3, levels=3)
    values = [r.value for r in rep.rows]
    strictly = not rep.any_diverged and all(
        b < a for a, b in zip(values, values[1:]))
    report("criterion 4", strictly,
           f"eq z: residuals {['%.3g' % v for v in values]}, "
           f"order {rep.summary and round(rep.summary, 3)}")
    assert strictly


# -----------------------------------------------------------------------
# 5. analytic-regime convergence against the characteristics oracle


def test_convergence_analytic_velocity():
    conv = load_bundled("analytic_convergence.cfg")
    rep = run_convergence_study(conv, eps_start=TWO_PI / 64, levels=4)
    values = [r.value for r in rep.rows]
    ok = not rep.any_diverged and rep.summary is not None and rep.summary >= 0.8
    report("criterion 5", ok,
           f"u = 2 + sin x: errors {['%.3g' % v for v in values]}, "
           f"order {rep.summary:.3f} (>= 0.8)")
    assert not rep.any_diverged
    assert rep.summary >= 0.8


def test_convergence_constant_velocity():
    conv = load_bundled("analytic_convergence.cfg")
    conv = replace(conv, velocity=replace(conv.velocity, expression=constant(2.0)))
    rep = run_convergence_study(conv, eps_start=TWO_PI / 64, levels=4)
    values = [r.value for r in rep.rows]
    ratios = [b / a for a, b in zip(values, values[1:])]
    ok = all(0.35 <= r <= 0.65 for r in ratios)
    report("criterion 5", ok,
           f"constant u: error ratios {['%.3f' % r for r in ratios]} "
           f"(each in [0.35, 0.65])")
    for r in ratios:
        assert 0.35 <= r <= 0.65


# -----------------------------------------------------------------------
# 7. the 2-D solver reduces to the 1-D cascade on y-invariant data


def test_twod_reduction_matches_ps3():
    n = 128
    eps = TWO_PI / n
    twod = load_bundled("twod_smoke.cfg", cells=n)
    # ten explicit steps at the shared stable dt
    dt0 = stable_dt(twod.params.with_epsilon(eps),
                    2.0 * twod.system.max_transport_coeff())
    t_end = 10.0 * dt0
    twod = replace(twod, t_end=t_end, snapshot_times=[t_end])

    oned = Scenario(
        name="reduction-1d",
        system=SystemSpec(family="PS3", a=twod.system.a, b=twod.system.b,
                          c=twod.system.c, p_coeffs=twod.system.p_coeffs),
        params=twod.params,
        velocity=twod.velocity,
        initial={"v": twod.initial["rho"], "w": twod.initial["w"]},
        t_end=t_end,
        snapshot_times=[t_end],
    ).validate()

    t0 = time.perf_counter()
    traj2 = run(twod)
    traj1 = run(oned)
    elapsed = time.perf_counter() - t0
    assert not traj1.diverged and not traj2.diverged
    s1, s2 = traj1.snapshots[-1], traj2.snapshots[-1]
    dx = float(np.max(np.abs(s2.fields["X"] - s1.fields["X"][:, None])))
    dw = float(np.max(np.abs(s2.fields["w"] - s1.fields["w"][:, None])))
    ok = dx <= 1e-12 and dw <= 1e-12 and elapsed < 5.0
    report("criterion 7", ok,
           f"row-wise |X| diff {dx:.3e}, |w| diff {dw:.3e} (<= 1e-12), "
           f"runtime {elapsed:.2f}s (< 5s)")
    assert dx <= 1e-12
    assert dw <= 1e-12
    assert elapsed < 5.0


# -----------------------------------------------------------------------
# 8. the delta-power estimator on synthetic data of known power


def planted_field(grid, eps, power):
    """d/dx[(phi_eps)^power] with phi_eps the unit-mass rescaled bump."""
    s = grid.nodes() / eps
    raw = bump(s)
    mass = grid.spacing * math.fsum(raw)
    g = raw / mass
    dg = bump_derivative(s) / (eps * mass)
    return make_field(grid, power * g ** (power - 1.0) * dg)


@pytest.mark.parametrize("power", [1, 2, 3])
def test_synthetic_delta_power(power):
    grid = make_grid(1, 4096)
    ladder = []
    for k in range(3):
        eps = 0.4 / 2**k
        ladder.append((eps, shock_area(planted_field(grid, eps, float(power)))))
    alpha_hat = estimate_delta_power(ladder)
    ok = abs(alpha_hat - power) <= 0.05
    report("criterion 8", ok,
           f"planted alpha={power}: estimate {alpha_hat:.4f} (+-0.05)")
    assert abs(alpha_hat - power) <= 0.05


# -----------------------------------------------------------------------
# 9. determinism and round-trips


def test_reruns_are_bit_identical():
    results = []
    for _ in range(2):
        s = load_bundled("analytic_convergence.cfg", cells=64)
        results.append(run(s))
    a, b = results
    assert a.times == b.times
    identical = True
    for sa, sb in zip(a.snapshots, b.snapshots):
        assert set(sa.fields) == set(sb.fields)
        for name in sa.fields:
            identical &= bool(np.array_equal(sa.fields[name], sb.fields[name]))
        identical &= snapshot_csv_text(sa, a.grid) == snapshot_csv_text(sb, b.grid)
    report("criterion 9", identical, "two fresh runs produced identical bytes")
    assert identical


def test_round_trips_exact(rng):
    from dshock.scenario import bundled_scenario_path, load_scenario

    for name in ("ps3_riemann_table.cfg", "ps4_analytic.cfg",
                 "twod_smoke.cfg", "analytic_convergence.cfg"):
        s = load_scenario(bundled_scenario_path(name))
        assert parse_scenario(format_scenario(s)) == s
    g = make_grid(1, 64)
    from dshock.timeint import Snapshot

    snap = Snapshot(time=0.5, fields={"u": rng.normal(size=64),
                                      "v": rng.normal(size=64),
                                      "w": rng.normal(size=64)})
    text = snapshot_csv_text(snap, g)
    parsed = {}
    lines = text.splitlines()
    header = lines[0].split(",")
    cols = list(zip(*[ln.split(",") for ln in lines[1:]]))
    for h, col in zip(header, cols):
        parsed[h] = np.array([float(v) for v in col])
    ok = all(np.array_equal(parsed[k], snap.fields[k]) for k in ("u", "v", "w"))
    report("criterion 9", ok, "scenario and CSV round-trips exact")
    assert ok


# -----------------------------------------------------------------------
# qualitative checks: delta formation and the Z double-primitive peak


def test_qualitative_delta_formation():
    peaks, masses = [], []
    for cells in (64, 128, 256):
        s = Scenario(
            name="delta-formation",
            system=SystemSpec(family="PS3", b=2.0, c=2.0, p_coeffs=(0.0, 0.0, 2.0)),
            params=SchemeParams(epsilon=TWO_PI / cells, alpha=0.3, beta=0.15,
                                n=2, cfl=0.45),
            velocity=VelocitySpec(kind="numeric", a=1.0, beta=0.15),
            initial={
                "u": InitialSpec(kind="analytic",
                                 expr=AnalyticExpr(offset=1.5,
                                                   sin_terms=((0.5, 1),))),
                "v": InitialSpec(kind="analytic",
                                 expr=AnalyticExpr(offset=1.0,
                                                   sin_terms=((0.5, 1),))),
                "w": InitialSpec(kind="zero"),
            },
            t_end=1.0,
            snapshot_times=[0.0, 1.0],
        ).validate()
        traj = run(s)
        assert not traj.diverged
        g = traj.grid
        v0 = integrate(Field(g, traj.snapshots[0].fields["v"]))
        v1 = integrate(Field(g, traj.snapshots[-1].fields["v"]))
        peaks.append(float(np.max(np.abs(traj.snapshots[-1].fields["v"]))))
        masses.append(abs(v1 - v0) / max(1.0, abs(v0)))
    growing = peaks[0] < peaks[1] < peaks[2]
    conserved = max(masses) <= 1e-10
    report("qualitative", growing and conserved,
           f"delta formation: max|v(.,1)| = {['%.3f' % p for p in peaks]} "
           f"increasing, mass drift {max(masses):.2e}")
    assert growing
    assert conserved


def test_qualitative_z_double_primitive_single_peak():
    from dshock.grid import primitive

    t_end = 1.5
    s = load_bundled("ps4_analytic.cfg", t_end=t_end, snapshot_times=[0.0, t_end])
    traj = run(s)
    assert not traj.diverged
    g = traj.grid
    z = Field(g, traj.snapshots[-1].fields["Z"])
    p1 = primitive(z).values.copy()
    p1 -= p1.mean()
    p2 = primitive(Field(g, p1)).values
    y = np.abs(p2 - np.median(p2))
    mask = y > 0.5 * float(np.max(y))
    components = int(np.sum((mask.astype(int) - np.roll(mask, 1).astype(int)) == 1))
    frac = mask.mean()
    ok = components == 1 and frac < 0.2
    report("qualitative", ok,
           f"Z double primitive: {components} component(s) above half max "
           f"({frac:.1%} of cells)")
    assert components == 1
    assert frac < 0.2
