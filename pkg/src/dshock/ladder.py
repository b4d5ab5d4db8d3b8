"""Epsilon-halving ladder studies: delta-strength scaling, weak-residual
decay, and convergence against the characteristics oracle.

Levels are independent runs, so they are farmed out to a thread pool sized
by the DSHOCK_THREADS environment variable (default 1).
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .diagnostics import (
    estimate_delta_power,
    oracle_from_expression,
    shock_area,
    sup_error,
    weak_residual,
)
from .errors import InvalidLadderError, ScenarioError
from .grid import Field
from .timeint import run

TWO_PI = 2.0 * math.pi

# hard cap on cells per level; finer ladders are refused, not attempted
MAX_CELLS = 2 ** 20


@dataclass(frozen=True)
class LadderRow:
    epsilon: float
    cells: int
    value: float  # area / residual / error depending on the study
    diverged: bool = False


@dataclass(frozen=True)
class LadderReport:
    kind: str  # scale | residual | convergence
    rows: tuple
    summary: float | None  # alpha_hat / decay order / convergence order

    @property
    def any_diverged(self):
        return any(r.diverged for r in self.rows)

    def to_csv(self):
        value_name = {"scale": "area", "residual": "residual",
                      "convergence": "error"}[self.kind]
        rate_name = {"scale": "alpha_hat", "residual": "order",
                     "convergence": "order"}[self.kind]
        lines = [f"epsilon,{value_name},ratio,{rate_name}"]
        prev = None
        for row in self.rows:
            ratio = rate = ""
            if prev is not None and prev > 0.0 and row.value > 0.0:
                r = row.value / prev
                ratio = format(r, ".17g")
                if self.kind == "scale":
                    rate = format(1.0 + math.log2(r), ".17g")
                else:
                    rate = format(-math.log2(r), ".17g")
            val = "nan" if row.diverged else format(row.value, ".17g")
            lines.append(f"{format(row.epsilon, '.17g')},{val},{ratio},{rate}")
            prev = None if row.diverged else row.value
        return "\n".join(lines) + "\n"


def _thread_count():
    raw = os.environ.get("DSHOCK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InvalidLadderError(f"DSHOCK_THREADS must be an integer, got '{raw}'")


def ladder_sizes(eps_start, levels):
    """Cell counts for a halving ladder starting near eps_start."""
    if levels < 2:
        raise InvalidLadderError(f"a ladder needs at least 2 levels, got {levels}")
    if eps_start <= 0.0:
        raise InvalidLadderError(f"eps_start must be positive, got {eps_start}")
    n0 = int(round(TWO_PI / eps_start))
    if n0 < 4:
        raise InvalidLadderError(f"eps_start {eps_start} too coarse (fewer than 4 cells)")
    sizes = [n0 * 2 ** k for k in range(levels)]
    if sizes[-1] > MAX_CELLS:
        raise InvalidLadderError(
            f"finest level needs {sizes[-1]} cells, above the {MAX_CELLS} cap"
        )
    return sizes


def _map_levels(fn, sizes):
    workers = min(_thread_count(), len(sizes))
    if workers == 1:
        return [fn(n) for n in sizes]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, sizes))


def _with_cells(scenario, cells):
    return replace(scenario, params=scenario.params.with_epsilon(TWO_PI / cells))


def scale_parameters(n):
    """Default mollifier exponents for a scale study at power n."""
    alpha = 0.9 / (n + 1)
    return alpha, 0.5 * alpha


def scale_scenario(base, n=None):
    """Retarget a scale-study base scenario at density power n."""
    if n is None:
        return base
    if n < 2:
        raise ScenarioError(f"scale study needs n >= 2, got {n}")
    alpha, beta = scale_parameters(n)
    lead = base.system.p_coeffs[-1] if base.system.p_coeffs else 1.0
    system = replace(base.system, p_coeffs=tuple([0.0] * n + [float(lead)]))
    params = replace(base.params, n=n, alpha=alpha, beta=beta)
    velocity = replace(base.velocity, beta=beta)
    return replace(base, system=system, params=params, velocity=velocity).validate()


def run_scale_study(scenario, n=None, eps_start=None, levels=4):
    """Area of the w-layer primitive at t_end across a halving ladder,
    with per-pair delta-power estimates."""
    base = scale_scenario(scenario, n)
    sizes = ladder_sizes(eps_start or base.params.epsilon, levels)

    def level(cells):
        traj = run(_with_cells(base, cells))
        eps = traj.params.epsilon
        if traj.diverged or not traj.snapshots:
            return LadderRow(epsilon=eps, cells=cells, value=math.nan, diverged=True)
        snap = traj.snapshots[-1]
        area = shock_area(Field(traj.grid, snap.fields["w"]))
        return LadderRow(epsilon=eps, cells=cells, value=area)

    rows = tuple(_map_levels(level, sizes))
    summary = None
    usable = [(r.epsilon, r.value) for r in rows if not r.diverged and r.value > 0.0]
    if len(usable) == len(rows) and len(rows) >= 3:
        summary = estimate_delta_power(usable)
    return LadderReport(kind="scale", rows=rows, summary=summary)


def run_residual_study(scenario, equation, eps_start=None, levels=3, k_max=4):
    """Sup of weak residuals over the trig test basis across a ladder."""
    t = scenario.t_end
    base = replace(scenario, snapshot_times=[0.0, 0.5 * t, t])
    sizes = ladder_sizes(eps_start or base.params.epsilon, levels)

    def level(cells):
        traj = run(_with_cells(base, cells))
        eps = traj.params.epsilon
        if traj.diverged:
            return LadderRow(epsilon=eps, cells=cells, value=math.nan, diverged=True)
        res = weak_residual(traj, equation, k_max=k_max)
        return LadderRow(epsilon=eps, cells=cells, value=res)

    rows = tuple(_map_levels(level, sizes))
    summary = _fit_order(rows)
    return LadderReport(kind="residual", rows=rows, summary=summary)


def run_convergence_study(scenario, eps_start=None, levels=3, oracle_steps=2000):
    """Sup distance between the computed density X and the characteristics
    oracle at t_end, across a ladder."""
    if scenario.velocity.kind != "prescribed_analytic":
        raise ScenarioError("convergence study needs a prescribed_analytic velocity")
    v_spec = scenario.initial.get("v")
    if v_spec is None or v_spec.kind != "analytic":
        raise ScenarioError("convergence study needs analytic initial.v data")
    sizes = ladder_sizes(eps_start or scenario.params.epsilon, levels)

    def level(cells):
        traj = run(_with_cells(scenario, cells))
        eps = traj.params.epsilon
        if traj.diverged:
            return LadderRow(epsilon=eps, cells=cells, value=math.nan, diverged=True)
        snap = traj.snapshots[-1]
        exact = oracle_from_expression(
            scenario.velocity.expression, v_spec.expr, traj.grid, snap.time,
            steps=oracle_steps,
        )
        err = sup_error(Field(traj.grid, snap.fields["X"]), exact)
        return LadderRow(epsilon=eps, cells=cells, value=err)

    rows = tuple(_map_levels(level, sizes))
    summary = _fit_order(rows)
    return LadderReport(kind="convergence", rows=rows, summary=summary)


def _fit_order(rows):
    """Mean log2 decay rate over consecutive usable ladder pairs."""
    orders = []
    for a, b in zip(rows, rows[1:]):
        if a.diverged or b.diverged or a.value <= 0.0 or b.value <= 0.0:
            return None
        orders.append(math.log2(a.value / b.value))
    return sum(orders) / len(orders) if orders else None
