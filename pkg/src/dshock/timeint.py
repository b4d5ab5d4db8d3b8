"""Explicit Euler stepping with the dt * sup|velocity| <= cfl * epsilon
constraint, snapshot scheduling, and blow-up detection."""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .cascade import (
    CascadeState,
    TwoDState,
    build_kernels,
    mollified_density,
    ps3_rhs,
    ps4_rhs,
    twod_rhs,
)
from .errors import BlowUpError, DshockError, ScenarioError
from .grid import Field, make_grid
from .mollifier import convolve
from .transport import make_flux, nonlinear_rhs
from .velocity import make_velocity_provider

TWO_PI = 2.0 * math.pi


def stable_dt(params, u_bound):
    """dt = cfl * epsilon / u_bound (pure-source regime when u_bound = 0)."""
    if u_bound <= 0.0:
        return params.cfl * params.epsilon
    return params.cfl * params.epsilon / u_bound


def fit_dt(dt, interval):
    """Shrink dt so the interval is an integer number of equal steps."""
    if interval <= 0.0:
        return dt, 0
    m = max(1, math.ceil(interval / dt - 1e-12))
    return interval / m, m


def _check_finite(time, **named_arrays):
    for name, arr in named_arrays.items():
        if not np.all(np.isfinite(arr)):
            finite = arr[np.isfinite(arr)]
            mag = float(np.max(np.abs(finite))) if finite.size else math.inf
            raise BlowUpError(time, name, mag)


def euler_step(state, rhs_evaluator, dt):
    """Advance every field of a 1-D cascade state by field + dt * rhs."""
    rhs = rhs_evaluator(state)
    t_new = state.time + dt
    x_new = state.x.values + dt * rhs[0].values
    w_new = state.w.values + dt * rhs[1].values
    z_new = None
    if state.z is not None:
        z_new = state.z.values + dt * rhs[2].values
        _check_finite(t_new, X=x_new, w=w_new, Z=z_new)
        z_new = Field(state.z.grid, z_new)
    else:
        _check_finite(t_new, X=x_new, w=w_new)
    return CascadeState(
        time=t_new,
        u=state.u,
        x=Field(state.x.grid, x_new),
        w=Field(state.w.grid, w_new),
        z=z_new,
    )


@dataclass(frozen=True)
class Snapshot:
    time: float
    fields: dict  # name -> ndarray, deterministic insertion order


@dataclass
class Trajectory:
    grid: object
    params: object
    system: object
    velocity_spec: object
    snapshots: list = dc_field(default_factory=list)
    diverged: bool = False
    divergence_time: float | None = None

    @property
    def times(self):
        return [s.time for s in self.snapshots]


def _snapshot_times(scenario):
    times = sorted(set(float(t) for t in scenario.snapshot_times) | {scenario.t_end})
    for t in times:
        if t < 0.0 or t > scenario.t_end + 1e-12:
            raise ScenarioError(f"snapshot time {t} outside [0, t_end = {scenario.t_end}]")
    return times


def run(scenario):
    """Run a validated scenario to t_end; deterministic, returns a Trajectory.

    A blow-up is reported, not raised: the trajectory is flagged `diverged`
    and carries the snapshots recorded before the failure.
    """
    family = scenario.system.family
    if family in ("PS3", "PS4"):
        return _run_cascade_1d(scenario)
    if family == "TWO_D":
        return _run_twod(scenario)
    if family == "NONLINEAR_2x2":
        return _run_nonlinear(scenario)
    raise ScenarioError(f"unknown system family '{family}'")


def effective_grid(scenario):
    """Grid with h identified with epsilon: N = round(2*pi/eps), eps := 2*pi/N."""
    n = int(round(TWO_PI / scenario.params.epsilon))
    dim = 2 if scenario.system.family == "TWO_D" else 1
    grid = make_grid(dim, n)
    return grid, scenario.params.with_epsilon(grid.spacing)


def _record_1d(traj, state, kernels):
    v = mollified_density(state, kernels)
    fields = {
        "u": state.u.values.copy(),
        "X": state.x.values.copy(),
        "v": v.values.copy(),
        "w": state.w.values.copy(),
    }
    if state.z is not None:
        fields["Z"] = state.z.values.copy()
    traj.snapshots.append(Snapshot(time=state.time, fields=fields))


def _run_cascade_1d(scenario):
    grid, params = effective_grid(scenario)
    needs_z = scenario.system.has_z
    params.validate(needs_gamma=needs_z)
    scenario.system.validate(params)
    kernels = build_kernels(grid, params, needs_gamma=needs_z)

    x0 = scenario.initial_field("v", grid, params, kernels)
    w0 = scenario.initial_field("w", grid, params, kernels)
    z0 = scenario.initial_field("z", grid, params, kernels) if needs_z else None

    u0 = None
    if scenario.velocity.kind == "numeric":
        u0 = scenario.initial_field("u", grid, params, kernels).values
    vel = make_velocity_provider(grid, scenario.velocity, params.epsilon, u0)

    speed_bound = vel.u_bound * scenario.system.max_transport_coeff()
    if scenario.velocity.kind == "numeric":
        speed_bound = max(speed_bound, abs(scenario.velocity.a) * vel.u_bound)
    dt0 = stable_dt(params, speed_bound)

    state = CascadeState(time=0.0, u=vel.field_at(0.0), x=x0, w=w0, z=z0)
    traj = Trajectory(grid=grid, params=params, system=scenario.system,
                      velocity_spec=scenario.velocity)

    if needs_z:
        rhs_fn = lambda s: ps4_rhs(s, params, scenario.system, kernels)
    else:
        rhs_fn = lambda s: ps3_rhs(s, params, scenario.system, kernels)

    times = _snapshot_times(scenario)
    t_prev = 0.0
    if times and times[0] == 0.0:
        _record_1d(traj, state, kernels)
        times = times[1:]
    try:
        for t_target in times:
            dt, m = fit_dt(dt0, t_target - t_prev)
            for _ in range(m):
                new = euler_step(state, rhs_fn, dt)
                vel.advance(new.time, dt)
                state = CascadeState(time=new.time, u=vel.field_at(new.time),
                                     x=new.x, w=new.w, z=new.z)
            # land on the scheduled time exactly (avoid dt rounding drift)
            state = CascadeState(time=t_target, u=state.u, x=state.x,
                                 w=state.w, z=state.z)
            _record_1d(traj, state, kernels)
            t_prev = t_target
    except BlowUpError as exc:
        traj.diverged = True
        traj.divergence_time = exc.time
    return traj


def _run_twod(scenario):
    grid, params = effective_grid(scenario)
    params.validate()
    scenario.system.validate(params)
    kernels = build_kernels(grid, params)

    x0 = scenario.initial_field("rho", grid, params, kernels)
    w0 = scenario.initial_field("w", grid, params, kernels)
    u_at, v_at, speed_bound = scenario.twod_velocities(grid, params)

    dt0 = stable_dt(params, speed_bound * scenario.system.max_transport_coeff())
    state = TwoDState(time=0.0, u=u_at(0.0), v=v_at(0.0), x=x0, w=w0)
    traj = Trajectory(grid=grid, params=params, system=scenario.system,
                      velocity_spec=scenario.velocity)

    def record(st):
        rho = convolve(st.x, kernels["alpha"])
        traj.snapshots.append(Snapshot(time=st.time, fields={
            "u": st.u.values.copy(),
            "v": st.v.values.copy(),
            "X": st.x.values.copy(),
            "rho": rho.values.copy(),
            "w": st.w.values.copy(),
        }))

    times = _snapshot_times(scenario)
    t_prev = 0.0
    if times and times[0] == 0.0:
        record(state)
        times = times[1:]
    try:
        for t_target in times:
            dt, m = fit_dt(dt0, t_target - t_prev)
            for _ in range(m):
                rhs_x, rhs_w = twod_rhs(state, params, scenario.system, kernels)
                t_new = state.time + dt
                x_new = state.x.values + dt * rhs_x.values
                w_new = state.w.values + dt * rhs_w.values
                _check_finite(t_new, X=x_new, w=w_new)
                state = TwoDState(time=t_new, u=u_at(t_new), v=v_at(t_new),
                                  x=Field(grid, x_new), w=Field(grid, w_new))
            state = TwoDState(time=t_target, u=state.u, v=state.v,
                              x=state.x, w=state.w)
            record(state)
            t_prev = t_target
    except BlowUpError as exc:
        traj.diverged = True
        traj.divergence_time = exc.time
    return traj


def _run_nonlinear(scenario):
    grid, params = effective_grid(scenario)
    params.validate()
    f = make_flux(*scenario.system.flux_f)
    g = make_flux(*scenario.system.flux_g)

    kernels = build_kernels(grid, params)
    u0 = scenario.initial_field("u", grid, params, kernels)
    v0 = scenario.initial_field("v", grid, params, kernels)

    bound = max(_flux_bound(scenario.system.flux_f), _flux_bound(scenario.system.flux_g))
    dt0 = stable_dt(params, bound)

    traj = Trajectory(grid=grid, params=params, system=scenario.system,
                      velocity_spec=scenario.velocity)
    u, v = u0, v0
    t = 0.0

    def record(t, u, v):
        traj.snapshots.append(Snapshot(time=t, fields={
            "u": u.values.copy(), "v": v.values.copy()}))

    times = _snapshot_times(scenario)
    t_prev = 0.0
    if times and times[0] == 0.0:
        record(0.0, u, v)
        times = times[1:]
    try:
        for t_target in times:
            dt, m = fit_dt(dt0, t_target - t_prev)
            for _ in range(m):
                rhs_u, rhs_v = nonlinear_rhs(u, v, f, g, params.epsilon)
                t += dt
                u_new = u.values + dt * rhs_u.values
                v_new = v.values + dt * rhs_v.values
                _check_finite(t, u=u_new, v=v_new)
                u, v = Field(grid, u_new), Field(grid, v_new)
            t = t_target
            record(t, u, v)
            t_prev = t_target
    except BlowUpError as exc:
        traj.diverged = True
        traj.divergence_time = exc.time
    return traj


def _flux_bound(flux_spec):
    name = flux_spec[0]
    if name in ("tanh_scaled", "sin_sum"):
        return 1.0
    if name == "const":
        return abs(flux_spec[1])
    raise DshockError(f"unknown flux '{name}'")
