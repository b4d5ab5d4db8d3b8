"""Velocity families for the transport cascades.

Three kinds:
  * exact_riemann: entropy solution of du/dt + d(a u^2)/dx = 0 from step data,
    sampled on the grid and smoothed over a layer of width epsilon**beta so
    the gradient stays below const/epsilon**beta;
  * prescribed_analytic: a fixed smooth periodic profile;
  * numeric: forward-Euler flux-split evolution of the same conservation law,
    with a periodic 3-cell averaging pass enforcing the gradient bound.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DshockError, UnstableStepError
from .expressions import AnalyticExpr
from .grid import Field, make_field
from .mollifier import build_kernel, convolve

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class VelocitySpec:
    kind: str  # exact_riemann | prescribed_analytic | numeric
    a: float = 1.0
    u_left: float = 0.0
    u_right: float = 0.0
    expression: AnalyticExpr | None = None
    beta: float = 0.0


def sign_split(u):
    """u -> (max(0, u), max(0, -u)); plus minus minus reconstructs u, plus
    plus plus reconstructs |u|, both exactly."""
    vals = u.values
    return Field(u.grid, np.maximum(vals, 0.0)), Field(u.grid, np.maximum(-vals, 0.0))


def _wave_speed_range(u_l, u_r, a):
    """(left edge, right edge) of the wave fan/shock from step (u_l, u_r)."""
    if u_l == u_r:
        s = 2.0 * a * u_l
        return s, s
    if a * (u_l - u_r) > 0.0:  # compressive: shock
        s = a * (u_l + u_r)
        return s, s
    lo, hi = sorted((2.0 * a * u_l, 2.0 * a * u_r))
    return lo, hi


def _line_solution(u_l, u_r, a, xi, t):
    """Entropy solution of the step problem on the line, jump at xi = 0."""
    xi = np.asarray(xi, dtype=np.float64)
    if t <= 0.0 or u_l == u_r or a == 0.0:
        return np.where(xi < 0.0, u_l, u_r).astype(np.float64)
    if a * (u_l - u_r) > 0.0:
        s = a * (u_l + u_r)
        return np.where(xi < s * t, u_l, u_r).astype(np.float64)
    lo, hi = _wave_speed_range(u_l, u_r, a)
    fan = xi / (2.0 * a * t)
    left_state = u_l if 2.0 * a * u_l == lo else u_r
    right_state = u_r if left_state == u_l else u_l
    return np.where(
        xi <= lo * t, left_state, np.where(xi >= hi * t, right_state, fan)
    ).astype(np.float64)


def riemann_velocity(u_l, u_r, a, x, t):
    """Pointwise entropy solution of the Riemann problem at the origin."""
    return float(_line_solution(u_l, u_r, a, np.asarray([x]), t)[0])


def riemann_velocity_torus(u_l, u_r, a, x, t):
    """Entropy solution on the torus: jump (u_l, u_r) at x = 0 and the
    complementary jump (u_r, u_l) at the seam x = +-pi.

    Valid while the two waves have not interacted; raises otherwise.
    """
    x = np.asarray(x, dtype=np.float64)
    xi_seam = np.mod(x + TWO_PI, TWO_PI) - math.pi  # signed offset from -pi
    a_lo, a_hi = _wave_speed_range(u_l, u_r, a)
    b_lo, b_hi = _wave_speed_range(u_r, u_l, a)
    if t > 0.0 and (-math.pi + b_hi * t > a_lo * t or a_hi * t > math.pi + b_lo * t):
        raise DshockError(
            f"Riemann waves interacted on the torus at t = {t:.6g}; "
            "reduce t_end or the wave speeds"
        )
    sol_center = _line_solution(u_l, u_r, a, x, t)
    sol_seam = _line_solution(u_r, u_l, a, xi_seam, t)
    in_center = (x >= a_lo * t) & (x <= a_hi * t)
    in_seam = (xi_seam >= b_lo * t) & (xi_seam <= b_hi * t)
    left_plateau = (x > -math.pi + b_hi * t) & (x < a_lo * t)
    return np.where(
        in_center, sol_center, np.where(in_seam, sol_seam, np.where(left_plateau, u_l, u_r))
    )


class VelocityProvider:
    """Supplies the velocity field at requested times plus its sup bound."""

    def field_at(self, t):
        raise NotImplementedError

    def advance(self, t_new, dt):
        """Move internal state to t_new (numeric kind only)."""

    @property
    def u_bound(self):
        raise NotImplementedError


class RiemannVelocity(VelocityProvider):
    def __init__(self, grid, spec, epsilon):
        self.grid = grid
        self.spec = spec
        self.kernel = build_kernel(grid, spec.beta, epsilon)
        self._cache_t = None
        self._cache_field = None

    @property
    def u_bound(self):
        return max(abs(self.spec.u_left), abs(self.spec.u_right))

    def field_at(self, t):
        if self._cache_t == t:
            return self._cache_field
        raw = riemann_velocity_torus(
            self.spec.u_left, self.spec.u_right, self.spec.a, self.grid.nodes(), t
        )
        out = convolve(make_field(self.grid, raw), self.kernel)
        self._cache_t = t
        self._cache_field = out
        return out


class AnalyticVelocity(VelocityProvider):
    def __init__(self, grid, spec):
        self.grid = grid
        self.spec = spec
        self._field = make_field(grid, spec.expression(grid.nodes()))

    @property
    def u_bound(self):
        return self.spec.expression.bound()

    def field_at(self, t):
        return self._field


def step_velocity_numeric(u, a, epsilon, dt, smooth=False):
    """One forward-Euler step of the flux-split self-transport of u
    (velocity a*u), optionally followed by a 3-cell averaging pass.

    When dt * a * sup|u| <= epsilon the drain coefficient of every cell stays
    in [0, 1] (monotone update); mass is conserved exactly by telescoping.
    """
    vals = u.values
    speed = a * vals
    limit = dt * float(np.max(np.abs(speed)))
    if limit > epsilon * (1.0 + 1e-12):
        raise UnstableStepError(
            f"dt = {dt:.6g} violates dt * a * sup|u| <= epsilon "
            f"(dt * sup = {limit:.6g}, epsilon = {epsilon:.6g})"
        )
    fp = np.maximum(speed, 0.0)
    fm = np.maximum(-speed, 0.0)
    rhs = (np.roll(vals * fp, 1) - vals * np.abs(speed) + np.roll(vals * fm, -1)) / epsilon
    out = vals + dt * rhs
    if smooth:
        out = (np.roll(out, 1) + out + np.roll(out, -1)) / 3.0
    return Field(u.grid, out)


class NumericVelocity(VelocityProvider):
    def __init__(self, grid, spec, epsilon, u0_values):
        self.grid = grid
        self.spec = spec
        self.epsilon = epsilon
        self._field = make_field(grid, u0_values)
        self._bound = float(np.max(np.abs(u0_values)))
        # averaging cadence enforcing the gradient-growth bound
        self.smooth_every = max(1, math.ceil(epsilon ** (spec.beta - 1.0)))
        self._steps = 0

    @property
    def u_bound(self):
        return self._bound

    def field_at(self, t):
        return self._field

    def advance(self, t_new, dt):
        self._steps += 1
        smooth = self._steps % self.smooth_every == 0
        self._field = step_velocity_numeric(
            self._field, self.spec.a, self.epsilon, dt, smooth=smooth
        )


def make_velocity_provider(grid, spec, epsilon, u0_values=None):
    if spec.kind == "exact_riemann":
        return RiemannVelocity(grid, spec, epsilon)
    if spec.kind == "prescribed_analytic":
        return AnalyticVelocity(grid, spec)
    if spec.kind == "numeric":
        if u0_values is None:
            raise DshockError("numeric velocity needs initial data for u")
        return NumericVelocity(grid, spec, epsilon, u0_values)
    raise DshockError(f"unknown velocity kind '{spec.kind}'")
