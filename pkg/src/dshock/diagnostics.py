"""Measurements: L1 norms, weak-asymptotic residuals against a trigonometric
test basis, the primitive-area procedure, the delta-power estimator, and the
characteristics oracle for the analytic regime."""

import math
from dataclasses import dataclass

import numpy as np

from .cascade import build_kernels, poly_eval, ps3_rhs, ps4_rhs, CascadeState
from .errors import (
    CharacteristicsCrossedError,
    IncompatibleFieldsError,
    InsufficientDataError,
    InvalidLadderError,
)
from .grid import Field, integrate, primitive
from .mollifier import convolve

TWO_PI = 2.0 * math.pi


def l1_norm(f):
    h = f.grid.spacing
    scale = h if f.grid.dimension == 1 else h * h
    return scale * math.fsum(np.abs(f.values).ravel())


def sup_error(a, b):
    if a.grid != b.grid:
        raise IncompatibleFieldsError("sup_error needs fields on the same grid")
    return float(np.max(np.abs(a.values - b.values)))


def test_basis(nodes, k_max):
    """Smooth periodic test functions {1, cos kx, sin kx : k <= k_max} and
    their derivatives."""
    funcs = [(np.ones_like(nodes), np.zeros_like(nodes))]
    for k in range(1, k_max + 1):
        funcs.append((np.cos(k * nodes), -k * np.sin(k * nodes)))
        funcs.append((np.sin(k * nodes), k * np.cos(k * nodes)))
    return funcs


def weak_residual(trajectory, equation, k_max=4):
    """Sup over snapshots and test functions of
    R = integral(d/dt target * psi) - integral(flux * psi').

    The time derivative is the scheme's own rhs (recomputed from the raw
    snapshot state), not a finite difference of snapshots.  `equation` is one
    of 'v' (transport of the density), 'w' (with polynomial source), or 'z'.
    """
    snaps = trajectory.snapshots
    if len(snaps) < 3:
        raise InsufficientDataError("weak residual needs at least 3 snapshots")
    times = trajectory.times
    gaps = np.diff(times)
    if gaps.size and not np.allclose(gaps, gaps[0], rtol=1e-9, atol=1e-12):
        raise InsufficientDataError("weak residual needs uniformly spaced snapshots")
    grid = trajectory.grid
    params = trajectory.params
    system = trajectory.system
    kernels = build_kernels(grid, params, needs_gamma=system.has_z)
    h = grid.spacing
    basis = test_basis(grid.nodes(), k_max)

    worst = 0.0
    for snap in snaps:
        state = CascadeState(
            time=snap.time,
            u=Field(grid, snap.fields["u"]),
            x=Field(grid, snap.fields["X"]),
            w=Field(grid, snap.fields["w"]),
            z=Field(grid, snap.fields["Z"]) if "Z" in snap.fields else None,
        )
        if system.has_z:
            rhs_x, rhs_w, rhs_z = ps4_rhs(state, params, system, kernels)
        else:
            rhs_x, rhs_w = ps3_rhs(state, params, system, kernels)
        u = snap.fields["u"]
        v = convolve(state.x, kernels["alpha"]).values
        if equation == "v":
            ddt = convolve(rhs_x, kernels["alpha"]).values
            flux = system.b * u * v
        elif equation == "w":
            ddt = rhs_w.values
            flux = system.c * u * snap.fields["w"] + poly_eval(
                list(system.p_coeffs), v
            )
        elif equation == "z":
            ddt = rhs_z.values
            flux = (
                system.z_transport * u * snap.fields["Z"]
                + system.z_source * v * snap.fields["w"]
            )
        else:
            raise InsufficientDataError(f"unknown equation selector '{equation}'")
        for psi, dpsi in basis:
            r = h * math.fsum(ddt * psi) - h * math.fsum(flux * dpsi)
            worst = max(worst, abs(r))
    return worst


def shock_area(w):
    """Area between the primitive of w and a far-field baseline.

    The baseline is the median of the primitive over the quarter of cells
    farthest (periodically) from the primitive's main peak; it removes the
    constant offset that Riemann primitives carry.
    """
    big_w = primitive(w).values
    n = big_w.size
    centered = big_w - big_w.mean()
    peak = int(np.argmax(np.abs(centered)))
    idx = np.arange(n)
    dist = np.minimum((idx - peak) % n, (peak - idx) % n)
    far = np.argsort(dist, kind="stable")[-(n // 4):]
    baseline = float(np.median(big_w[far]))
    return w.grid.spacing * math.fsum(np.abs(big_w - baseline))


def estimate_delta_power(ladder):
    """Mean of 1 + log2(A(eps/2)/A(eps)) over consecutive pairs of an
    eps-halving ladder of (eps, area) entries."""
    entries = [(float(e), float(a)) for e, a in ladder]
    if len(entries) < 3:
        raise InvalidLadderError("delta-power estimate needs at least 3 ladder entries")
    for (e0, a0), (e1, a1) in zip(entries, entries[1:]):
        if not math.isclose(e1, 0.5 * e0, rel_tol=1e-6):
            raise InvalidLadderError(
                f"ladder must halve epsilon at each step (got {e0} -> {e1})"
            )
        if a0 <= 0.0 or a1 <= 0.0:
            raise InvalidLadderError("areas must be positive")
    powers = [
        1.0 + math.log2(a1 / a0) for (_, a0), (_, a1) in zip(entries, entries[1:])
    ]
    return sum(powers) / len(powers)


def characteristics_oracle(velocity_expr, v0, t, steps=1000):
    """Classical continuity-equation solution by backward characteristics.

    For each grid node, integrates dy/dtau = -u(y) (RK4, fixed step t/steps)
    back to the foot point and accumulates the velocity-gradient integral G;
    the Jacobian is exp(G) and X(x, t) = v0(foot)/exp(G).  `v0` may be an
    analytic expression or a Field (periodic linear interpolation).
    """
    grid = v0.grid if isinstance(v0, Field) else None
    if grid is None:
        raise IncompatibleFieldsError("pass v0 as a Field (use from_expression)")
    nodes = grid.nodes()
    if t == 0.0:
        return Field(grid, v0.values.copy())

    def rhs(y):
        return -velocity_expr(y), velocity_expr.derivative(y)

    y = nodes.astype(np.float64).copy()
    g = np.zeros_like(y)
    dtau = t / steps
    for _ in range(steps):
        k1y, k1g = rhs(y)
        k2y, k2g = rhs(y + 0.5 * dtau * k1y)
        k3y, k3g = rhs(y + 0.5 * dtau * k2y)
        k4y, k4g = rhs(y + dtau * k3y)
        y = y + (dtau / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        g = g + (dtau / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)

    # foot map must stay orientation-preserving (characteristics not crossed)
    diffs = np.diff(np.concatenate([y, [y[0] + TWO_PI]]))
    if np.any(diffs <= 0.0):
        raise CharacteristicsCrossedError(
            f"characteristics crossed before t = {t:.6g}; oracle invalid"
        )
    jac = np.exp(g)
    v0_at_feet = _sample_initial(v0, y)
    return Field(grid, v0_at_feet / jac)


def oracle_from_expression(velocity_expr, v0_expr, grid, t, steps=1000):
    """characteristics_oracle with exact evaluation of analytic initial data."""
    f = _OracleExprField(grid, v0_expr)
    return characteristics_oracle(velocity_expr, f, t, steps=steps)


class _OracleExprField(Field):
    """Field whose off-grid samples come from an analytic expression."""

    def __init__(self, grid, expr):
        super().__init__(grid, expr(grid.nodes()))
        object.__setattr__(self, "expr", expr)


def _sample_initial(v0, y):
    expr = getattr(v0, "expr", None)
    if expr is not None:
        return expr(y)
    nodes = v0.grid.nodes()
    h = v0.grid.spacing
    pos = (y - nodes[0]) / h
    i0 = np.floor(pos).astype(int) % v0.grid.n
    frac = pos - np.floor(pos)
    i1 = (i0 + 1) % v0.grid.n
    return (1.0 - frac) * v0.values[i0] + frac * v0.values[i1]
