"""Scenario configuration (flat key-value text format), initial data
construction, CSV snapshot output, and gnuplot script emission.

Grammar: one `key = value` per line, `#` comments, dotted section keys.
Values are numbers, bare words, or space-separated token lists, e.g.

    system.family = PS3
    system.P = poly 0 0 2
    velocity.kind = exact_riemann
    initial.v = riemann 2 1
    snapshots = 0 1
"""

import math
import os
import re
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .cascade import SchemeParams, SystemSpec
from .errors import NothingToPlotError, ScenarioError
from .expressions import AnalyticExpr
from .grid import Field
from .mollifier import build_kernel, convolve
from .velocity import VelocitySpec, make_velocity_provider

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class InitialSpec:
    kind: str  # zero | constant | riemann | analytic
    left: float = 0.0
    right: float = 0.0
    expr: AnalyticExpr | None = None
    # 2-D analytic terms acting on the y coordinate
    expr_y: AnalyticExpr | None = None


@dataclass
class Scenario:
    name: str
    system: SystemSpec
    params: SchemeParams
    velocity: VelocitySpec
    initial: dict
    t_end: float
    snapshot_times: list
    output: str = "out"
    velocity_y: VelocitySpec | None = None

    def validate(self):
        needs_z = self.system.has_z
        self.params.validate(needs_gamma=needs_z)
        if self.system.family not in ("NONLINEAR_2x2",):
            self.system.validate(self.params)
        if self.velocity.kind in ("exact_riemann", "numeric"):
            if not 0.0 < self.velocity.beta:
                raise ScenarioError("velocity beta must be positive (gradient control)")
            if not self.velocity.beta < self.params.alpha:
                raise ScenarioError(
                    f"beta must satisfy beta < alpha (got beta = {self.velocity.beta}, "
                    f"alpha = {self.params.alpha})"
                )
        if self.system.family == "TWO_D" and self.velocity.kind == "numeric":
            raise ScenarioError(
                "numeric velocity evolution is one-dimensional; use exact_riemann "
                "or prescribed_analytic for TWO_D scenarios"
            )
        if self.system.family == "NONLINEAR_2x2" and (
            self.system.flux_f is None or self.system.flux_g is None
        ):
            raise ScenarioError("NONLINEAR_2x2 requires system.f and system.g fluxes")
        if self.t_end < 0.0:
            raise ScenarioError(f"t_end must be >= 0, got {self.t_end}")
        for t in self.snapshot_times:
            if t < 0.0 or t > self.t_end + 1e-12:
                raise ScenarioError(
                    f"snapshot time {t} outside [0, t_end = {self.t_end}]"
                )
        return self

    # ---- initial data -------------------------------------------------

    def initial_field(self, name, grid, params, kernels):
        spec = self.initial.get(name)
        if spec is None or spec.kind == "zero":
            shape = (grid.n,) if grid.dimension == 1 else (grid.n, grid.n)
            return Field(grid, np.zeros(shape))
        if spec.kind == "constant":
            shape = (grid.n,) if grid.dimension == 1 else (grid.n, grid.n)
            return Field(grid, np.full(shape, spec.left))
        nodes = grid.nodes()
        if spec.kind == "riemann":
            step = np.where(nodes < 0.0, spec.left, spec.right).astype(np.float64)
            if grid.dimension == 2:
                vals = np.broadcast_to(step[:, None], (grid.n, grid.n)).copy()
            else:
                vals = step
            # regularize the jump: width eps**beta for the velocity itself,
            # eps**alpha for transported densities
            exponent = self.velocity.beta if name == "u" else params.alpha
            kern = build_kernel(grid, exponent, params.epsilon)
            return convolve(Field(grid, vals), kern)
        if spec.kind == "analytic":
            if grid.dimension == 1:
                return Field(grid, spec.expr(nodes))
            vx = spec.expr(nodes) if spec.expr is not None else np.zeros(grid.n)
            vy = spec.expr_y(nodes) if spec.expr_y is not None else np.zeros(grid.n)
            return Field(grid, vx[:, None] + vy[None, :])
        raise ScenarioError(f"unknown initial kind '{spec.kind}' for field '{name}'")

    # ---- 2-D velocities ------------------------------------------------

    def twod_velocities(self, grid, params):
        """Axis velocity fields at t = 0 plus providers for later times."""
        from .grid import make_grid

        line = make_grid(1, grid.n)
        prov_u = make_velocity_provider(line, self.velocity, params.epsilon)
        vy = self.velocity_y or VelocitySpec(
            kind="prescribed_analytic", expression=AnalyticExpr(offset=0.0)
        )
        prov_v = make_velocity_provider(line, vy, params.epsilon)

        def u_at(t):
            return Field(grid, np.broadcast_to(
                prov_u.field_at(t).values[:, None], (grid.n, grid.n)).copy())

        def v_at(t):
            return Field(grid, np.broadcast_to(
                prov_v.field_at(t).values[None, :], (grid.n, grid.n)).copy())

        bound = prov_u.u_bound + prov_v.u_bound
        return u_at, v_at, bound


# ---------------------------------------------------------------------------
# parsing


def _parse_floats(tokens, n, context):
    if len(tokens) != n:
        raise ScenarioError(f"{context}: expected {n} numbers, got {len(tokens)}")
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise ScenarioError(f"{context}: {exc}") from None


def _parse_expr(tokens, context):
    """`<offset> [sin amp k]... [cos amp k]...` -> AnalyticExpr."""
    if not tokens:
        raise ScenarioError(f"{context}: empty analytic expression")
    try:
        offset = float(tokens[0])
    except ValueError:
        raise ScenarioError(f"{context}: expected offset, got '{tokens[0]}'") from None
    sin_terms, cos_terms = [], []
    rest = tokens[1:]
    while rest:
        head, *rest = rest
        if head not in ("sin", "cos") or len(rest) < 2:
            raise ScenarioError(
                f"{context}: expected 'sin <amp> <k>' or 'cos <amp> <k>' terms"
            )
        amp, k = float(rest[0]), int(rest[1])
        rest = rest[2:]
        (sin_terms if head == "sin" else cos_terms).append((amp, k))
    return AnalyticExpr(offset=offset, sin_terms=tuple(sin_terms),
                        cos_terms=tuple(cos_terms))


def _parse_initial(value, key):
    tokens = value.split()
    kind = tokens[0]
    if kind == "zero":
        return InitialSpec(kind="zero")
    if kind == "constant":
        (c,) = _parse_floats(tokens[1:], 1, key)
        return InitialSpec(kind="constant", left=c)
    if kind == "riemann":
        left, right = _parse_floats(tokens[1:], 2, key)
        return InitialSpec(kind="riemann", left=left, right=right)
    if kind == "analytic":
        return InitialSpec(kind="analytic", expr=_parse_expr(tokens[1:], key))
    raise ScenarioError(f"{key}: unknown initial kind '{kind}'")


def _parse_velocity(kv, prefix="velocity"):
    kind = kv.get(f"{prefix}.kind")
    if kind is None:
        raise ScenarioError(f"missing {prefix}.kind")
    a = float(kv.get(f"{prefix}.a", "1"))
    beta = float(kv.get(f"{prefix}.beta", kv.get("params.beta", "0")))
    if kind == "exact_riemann":
        return VelocitySpec(
            kind=kind,
            a=a,
            u_left=float(kv[f"{prefix}.u_left"]),
            u_right=float(kv[f"{prefix}.u_right"]),
            beta=beta,
        )
    if kind == "prescribed_analytic":
        tokens = kv[f"{prefix}.expr"].split()
        if tokens and tokens[0] == "analytic":
            tokens = tokens[1:]
        expr = _parse_expr(tokens, f"{prefix}.expr")
        return VelocitySpec(kind=kind, a=a, expression=expr, beta=beta)
    if kind == "numeric":
        return VelocitySpec(kind=kind, a=a, beta=beta)
    raise ScenarioError(f"{prefix}.kind: unknown velocity kind '{kind}'")


def _parse_poly(value, key):
    tokens = value.split()
    if not tokens or tokens[0] != "poly":
        raise ScenarioError(f"{key}: expected 'poly <c0> <c1> ...'")
    try:
        return tuple(float(t) for t in tokens[1:])
    except ValueError as exc:
        raise ScenarioError(f"{key}: {exc}") from None


def _parse_flux(value, key):
    tokens = value.split()
    if not tokens:
        raise ScenarioError(f"{key}: empty flux")
    return (tokens[0], *[float(t) for t in tokens[1:]])


def parse_scenario(text):
    kv = {}
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ScenarioError(f"line {lineno}: empty key or value")
        if key in kv:
            raise ScenarioError(f"line {lineno}: duplicate key '{key}'")
        kv[key] = value
    if not kv:
        raise ScenarioError("empty scenario document")

    try:
        return _build_scenario(kv)
    except KeyError as exc:
        raise ScenarioError(f"missing required key {exc}") from None
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def _build_scenario(kv):
    family = kv["system.family"]
    n = int(kv["params.n"])
    default_p = tuple([0.0] * n + [1.0])
    system = SystemSpec(
        family=family,
        a=float(kv.get("system.a", "1")),
        b=float(kv.get("system.b", "1")),
        c=float(kv.get("system.c", "1")),
        p_coeffs=_parse_poly(kv["system.P"], "system.P") if "system.P" in kv else default_p,
        q_coeffs=_parse_poly(kv["system.Q"], "system.Q") if "system.Q" in kv else (0.0,),
        z_transport=float(kv.get("system.z_transport", "2")),
        z_source=float(kv.get("system.z_source", "6")),
        flux_f=_parse_flux(kv["system.f"], "system.f") if "system.f" in kv else None,
        flux_g=_parse_flux(kv["system.g"], "system.g") if "system.g" in kv else None,
    )
    params = SchemeParams(
        epsilon=float(kv["params.epsilon"]),
        alpha=float(kv["params.alpha"]),
        beta=float(kv["params.beta"]),
        n=n,
        gamma=float(kv["params.gamma"]) if "params.gamma" in kv else None,
        cfl=float(kv.get("params.cfl", "0.5")),
    )
    if family == "NONLINEAR_2x2":
        velocity = VelocitySpec(kind="prescribed_analytic",
                                expression=AnalyticExpr(offset=0.0))
    else:
        velocity = _parse_velocity(kv)
    velocity_y = _parse_velocity(kv, "velocity_y") if "velocity_y.kind" in kv else None
    initial = {}
    for key, value in kv.items():
        if key.startswith("initial."):
            initial[key.split(".", 1)[1]] = _parse_initial(value, key)
    snapshot_times = [float(t) for t in kv.get("snapshots", "").split()] or []
    scenario = Scenario(
        name=kv.get("name", "scenario"),
        system=system,
        params=params,
        velocity=velocity,
        velocity_y=velocity_y,
        initial=initial,
        t_end=float(kv["t_end"]),
        snapshot_times=snapshot_times,
        output=kv.get("output", "out"),
    )
    return scenario.validate()


def load_scenario(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def bundled_scenario_path(name):
    """Filesystem path of a scenario shipped with the package."""
    from importlib.resources import files

    path = files("dshock") / "scenarios" / name
    if not path.is_file():
        raise ScenarioError(f"no bundled scenario named '{name}'")
    return str(path)


# ---------------------------------------------------------------------------
# canonical serialization


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _format_expr(expr):
    parts = [repr(expr.offset)]
    for amp, k in expr.sin_terms:
        parts += ["sin", repr(float(amp)), str(int(k))]
    for amp, k in expr.cos_terms:
        parts += ["cos", repr(float(amp)), str(int(k))]
    return " ".join(parts)


def format_scenario(s):
    lines = [f"name = {s.name}"]
    sys = s.system
    lines.append(f"system.family = {sys.family}")
    lines.append(f"system.a = {_fmt(sys.a)}")
    lines.append(f"system.b = {_fmt(sys.b)}")
    lines.append(f"system.c = {_fmt(sys.c)}")
    lines.append("system.P = poly " + " ".join(repr(float(c)) for c in sys.p_coeffs))
    if any(c != 0.0 for c in sys.q_coeffs):
        lines.append("system.Q = poly " + " ".join(repr(float(c)) for c in sys.q_coeffs))
    if sys.z_transport != 2.0:
        lines.append(f"system.z_transport = {_fmt(sys.z_transport)}")
    if sys.z_source != 6.0:
        lines.append(f"system.z_source = {_fmt(sys.z_source)}")
    if sys.flux_f is not None:
        lines.append("system.f = " + " ".join(str(t) for t in sys.flux_f))
    if sys.flux_g is not None:
        lines.append("system.g = " + " ".join(str(t) for t in sys.flux_g))
    p = s.params
    lines.append(f"params.epsilon = {_fmt(p.epsilon)}")
    lines.append(f"params.alpha = {_fmt(p.alpha)}")
    lines.append(f"params.beta = {_fmt(p.beta)}")
    lines.append(f"params.n = {p.n}")
    if p.gamma is not None:
        lines.append(f"params.gamma = {_fmt(p.gamma)}")
    lines.append(f"params.cfl = {_fmt(p.cfl)}")
    for prefix, vel in (("velocity", s.velocity), ("velocity_y", s.velocity_y)):
        if vel is None or s.system.family == "NONLINEAR_2x2":
            continue
        lines.append(f"{prefix}.kind = {vel.kind}")
        lines.append(f"{prefix}.a = {_fmt(vel.a)}")
        if vel.kind == "exact_riemann":
            lines.append(f"{prefix}.u_left = {_fmt(vel.u_left)}")
            lines.append(f"{prefix}.u_right = {_fmt(vel.u_right)}")
        if vel.kind == "prescribed_analytic":
            lines.append(f"{prefix}.expr = analytic {_format_expr(vel.expression)}")
        if vel.kind in ("exact_riemann", "numeric"):
            lines.append(f"{prefix}.beta = {_fmt(vel.beta)}")
    for name in sorted(s.initial):
        spec = s.initial[name]
        if spec.kind == "zero":
            lines.append(f"initial.{name} = zero")
        elif spec.kind == "constant":
            lines.append(f"initial.{name} = constant {_fmt(spec.left)}")
        elif spec.kind == "riemann":
            lines.append(
                f"initial.{name} = riemann {_fmt(spec.left)} {_fmt(spec.right)}"
            )
        else:
            lines.append(f"initial.{name} = analytic {_format_expr(spec.expr)}")
    lines.append(f"t_end = {_fmt(s.t_end)}")
    if s.snapshot_times:
        lines.append("snapshots = " + " ".join(repr(float(t)) for t in s.snapshot_times))
    lines.append(f"output = {s.output}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CSV output


def _g17(x):
    return format(float(x), ".17g")


def snapshot_csv_text(snapshot, grid):
    names = [n for n in ("u", "v", "w", "Z") if n in snapshot.fields]
    if grid.dimension == 1:
        header = "x," + ",".join(names)
        nodes = grid.nodes()
        rows = [header]
        for i in range(grid.n):
            rows.append(
                ",".join([_g17(nodes[i])] + [_g17(snapshot.fields[n][i]) for n in names])
            )
        return "\n".join(rows) + "\n"
    names = [n for n in ("u", "v", "rho", "w") if n in snapshot.fields]
    header = "x,y," + ",".join(names)
    nodes = grid.nodes()
    rows = [header]
    for i in range(grid.n):
        for j in range(grid.n):
            rows.append(",".join(
                [_g17(nodes[i]), _g17(nodes[j])]
                + [_g17(snapshot.fields[n][i, j]) for n in names]
            ))
    return "\n".join(rows) + "\n"


def write_snapshot_csv(snapshot, grid, path):
    text = snapshot_csv_text(snapshot, grid)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_snapshot_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        cols = {name: [] for name in header}
        for line in fh:
            for name, tok in zip(header, line.strip().split(",")):
                cols[name].append(float(tok))
    return {name: np.asarray(vals) for name, vals in cols.items()}


def write_trajectory(traj, scenario, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "scenario.cfg"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(format_scenario(scenario))
    for i, snap in enumerate(traj.snapshots):
        write_snapshot_csv(snap, traj.grid, os.path.join(out_dir, f"snapshot_{i:03d}.csv"))
    if traj.diverged:
        with open(os.path.join(out_dir, "diverged.txt"), "w", encoding="utf-8",
                  newline="\n") as fh:
            fh.write(f"diverged at t = {_g17(traj.divergence_time)}\n")


# ---------------------------------------------------------------------------
# plot script


def emit_plot_script(run_dir):
    """Write a self-contained gnuplot script rendering one panel per field per
    snapshot, plus primitive / double-primitive panels for w and Z."""
    files = sorted(
        f for f in os.listdir(run_dir)
        if re.fullmatch(r"snapshot_\d+\.csv", f)
    )
    if not files:
        raise NothingToPlotError(f"no snapshot CSV files in {run_dir}")
    with open(os.path.join(run_dir, files[0]), "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        first_x = float(fh.readline().split(",")[0])
        second_x = float(fh.readline().split(",")[0])
    twod = header[:2] == ["x", "y"]
    h = abs(second_x - first_x) if not twod else None

    lines = [
        "# generated by dshock; render with: gnuplot plot.gp",
        "set datafile separator ','",
        "set terminal pngcairo size 900,600",
        "set key off",
        "set grid",
    ]
    coord_cols = 2 if twod else 1
    for fname in files:
        stem = fname[: -len(".csv")]
        for col, name in enumerate(header[coord_cols:], start=coord_cols + 1):
            lines.append(f"set output '{stem}_{name}.png'")
            lines.append(f"set title '{name} ({stem})'")
            if twod:
                lines.append(f"splot '{fname}' using 1:2:{col} with points pt 7 ps 0.3")
            else:
                lines.append(f"plot '{fname}' using 1:{col} with lines")
            if not twod and name in ("w", "Z"):
                lines.append(f"set output '{stem}_{name}_primitive.png'")
                lines.append(f"set title '{name} primitive ({stem})'")
                lines.append(
                    f"plot '{fname}' using 1:(${col}*{h!r}) smooth cumulative with lines"
                )
                lines.append(f"set output '{stem}_{name}_primitive2.png'")
                lines.append(f"set title '{name} double primitive ({stem})'")
                lines.append(
                    f'plot "< awk -F, -v h={h!r} '
                    f"'NR>1{{s+=${col}*h; ss+=s*h; print $1\\\",\\\"ss}}' {fname}\" "
                    "using 1:2 with lines"
                )
    text = "\n".join(lines) + "\n"
    path = os.path.join(run_dir, "plot.gp")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path
