"""Full-system right-hand sides: the triangular cascades.

PS3:   X (density), w with source -P'(v) dv/dx where v = X * kernel(alpha).
PS4:   PS3 with fixed multipliers (2, 2, 2, 6) plus Z with the regularized
       source -6 d/dx[(v w) * kernel(gamma)].
TWO_D: the same construction with axis-wise stencils and tensor kernels.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParamsError
from .grid import Field
from .mollifier import build_kernel, convolve, convolve_derivative
from .transport import transport_rhs, transport_rhs_2d


def poly_eval(coeffs, x):
    """Evaluate sum coeffs[k] * x**k (Horner)."""
    out = np.zeros_like(x)
    for c in reversed(coeffs):
        out = out * x + c
    return out


def poly_deriv(coeffs):
    return [k * c for k, c in enumerate(coeffs)][1:] or [0.0]


def poly_degree(coeffs):
    deg = 0
    for k, c in enumerate(coeffs):
        if c != 0.0:
            deg = k
    return deg


@dataclass(frozen=True)
class SchemeParams:
    epsilon: float
    alpha: float
    beta: float
    n: int
    gamma: float | None = None
    cfl: float = 0.5

    def validate(self, needs_gamma=False):
        if self.epsilon <= 0.0:
            raise InvalidParamsError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 < self.cfl <= 1.0:
            raise InvalidParamsError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.n < 2:
            raise InvalidParamsError(f"polynomial degree n must be >= 2, got {self.n}")
        if not 0.0 < self.beta:
            raise InvalidParamsError(f"beta must satisfy 0 < beta, got {self.beta}")
        if not self.beta < self.alpha:
            raise InvalidParamsError(
                f"beta must satisfy beta < alpha (got beta = {self.beta}, "
                f"alpha = {self.alpha})"
            )
        cap = 1.0 / (self.n + 1)
        if not self.alpha < cap:
            raise InvalidParamsError(
                f"alpha must satisfy alpha < 1/(n+1) = {cap:.6g}, got {self.alpha}"
            )
        if self.epsilon**self.alpha < 2.0 * self.epsilon:
            raise InvalidParamsError(
                "mollifier must span at least 2 cells: epsilon**alpha >= 2*epsilon "
                f"fails for epsilon = {self.epsilon}, alpha = {self.alpha}"
            )
        if needs_gamma:
            if self.gamma is None:
                raise InvalidParamsError("gamma is required when a Z equation is present")
            lo = (self.n + 2) * self.alpha
            if not self.gamma > lo:
                raise InvalidParamsError(
                    f"gamma must satisfy gamma > (n+2)*alpha = {lo:.6g}, got {self.gamma}"
                )
            if not 2.0 * self.gamma + lo < 1.0:
                raise InvalidParamsError(
                    "gamma must satisfy 2*gamma + (n+2)*alpha < 1 "
                    f"(got {2.0 * self.gamma + lo:.6g})"
                )
        return self

    def with_epsilon(self, epsilon):
        return replace(self, epsilon=epsilon)


@dataclass(frozen=True)
class SystemSpec:
    family: str  # PS3 | PS4 | TWO_D | NONLINEAR_2x2
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    p_coeffs: tuple = (0.0, 0.0, 1.0)
    q_coeffs: tuple = (0.0,)
    z_transport: float = 2.0
    z_source: float = 6.0
    # nonlinear 2x2 fluxes as ("<name>", arg, ...) tuples, see transport.make_flux
    flux_f: tuple | None = None
    flux_g: tuple | None = None

    @property
    def has_z(self):
        return self.family == "PS4"

    def p_prime(self):
        return poly_deriv(list(self.p_coeffs))

    def q_prime(self):
        return poly_deriv(list(self.q_coeffs))

    def max_transport_coeff(self):
        coeffs = [abs(self.b), abs(self.c)]
        if self.has_z:
            coeffs.append(abs(self.z_transport))
        return max(coeffs)

    def validate(self, params):
        deg = poly_degree(self.p_coeffs)
        if deg != params.n:
            raise InvalidParamsError(
                f"degree of P is {deg} but params.n = {params.n}; they must match"
            )
        return self


def ps4_system(n=2):
    """Original Panov-Shelkovich coefficients: a=1, b=c=2, P(v)=2v^n, Z pair (2, 6)."""
    p = [0.0] * (n + 1)
    p[n] = 2.0
    return SystemSpec(family="PS4", a=1.0, b=2.0, c=2.0, p_coeffs=tuple(p))


@dataclass(frozen=True)
class CascadeState:
    """1-D cascade snapshot; X is the raw transported density, v its mollified view."""

    time: float
    u: Field
    x: Field
    w: Field
    z: Field | None = None


@dataclass(frozen=True)
class TwoDState:
    time: float
    u: Field
    v: Field
    x: Field
    w: Field


def build_kernels(grid, params, needs_gamma=False):
    kernels = {"alpha": build_kernel(grid, params.alpha, params.epsilon)}
    if needs_gamma:
        kernels["gamma"] = build_kernel(grid, params.gamma, params.epsilon)
    return kernels


def mollified_density(state, kernels):
    return convolve(state.x, kernels["alpha"])


def ps3_rhs(state, params, spec, kernels):
    """(rhs_X, rhs_w) for the triangular 3-system."""
    eps = params.epsilon
    rhs_x = transport_rhs(state.x, state.u, eps, spec.b)
    v = convolve(state.x, kernels["alpha"])
    dv = convolve_derivative(state.x, kernels["alpha"])
    source = poly_eval(spec.p_prime(), v.values) * dv.values
    rhs_w = transport_rhs(state.w, state.u, eps, spec.c)
    rhs_w = Field(state.w.grid, rhs_w.values - source)
    return rhs_x, rhs_w


def ps4_rhs(state, params, spec, kernels):
    """(rhs_X, rhs_w, rhs_Z) for the 4-system with the regularized Z source."""
    params.validate(needs_gamma=True)
    rhs_x, rhs_w = ps3_rhs(state, params, spec, kernels)
    eps = params.epsilon
    v = convolve(state.x, kernels["alpha"])
    vw = Field(state.w.grid, v.values * state.w.values)
    z_source = convolve_derivative(vw, kernels["gamma"])
    rhs_z = transport_rhs(state.z, state.u, eps, spec.z_transport)
    rhs_z = Field(state.z.grid, rhs_z.values - spec.z_source * z_source.values)
    return rhs_x, rhs_w, rhs_z


def twod_rhs(state, params, spec, kernels):
    """(rhs_X, rhs_w) for the 2-D system with axis-wise sources."""
    eps = params.epsilon
    rhs_x = transport_rhs_2d(state.x, state.u, state.v, eps, spec.b)
    rho = convolve(state.x, kernels["alpha"])
    drho_dx = convolve_derivative(state.x, kernels["alpha"], axis=0)
    drho_dy = convolve_derivative(state.x, kernels["alpha"], axis=1)
    source = poly_eval(spec.p_prime(), rho.values) * drho_dx.values
    source = source + poly_eval(spec.q_prime(), rho.values) * drho_dy.values
    rhs_w = transport_rhs_2d(state.w, state.u, state.v, eps, spec.c)
    rhs_w = Field(state.w.grid, rhs_w.values - source)
    return rhs_x, rhs_w
