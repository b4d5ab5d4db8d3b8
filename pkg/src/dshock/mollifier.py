"""Discrete mollification kernels and periodic convolution.

A kernel samples a fixed compact-support smooth bump at cell centers,
rescaled to a continuous width epsilon**exponent, then renormalized so the
discrete mass h * sum(weights) is exactly 1.  The derivative kernel samples
the bump's derivative (rescaled by 1/width**2) and is corrected to zero sum,
so mollified x-derivatives are computed by convolution rather than by
differencing the mollified field.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import KernelTooNarrowError, KernelTooWideError
from .grid import Field, check_same_grid


def bump(s):
    """C-infinity bump exp(-1/(1-s^2)) on |s| < 1, unnormalized."""
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(-1.0 / (1.0 - si * si))
    return out


def bump_derivative(s):
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    q = 1.0 - si * si
    out[inside] = np.exp(-1.0 / q) * (-2.0 * si / (q * q))
    return out


def bump_squared_decay(s):
    """Alternate C-infinity profile exp(-1/(1-s^2)^2), for shape-sensitivity checks."""
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    q = 1.0 - si * si
    out[inside] = np.exp(-1.0 / (q * q))
    return out


def bump_squared_decay_derivative(s):
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    q = 1.0 - si * si
    out[inside] = np.exp(-1.0 / (q * q)) * (-4.0 * si / (q * q * q))
    return out


PROFILES = {
    "bump": (bump, bump_derivative),
    "bump2": (bump_squared_decay, bump_squared_decay_derivative),
}


@dataclass
class Kernel:
    half_width_cells: int
    weights: np.ndarray
    derivative_weights: np.ndarray
    scale: float
    spacing: float
    _rfft_cache: dict = dc_field(default_factory=dict, repr=False)

    def padded_rfft(self, n, derivative=False):
        key = (n, derivative)
        if key not in self._rfft_cache:
            r = self.half_width_cells
            if r >= n // 2:
                raise KernelTooWideError(
                    f"kernel half-width {r} cells does not fit in {n} cells"
                )
            w = self.derivative_weights if derivative else self.weights
            padded = np.zeros(n)
            padded[np.arange(-r, r + 1) % n] = w
            self._rfft_cache[key] = np.fft.rfft(padded)
        return self._rfft_cache[key]


def build_kernel(grid, scale_exponent, epsilon, profile="bump"):
    """Kernel of continuous width epsilon**scale_exponent on the given grid."""
    if not 0.0 < scale_exponent <= 1.0:
        raise KernelTooNarrowError(
            f"scale exponent must lie in (0, 1], got {scale_exponent}"
        )
    h = grid.spacing
    scale = epsilon**scale_exponent
    if scale < 2.0 * h:
        raise KernelTooNarrowError(
            f"kernel width {scale:.3g} spans fewer than 2 cells (h = {h:.3g}); "
            f"exponent {scale_exponent} is too small for this epsilon"
        )
    phi, dphi = PROFILES[profile]
    r = int(math.floor(scale / h))
    offsets = np.arange(-r, r + 1)
    s = offsets * (h / scale)
    raw = phi(s) / scale
    mass = h * math.fsum(raw)  # absorbs the bump's normalization constant
    weights = raw / mass
    dweights = dphi(s) / (scale * scale * mass)
    dweights = dweights - math.fsum(dweights) / dweights.size
    return Kernel(
        half_width_cells=r,
        weights=weights,
        derivative_weights=dweights,
        scale=scale,
        spacing=h,
    )


def _circular_convolve(values, kernel, axis, derivative):
    n = values.shape[axis]
    k_hat = kernel.padded_rfft(n, derivative=derivative)
    f_hat = np.fft.rfft(values, axis=axis)
    shape = [1] * values.ndim
    shape[axis] = k_hat.size
    out = np.fft.irfft(f_hat * k_hat.reshape(shape), n=n, axis=axis)
    return kernel.spacing * out


def convolve(f, kernel):
    """Mollify: result[i] = h * sum_j f[(i-j) mod N] * weights[j].

    In 2-D the tensor-product kernel is applied axis by axis (two 1-D passes).
    """
    if f.grid.dimension == 1:
        return Field(f.grid, _circular_convolve(f.values, kernel, 0, False))
    out = _circular_convolve(f.values, kernel, 0, False)
    out = _circular_convolve(out, kernel, 1, False)
    return Field(f.grid, out)


def convolve_derivative(f, kernel, axis=0):
    """Mollified derivative along `axis` (smoothing applied on the other axis in 2-D)."""
    if f.grid.dimension == 1:
        return Field(f.grid, _circular_convolve(f.values, kernel, 0, True))
    out = _circular_convolve(f.values, kernel, axis, True)
    out = _circular_convolve(out, kernel, 1 - axis, False)
    return Field(f.grid, out)
