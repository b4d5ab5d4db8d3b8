import math

import numpy as np
import pytest

from dshock.errors import KernelTooNarrowError, KernelTooWideError
from dshock.grid import integrate, make_field, make_grid, shift
from dshock.mollifier import (
    PROFILES,
    build_kernel,
    bump,
    bump_derivative,
    convolve,
    convolve_derivative,
)

TWO_PI = 2.0 * math.pi


def brute_convolve(values, kernel, derivative=False):
    """Dense periodic sum, the definition the FFT path must reproduce."""
    n = values.size
    w = kernel.derivative_weights if derivative else kernel.weights
    r = kernel.half_width_cells
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for j, off in enumerate(range(-r, r + 1)):
            acc += w[j] * values[(i - off) % n]
        out[i] = acc * kernel.spacing
    return out


@pytest.mark.parametrize("profile", sorted(PROFILES))
def test_kernel_weights_unit_mass_and_symmetry(profile):
    g = make_grid(1, 256)
    k = build_kernel(g, 0.5, g.spacing, profile=profile)
    assert g.spacing * math.fsum(k.weights) == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(k.weights, k.weights[::-1], rtol=0, atol=1e-15)
    # derivative weights: odd symmetry and exactly zero total mass
    assert np.allclose(k.derivative_weights, -k.derivative_weights[::-1],
                       rtol=0, atol=1e-9 * np.max(np.abs(k.derivative_weights)))
    assert abs(math.fsum(k.derivative_weights)) <= 1e-12 * np.max(
        np.abs(k.derivative_weights)
    )


def test_bump_vanishes_outside_support():
    s = np.array([-1.5, -1.0, 1.0, 2.0])
    assert np.all(bump(s) == 0.0)
    assert np.all(bump_derivative(s) == 0.0)
    assert bump(np.array([0.0]))[0] > 0.0


def test_convolve_preserves_constants():
    g = make_grid(1, 128)
    f = make_field(g, np.full(128, 3.25))
    out = convolve(f, build_kernel(g, 0.5, g.spacing))
    assert np.allclose(out.values, 3.25, rtol=0, atol=1e-13)


def test_convolve_matches_brute_force(rng):
    g = make_grid(1, 64)
    k = build_kernel(g, 0.5, g.spacing)
    f = make_field(g, rng.normal(size=64))
    assert np.allclose(convolve(f, k).values, brute_convolve(f.values, k),
                       rtol=0, atol=1e-12)


def test_convolve_derivative_matches_brute_force(rng):
    g = make_grid(1, 64)
    k = build_kernel(g, 0.4, g.spacing)
    f = make_field(g, rng.normal(size=64))
    got = convolve_derivative(f, k).values
    want = brute_convolve(f.values, k, derivative=True)
    assert np.allclose(got, want, rtol=0, atol=1e-10 * max(1.0, np.max(np.abs(want))))


def test_convolve_preserves_mass(rng):
    g = make_grid(1, 256)
    k = build_kernel(g, 0.5, g.spacing)
    f = make_field(g, rng.normal(size=256))
    assert integrate(convolve(f, k)) == pytest.approx(integrate(f), abs=1e-12)


def test_convolve_translation_equivariance(rng):
    g = make_grid(1, 128)
    k = build_kernel(g, 0.5, g.spacing)
    f = make_field(g, rng.normal(size=128))
    a = convolve(shift(f, 11), k).values
    b = shift(convolve(f, k), 11).values
    assert np.allclose(a, b, rtol=0, atol=1e-13)


def test_derivative_kernel_consistency_on_smooth_field():
    # d/dx of the mollified sin should approach cos as the kernel narrows
    g = make_grid(1, 1024)
    k = build_kernel(g, 0.5, g.spacing)
    nodes = g.nodes()
    f = make_field(g, np.sin(nodes))
    got = convolve_derivative(f, k).values
    assert np.max(np.abs(got - np.cos(nodes))) < 0.02


def test_derivative_of_mollified_equals_mollified_derivative():
    g = make_grid(1, 512)
    k = build_kernel(g, 0.5, g.spacing)
    nodes = g.nodes()
    f = make_field(g, np.sin(3 * nodes))
    a = convolve_derivative(f, k).values
    b = convolve(make_field(g, 3 * np.cos(3 * nodes)), k).values
    assert np.max(np.abs(a - b)) < 0.05  # O(width^2) agreement


def test_convolve_2d_separable(rng):
    g1 = make_grid(1, 48)
    g2 = make_grid(2, 48)
    k1 = build_kernel(g1, 0.5, g1.spacing)
    k2 = build_kernel(g2, 0.5, g2.spacing)
    line = rng.normal(size=48)
    f2 = make_field(g2, np.broadcast_to(line[:, None], (48, 48)).copy())
    out2 = convolve(f2, k2).values
    out1 = convolve(make_field(g1, line), k1).values
    assert np.allclose(out2, out1[:, None], rtol=0, atol=1e-12)


def test_convolve_derivative_2d_axes(rng):
    g1 = make_grid(1, 48)
    g2 = make_grid(2, 48)
    k1 = build_kernel(g1, 0.5, g1.spacing)
    k2 = build_kernel(g2, 0.5, g2.spacing)
    line = rng.normal(size=48)
    f2 = make_field(g2, np.broadcast_to(line[:, None], (48, 48)).copy())
    d0 = convolve_derivative(f2, k2, axis=0).values
    d1 = convolve_derivative(f2, k2, axis=1).values
    d_line = convolve_derivative(make_field(g1, line), k1).values
    assert np.allclose(d0, d_line[:, None], rtol=0, atol=1e-12)
    assert np.allclose(d1, 0.0, rtol=0, atol=1e-12)


def test_kernel_too_narrow_rejected():
    g = make_grid(1, 64)
    with pytest.raises(KernelTooNarrowError):
        build_kernel(g, 0.99, g.spacing)  # eps^0.99 ~ eps spans fewer than 2 cells
    with pytest.raises(KernelTooNarrowError):
        build_kernel(g, 1.5, g.spacing)  # exponent outside (0, 1]


def test_kernel_too_wide_rejected():
    g = make_grid(1, 512)
    k = build_kernel(g, 0.3, g.spacing)  # wide kernel on a fine grid
    with pytest.raises(KernelTooWideError):
        k.padded_rfft(8)
