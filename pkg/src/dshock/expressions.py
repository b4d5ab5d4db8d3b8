"""Closed family of analytic periodic expressions.

Initial data and prescribed velocities are built from
a0 + sum a*sin(k*x) + sum b*cos(k*x), which keeps scenarios deterministic
and trivially serializable (no expression evaluator).
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class AnalyticExpr:
    offset: float = 0.0
    sin_terms: tuple = field(default_factory=tuple)  # (amplitude, integer wavenumber)
    cos_terms: tuple = field(default_factory=tuple)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.full_like(x, self.offset)
        for amp, k in self.sin_terms:
            out += amp * np.sin(k * x)
        for amp, k in self.cos_terms:
            out += amp * np.cos(k * x)
        return out

    def derivative(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for amp, k in self.sin_terms:
            out += amp * k * np.cos(k * x)
        for amp, k in self.cos_terms:
            out -= amp * k * np.sin(k * x)
        return out

    def bound(self):
        """Upper bound on |expr|: |offset| + sum of |amplitudes|."""
        return abs(self.offset) + sum(abs(a) for a, _ in self.sin_terms) + sum(
            abs(a) for a, _ in self.cos_terms
        )


def constant(c):
    return AnalyticExpr(offset=float(c))
