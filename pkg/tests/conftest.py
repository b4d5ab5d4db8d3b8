import math
from dataclasses import replace

import pytest

from dshock.scenario import bundled_scenario_path, load_scenario

TWO_PI = 2.0 * math.pi


def load_bundled(name, cells=None, **overrides):
    """Bundled scenario, optionally re-gridded to `cells` per axis."""
    s = load_scenario(bundled_scenario_path(name))
    if cells is not None:
        s = replace(s, params=s.params.with_epsilon(TWO_PI / cells))
    if overrides:
        s = replace(s, **overrides)
    return s.validate()


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20250826)
