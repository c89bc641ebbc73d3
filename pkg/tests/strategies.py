"""Hypothesis strategies shared by the test modules."""

import numpy as np
from hypothesis import strategies as st

from hidden_ising.config import SpinConfiguration
from hidden_ising.lattice import ModelSpec

SPEC_ARGS = [
    (8, 3, 3, 1, 2),
    (8, 3, 3, 1, 3),
    (10, 3, 5, 1, 3),
    (12, 3, 5, 2, 2),
    (12, 3, 5, 2, 7),
    (12, 3, 5, 2, 9),
    (12, 3, 5, 2, 13),
    (12, 4, 4, 2, 30),
]


@st.composite
def specs(draw):
    return ModelSpec(*draw(st.sampled_from(SPEC_ARGS)))


@st.composite
def configurations(draw, spec_strategy=None):
    spec = draw(spec_strategy or specs())
    seed = draw(st.integers(0, 2**32 - 1))
    density = draw(st.sampled_from([0.1, 0.5, 0.9]))
    rng = np.random.default_rng(seed)
    spins = np.where(rng.random(spec.sites) < density, 1, -1).astype(np.int8)
    return SpinConfiguration(spec, spins)
