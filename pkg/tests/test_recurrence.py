import numpy as np
import pytest

from hidden_ising.config import SpinConfiguration
from hidden_ising.config import region_mask
from hidden_ising.landscape import Landscape, toy_spec
from hidden_ising.lattice import ModelSpec, RegionLabel
from hidden_ising.paths import sigma_a, sigma_a_family
from hidden_ising.recurrence_classifier import (
    CLASS_TAGS,
    STABLE_OR_META,
    ClimbBoundExceeded,
    ReductionFailure,
    classify,
    climb_budget,
    is_recurrent,
    reduce,
    reduce_to_recurrent,
    stable_states,
)

LOW = ModelSpec(8, 3, 3, 1, 2)
CRIT = ModelSpec(8, 3, 3, 1, 3)
HIGH = ModelSpec(12, 3, 5, 2, 9)
REGIME_SPECS = [(8, 3, 3, 1, 2), (8, 3, 3, 1, 3), (10, 3, 5, 1, 3), (12, 3, 5, 2, 7), (12, 3, 5, 2, 9), (12, 3, 5, 2, 13), (12, 4, 4, 2, 30)]


def random_configs(spec, count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        density = rng.uniform(0.05, 0.95)
        spins = np.where(rng.random(spec.sites) < density, 1, -1).astype(np.int8)
        yield SpinConfiguration(spec, spins)


def test_l_shape_in_a_is_x1():
    cfg = SpinConfiguration.from_plus_cells(LOW, [(0, 0), (1, 0), (1, 1)])
    assert classify(LOW, cfg) == "X1"


def test_single_plus_in_a_is_x2():
    assert classify(LOW, SpinConfiguration.from_plus_cells(LOW, [(3, 1)])) == "X2"


def test_single_minus_in_b_is_x4():
    cfg = b_only(LOW)
    cfg.flip(LOW.index((2, 5)))
    assert classify(LOW, cfg) == "X4"


def test_plus_in_strip_is_x6():
    cfg = b_only(LOW)
    cfg.flip(LOW.index((0, 3)))
    assert classify(LOW, cfg) == "X6"


def b_only(spec):
    return SpinConfiguration(spec, np.where(region_mask(spec, RegionLabel.B), 1, -1).astype(np.int8))


@pytest.mark.parametrize("args", REGIME_SPECS)
def test_b_only_state_is_x7_and_dismantles_at_the_budget(args):
    spec = ModelSpec(*args)
    cfg = b_only(spec)
    assert classify(spec, cfg) == "X7"
    cert = reduce(spec, cfg)
    assert cert.max_climb == 2 * spec.alpha - 2
    assert cert.drop < 0


def test_recurrent_states_by_regime():
    assert classify(LOW, sigma_a(LOW, 0, 0)) == STABLE_OR_META
    assert classify(LOW, SpinConfiguration.all_minus(LOW)) == STABLE_OR_META
    assert is_recurrent(SpinConfiguration.all_minus(HIGH))
    assert not is_recurrent(sigma_a(HIGH, 0, 0))
    assert len(stable_states(LOW)) == len(sigma_a_family(LOW))


@pytest.mark.parametrize("args", REGIME_SPECS)
def test_classification_total_and_single_round_reduction(args):
    spec = ModelSpec(*args)
    bound = climb_budget(spec)
    tags = set()
    for cfg in random_configs(spec, 10_000, 11):
        tag = classify(spec, cfg)
        assert tag in CLASS_TAGS or tag == STABLE_OR_META
        if tag == STABLE_OR_META:
            continue
        tags.add(tag)
        cert = reduce(spec, cfg)
        cert.path.validate()
        assert cert.max_climb <= bound
        assert cert.drop < 0
    assert len(tags) >= 2


def test_reduce_to_recurrent_reaches_recurrent_state():
    for cfg in random_configs(LOW, 25, 5):
        certs = reduce_to_recurrent(LOW, cfg)
        end = certs[-1].path.end if certs else cfg
        assert is_recurrent(end)
        energies = [c.path.scaled[-1] for c in certs]
        assert energies == sorted(energies, reverse=True)


def test_recurrent_state_has_no_reduction():
    with pytest.raises(ValueError):
        reduce(LOW, sigma_a(LOW, 0, 0))


def test_strip_state_above_the_critical_range_is_not_reducible_by_segments():
    with pytest.raises(ReductionFailure) as info:
        reduce(HIGH, sigma_a(HIGH, 0, 0))
    assert not isinstance(info.value, ClimbBoundExceeded)


def test_toy_certificate_climbs_are_at_least_the_stability_level():
    spec = toy_spec()
    land = Landscape(spec)
    E = land.energies
    rng = np.random.default_rng(2)
    checked = 0
    for s in rng.integers(0, land.size, 400):
        s = int(s)
        lower = np.flatnonzero(E < E[s])
        if lower.size == 0:
            continue
        cfg = land.config_of(s)
        try:
            cert = reduce(spec, cfg, enforce=False)
        except ReductionFailure:
            continue
        assert cert.max_climb * land.scale >= land.stability_levels_scaled[s]
        checked += 1
    assert checked > 50
