from fractions import Fraction

import pytest

from hidden_ising.lattice import (
    InvalidSpec,
    ModelSpec,
    Regime,
    RegionLabel,
    classify_regime,
    hidden_preference,
    neighbors,
    region_of,
)


def test_layout_of_columns():
    spec = ModelSpec(12, 3, 5, 2, 2)
    labels = [region_of(spec, (0, c)) for c in range(12)]
    assert labels == [RegionLabel.A] * 3 + [RegionLabel.S1] * 2 + [RegionLabel.B] * 5 + [RegionLabel.S2] * 2
    assert [hidden_preference(spec, (5, c)) for c in (0, 3, 5, 10)] == [1, 0, -1, 0]
    assert spec.preference.sum() == spec.N * (spec.n - spec.m)


def test_neighbours_wrap_and_are_symmetric():
    spec = ModelSpec(8, 3, 3, 1, 2)
    assert neighbors(spec, (0, 0)) == {(7, 0), (1, 0), (0, 7), (0, 1)}
    table = spec.neighbor_table
    for i in range(spec.sites):
        for j in table[i]:
            assert i in table[j]
    assert len(spec.edges) == 2 * spec.sites


@pytest.mark.parametrize(
    "args, regime",
    [
        ((8, 3, 3, 1, 2), Regime.LowAlpha),
        ((8, 3, 3, 1, 3), Regime.CriticalEqual),
        ((10, 3, 5, 1, 3), Regime.CriticalStrict),
        ((12, 3, 5, 2, 7), Regime.MidAlpha),
        ((12, 3, 5, 2, 9), Regime.HighAlpha),
        ((12, 3, 5, 2, 13), Regime.VeryHighAlpha),
    ],
)
def test_every_regime_is_reached(args, regime):
    assert classify_regime(ModelSpec(*args)) is regime


def test_alpha_threshold_value():
    spec = ModelSpec(12, 3, 5, 2, 13)
    assert spec.alpha_star == Fraction(12 * 4 - 10, 3)


@pytest.mark.parametrize(
    "args",
    [(9, 3, 4, 1, 2), (8, 3, 3, 1, 0), (8, 2, 4, 1, 2), (8, 4, 3, 1, 2), (8, 3, 3, 1, Fraction(5, 2)), (10, 3, 5, 1, 4)],
)
def test_standing_assumptions_are_enforced(args):
    with pytest.raises(InvalidSpec):
        ModelSpec(*args)


def test_non_strict_specs_report_violations():
    spec = ModelSpec(4, 1, 1, 1, 1, strict=False)
    assert spec.assumption_violations()
    assert spec.regime is Regime.Unsupported


def test_json_round_trip():
    spec = ModelSpec(12, 3, 5, 2, Fraction(40))
    assert ModelSpec.from_json(spec.to_json()) == spec
