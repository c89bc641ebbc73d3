from fractions import Fraction

import pytest

from hidden_ising.config import SpinConfiguration, contour_length, magnetization_counts
from hidden_ising.lattice import ModelSpec, Regime
from hidden_ising.paths import (
    FamilyRangeError,
    NamedFamily,
    PATH_NAMES,
    RegimeMismatch,
    build_family,
    build_reference_path,
    closed_form_phi,
    column_cells,
    derived_phi,
    gamma_star,
    gate_family,
    gate_set,
    path_is_valid_for,
    printed_forms,
    sigma_a,
)

E1 = ModelSpec(12, 3, 5, 2, 2)
GRID = [
    ModelSpec(8, 3, 3, 1, 2),
    ModelSpec(12, 3, 5, 2, 2),
    ModelSpec(8, 3, 3, 1, 3),
    ModelSpec(10, 3, 5, 1, 3),
    ModelSpec(12, 3, 5, 2, 7),
    ModelSpec(12, 3, 5, 2, 9),
    ModelSpec(12, 3, 5, 2, 13),
    ModelSpec(12, 4, 4, 2, 10),
    ModelSpec(16, 5, 7, 2, 40),
]


def test_strip_state_counts():
    s = sigma_a(E1, 0, 0)
    assert magnetization_counts(s) == (36, 0)
    assert contour_length(s) == 24


def test_column_family_energy_example():
    cfg = SpinConfiguration.from_plus_cells(E1, column_cells(E1, "A", 1, 1, 4))
    assert cfg.energy() == -292


def test_column_range_checks():
    with pytest.raises(FamilyRangeError):
        column_cells(E1, "A", 1, 4, 0)


def test_rectangle_with_protuberance_in_gate():
    cfg = build_family(E1, NamedFamily.RectProt("A", 2, 1, 1))
    assert cfg.energy() - SpinConfiguration.all_minus(E1).energy() == 10
    assert cfg.key() in {c.key() for c in gate_set(E1, "GateGA")}


@pytest.mark.parametrize("spec", GRID, ids=str)
def test_every_valid_path_is_a_single_flip_path_with_exact_energies(spec):
    for name in PATH_NAMES:
        if path_is_valid_for(spec, name):
            path = build_reference_path(spec, name)
            path.validate()
            assert path.state(0) == path.start


@pytest.mark.parametrize("spec", GRID, ids=str)
def test_builder_matches_independent_derivation(spec):
    for name in PATH_NAMES:
        if not path_is_valid_for(spec, name):
            continue
        try:
            want = derived_phi(spec, name)
        except RegimeMismatch:
            continue
        assert build_reference_path(spec, name).max_elevation == want, name


def test_minus_side_low_alpha_path_example():
    path = build_reference_path(E1, "w̄*2")
    assert path.end == sigma_a(E1, 0, 0)
    assert path.max_elevation - SpinConfiguration.all_minus(E1).energy() == 10


def test_prime_path_very_high_alpha():
    spec = ModelSpec(12, 3, 5, 2, 13)
    assert build_reference_path(spec, "wprime").max_elevation == -1536
    assert closed_form_phi(spec, "wprime") == -1536


def test_closed_form_for_last_sub_path_low_side():
    spec = ModelSpec(12, 4, 4, 2, 10)
    N, n, m, a = 12, 4, 4, 10
    want = SpinConfiguration.all_plus(spec).energy() + 2 * (N * n - N - 1 - N * m) + 2 * a * (N + 1)
    assert build_reference_path(spec, "w̃7").max_elevation == want


def test_printed_minus_side_discrepancy_is_real():
    spec = ModelSpec(12, 3, 5, 2, 2)
    form = next(f for f in printed_forms(spec) if f.path == "w̄*2")
    got = build_reference_path(spec, "w̄*2").max_elevation
    assert got - form.value == -2 * spec.N * (spec.m - spec.n)


def test_regime_guard():
    with pytest.raises(RegimeMismatch):
        build_reference_path(ModelSpec(12, 3, 5, 2, 13), "w̄*2")


def test_gamma_star_examples():
    g = gamma_star(E1)
    assert g.height == -254 and g.barrier_from["+1"] == 10
    g = gamma_star(ModelSpec(12, 3, 5, 2, 13))
    assert g.height == -1536 and g.barrier_from["+1"] == 312
    g = gamma_star(ModelSpec(8, 3, 3, 1, 2))
    assert g.barrier_from == {"-1": 10, "+1": 10}


def test_min_of_composites_by_regime():
    very = ModelSpec(12, 3, 5, 2, 13)
    maxima = {i: build_reference_path(very, f"w*{i}").max_elevation for i in range(1, 5)}
    assert min(maxima.values()) == maxima[1]
    high = ModelSpec(12, 3, 5, 2, 9)
    maxima = {i: build_reference_path(high, f"w*{i}").max_elevation for i in range(1, 5)}
    assert min(maxima.values()) == maxima[2]


def test_gate_tables():
    rows = {r.start: r for r in gate_family(E1)}
    assert [f.tag for f in rows["-1"].families] == ["GateGA"]
    assert [f.tag for f in rows["+1"].families] == ["GateGB"]
    crit = gate_family(ModelSpec(8, 3, 3, 1, 3))
    assert {f.tag for r in crit for f in r.families} >= {"GateRA", "GateRB"}
    very = gate_family(ModelSpec(12, 3, 5, 2, 13))
    assert [f.tag for r in very for f in r.families] == ["GateCB"]


def test_gate_sets_sit_at_the_saddle():
    spec = ModelSpec(8, 3, 3, 1, 2)
    height = gamma_star(spec).height
    for tag in ("GateGA", "GateGB"):
        configs = gate_set(spec, tag)
        assert len(configs) == 64
        assert {c.energy() for c in configs} == {height}
