from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hidden_ising.config import SpinConfiguration
from hidden_ising.landscape import (
    UNRESOLVED,
    GuardExceeded,
    Landscape,
    gate_check,
    landscape_report,
    optimal_path_gate_oracle,
    restricted_subspace_analysis,
    threshold_bfs_phi_scaled,
    toy_spec,
)
from hidden_ising.lattice import ModelSpec


@pytest.fixture(scope="module")
def toy():
    return Landscape(toy_spec())


def brute_stability(energies: np.ndarray, sites: int, z: int) -> int:
    lower = np.flatnonzero(energies < energies[z])
    if lower.size == 0:
        return UNRESOLVED
    return min(threshold_bfs_phi_scaled(energies, sites, z, int(y)) for y in lower) - int(energies[z])


def test_toy_ground_states(toy):
    rep = landscape_report(toy)
    minus = toy.state_of(SpinConfiguration.all_minus(toy.spec))
    plus = toy.state_of(SpinConfiguration.all_plus(toy.spec))
    assert set(rep.stable_set) >= {minus, plus}
    assert all(rep.energy(s) == rep.energy(minus) for s in rep.stable_set)
    assert rep.gamma_tilde == 2


def test_energies_match_configuration_energy(toy):
    rng = np.random.default_rng(3)
    for s in rng.integers(0, toy.size, 200):
        assert toy.energy(int(s)) == toy.config_of(int(s)).energy()


def test_merge_tree_matches_threshold_bfs(toy):
    rng = np.random.default_rng(4)
    for x, y in rng.integers(0, toy.size, (30, 2)):
        assert toy.phi_scaled(int(x), int(y)) == threshold_bfs_phi_scaled(toy.energies, toy.sites, int(x), int(y))


@settings(max_examples=40)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1))
def test_stability_levels_on_random_hypercubes(sites, seed):
    rng = np.random.default_rng(seed)
    energies = rng.integers(-6, 7, 1 << sites).astype(np.int64)
    land = Landscape.from_energies(energies, sites)
    levels = land.stability_levels_scaled
    for z in range(1 << sites):
        assert levels[z] == brute_stability(energies, sites, z)
    x, y = rng.integers(0, 1 << sites, 2)
    assert land.phi_scaled(int(x), int(y)) == threshold_bfs_phi_scaled(energies, sites, int(x), int(y))
    assert land.phi_scaled(int(x), int(y)) == land.phi_scaled(int(y), int(x))


@settings(max_examples=30)
@given(st.integers(3, 6), st.integers(0, 2**32 - 1))
def test_gate_check_agrees_with_slow_oracle(sites, seed):
    rng = np.random.default_rng(seed)
    energies = rng.integers(-4, 5, 1 << sites).astype(np.int64)
    land = Landscape.from_energies(energies, sites)
    x, y = (int(v) for v in rng.integers(0, 1 << sites, 2))
    if x == y:
        return
    phi = land.phi_scaled(x, y)
    for c in np.flatnonzero(energies == phi)[:8]:
        c = int(c)
        if c in (x, y):
            continue
        assert gate_check(land, x, y, [c]) == optimal_path_gate_oracle(land, x, y, c)


def test_guard():
    with pytest.raises(GuardExceeded):
        Landscape(ModelSpec(6, 1, 3, 1, 1, strict=False))


def test_restricted_window_zero_keeps_only_path_states():
    rep = restricted_subspace_analysis(ModelSpec(8, 3, 3, 1, 2), "w̄*2", 0)
    assert rep.only_path_states
    assert rep.state_count == rep.path_state_count


def test_restricted_gate_removal_disconnects():
    rep = restricted_subspace_analysis(ModelSpec(8, 3, 3, 1, 2), "w̄*2", 4)
    assert rep.connected_without_removal
    assert rep.removed_gate_states > 0
    assert rep.disconnected_after_removal
    assert rep.phi_upper_bound == rep.saddle_level


def test_restricted_window_must_be_representable():
    with pytest.raises(ValueError):
        restricted_subspace_analysis(ModelSpec(8, 3, 3, 1, Fraction(5, 2)), "w̄*2", Fraction(1, 3))
