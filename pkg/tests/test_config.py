from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hidden_ising.config import (
    SpinConfiguration,
    batch_contour_energy_scaled,
    batch_direct_energy_scaled,
    decompose_clusters,
    delta_h,
    hamiltonian_contour,
    hamiltonian_direct,
)
from hidden_ising.lattice import ModelSpec
from hidden_ising.paths import sigma_a

from .strategies import configurations


def brute_energy(config: SpinConfiguration) -> Fraction:
    """Site field plus alpha/2 per undirected edge, summed naively."""
    spec = config.spec
    s = [int(v) for v in config.spins]
    field = -sum(int(spec.preference[i]) * s[i] for i in range(spec.sites))
    N = spec.N
    pair = 0
    for r in range(N):
        for c in range(N):
            i = r * N + c
            for j in (r * N + (c + 1) % N, ((r + 1) % N) * N + c):
                pair += s[i] * s[j]
    return Fraction(field) - spec.alpha * pair / 2


@given(configurations())
def test_direct_contour_and_brute_force_agree(config):
    assert hamiltonian_direct(config) == hamiltonian_contour(config) == brute_energy(config)


@given(configurations(), st.integers(0, 10_000))
def test_local_energy_change_matches_recomputation(config, raw):
    i = raw % config.spec.sites
    assert delta_h(config, i) == brute_energy(config.flipped(i)) - brute_energy(config)


@given(configurations(), st.integers(0, 10_000))
def test_flip_is_an_involution_and_cache_is_kept(config, raw):
    i = raw % config.spec.sites
    other = config.copy()
    other.flip(i)
    other.validate_cache()
    other.flip(i)
    assert other == config and other.energy() == config.energy()


def test_reference_energies_e1():
    spec = ModelSpec(12, 3, 5, 2, 2)
    N, n, m, a = 12, 3, 5, 2
    assert SpinConfiguration.all_minus(spec).energy() == N * (n - m) - a * N * N
    assert SpinConfiguration.all_plus(spec).energy() == N * (m - n) - a * N * N
    assert sigma_a(spec, 1, 2).energy() == -N * (n + m) + 2 * a * N - a * N * N == -336


def test_batch_energies():
    spec = ModelSpec(12, 3, 5, 2, Fraction(7))
    rng = np.random.default_rng(3)
    spins = np.where(rng.random((500, spec.sites)) < 0.5, 1, -1).astype(np.int8)
    direct = batch_direct_energy_scaled(spec, spins)
    assert np.array_equal(direct, batch_contour_energy_scaled(spec, spins))
    assert all(SpinConfiguration(spec, s).energy_scaled() == d for s, d in zip(spins[:20], direct[:20]))


@given(configurations())
def test_serialisation_round_trips(config):
    spec = config.spec
    assert SpinConfiguration.from_string(spec, config.to_string()) == config
    assert SpinConfiguration.from_rle(spec, config.to_rle()) == config
    assert SpinConfiguration.from_dict(config.to_dict()) == config


@given(configurations())
def test_clusters_match_graph_components(config):
    spec = config.spec
    g = nx.Graph()
    g.add_nodes_from(range(spec.sites))
    for i, j in spec.edges:
        if config.spins[i] == config.spins[j]:
            g.add_edge(int(i), int(j))
    expected = sorted(sorted(c) for c in nx.connected_components(g))
    got = sorted(sorted(c.cells) for c in decompose_clusters(config).clusters)
    assert got == expected


def test_winding_of_a_full_column():
    spec = ModelSpec(8, 3, 3, 1, 2)
    cfg = SpinConfiguration.from_plus_cells(spec, [(r, 0) for r in range(8)])
    plus = decompose_clusters(cfg).of_sign(1)
    assert len(plus) == 1 and plus[0].winding.value != "none"


def test_rejects_bad_spins():
    spec = ModelSpec(8, 3, 3, 1, 2)
    with pytest.raises(ValueError):
        SpinConfiguration(spec, np.zeros(spec.sites))
