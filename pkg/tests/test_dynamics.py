import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hidden_ising.config import SpinConfiguration
from hidden_ising.dynamics import (
    ChainState,
    InsufficientSamples,
    NotConverged,
    TargetSet,
    acceptance_table,
    arrhenius_slope,
    config_hash,
    dense_spectral_gap,
    exponential_law_test,
    fit_slope,
    hitting_samples,
    metropolis_step,
    run_until_hit,
    spectral_gap,
    spectral_gap_from_energies,
    subspace_iteration_gap,
    transition_probability,
    wilson_interval,
    write_samples_csv,
    zobrist_table,
)
from hidden_ising.landscape import toy_spec
from hidden_ising.lattice import ModelSpec
from hidden_ising.paths import sigma_a_family

from .strategies import configurations

LOW = ModelSpec(8, 3, 3, 1, 2)


def stepper_trajectory(spec, start, beta, steps, seed, replica=0):
    state = ChainState.start(start, seed, replica)
    keys = [state.config.key()]
    configs = [state.config.copy()]
    for _ in range(steps):
        metropolis_step(state, beta)
        keys.append(state.config.key())
        configs.append(state.config.copy())
    return keys, configs


@pytest.mark.parametrize("beta", [0.3, 1.0])
def test_compiled_kernel_matches_reference_stepper(beta):
    start = SpinConfiguration.all_minus(LOW)
    keys, configs = stepper_trajectory(LOW, start, beta, 3000, seed=7, replica=3)
    target_step = next(i for i in range(2999, 0, -1) if keys[i] != keys[0])
    first = keys.index(keys[target_step])
    sample = run_until_hit(LOW, start, [configs[target_step]], beta, 10_000, seed=7, replica=3, block=257)
    assert not sample.censored
    assert sample.steps == first


def test_same_seed_same_samples_regardless_of_workers():
    start = SpinConfiguration.all_minus(LOW)
    targets = sigma_a_family(LOW)
    a = hitting_samples(LOW, start, targets, 0.8, 8, seed=1, step_cap=200_000, workers=1)
    b = hitting_samples(LOW, start, targets, 0.8, 8, seed=1, step_cap=200_000, workers=4)
    assert [s.steps for s in a] == [s.steps for s in b]
    c = hitting_samples(LOW, start, targets, 0.8, 8, seed=2, step_cap=200_000, workers=1)
    assert [s.steps for s in a] != [s.steps for s in c]


def test_start_in_targets_takes_zero_steps():
    start = sigma_a_family(LOW)[0]
    s = run_until_hit(LOW, start, sigma_a_family(LOW), 1.0, 100, seed=0)
    assert s.steps == 0 and not s.censored


def test_censoring():
    start = SpinConfiguration.all_minus(LOW)
    s = run_until_hit(LOW, start, sigma_a_family(LOW), 3.0, 500, seed=0)
    assert s.censored and s.steps == 500


def test_acceptance_probability_example():
    spec = ModelSpec(12, 3, 5, 2, 2)
    minus = SpinConfiguration.all_minus(spec)
    site = spec.index((0, 7))  # a site in B, all neighbours minus
    assert minus.flipped(site).energy() - minus.energy() == 10
    table = acceptance_table(spec, 0.5)
    assert table[-1 * -1 + 1, -1 * -4 + 4] == pytest.approx(math.exp(-5.0), rel=1e-15)
    assert transition_probability(spec, 0.5, minus.spins, site) * spec.sites == pytest.approx(math.exp(-5.0))
    assert table.max() == 1.0


@settings(max_examples=40)
@given(configurations(), st.integers(0, 10**6), st.sampled_from([0.2, 1.0, 3.0]))
def test_detailed_balance(cfg, raw, beta):
    spec = cfg.spec
    site = raw % spec.sites
    other = cfg.flipped(site)
    forward = transition_probability(spec, beta, cfg.spins, site)
    backward = transition_probability(spec, beta, other.spins, site)
    de = float(other.energy() - cfg.energy())
    # mu(x) P(x, y) = mu(y) P(y, x) with mu(y) / mu(x) = exp(-beta * de)
    assert forward == pytest.approx(backward * math.exp(-beta * de), rel=1e-12)


def test_zobrist_hash_is_xor_of_plus_sites():
    table = zobrist_table(LOW.sites)
    cfg = SpinConfiguration.all_minus(LOW)
    assert config_hash(cfg.spins, table) == 0
    h = config_hash(cfg.flipped(5).spins, table)
    assert h == table[5]
    assert TargetSet([cfg], table).lookup(cfg.spins) == 0


def test_gap_at_infinite_temperature():
    E = np.zeros(1 << 10)
    rep = spectral_gap_from_energies(E, 10, 0.0)
    assert rep.gap == pytest.approx(0.2, rel=1e-9)
    assert dense_spectral_gap(E, 10, 0.0)[0] == pytest.approx(0.2, rel=1e-9)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_three_gap_routes_agree(seed):
    rng = np.random.default_rng(seed)
    E = rng.integers(-3, 4, 1 << 8).astype(float)
    beta = 1.0
    dense, _ = dense_spectral_gap(E, 8, beta)
    lanczos = spectral_gap_from_energies(E, 8, beta)
    sub = subspace_iteration_gap(E, 8, beta, tol=1e-9)
    assert lanczos.gap == pytest.approx(dense, rel=1e-6)
    assert sub.gap == pytest.approx(dense, rel=1e-6)


def test_subspace_iteration_reports_non_convergence():
    E = np.random.default_rng(0).integers(-3, 4, 1 << 8).astype(float)
    with pytest.raises(NotConverged):
        subspace_iteration_gap(E, 8, 4.0, max_iter=40, tol=1e-14)


def test_toy_gap_shrinks_exponentially():
    spec = toy_spec()
    g4 = spectral_gap(spec, 4.0).gap
    g5 = spectral_gap(spec, 5.0).gap
    assert 0 < g5 < g4 < 1
    assert -math.log(g5 / g4) == pytest.approx(2.0, abs=0.15)


def test_ks_accepts_exponential_and_rejects_uniform():
    rng = np.random.default_rng(0)
    assert exponential_law_test(rng.exponential(3.0, 2000)).passed
    assert not exponential_law_test(rng.uniform(0, 1, 2000)).passed
    with pytest.raises(InsufficientSamples):
        exponential_law_test([1.0] * 99)


def test_slope_fit_recovers_exact_exponent():
    betas = [1.0, 1.5, 2.0]
    slope, _ = fit_slope(betas, [5 * math.exp(3 * b) for b in betas])
    assert slope == pytest.approx(3.0)


def test_arrhenius_argument_checks():
    start = SpinConfiguration.all_minus(LOW)
    with pytest.raises(ValueError):
        arrhenius_slope(LOW, start, sigma_a_family(LOW), [0.5, 1.0], 60, seed=0, step_cap=10)
    with pytest.raises(ValueError):
        arrhenius_slope(LOW, start, sigma_a_family(LOW), [0.5, 0.7, 1.0], 10, seed=0, step_cap=10)


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.4038, abs=1e-4) and hi == pytest.approx(0.5962, abs=1e-4)
    assert wilson_interval(0, 0) == (0.0, 1.0)


def test_samples_csv_columns(tmp_path):
    start = SpinConfiguration.all_minus(LOW)
    samples = hitting_samples(LOW, start, sigma_a_family(LOW), 0.5, 3, seed=0, step_cap=100_000)
    out = tmp_path / "s.csv"
    write_samples_csv(out, samples)
    lines = out.read_text().splitlines()
    assert lines[0] == "replica,beta,steps,censored,gate_tag,saddle_max"
    assert len(lines) == 4
