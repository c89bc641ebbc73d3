"""Metropolis single-flip dynamics, hitting-time experiments and spectral gaps.

One step is one proposal: a uniform site, flipped with probability
``exp(-beta * max(dH, 0))``. Every step consumes exactly two raw 64-bit
words from a Philox stream keyed by ``(seed, replica)``: the first picks the
site, the second is the acceptance uniform. Trajectories therefore do not
depend on how the stream is chunked.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numba
import numpy as np
from scipy import stats

from .config import SpinConfiguration
from .lattice import ModelSpec

_U53 = 1.0 / (1 << 53)


class CensoredEstimate(RuntimeError):
    """Every sample at some grid point hit the step cap."""


class InsufficientSamples(ValueError):
    pass


class NotConverged(RuntimeError):
    pass


# -- random streams ---------------------------------------------------------------------
def philox_stream(seed: int, replica: int, *extra: int) -> np.random.Philox:
    return np.random.Philox(np.random.SeedSequence([int(seed), int(replica), *extra]))


def zobrist_table(sites: int, seed: int = 0x5EED) -> np.ndarray:
    """Per-site 64-bit hash words; a configuration hashes to the XOR over its plus sites."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, sites]))).integers(
        0, np.iinfo(np.uint64).max, size=sites, dtype=np.uint64, endpoint=True
    )


def config_hash(spins: np.ndarray, table: np.ndarray) -> np.uint64:
    h = np.uint64(0)
    for w in table[np.asarray(spins) > 0]:
        h ^= w
    return h


def acceptance_table(spec: ModelSpec, beta: float) -> np.ndarray:
    """Acceptance probabilities indexed by (pref*spin + 1, spin*neighbour_sum + 4).

    The energy change is exact; only the exponential is floating point.
    """
    p, q = spec.alpha.numerator, spec.alpha.denominator
    table = np.ones((3, 9))
    for a in range(3):
        for b in range(9):
            d_scaled = 2 * q * (a - 1) + p * (b - 4)
            if d_scaled > 0:
                table[a, b] = math.exp(-beta * d_scaled / q)
    return table


# -- chain state ------------------------------------------------------------------------
@dataclass
class ChainState:
    """Configuration, step counter and the random stream with its unread words."""

    config: SpinConfiguration
    step_count: int
    bitgen: np.random.Philox
    buffer: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.uint64))

    @classmethod
    def start(cls, config: SpinConfiguration, seed: int, replica: int = 0) -> "ChainState":
        return cls(config.copy(), 0, philox_stream(seed, replica))

    def take(self, count: int) -> np.ndarray:
        if self.buffer.size >= count:
            out, self.buffer = self.buffer[:count], self.buffer[count:]
            return out
        fresh = self.bitgen.random_raw(count - self.buffer.size).astype(np.uint64)
        out = np.concatenate([self.buffer, fresh])
        self.buffer = np.empty(0, dtype=np.uint64)
        return out

    def give_back(self, words: np.ndarray) -> None:
        self.buffer = np.concatenate([np.asarray(words, dtype=np.uint64), self.buffer])


def metropolis_step(state: ChainState, beta: float) -> ChainState:
    """Advance one proposal in place (reference implementation of the kernel)."""
    spec = state.config.spec
    w_site, w_acc = state.take(2)
    site = int((int(w_site) >> 11) * _U53 * spec.sites)
    u = (int(w_acc) >> 11) * _U53
    spins = state.config.spins
    s = int(spins[site])
    nb = int(spins[spec.neighbor_table[site]].astype(np.int64).sum())
    prob = acceptance_table(spec, beta)[int(spec.preference[site]) * s + 1, s * nb + 4]
    if u < prob:
        state.config.flip(site)
    state.step_count += 1
    return state


def transition_probability(spec: ModelSpec, beta: float, spins: np.ndarray, site: int) -> float:
    from .config import delta_h_scaled

    d = delta_h_scaled(spec, spins, site)
    return math.exp(-beta * max(d, 0) / spec.energy_scale) / spec.sites


# -- compiled kernel -----------------------------------------------------------------------
@numba.njit(cache=True, nogil=True)
def _kernel(spins, nbr, pref, acc, raw, p, q, energy, h, zob, targets, start_hash, gate_hashes, gate_ids, track):
    """Run until a target hash is hit or the raw words run out.

    ``track`` holds [max energy since the last start visit, 1 + id of the last
    gate family visited since then (0 for none)]. Returns (steps, energy, hash, hit).
    """
    sites = spins.size
    steps = raw.size // 2
    mx = track[0]
    gate = track[1]
    for t in range(steps):
        i = int((raw[2 * t] >> np.uint64(11)) * _U53 * sites)
        u = (raw[2 * t + 1] >> np.uint64(11)) * _U53
        s = spins[i]
        nb = spins[nbr[i, 0]] + spins[nbr[i, 1]] + spins[nbr[i, 2]] + spins[nbr[i, 3]]
        if u < acc[pref[i] * s + 1, s * nb + 4]:
            spins[i] = -s
            energy += 2 * q * pref[i] * s + p * s * nb
            h ^= zob[i]
            if h == start_hash:
                mx = energy
                gate = 0
            elif energy > mx:
                mx = energy
            if gate_hashes.size:
                g = np.searchsorted(gate_hashes, h)
                if g < gate_hashes.size and gate_hashes[g] == h:
                    gate = gate_ids[g] + 1
            k = np.searchsorted(targets, h)
            if k < targets.size and targets[k] == h:
                track[0] = mx
                track[1] = gate
                return t + 1, energy, h, True
    track[0] = mx
    track[1] = gate
    return steps, energy, h, False


# -- hitting times -------------------------------------------------------------------------
@dataclass
class HittingTimeSample:
    steps: int
    censored: bool
    target_hit: int | None  # index into the target list
    gate_crossed: str | None
    saddle_max_seen: Fraction | None  # highest energy since the last visit to the start
    replica: int = 0
    beta: float = 0.0


class TargetSet:
    """Exact target membership backed by sorted Zobrist hashes."""

    def __init__(self, configs: Sequence[SpinConfiguration], table: np.ndarray):
        self.configs = list(configs)
        self.keys = {c.key(): i for i, c in enumerate(self.configs)}
        hashes = np.array([config_hash(c.spins, table) for c in self.configs], dtype=np.uint64)
        self.hashes = np.unique(hashes)

    def lookup(self, spins: np.ndarray) -> int | None:
        return self.keys.get(np.packbits(spins > 0).tobytes())


def _default_gates(spec: ModelSpec, start: SpinConfiguration) -> list[tuple[str, list[SpinConfiguration]]]:
    from .paths import gate_family, named_state

    out = []
    for row in gate_family(spec):
        if named_state(spec, row.start) == start:
            out.extend((fam.tag, fam.configs) for fam in row.families if fam.configs)
    return out


def _gate_arrays(gates, table: np.ndarray, sites: int) -> tuple[np.ndarray, np.ndarray]:
    hashes, ids = [], []
    for gid, (_, configs) in enumerate(gates or []):
        for c in configs:
            hashes.append(config_hash(c.spins, table))
            ids.append(gid)
    if not hashes:
        return np.empty(0, dtype=np.uint64), np.empty(0, dtype=np.int64)
    h = np.array(hashes, dtype=np.uint64)
    order = np.argsort(h)
    return h[order], np.array(ids, dtype=np.int64)[order]


def run_until_hit(
    spec: ModelSpec,
    start: SpinConfiguration,
    targets: Sequence[SpinConfiguration] | TargetSet,
    beta: float,
    step_cap: int,
    *,
    seed: int,
    replica: int = 0,
    record_gates: Sequence[tuple[str, Sequence[SpinConfiguration]]] | None = None,
    block: int = 1 << 16,
    table: np.ndarray | None = None,
    _gate_cache: tuple[np.ndarray, np.ndarray] | None = None,
) -> HittingTimeSample:
    """Simulate from ``start`` until a target is visited or ``step_cap`` proposals are spent.

    ``record_gates`` is a list of (tag, configurations). The sample's
    ``gate_crossed`` is the tag of the last gate configuration visited after
    the final departure from ``start``, or "none". Target hits are verified
    exactly; gate visits are matched by 64-bit hash only.
    """
    table = zobrist_table(spec.sites) if table is None else table
    tset = targets if isinstance(targets, TargetSet) else TargetSet(targets, table)
    hit0 = tset.lookup(start.spins)
    if hit0 is not None:
        return HittingTimeSample(0, False, hit0, None, start.energy(), replica, beta)
    gate_hashes, gate_ids = _gate_cache or _gate_arrays(record_gates, table, spec.sites)

    q = spec.energy_scale
    spins = start.spins.copy()
    energy = int(start.energy_scaled())
    h = config_hash(spins, table)
    start_hash = h
    track = np.array([energy, 0], dtype=np.int64)
    acc = acceptance_table(spec, beta)
    nbr = np.ascontiguousarray(spec.neighbor_table)
    pref = np.ascontiguousarray(spec.preference)
    p = spec.alpha.numerator
    bitgen = philox_stream(seed, replica)
    taken = 0
    while taken < step_cap:
        n = min(block, step_cap - taken)
        raw = bitgen.random_raw(2 * n).astype(np.uint64)
        offset = 0
        while offset < raw.size:
            steps, energy, h, hit = _kernel(
                spins, nbr, pref, acc, raw[offset:], p, q, energy, np.uint64(h), table, tset.hashes,
                np.uint64(start_hash), gate_hashes, gate_ids, track,
            )
            taken += steps
            offset += 2 * steps
            if not hit:
                break
            idx = tset.lookup(spins)
            if idx is not None:
                tag = None
                if record_gates:
                    tag = record_gates[track[1] - 1][0] if track[1] else "none"
                return HittingTimeSample(taken, False, idx, tag, Fraction(int(track[0]), q), replica, beta)
    return HittingTimeSample(taken, True, None, None, Fraction(int(track[0]), q), replica, beta)


def hitting_samples(
    spec: ModelSpec,
    start: SpinConfiguration,
    targets: Sequence[SpinConfiguration],
    beta: float,
    replicas: int,
    *,
    seed: int,
    step_cap: int,
    workers: int = 1,
    record_gates=None,
    replica_offset: int = 0,
) -> list[HittingTimeSample]:
    table = zobrist_table(spec.sites)
    tset = TargetSet(targets, table)
    gates = _gate_arrays(record_gates, table, spec.sites)

    def one(r: int) -> HittingTimeSample:
        return run_until_hit(
            spec, start, tset, beta, step_cap, seed=seed, replica=r, record_gates=record_gates,
            table=table, _gate_cache=gates,
        )

    reps = range(replica_offset, replica_offset + replicas)
    if workers <= 1:
        return [one(r) for r in reps]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, reps))


def write_samples_csv(path, samples: Iterable[HittingTimeSample]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replica", "beta", "steps", "censored", "gate_tag", "saddle_max"])
        for s in samples:
            w.writerow([s.replica, repr(s.beta), s.steps, int(s.censored), s.gate_crossed or "", str(s.saddle_max_seen)])


# -- Arrhenius slope -------------------------------------------------------------------------
@dataclass
class ArrheniusResult:
    slope: float
    stderr: float
    intercept: float
    betas: list[float]
    mean_steps: list[float]
    censored: list[int]
    replicas: int
    samples: dict[float, list[HittingTimeSample]] = field(repr=False, default_factory=dict)

    @property
    def censored_total(self) -> int:
        return sum(self.censored)

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "stderr": self.stderr,
            "intercept": self.intercept,
            "betas": self.betas,
            "mean_steps": self.mean_steps,
            "censored": self.censored,
            "replicas": self.replicas,
        }


def fit_slope(betas: Sequence[float], means: Sequence[float]) -> tuple[float, float]:
    slope, intercept = np.polyfit(np.asarray(betas, float), np.log(np.asarray(means, float)), 1)
    return float(slope), float(intercept)


def arrhenius_slope(
    spec: ModelSpec,
    start: SpinConfiguration,
    targets: Sequence[SpinConfiguration],
    beta_grid: Sequence[float],
    replicas: int,
    *,
    seed: int,
    step_cap: Callable[[float], int] | int,
    workers: int = 1,
    bootstrap: int = 1000,
) -> ArrheniusResult:
    """Least-squares slope of log(mean hitting steps) against beta, with a bootstrap standard error.

    Censored samples enter the mean at the cap, which biases it low; their
    count is reported per grid point.
    """
    if len(beta_grid) < 3:
        raise ValueError("need at least three beta values")
    if replicas < 50:
        raise ValueError("need at least 50 replicas per beta")
    per_beta: dict[float, list[HittingTimeSample]] = {}
    arrays = []
    censored = []
    for j, beta in enumerate(beta_grid):
        cap = step_cap(beta) if callable(step_cap) else int(step_cap)
        samples = hitting_samples(
            spec, start, targets, beta, replicas, seed=seed, step_cap=cap, workers=workers, replica_offset=j * replicas
        )
        per_beta[float(beta)] = samples
        c = sum(s.censored for s in samples)
        if c == len(samples):
            raise CensoredEstimate(f"all {c} samples censored at beta={beta}")
        censored.append(c)
        arrays.append(np.array([s.steps for s in samples], dtype=float))
    means = [float(a.mean()) for a in arrays]
    slope, intercept = fit_slope(beta_grid, means)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xB007]))
    boots = np.empty(bootstrap)
    for b in range(bootstrap):
        bm = [a[rng.integers(0, a.size, a.size)].mean() for a in arrays]
        boots[b] = fit_slope(beta_grid, bm)[0]
    return ArrheniusResult(slope, float(boots.std(ddof=1)), intercept, [float(b) for b in beta_grid], means, censored, replicas, per_beta)


# -- exponential law ---------------------------------------------------------------------------
@dataclass
class KSResult:
    statistic: float
    passed: bool
    sample_count: int
    threshold: float


def exponential_law_test(samples: Sequence[float | HittingTimeSample], threshold: float = 0.10) -> KSResult:
    """Kolmogorov-Smirnov distance between tau/mean(tau) and Exp(1)."""
    values = []
    for s in samples:
        if isinstance(s, HittingTimeSample):
            if s.censored:
                continue
            values.append(float(s.steps))
        else:
            values.append(float(s))
    if len(values) < 100:
        raise InsufficientSamples(f"need at least 100 uncensored samples, got {len(values)}")
    x = np.asarray(values)
    stat = float(stats.kstest(x / x.mean(), "expon").statistic)
    return KSResult(stat, stat < threshold, x.size, threshold)


# -- spectral gap -------------------------------------------------------------------------------
@dataclass
class SpectralReport:
    gap: float
    second_eigenvalue: float
    beta: float
    method_residual: float
    iterations: int = 0
    method: str = "lanczos"

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2)


def _flip_weights(energies: np.ndarray, sites: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Symmetrised off-diagonal weights per bit and the diagonal of S = D^1/2 P D^-1/2."""
    idx = np.arange(energies.size, dtype=np.int64)
    weights = np.empty((sites, energies.size))
    out_mass = np.zeros(energies.size)
    for bit in range(sites):
        d = energies[idx ^ (1 << bit)] - energies
        weights[bit] = np.exp(-beta * np.abs(d) / 2.0) / sites
        out_mass += np.exp(-beta * np.maximum(d, 0.0)) / sites
    return weights, 1.0 - out_mass


def _apply_s(v: np.ndarray, weights: np.ndarray, diag: np.ndarray) -> np.ndarray:
    idx = np.arange(v.shape[0], dtype=np.int64)
    out = diag[:, None] * v
    for bit in range(weights.shape[0]):
        out += weights[bit][:, None] * v[idx ^ (1 << bit)]
    return out


def _deflated_operator(E: np.ndarray, sites: int, beta: float):
    weights, diag = _flip_weights(E, sites, beta)
    top = np.exp(-beta * (E - E.min()) / 2.0)
    top /= np.linalg.norm(top)

    def apply(V: np.ndarray) -> np.ndarray:
        V = V - top[:, None] * (top @ V)[None, :]
        out = _apply_s(V, weights, diag)
        return out - top[:, None] * (top @ out)[None, :]

    return apply


def spectral_gap_from_energies(
    energies: np.ndarray, sites: int, beta: float, *, tol: float = 1e-10, seed: int = 0
) -> SpectralReport:
    """Spectral gap of the Metropolis chain on a ``sites``-bit hypercube.

    The chain is symmetrised by the square root of the Gibbs weights, the
    stationary direction is projected out, and ARPACK's Lanczos iteration
    finds the top remaining eigenvector. The gap is then evaluated from the
    Dirichlet form of that vector, which keeps full relative precision when
    the gap is far below machine epsilon relative to 1.
    """
    from scipy.sparse.linalg import LinearOperator, eigsh

    E = np.asarray(energies, dtype=float)
    apply = _deflated_operator(E, sites, beta)
    op = LinearOperator((E.size, E.size), matvec=lambda v: apply(v.reshape(-1, 1))[:, 0], dtype=float)
    v0 = np.random.default_rng(seed).standard_normal(E.size)
    vals, vecs = eigsh(op, k=4, which="LA", tol=1e-13, v0=v0, ncv=min(40, E.size - 1), maxiter=100_000)
    i = int(np.argmax(vals))
    u = vecs[:, i]
    residual = float(np.linalg.norm(apply(u[:, None])[:, 0] - vals[i] * u))
    if residual > tol:
        raise NotConverged(f"eigenvector residual {residual:.3e} above {tol:.1e}")
    gap = _dirichlet_gap(u, E, sites, beta)
    return SpectralReport(gap, 1.0 - gap, float(beta), residual, 0, "lanczos")


def subspace_iteration_gap(
    energies: np.ndarray, sites: int, beta: float, *, block: int = 8, tol: float = 1e-10,
    max_iter: int = 20_000, seed: int = 0,
) -> SpectralReport:
    """Independent route: deflated block subspace iteration on (I + S)/2 with Rayleigh-Ritz.

    Converges slowly when the top of the spectrum is clustered; intended for
    cross-checking on small or warm instances.
    """
    E = np.asarray(energies, dtype=float)
    apply = _deflated_operator(E, sites, beta)
    V, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((E.size, block)))
    residual = math.inf
    for it in range(1, max_iter + 1):
        V, _ = np.linalg.qr(0.5 * (V + apply(V)))
        if it % 20:
            continue
        MV = 0.5 * (V + apply(V))
        vals, vecs = np.linalg.eigh(0.5 * (V.T @ MV + MV.T @ V))
        u, Mu, theta = V @ vecs[:, -1], MV @ vecs[:, -1], vals[-1]
        residual = float(np.linalg.norm(Mu - theta * u))
        if residual < tol:
            gap = _dirichlet_gap(u, E, sites, beta)
            return SpectralReport(gap, 1.0 - gap, float(beta), residual, it, "block subspace iteration")
    raise NotConverged(f"residual {residual:.3e} after {max_iter} iterations")


def _dirichlet_gap(u: np.ndarray, E: np.ndarray, sites: int, beta: float) -> float:
    """u^T (I - S) u / u^T u, written as a sum over flip pairs so small gaps keep full precision."""
    idx = np.arange(E.size, dtype=np.int64)
    h = np.exp(-beta * (E - E.min()) / 2.0)
    f = u / h  # u = sqrt(mu) * f up to normalisation
    total = 0.0
    for bit in range(sites):
        j = idx ^ (1 << bit)
        lower = idx < j
        # mu_x P_xy = min(mu_x, mu_y) / sites
        w = np.minimum(h[idx] ** 2, h[j] ** 2)[lower] / sites
        total += float(np.sum(w * (f[idx][lower] - f[j][lower]) ** 2))
    return total / float(u @ u)


def dense_spectral_gap(energies: np.ndarray, sites: int, beta: float) -> tuple[float, np.ndarray]:
    """Dense eigensolve of the symmetrised chain; for at most 4096 states."""
    E = np.asarray(energies, dtype=float)
    if E.size > 4096:
        raise ValueError("dense oracle limited to 4096 states")
    weights, diag = _flip_weights(E, sites, beta)
    S = np.diag(diag)
    idx = np.arange(E.size)
    for bit in range(sites):
        S[idx, idx ^ (1 << bit)] += weights[bit]
    vals = np.linalg.eigvalsh(S)
    return float(1.0 - vals[-2]), vals


def spectral_gap(spec: ModelSpec, beta: float, *, guard: int = 16, **kwargs) -> SpectralReport:
    from .landscape import GuardExceeded, _all_energies

    if spec.sites > guard:
        raise GuardExceeded(f"{spec.sites} sites exceeds the spectral guard of {guard}")
    E = _all_energies(spec) / spec.energy_scale
    return spectral_gap_from_energies(E, spec.sites, beta, **kwargs)


# -- recurrence ---------------------------------------------------------------------------------
@dataclass
class RecurrenceResult:
    fraction: float
    interval: tuple[float, float]
    hits: int
    samples: int
    budget: int
    certificate_count: int = 0
    max_climb: Fraction | None = None
    climb_bound: Fraction | None = None
    reduction_failures: list[str] = field(default_factory=list)
    steps: list[int] = field(default_factory=list)


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return (max(0.0, centre - half), min(1.0, centre + half))


def recurrence_targets(spec: ModelSpec) -> list[SpinConfiguration]:
    """Stable and metastable configurations of the spec's regime."""
    from .recurrence_classifier import stable_and_metastable

    return stable_and_metastable(spec)


def random_configuration(spec: ModelSpec, seed: int, replica: int) -> SpinConfiguration:
    gen = np.random.Generator(philox_stream(seed, replica, 0x57A7))
    return SpinConfiguration(spec, np.where(gen.random(spec.sites) < 0.5, 1, -1).astype(np.int8))


def recurrence_probe(
    spec: ModelSpec,
    beta: float,
    sample_count: int,
    *,
    seed: int,
    epsilon: float = 0.5,
    budget: int | None = None,
    certify: bool = True,
    workers: int = 1,
) -> RecurrenceResult:
    """Fraction of uniform random starts that reach stable or metastable states within the budget.

    The default budget is exp(beta * (2(alpha-1) + epsilon)) proposals. With
    ``certify`` every start is also reduced constructively, round after round,
    and the largest climb over all certificates is reported.
    """
    from .recurrence_classifier import ReductionFailure, reduce_to_recurrent

    level = 2 * (spec.alpha - 1)
    if budget is None:
        budget = max(1, int(math.floor(math.exp(beta * (float(level) + epsilon)))))
    targets = recurrence_targets(spec)
    table = zobrist_table(spec.sites)
    tset = TargetSet(targets, table)
    starts = [random_configuration(spec, seed, r) for r in range(sample_count)]

    def one(r: int) -> HittingTimeSample:
        return run_until_hit(spec, starts[r], tset, beta, budget, seed=seed, replica=r, table=table)

    if workers <= 1:
        results = [one(r) for r in range(sample_count)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(sample_count)))
    hits = sum(not s.censored for s in results)
    out = RecurrenceResult(
        hits / sample_count, wilson_interval(hits, sample_count), hits, sample_count, budget,
        steps=[s.steps for s in results],
    )
    if certify:
        out.climb_bound = level
        climbs = []
        for cfg in starts:
            try:
                certs = reduce_to_recurrent(spec, cfg)
            except ReductionFailure as exc:
                out.reduction_failures.append(str(exc))
                if exc.certificate is not None:
                    climbs.append(exc.certificate.max_climb)
                continue
            climbs.extend(c.max_climb for c in certs)
        out.certificate_count = len(climbs)
        out.max_climb = max(climbs) if climbs else None
    return out


# -- gate crossings -------------------------------------------------------------------------------
@dataclass
class GateStatistics:
    start: str
    beta: float
    successes: int
    censored: int
    frequencies: dict[str, float]
    samples: list[HittingTimeSample] = field(repr=False, default_factory=list)


def gate_crossing_statistics(
    spec: ModelSpec,
    beta: float,
    replicas: int,
    *,
    seed: int,
    start: str | None = None,
    step_cap: int | None = None,
    workers: int = 1,
) -> GateStatistics:
    """Share of successful transitions whose final excursion passed through each gate family."""
    from .paths import gamma_star, named_state, regime_transitions, sigma_a_family

    transitions = regime_transitions(spec)
    start = start or next(iter(transitions))
    target_desc, _ = transitions[start]
    start_cfg = named_state(spec, start)
    targets = sigma_a_family(spec) if target_desc == "sigmaA family" else [named_state(spec, target_desc)]
    gs = gamma_star(spec)
    barrier = float(gs.barrier_from[start])
    cap = step_cap or int(math.exp(beta * (barrier + 1)) * 1000)
    gates = _default_gates(spec, start_cfg)
    samples = hitting_samples(
        spec, start_cfg, targets, beta, replicas, seed=seed, step_cap=cap, workers=workers,
        record_gates=gates,
    )
    ok = [s for s in samples if not s.censored]
    freq: dict[str, float] = {name: 0.0 for name, _ in gates}
    freq["none"] = 0.0
    for s in ok:
        freq[s.gate_crossed or "none"] += 1
    if ok:
        freq = {k: v / len(ok) for k, v in freq.items()}
    return GateStatistics(start, beta, len(ok), len(samples) - len(ok), freq, samples)
