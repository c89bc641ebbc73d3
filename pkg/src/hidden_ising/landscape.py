"""Exhaustive energy-landscape analysis on small tori, plus a restricted mode for larger ones.

States of an enumerable instance are integers: bit ``i`` set means site
``i`` carries a plus spin. Energies are scaled integers (``q * H``).

Communication heights come from a Kruskal sweep over single-flip edges,
weighted by the higher endpoint energy. Unions performed at one energy
level share a single merge-tree node, so ties never depend on edge order.
An independent threshold-BFS routine recomputes the same heights.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .config import SpinConfiguration, batch_direct_energy_scaled
from .lattice import ModelSpec

DEFAULT_SITE_GUARD = 16
UNRESOLVED = -1  # stability level placeholder for global minima


class GuardExceeded(RuntimeError):
    """The requested computation would exceed the configured state-space guard."""


# -- encoding -----------------------------------------------------------------
def index_to_spins(index: int | np.ndarray, sites: int) -> np.ndarray:
    bits = (np.asarray(index, dtype=np.int64)[..., None] >> np.arange(sites)) & 1
    return (2 * bits - 1).astype(np.int8)


def spins_to_index(spins: np.ndarray) -> int:
    plus = np.asarray(spins).reshape(-1) == 1
    return int(np.dot(plus.astype(np.int64), 1 << np.arange(plus.size, dtype=np.int64)))


def toy_spec() -> ModelSpec:
    """The 4x4 instance with one column per strip and alpha = 1."""
    return ModelSpec(N=4, n=1, m=1, k=1, alpha=1, strict=False)


# -- enumerable landscape -------------------------------------------------------------
class Landscape:
    """Every state of a small instance with its exact energy and the single-flip merge tree."""

    def __init__(self, spec: ModelSpec, *, guard: int = DEFAULT_SITE_GUARD, energies: np.ndarray | None = None):
        if spec.sites > guard:
            raise GuardExceeded(f"{spec.sites} sites exceeds the enumeration guard of {guard}")
        self.spec = spec
        self.sites = spec.sites
        self.size = 1 << self.sites
        if energies is None:
            energies = _all_energies(spec)
        self.energies = np.asarray(energies, dtype=np.int64)
        self._build_tree()

    @classmethod
    def from_energies(cls, energies: np.ndarray, sites: int, scale: int = 1) -> "Landscape":
        """Landscape of an arbitrary energy function on the ``sites``-bit hypercube."""
        obj = cls.__new__(cls)
        obj.spec = None
        obj.sites = sites
        obj.size = 1 << sites
        obj._scale = scale
        obj.energies = np.asarray(energies, dtype=np.int64)
        if obj.energies.size != obj.size:
            raise ValueError("energy vector length must be 2**sites")
        obj._build_tree()
        return obj

    # -- exact units ------------------------------------------------------------
    @property
    def scale(self) -> int:
        return self.spec.energy_scale if self.spec is not None else getattr(self, "_scale", 1)

    def unscale(self, value: int) -> Fraction:
        return Fraction(int(value), self.scale)

    def energy(self, state: int) -> Fraction:
        return self.unscale(self.energies[state])

    def state_of(self, config: SpinConfiguration | np.ndarray) -> int:
        spins = config.spins if isinstance(config, SpinConfiguration) else config
        return spins_to_index(spins)

    def config_of(self, state: int) -> SpinConfiguration:
        return SpinConfiguration(self.spec, index_to_spins(state, self.sites))

    # -- Kruskal sweep -------------------------------------------------------------
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        states = np.arange(self.size, dtype=np.int64)
        us, vs = [], []
        for bit in range(self.sites):
            low = states[(states >> bit) & 1 == 0]
            us.append(low)
            vs.append(low | (1 << bit))
        return np.concatenate(us), np.concatenate(vs)

    def _build_tree(self) -> None:
        E = self.energies
        u, v = self.edges()
        w = np.maximum(E[u], E[v])
        order = np.argsort(w, kind="stable")
        u, v, w = u[order].tolist(), v[order].tolist(), w[order].tolist()

        size = self.size
        uf = list(range(size))
        comp_node = list(range(size))  # merge-tree node representing each union-find root
        parent = [-1] * size
        height = E.tolist()
        comp_min = E.tolist()
        pending: list[list[int] | None] = [[s] for s in range(size)]
        levels = [UNRESOLVED] * size

        def find(x: int) -> int:
            root = x
            while uf[root] != root:
                root = uf[root]
            while uf[x] != root:
                uf[x], x = root, uf[x]
            return root

        for a, b, lvl in zip(u, v, w):
            ra, rb = find(a), find(b)
            if ra == rb:
                continue
            # pending: states whose component has not yet met lower energy
            ma, mb = comp_min[ra], comp_min[rb]
            pa, pb = pending[ra], pending[rb]
            if ma != mb:
                resolved, merged = (pb, pa) if ma < mb else (pa, pb)
                for s in resolved:
                    levels[s] = lvl - E[s]
            else:
                merged = pa + pb if len(pa) < len(pb) else pa
                if merged is pa:
                    pa.extend(pb)

            na, nb = comp_node[ra], comp_node[rb]
            if height[na] == lvl and na >= size:
                node = na
                parent[nb] = node
            elif height[nb] == lvl and nb >= size:
                node = nb
                parent[na] = node
            else:
                node = len(parent)
                parent.append(-1)
                height.append(lvl)
                parent[na] = node
                parent[nb] = node
            uf[rb] = ra
            comp_node[ra] = node
            comp_min[ra] = min(ma, mb)
            pending[ra], pending[rb] = merged, None

        self._parent = np.asarray(parent, dtype=np.int64)
        self._height = np.asarray(height, dtype=np.int64)
        self._levels = np.asarray(levels, dtype=np.int64)
        # parents may carry smaller indices than children when a level node is reused,
        # so derive a top-down order from the roots
        par = self._parent
        kids = np.argsort(par, kind="stable")
        starts = np.searchsorted(par[kids], np.arange(par.size))
        ends = np.searchsorted(par[kids], np.arange(par.size), side="right")
        order = np.flatnonzero(par < 0).tolist()
        depth = np.zeros(par.size, dtype=np.int64)
        head = 0
        while head < len(order):
            node = order[head]
            head += 1
            for child in kids[starts[node] : ends[node]].tolist():
                depth[child] = depth[node] + 1
                order.append(child)
        self._depth = depth
        self._topdown = np.asarray(order, dtype=np.int64)

    # -- queries ----------------------------------------------------------------------
    def _lca(self, x: int, y: int) -> int:
        parent, depth = self._parent, self._depth
        while depth[x] > depth[y]:
            x = parent[x]
        while depth[y] > depth[x]:
            y = parent[y]
        while x != y:
            x, y = parent[x], parent[y]
            if x < 0 or y < 0:
                raise ValueError("states lie in different components")
        return x

    def phi_scaled(self, x: int, y: int) -> int:
        if x == y:
            return int(self.energies[x])
        return int(self._height[self._lca(x, y)])

    def communication_height(self, x: int, y: int | Iterable[int]) -> Fraction:
        """Min over single-flip paths of the max energy; ``y`` may be a set of states."""
        if isinstance(y, (int, np.integer)):
            return self.unscale(self.phi_scaled(int(x), int(y)))
        return self.unscale(min(self.phi_scaled(int(x), int(t)) for t in y))

    def stability_level_scaled(self, z: int) -> int | None:
        lvl = int(self._levels[z])
        return None if lvl == UNRESOLVED else lvl

    def stability_level(self, z: int) -> Fraction | float:
        lvl = self.stability_level_scaled(z)
        return math.inf if lvl is None else self.unscale(lvl)

    def phi_to_state(self, target: int) -> np.ndarray:
        """Scaled communication height from every state to ``target``."""
        parent, height, size = self._parent, self._height, self.size
        on_path = np.zeros(parent.size, dtype=bool)
        node = target
        while node >= 0:
            on_path[node] = True
            node = parent[node]
        value = np.empty(parent.size, dtype=np.int64)
        for node in self._topdown.tolist():
            if on_path[node]:
                value[node] = height[node]
            else:
                value[node] = value[parent[node]]
        out = value[:size].copy()
        out[target] = self.energies[target]
        return out

    @property
    def stability_levels_scaled(self) -> np.ndarray:
        return self._levels


def _all_energies(spec: ModelSpec, chunk: int = 1 << 14) -> np.ndarray:
    size = 1 << spec.sites
    out = np.empty(size, dtype=np.int64)
    for start in range(0, size, chunk):
        idx = np.arange(start, min(size, start + chunk), dtype=np.int64)
        out[start : start + idx.size] = batch_direct_energy_scaled(spec, index_to_spins(idx, spec.sites))
    return out


# -- threshold BFS oracle ---------------------------------------------------------------
def reachable(allowed: np.ndarray, source: int, sites: int) -> np.ndarray:
    """States reachable from ``source`` by single flips inside the boolean mask ``allowed``."""
    seen = np.zeros(allowed.size, dtype=bool)
    if not allowed[source]:
        return seen
    seen[source] = True
    frontier = np.array([source], dtype=np.int64)
    while frontier.size:
        nxt = (frontier[:, None] ^ (1 << np.arange(sites, dtype=np.int64))).reshape(-1)
        nxt = np.unique(nxt[allowed[nxt] & ~seen[nxt]])
        seen[nxt] = True
        frontier = nxt
    return seen


def threshold_bfs_phi_scaled(energies: np.ndarray, sites: int, x: int, y: int) -> int:
    """Communication height by bisection over energy thresholds with reachability checks."""
    lo_e = max(int(energies[x]), int(energies[y]))
    levels = np.unique(energies[energies >= lo_e])
    lo, hi = 0, levels.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if reachable(energies <= levels[mid], x, sites)[y]:
            hi = mid
        else:
            lo = mid + 1
    return int(levels[lo])


# -- report -----------------------------------------------------------------------------
@dataclass
class LandscapeReport:
    state_count: int
    scale: int
    energies: np.ndarray  # scaled
    stable_set: list[int]
    metastable_set: list[int]
    gamma_m: Fraction | None  # max finite stability level
    gamma_tilde: Fraction | None  # max over x != s of Phi(x, s) - H(x), s a fixed stable state
    stability_levels: np.ndarray  # scaled, UNRESOLVED for global minima
    notes: list[str] = field(default_factory=list)

    def energy(self, state: int) -> Fraction:
        return Fraction(int(self.energies[state]), self.scale)

    def stability_level(self, state: int) -> Fraction | float:
        lvl = int(self.stability_levels[state])
        return math.inf if lvl == UNRESOLVED else Fraction(lvl, self.scale)

    def histogram(self) -> list[tuple[Fraction, int]]:
        counts = Counter(self.energies.tolist())
        return [(Fraction(e, self.scale), c) for e, c in sorted(counts.items())]

    def to_dict(self, include_table: bool = False) -> dict:
        out = {
            "state_count": self.state_count,
            "stable_set": self.stable_set,
            "stable_energy": str(self.energy(self.stable_set[0])) if self.stable_set else None,
            "metastable_count": len(self.metastable_set),
            "metastable_set": self.metastable_set[:64],
            "gamma_m": None if self.gamma_m is None else str(self.gamma_m),
            "gamma_tilde": None if self.gamma_tilde is None else str(self.gamma_tilde),
            "notes": self.notes,
        }
        if include_table:
            out["energy_table"] = [str(Fraction(int(e), self.scale)) for e in self.energies]
        return out

    def to_json(self, include_table: bool = False) -> str:
        return json.dumps(self.to_dict(include_table), indent=2)

    def write_histogram_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["energy", "count"])
            for e, c in self.histogram():
                writer.writerow([str(e), c])


def landscape_report(spec_or_landscape: ModelSpec | Landscape, *, guard: int = DEFAULT_SITE_GUARD) -> LandscapeReport:
    land = spec_or_landscape if isinstance(spec_or_landscape, Landscape) else Landscape(spec_or_landscape, guard=guard)
    E = land.energies
    low = int(E.min())
    stable = np.flatnonzero(E == low).tolist()
    levels = land.stability_levels_scaled
    finite = levels != UNRESOLVED
    notes = []
    if finite.any():
        gm = int(levels[finite].max())
        meta = np.flatnonzero(finite & (levels == gm)).tolist()
        gamma_m = land.unscale(gm)
    else:
        meta, gamma_m = [], None
    s0 = stable[0]
    phi = land.phi_to_state(s0)
    depth = phi - E
    depth[s0] = np.iinfo(np.int64).min
    gamma_tilde = land.unscale(int(depth.max())) if land.size > 1 else None
    if gamma_tilde is not None and gamma_m is not None and gamma_tilde != gamma_m:
        notes.append(
            f"max stability level {gamma_m} differs from the deepest return to a ground state {gamma_tilde}; "
            f"{len(stable)} ground states"
        )
    return LandscapeReport(land.size, land.scale, E, stable, meta, gamma_m, gamma_tilde, levels, notes)


# -- gates ------------------------------------------------------------------------------
def gate_check(land: Landscape, x: int, y: int, gate: Iterable[int]) -> bool:
    """True iff removing the gate's saddle-level members disconnects x from y below or at Phi(x, y)."""
    phi = land.phi_scaled(x, y)
    E = land.energies
    allowed = E <= phi
    g = np.fromiter(gate, dtype=np.int64)
    if g.size:
        g = g[E[g] == phi]
        allowed[g] = False
    if not (allowed[x] and allowed[y]):
        return True
    return not bool(reachable(allowed, x, land.sites)[y])


def optimal_path_gate_oracle(land: Landscape, x: int, y: int, candidate: int) -> bool:
    """Slow oracle: every optimal path from x to y visits ``candidate``.

    Enumerates the saddle-level graph explicitly with Python sets.
    """
    phi = land.phi_scaled(x, y)
    E = land.energies
    if E[candidate] != phi:
        return False
    seen = {x}
    stack = [x]
    while stack:
        s = stack.pop()
        for bit in range(land.sites):
            t = s ^ (1 << bit)
            if t in seen or t == candidate or E[t] > phi:
                continue
            seen.add(t)
            stack.append(t)
    return y not in seen and x != candidate and y != candidate


# -- restricted subspace --------------------------------------------------------------------
@dataclass
class RestrictedReport:
    """Landscape quantities on the induced subgraph around a reference path.

    Communication heights computed inside the subspace are upper bounds for
    the full space; disconnection inside the subspace is only a restricted
    statement, and is reported as such.
    """

    path_name: str
    window: Fraction
    state_count: int
    path_state_count: int
    only_path_states: bool
    saddle_level: Fraction
    phi_upper_bound: Fraction | None
    connected_without_removal: bool
    removed_gate_states: int
    disconnected_after_removal: bool
    full_space_component: int | None
    full_space_reaches_target: bool | None
    capped: bool
    stable_in_subspace: int
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        for key in ("window", "saddle_level", "phi_upper_bound"):
            d[key] = None if d[key] is None else str(d[key])
        return d


def _neighbour_energy_deltas(spec: ModelSpec, spins: np.ndarray) -> np.ndarray:
    """Scaled energy change of every single flip, for a batch of configurations (B, sites)."""
    s = spins.astype(np.int64)
    nb = s[:, spec.neighbor_table].sum(axis=2)
    p, q = spec.alpha.numerator, spec.alpha.denominator
    return 2 * q * spec.preference.astype(np.int64)[None, :] * s + p * s * nb


def _explore(
    spec: ModelSpec,
    seeds: Sequence[np.ndarray],
    admit,
    cap: int,
    batch: int = 512,
) -> tuple[list[bytes], np.ndarray, list[tuple[int, int]], bool]:
    """Breadth-first closure of the seeds under single flips whose result satisfies ``admit``.

    ``admit(energies, plus_counts)`` returns a boolean mask. Seeds are always kept.
    Returns keys, scaled energies, undirected edges and whether the cap stopped the search.
    """
    sites = spec.sites
    keys: list[bytes] = []
    index: dict[bytes, int] = {}
    spins_store: list[np.ndarray] = []
    energies: list[int] = []
    edges: list[tuple[int, int]] = []

    def add(sp: np.ndarray, e: int) -> int:
        k = np.packbits(sp > 0).tobytes()
        if k in index:
            return index[k]
        index[k] = len(keys)
        keys.append(k)
        spins_store.append(sp.copy())
        energies.append(int(e))
        return index[k]

    from .config import direct_energy_scaled

    for sp in seeds:
        add(np.asarray(sp, dtype=np.int8), direct_energy_scaled(spec, sp))
    head, capped = 0, False
    eye = np.eye(sites, dtype=bool)
    while head < len(keys):
        chunk = np.stack(spins_store[head : head + batch])
        base = np.asarray(energies[head : head + batch], dtype=np.int64)
        delta = _neighbour_energy_deltas(spec, chunk)
        new_e = base[:, None] + delta
        plus = np.count_nonzero(chunk > 0, axis=1)
        new_plus = plus[:, None] + np.where(chunk > 0, -1, 1)
        ok = admit(new_e, new_plus)
        for row, col in zip(*np.nonzero(ok)):
            nsp = np.where(eye[col], -chunk[row], chunk[row]).astype(np.int8)
            before = len(keys)
            j = add(nsp, new_e[row, col])
            i = head + int(row)
            if i < j:
                edges.append((i, j))
            if len(keys) > cap and len(keys) > before:
                capped = True
                break
        if capped:
            break
        # edges to seeds or already-known states that the predicate rejects
        known = np.nonzero(~ok)
        for row, col in zip(*known):
            nsp = np.where(eye[col], -chunk[row], chunk[row])
            k = np.packbits(nsp > 0).tobytes()
            j = index.get(k)
            if j is not None and head + int(row) < j:
                edges.append((head + int(row), j))
        head += chunk.shape[0]
    return keys, np.asarray(energies, dtype=np.int64), edges, capped


def _component_of(n: int, edges: list[tuple[int, int]], allowed: np.ndarray) -> np.ndarray:
    if not edges:
        labels = np.arange(n)
    else:
        e = np.asarray(edges, dtype=np.int64)
        keep = allowed[e[:, 0]] & allowed[e[:, 1]]
        e = e[keep]
        graph = coo_matrix((np.ones(len(e), dtype=np.int8), (e[:, 0], e[:, 1])), shape=(n, n))
        _, labels = connected_components(graph, directed=False)
    labels = labels.copy()
    labels[~allowed] = -1
    return labels


def restricted_subspace_analysis(
    spec: ModelSpec,
    path_name: str = "w̄*2",
    window: Fraction | int | str = 4,
    *,
    cap: int = 2_000_000,
    full_space_cap: int = 200_000,
    start: str = "-1",
) -> RestrictedReport:
    """Gate disconnection on the states within ``window`` above a reference path.

    A state with plus count M is admitted when its energy is strictly below
    the path's energy at plus count M (clamped to the path's range) plus the
    window. The saddle level is the regime's printed height. Inside the
    admitted subspace the check is: the start reaches the stable family at or
    below the saddle level, and no longer does once the saddle-level gate
    states are removed. A full-space search from the start with the gate
    removed, stopped at ``full_space_cap`` states, complements it.
    """
    from .paths import build_reference_path, gamma_star, gate_family, named_state, sigma_a_family

    window = Fraction(window)
    path = build_reference_path(spec, path_name)
    q = spec.energy_scale
    scaled_window = int(window * q)
    if (window * q).denominator != 1:
        raise ValueError("window must be a multiple of 1/q")

    states = path.states
    plus_counts = np.array([s.plus_count for s in states])
    by_count: dict[int, int] = {}
    for pc, e in zip(plus_counts, path.scaled):
        by_count[int(pc)] = min(by_count.get(int(pc), e), e)
    lo_c, hi_c = min(by_count), max(by_count)
    ref = np.full(spec.sites + 1, 0, dtype=np.int64)
    for c in range(spec.sites + 1):
        cc = min(max(c, lo_c), hi_c)
        while cc not in by_count:
            cc += 1 if c < lo_c else -1
        ref[c] = by_count[cc]

    def admit(energies: np.ndarray, counts: np.ndarray) -> np.ndarray:
        if scaled_window <= 0:
            return np.zeros(energies.shape, dtype=bool)
        return energies < ref[counts] + scaled_window

    keys, E, edges, capped = _explore(spec, [s.spins for s in states], admit, cap)
    n = len(keys)
    index = {k: i for i, k in enumerate(keys)}

    gs = gamma_star(spec)
    saddle = int(gs.height * q)
    start_cfg = named_state(spec, start)
    targets = [index[c.key()] for c in sigma_a_family(spec) if c.key() in index]
    if start == "-1" and spec.regime.value == "CriticalEqual":
        plus_key = SpinConfiguration.all_plus(spec).key()
        targets = [index[plus_key]] if plus_key in index else []
    s_idx = index[start_cfg.key()]

    rows = [r for r in gate_family(spec) if r.start == start]
    gate_keys = set()
    for row in rows:
        for fam in row.families[:1] if row.grouping == "each" else row.families:
            gate_keys.update(c.key() for c in fam.configs)

    below = E <= saddle
    labels = _component_of(n, edges, below)
    connected = bool(targets) and any(labels[t] == labels[s_idx] for t in targets)
    phi_upper = None
    if connected:
        # lowest threshold at which the start meets a target inside the subspace
        for level in np.unique(E[E >= E[s_idx]]):
            lab = _component_of(n, edges, E <= level)
            if any(lab[t] == lab[s_idx] and lab[t] >= 0 for t in targets):
                phi_upper = Fraction(int(level), q)
                break
    removed = np.array([k in gate_keys for k in keys]) & (E == saddle)
    labels2 = _component_of(n, edges, below & ~removed)
    disconnected = not any(labels2[t] == labels2[s_idx] and labels2[t] >= 0 for t in targets)

    full_n, full_hit = _full_space_component(spec, start_cfg, saddle, gate_keys, {c.key() for c in sigma_a_family(spec)}, full_space_cap)

    notes = []
    if capped:
        notes.append(f"subspace exploration stopped at the cap of {cap} states")
    if full_n is None:
        notes.append("full-space component search hit its cap; no full-space statement")
    return RestrictedReport(
        path_name=path.name,
        window=window,
        state_count=n,
        path_state_count=len({s.key() for s in states}),
        only_path_states=set(keys) == {s.key() for s in states},
        saddle_level=gs.height,
        phi_upper_bound=phi_upper,
        connected_without_removal=connected,
        removed_gate_states=int(removed.sum()),
        disconnected_after_removal=disconnected,
        full_space_component=full_n,
        full_space_reaches_target=full_hit,
        capped=capped,
        stable_in_subspace=len(targets),
        notes=notes,
    )


def _full_space_component(
    spec: ModelSpec, start: SpinConfiguration, saddle: int, removed: set[bytes], targets: set[bytes], cap: int
) -> tuple[int | None, bool | None]:
    """Size of the start's component in {H < saddle} plus non-removed saddle states, or None past the cap."""
    hit = False
    sites = spec.sites
    frontier = [start.spins.copy()]
    energies = [start.energy_scaled()]
    eye = np.eye(sites, dtype=bool)
    seen = {start.key()}
    head = 0
    while head < len(frontier):
        chunk = np.stack(frontier[head : head + 512])
        base = np.asarray(energies[head : head + 512], dtype=np.int64)
        new_e = base[:, None] + _neighbour_energy_deltas(spec, chunk)
        for row, col in zip(*np.nonzero(new_e <= saddle)):
            nsp = np.where(eye[col], -chunk[row], chunk[row]).astype(np.int8)
            k = np.packbits(nsp > 0).tobytes()
            if k in seen:
                continue
            if new_e[row, col] == saddle and k in removed:
                continue
            seen.add(k)
            hit = hit or k in targets
            frontier.append(nsp)
            energies.append(int(new_e[row, col]))
            if len(seen) > cap:
                return None, True if hit else None
        head += chunk.shape[0]
    return len(seen), hit
