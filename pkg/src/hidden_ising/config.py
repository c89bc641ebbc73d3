"""Spin configurations, exact energies, local energy differences and clusters.

Energies are exact. Internally they are carried as integers scaled by the
denominator of alpha (``spec.energy_scale``); the public ``hamiltonian_*``
functions return :class:`~fractions.Fraction`.
"""

from __future__ import annotations

import enum
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .lattice import ModelSpec, RegionLabel, Site


class SpinConfiguration:
    """±1 spins on the N x N torus with write-through cached aggregates.

    The cached counts (plus spins in A, plus spins in B, contour length) are
    updated incrementally by :meth:`flip`. Set ``debug=True`` to revalidate
    them from scratch after every flip.
    """

    __slots__ = ("spec", "spins", "_plus_a", "_plus_b", "_contour", "debug")

    def __init__(self, spec: ModelSpec, spins: Iterable[int] | np.ndarray, *, debug: bool = False):
        arr = np.asarray(spins, dtype=np.int8).reshape(-1).copy()
        if arr.size != spec.sites:
            raise ValueError(f"expected {spec.sites} spins, got {arr.size}")
        if not np.all((arr == 1) | (arr == -1)):
            raise ValueError("spins must be +1 or -1")
        self.spec = spec
        self.spins = arr
        self.debug = debug
        self._recount()

    # -- constructors ----------------------------------------------------
    @classmethod
    def all_minus(cls, spec: ModelSpec) -> "SpinConfiguration":
        return cls(spec, -np.ones(spec.sites, dtype=np.int8))

    @classmethod
    def all_plus(cls, spec: ModelSpec) -> "SpinConfiguration":
        return cls(spec, np.ones(spec.sites, dtype=np.int8))

    @classmethod
    def from_plus_cells(cls, spec: ModelSpec, cells: Iterable[tuple[int, int]]) -> "SpinConfiguration":
        """Plus on the listed (row, col) cells, minus elsewhere."""
        spins = -np.ones(spec.sites, dtype=np.int8)
        for r, c in cells:
            spins[spec.index((r, c))] = 1
        return cls(spec, spins)

    @classmethod
    def from_minus_cells(cls, spec: ModelSpec, cells: Iterable[tuple[int, int]]) -> "SpinConfiguration":
        spins = np.ones(spec.sites, dtype=np.int8)
        for r, c in cells:
            spins[spec.index((r, c))] = -1
        return cls(spec, spins)

    # -- cached aggregates ----------------------------------------------
    def _recount(self) -> None:
        pref = self.spec.preference
        plus = self.spins == 1
        self._plus_a = int(np.count_nonzero(plus & (pref == 1)))
        self._plus_b = int(np.count_nonzero(plus & (pref == -1)))
        e = self.spec.edges
        self._contour = int(np.count_nonzero(self.spins[e[:, 0]] != self.spins[e[:, 1]]))

    def validate_cache(self) -> None:
        cached = (self._plus_a, self._plus_b, self._contour)
        self._recount()
        if cached != (self._plus_a, self._plus_b, self._contour):
            raise AssertionError(f"stale cache {cached} != {(self._plus_a, self._plus_b, self._contour)}")

    @property
    def plus_in_a(self) -> int:
        return self._plus_a

    @property
    def plus_in_b(self) -> int:
        return self._plus_b

    @property
    def contour(self) -> int:
        return self._contour

    @property
    def plus_count(self) -> int:
        return int(np.count_nonzero(self.spins == 1))

    # -- mutation --------------------------------------------------------
    def flip(self, index: int) -> None:
        spec = self.spec
        i = int(index)
        old = int(self.spins[i])
        nb = self.spins[spec.neighbor_table[i]]
        agree = int(np.count_nonzero(nb == old))
        # agreeing neighbours become disagreeing and vice versa
        self._contour += 2 * agree - 4
        pref = int(spec.preference[i])
        if pref == 1:
            self._plus_a -= old
        elif pref == -1:
            self._plus_b -= old
        # old = +1 removes one plus, old = -1 adds one; the update above uses
        # (new - old)/2 = -old for the count of plus spins
        self.spins[i] = -old
        if self.debug:
            self.validate_cache()

    def flipped(self, index: int) -> "SpinConfiguration":
        out = self.copy()
        out.flip(index)
        return out

    def copy(self) -> "SpinConfiguration":
        out = SpinConfiguration.__new__(SpinConfiguration)
        out.spec = self.spec
        out.spins = self.spins.copy()
        out._plus_a, out._plus_b, out._contour = self._plus_a, self._plus_b, self._contour
        out.debug = self.debug
        return out

    # -- energy ----------------------------------------------------------
    def energy_scaled(self) -> int:
        return contour_energy_scaled(self.spec, self._plus_a, self._plus_b, self._contour)

    def energy(self) -> Fraction:
        return self.spec.unscale(self.energy_scaled())

    # -- identity --------------------------------------------------------
    def key(self) -> bytes:
        return np.packbits(self.spins > 0).tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpinConfiguration):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.spins, other.spins)

    def __hash__(self) -> int:
        return hash(self.key())

    def grid(self) -> np.ndarray:
        return self.spins.reshape(self.spec.N, self.spec.N)

    def plus_cells(self) -> list[Site]:
        return [self.spec.site(i) for i in np.flatnonzero(self.spins == 1)]

    def to_string(self) -> str:
        return spins_to_string(self.spins)

    def to_rle(self) -> str:
        return spins_to_rle(self.spins)

    @classmethod
    def from_string(cls, spec: ModelSpec, text: str) -> "SpinConfiguration":
        return cls(spec, string_to_spins(text))

    @classmethod
    def from_rle(cls, spec: ModelSpec, text: str) -> "SpinConfiguration":
        return cls(spec, rle_to_spins(text))

    def to_dict(self) -> dict:
        return {"spec": self.spec.to_dict(), "spins": self.to_string()}

    @classmethod
    def from_dict(cls, data: dict) -> "SpinConfiguration":
        spec = ModelSpec.from_dict(data["spec"])
        text = data["spins"]
        return cls.from_rle(spec, text) if any(ch.isdigit() for ch in text) else cls.from_string(spec, text)

    def pretty(self) -> str:
        return "\n".join("".join("+" if v > 0 else "." for v in row) for row in self.grid())

    def __repr__(self) -> str:
        return f"SpinConfiguration({self.spec}, plus={self.plus_count}, H={self.energy()})"


# -- serialisation helpers ---------------------------------------------------
def spins_to_string(spins: np.ndarray) -> str:
    return "".join("+" if v > 0 else "-" for v in np.asarray(spins).reshape(-1))


def string_to_spins(text: str) -> np.ndarray:
    text = text.strip()
    if set(text) - {"+", "-"}:
        raise ValueError("configuration strings may contain only '+' and '-'")
    return np.fromiter((1 if ch == "+" else -1 for ch in text), dtype=np.int8, count=len(text))


def spins_to_rle(spins: np.ndarray) -> str:
    """Run-length form such as ``12+3-1+``; each run is count then sign."""
    s = spins_to_string(spins)
    parts = []
    i = 0
    while i < len(s):
        j = i
        while j < len(s) and s[j] == s[i]:
            j += 1
        parts.append(f"{j - i}{s[i]}")
        i = j
    return "".join(parts)


def rle_to_spins(text: str) -> np.ndarray:
    runs = re.findall(r"(\d+)([+-])", text.strip())
    if "".join(f"{a}{b}" for a, b in runs) != text.strip():
        raise ValueError(f"malformed run-length string {text!r}")
    return string_to_spins("".join(sign * int(count) for count, sign in runs))


# -- energies ----------------------------------------------------------------
def contour_energy_scaled(spec: ModelSpec, plus_a: int, plus_b: int, contour: int) -> int:
    """Scaled energy from the contour form.

    H = N(n-m) - alpha N^2 + 2 (M_B - M_A) + alpha |gamma|, multiplied by q.
    """
    p, q = spec.alpha.numerator, spec.alpha.denominator
    N = spec.N
    return q * (N * (spec.n - spec.m) + 2 * (plus_b - plus_a)) + p * (contour - N * N)


def direct_energy_scaled(spec: ModelSpec, spins: np.ndarray) -> int:
    """Scaled energy by direct summation of the field and pair terms."""
    s = np.asarray(spins, dtype=np.int64).reshape(-1)
    p, q = spec.alpha.numerator, spec.alpha.denominator
    field_sum = int(np.dot(spec.preference.astype(np.int64), s))
    e = spec.edges
    pair_sum = int(np.dot(s[e[:, 0]], s[e[:, 1]]))
    # the pair sum over the 2N^2 undirected edges is always even
    return -q * field_sum - p * (pair_sum // 2)


def hamiltonian_direct(config: SpinConfiguration) -> Fraction:
    return config.spec.unscale(direct_energy_scaled(config.spec, config.spins))


def hamiltonian_contour(config: SpinConfiguration) -> Fraction:
    plus_a, plus_b = magnetization_counts(config)
    return config.spec.unscale(contour_energy_scaled(config.spec, plus_a, plus_b, contour_length(config)))


def magnetization_counts(config: SpinConfiguration) -> tuple[int, int]:
    """Recomputed (plus spins in A, plus spins in B)."""
    pref = config.spec.preference
    plus = config.spins == 1
    return int(np.count_nonzero(plus & (pref == 1))), int(np.count_nonzero(plus & (pref == -1)))


def contour_length(config: SpinConfiguration) -> int:
    """Number of nearest-neighbour edges joining opposite spins (recomputed)."""
    e = config.spec.edges
    return int(np.count_nonzero(config.spins[e[:, 0]] != config.spins[e[:, 1]]))


def delta_h_scaled(spec: ModelSpec, spins: np.ndarray, index: int) -> int:
    """Scaled H(flipped at index) - H(spins) from the four neighbours."""
    i = int(index)
    s_i = int(spins[i])
    nb_sum = int(spins[spec.neighbor_table[i]].astype(np.int64).sum())
    p, q = spec.alpha.numerator, spec.alpha.denominator
    return 2 * q * int(spec.preference[i]) * s_i + p * s_i * nb_sum


def delta_h(config: SpinConfiguration, site: int | Site | tuple[int, int]) -> Fraction:
    index = site if isinstance(site, (int, np.integer)) else config.spec.index(site)
    return config.spec.unscale(delta_h_scaled(config.spec, config.spins, index))


# -- batch helpers for large fuzz runs --------------------------------------
def batch_direct_energy_scaled(spec: ModelSpec, spins: np.ndarray) -> np.ndarray:
    s = np.asarray(spins, dtype=np.int64)
    p, q = spec.alpha.numerator, spec.alpha.denominator
    field_sum = s @ spec.preference.astype(np.int64)
    e = spec.edges
    pair_sum = np.einsum("bi,bi->b", s[:, e[:, 0]], s[:, e[:, 1]])
    return -q * field_sum - p * (pair_sum // 2)


def batch_contour_energy_scaled(spec: ModelSpec, spins: np.ndarray) -> np.ndarray:
    s = np.asarray(spins)
    pref = spec.preference
    plus = s == 1
    plus_a = np.count_nonzero(plus[:, pref == 1], axis=1)
    plus_b = np.count_nonzero(plus[:, pref == -1], axis=1)
    e = spec.edges
    contour = np.count_nonzero(s[:, e[:, 0]] != s[:, e[:, 1]], axis=1)
    p, q = spec.alpha.numerator, spec.alpha.denominator
    N = spec.N
    return q * (N * (spec.n - spec.m) + 2 * (plus_b - plus_a)) + p * (contour - N * N)


# -- clusters ------------------------------------------------------------------
class Winding(enum.Enum):
    none = "none"
    vertical = "vertical"
    horizontal = "horizontal"
    both = "both"


@dataclass
class Cluster:
    cells: frozenset[int]
    sign: int
    winding: Winding
    boundary_edges: int = 0


@dataclass
class ClusterDecomposition:
    clusters: list[Cluster] = field(default_factory=list)

    def of_sign(self, sign: int) -> list[Cluster]:
        return [c for c in self.clusters if c.sign == sign]


def _component_winding(N: int, cells: list[int], members: set[int]) -> Winding:
    """Lift the component to Z^2 by BFS; any edge whose lifts disagree closes a winding cycle."""
    lift = {cells[0]: (0, 0)}
    queue = deque([cells[0]])
    vert = horiz = False
    while queue:
        u = queue.popleft()
        ur, uc = divmod(u, N)
        lr, lc = lift[u]
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            v = ((ur + dr) % N) * N + (uc + dc) % N
            if v not in members:
                continue
            expected = (lr + dr, lc + dc)
            if v not in lift:
                lift[v] = expected
                queue.append(v)
            elif lift[v] != expected:
                # lifts of the same cell differ by a multiple of N along the wrapped axis
                if lift[v][0] != expected[0]:
                    vert = True
                if lift[v][1] != expected[1]:
                    horiz = True
    if vert and horiz:
        return Winding.both
    if vert:
        return Winding.vertical
    if horiz:
        return Winding.horizontal
    return Winding.none


def decompose_clusters(config: SpinConfiguration) -> ClusterDecomposition:
    """Edge-connected same-sign components with winding flags."""
    spec = config.spec
    N = spec.N
    spins = config.spins
    table = spec.neighbor_table
    label = -np.ones(spec.sites, dtype=np.int64)
    out = ClusterDecomposition()
    for start in range(spec.sites):
        if label[start] >= 0:
            continue
        sign = int(spins[start])
        cid = len(out.clusters)
        label[start] = cid
        comp = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in table[u]:
                if label[v] < 0 and spins[v] == sign:
                    label[v] = cid
                    comp.append(int(v))
                    queue.append(int(v))
        members = set(comp)
        boundary = sum(1 for u in comp for v in table[u] if spins[v] != sign)
        out.clusters.append(Cluster(frozenset(comp), sign, _component_winding(N, comp, members), boundary))
    return out


def region_mask(spec: ModelSpec, *labels: RegionLabel) -> np.ndarray:
    cols = np.zeros(spec.N, dtype=bool)
    for lab in labels:
        r = spec.columns[lab]
        cols[r.start : r.stop] = True
    return np.tile(cols, spec.N)
