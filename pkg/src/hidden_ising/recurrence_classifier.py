"""Partition of non-recurrent configurations into seven classes, with reduction certificates.

A reduction is a sequence of straight segment moves. A segment move flips a
run of equal spins along a row or column one cell at a time, which covers
single corner flips, side flips, strip removals and full column flips. The
reducer picks the downhill move with the smallest climb. When no downhill move
fits the climb budget it follows energy-neutral moves breadth first until one
does.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .config import SpinConfiguration, region_mask
from .lattice import ModelSpec, Regime, RegionLabel
from .paths import PathRecord, sigma_a_family

CLASS_TAGS = ("X1", "X2", "X3", "X4", "X5", "X6", "X7")
STABLE_OR_META = "StableOrMeta"
_DIRECTIONS = ("up", "down", "left", "right")


class ReductionFailure(RuntimeError):
    """No admissible reduction was found, or the certified climb broke the budget."""

    def __init__(self, message: str, certificate: "ReductionCertificate | None" = None):
        super().__init__(message)
        self.certificate = certificate


class ClimbBoundExceeded(ReductionFailure):
    pass


# -- stable and metastable sets --------------------------------------------------------------
def stable_states(spec: ModelSpec) -> list[SpinConfiguration]:
    reg = spec.regime
    minus, plus = SpinConfiguration.all_minus(spec), SpinConfiguration.all_plus(spec)
    if reg is Regime.LowAlpha:
        return sigma_a_family(spec)
    if reg is Regime.CriticalEqual:
        return [minus, plus, *sigma_a_family(spec)]
    if reg is Regime.CriticalStrict:
        return [minus, *sigma_a_family(spec)]
    if reg in (Regime.MidAlpha, Regime.HighAlpha, Regime.VeryHighAlpha):
        return [minus, plus] if spec.n == spec.m else [minus]
    return []  # outside the supported regimes nothing is treated as recurrent


def metastable_states(spec: ModelSpec) -> list[SpinConfiguration]:
    """Metastable states as stated per regime; empty where none is identified (alpha = n, or n = m above m)."""
    reg = spec.regime
    if reg is Regime.LowAlpha:
        return [SpinConfiguration.all_minus(spec), SpinConfiguration.all_plus(spec)]
    if reg in (Regime.MidAlpha, Regime.HighAlpha, Regime.VeryHighAlpha) and spec.n < spec.m:
        return [SpinConfiguration.all_plus(spec)]
    return []


def stable_and_metastable(spec: ModelSpec) -> list[SpinConfiguration]:
    return stable_states(spec) + metastable_states(spec)


@lru_cache(maxsize=64)
def _recurrent_keys(spec: ModelSpec) -> frozenset[bytes]:
    return frozenset(c.key() for c in stable_and_metastable(spec))


def is_recurrent(config: SpinConfiguration) -> bool:
    return config.key() in _recurrent_keys(config.spec)


# -- classification ----------------------------------------------------------------------------
def _region_labels(spec: ModelSpec, mask: np.ndarray, sign: int, spins: np.ndarray) -> np.ndarray:
    """Connected components of {sign} restricted to ``mask``; -1 outside."""
    member = mask & (spins == sign)
    labels = -np.ones(spec.sites, dtype=np.int64)
    nbr = spec.neighbor_table
    current = 0
    for s in np.flatnonzero(member):
        if labels[s] >= 0:
            continue
        labels[s] = current
        stack = [int(s)]
        while stack:
            x = stack.pop()
            for y in nbr[x]:
                if member[y] and labels[y] < 0:
                    labels[y] = current
                    stack.append(int(y))
        current += 1
    return labels


def _has_concave_site(spec: ModelSpec, spins: np.ndarray, mask: np.ndarray, sign: int) -> bool:
    """Is there an opposite-sign site in ``mask`` touching one cluster of ``sign`` on two or more sides?"""
    labels = _region_labels(spec, mask, sign, spins)
    nbr = spec.neighbor_table
    for j in np.flatnonzero(mask & (spins == -sign)):
        seen = [labels[y] for y in nbr[j] if labels[y] >= 0]
        if len(seen) >= 2 and len(set(seen)) < len(seen):
            return True
    return False


def classify(spec: ModelSpec, config: SpinConfiguration) -> str:
    """Return the first matching class tag, or ``StableOrMeta`` for the recurrent states."""
    if is_recurrent(config):
        return STABLE_OR_META
    spins = config.spins
    a = region_mask(spec, RegionLabel.A)
    b = region_mask(spec, RegionLabel.B)
    s = region_mask(spec, RegionLabel.S1, RegionLabel.S2)
    if np.any(spins[a] > 0):
        return "X1" if _has_concave_site(spec, spins, a, 1) else "X2"
    if np.any(spins[b] < 0):
        return "X3" if _has_concave_site(spec, spins, b, -1) else "X4"
    if np.any(spins[s] > 0):
        return "X5" if _has_concave_site(spec, spins, s, 1) else "X6"
    return "X7"


# -- segment moves -----------------------------------------------------------------------------
@lru_cache(maxsize=64)
def _runs(spec: ModelSpec) -> np.ndarray:
    """runs[d, start, k] is the k-th cell walking from ``start`` in direction d."""
    nbr = spec.neighbor_table
    out = np.empty((4, spec.sites, spec.N), dtype=np.int64)
    for d in range(4):
        out[d, :, 0] = np.arange(spec.sites)
        for k in range(1, spec.N):
            out[d, :, k] = nbr[out[d, :, k - 1], d]
    return out


@dataclass(frozen=True)
class SegmentMove:
    direction: int
    start: int
    length: int
    climb: int  # scaled, relative to the energy before the move
    net: int  # scaled

    def cells(self, spec: ModelSpec) -> list[int]:
        return [int(c) for c in _runs(spec)[self.direction, self.start, : self.length]]

    def label(self, spec: ModelSpec) -> str:
        r, c = spec.site(self.start)
        return f"{_DIRECTIONS[self.direction]}:{r},{c}x{self.length}"


def segment_table(spec: ModelSpec, spins: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cumulative energy, running maximum and validity for every segment prefix (scaled)."""
    p, q = spec.alpha.numerator, spec.alpha.denominator
    nbr = spec.neighbor_table
    s = spins.astype(np.int64)
    local = 2 * q * spec.preference * s + p * s * s[nbr].sum(axis=1)
    runs = _runs(spec)
    same = s[runs] == s[runs[:, :, :1]]
    valid = np.cumprod(same, axis=2).astype(bool)
    inc = local[runs].copy()
    inc[:, :, 1:] -= 2 * p
    inc[:, :, -1] -= 2 * p  # the last cell of a full loop also touches the first
    cum = np.cumsum(inc, axis=2)
    top = np.maximum(np.maximum.accumulate(cum, axis=2), 0)
    return cum, top, valid


def _best_move(spec: ModelSpec, cum, top, valid, *, net_below: bool, bound: int | None) -> SegmentMove | None:
    ok = valid & ((cum < 0) if net_below else (cum == 0))
    if bound is not None:
        ok &= top <= bound
    if not ok.any():
        return None
    d, st, k = np.nonzero(ok)
    order = np.lexsort((d, st, k, top[d, st, k]))
    i = order[0]
    return SegmentMove(int(d[i]), int(st[i]), int(k[i]) + 1, int(top[d[i], st[i], k[i]]), int(cum[d[i], st[i], k[i]]))


def _neutral_moves(spec: ModelSpec, cum, top, valid, bound: int) -> list[SegmentMove]:
    ok = valid & (cum == 0) & (top <= bound)
    d, st, k = np.nonzero(ok)
    order = np.lexsort((d, st, k, top[d, st, k]))
    return [SegmentMove(int(d[i]), int(st[i]), int(k[i]) + 1, int(top[d[i], st[i], k[i]]), 0) for i in order]


# -- certificates ---------------------------------------------------------------------------------
@dataclass
class ReductionCertificate:
    class_tag: str
    path: PathRecord
    max_climb: Fraction
    moves: list[str] = field(default_factory=list)
    rounds: int = 1

    @property
    def drop(self) -> Fraction:
        return self.path.spec.unscale(self.path.scaled[-1] - self.path.scaled[0])

    def header(self) -> dict:
        return {
            "class": self.class_tag,
            "climb": str(self.max_climb),
            "drop": str(self.drop),
            "rounds": self.rounds,
            "moves": self.moves,
        }

    def to_json(self) -> str:
        return json.dumps(self.header(), indent=2)


def climb_budget(spec: ModelSpec) -> Fraction:
    return 2 * (spec.alpha - 1)


def _certificate(spec, tag, start: SpinConfiguration, moves: list[SegmentMove]) -> ReductionCertificate:
    cur = start.copy()
    flips: list[int] = []
    scaled = [int(cur.energy_scaled())]
    segments = []
    labels = []
    for mv in moves:
        first = len(flips)
        for c in mv.cells(spec):
            cur.flip(c)
            flips.append(c)
            scaled.append(int(cur.energy_scaled()))
        segments.append((mv.label(spec), first, len(flips)))
        labels.append(mv.label(spec))
    path = PathRecord(spec, f"reduce-{tag}", start.copy(), flips, scaled, segments)
    climb = spec.unscale(max(scaled) - scaled[0])
    return ReductionCertificate(tag, path, climb, labels)


def reduce(spec: ModelSpec, config: SpinConfiguration, *, node_cap: int = 4000, enforce: bool = True) -> ReductionCertificate:
    """Certify that ``config`` reaches strictly lower energy within the climb budget 2(alpha-1).

    Raises ``ClimbBoundExceeded`` (carrying the best certificate found) when the
    only downhill sequences climb higher, and ``ReductionFailure`` when none exists
    in the move vocabulary.
    """
    tag = classify(spec, config)
    if tag == STABLE_OR_META:
        raise ValueError("stable and metastable states have no reduction")
    bound = int(climb_budget(spec) * spec.energy_scale)
    cum, top, valid = segment_table(spec, config.spins)
    move = _best_move(spec, cum, top, valid, net_below=True, bound=bound)
    if move is not None:
        return _certificate(spec, tag, config, [move])

    # energy-neutral plateau search; climbs stay measured from the starting energy
    seen = {config.key()}
    queue: deque[tuple[SpinConfiguration, list[SegmentMove]]] = deque([(config, [])])
    while queue and len(seen) < node_cap:
        cur, moves = queue.popleft()
        c2, t2, v2 = (cum, top, valid) if not moves else segment_table(spec, cur.spins)
        if moves:
            mv = _best_move(spec, c2, t2, v2, net_below=True, bound=bound)
            if mv is not None:
                return _certificate(spec, tag, config, moves + [mv])
        for mv in _neutral_moves(spec, c2, t2, v2, bound):
            nxt = cur.copy()
            for c in mv.cells(spec):
                nxt.flip(c)
            key = nxt.key()
            if key not in seen:
                seen.add(key)
                queue.append((nxt, moves + [mv]))

    fallback = _best_move(spec, cum, top, valid, net_below=True, bound=None)
    if fallback is None:
        raise ReductionFailure(f"{tag}: no downhill segment sequence from this configuration")
    cert = _certificate(spec, tag, config, [fallback])
    if enforce:
        raise ClimbBoundExceeded(
            f"{tag}: smallest climb {cert.max_climb} exceeds the budget {climb_budget(spec)}", cert
        )
    return cert


def reduce_to_recurrent(
    spec: ModelSpec, config: SpinConfiguration, *, max_rounds: int | None = None, enforce: bool = True
) -> list[ReductionCertificate]:
    """Apply ``reduce`` until a stable or metastable state is reached; at most N^2 rounds by default."""
    limit = spec.sites if max_rounds is None else max_rounds
    certs: list[ReductionCertificate] = []
    cur = config
    for r in range(limit + 1):
        if is_recurrent(cur):
            return certs
        if r == limit:
            break
        cert = reduce(spec, cur, enforce=enforce)
        cert.rounds = r + 1
        certs.append(cert)
        cur = cert.path.end
    raise ReductionFailure(f"not recurrent after {limit} rounds", certs[-1] if certs else None)
