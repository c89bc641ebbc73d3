"""Named configuration families, reference transition paths and gate sets.

Conventions
-----------
* ``RectProt(region, a, b, q)`` is a rectangle ``a`` columns wide and ``b``
  rows tall with ``q`` extra cells on one of its horizontal sides (the side
  of length ``a``). Gate families also include the 90 degree rotation.
* ``Column(region, r, s, t)`` holds ``s`` full columns at distances
  ``r .. r+s-1`` from S1 plus ``t`` consecutive cells in a neighbouring
  column, either past the last full column (``side="far"``) or before the
  first (``side="near"``). Column ``n-d`` of A and column ``n+k-1+d`` of B
  are at distance ``d`` from S1.
* B-side families are complements: minus on the listed cells, plus elsewhere.

Every reference path is built by explicit single flips from its start
state, and elevations are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .config import SpinConfiguration
from .lattice import ModelSpec, Regime, RegionLabel


class RegimeMismatch(ValueError):
    """A path, closed form or gate is not defined for the spec's regime."""


class FamilyRangeError(ValueError):
    """Family parameters outside their admissible range."""


# -- configuration helpers ----------------------------------------------------------
def _cells_config(spec: ModelSpec, cells: Iterable[tuple[int, int]], region_side: str) -> SpinConfiguration:
    if region_side == "B":
        return SpinConfiguration.from_minus_cells(spec, cells)
    return SpinConfiguration.from_plus_cells(spec, cells)


def _region_side(region: RegionLabel | str) -> str:
    name = region.value if isinstance(region, RegionLabel) else str(region)
    return "B" if name.startswith("B") else "A"


def _region_columns(spec: ModelSpec, region: RegionLabel | str) -> range:
    name = region.value if isinstance(region, RegionLabel) else str(region)
    if name == "A":
        return spec.columns[RegionLabel.A]
    if name == "B":
        return spec.columns[RegionLabel.B]
    if name in ("BS", "B+S"):
        # B together with both neutral strips: columns [n, N)
        return range(spec.n, spec.N)
    raise FamilyRangeError(f"unknown region {region!r}")


def sigma_a_cells(spec: ModelSpec, ell: int, p: int) -> list[tuple[int, int]]:
    if not (0 <= ell <= spec.k and 0 <= p <= spec.k):
        raise FamilyRangeError(f"need 0 <= l, p <= k={spec.k}")
    cols = list(range(spec.n)) + [spec.n + j for j in range(ell)] + [spec.N - 1 - j for j in range(p)]
    return [(r, c) for r in range(spec.N) for c in cols]


def sigma_a(spec: ModelSpec, ell: int = 0, p: int = 0) -> SpinConfiguration:
    """Plus on A, on the ``ell`` S1 columns and ``p`` S2 columns touching A; minus elsewhere."""
    return SpinConfiguration.from_plus_cells(spec, sigma_a_cells(spec, ell, p))


def sigma_a_family(spec: ModelSpec) -> list[SpinConfiguration]:
    return [sigma_a(spec, ell, p) for ell in range(spec.k + 1) for p in range(spec.k + 1)]


def rect_prot_cells(
    a: int,
    b: int,
    q: int,
    row0: int = 0,
    col0: int = 0,
    *,
    rotated: bool = False,
    side: str = "top",
    offset: int = 0,
) -> list[tuple[int, int]]:
    """Cells of an a x b rectangle with a q-protuberance on a side of length a.

    Unrotated: ``a`` columns by ``b`` rows, protuberance on the top or bottom
    row. Rotated: ``a`` rows by ``b`` columns, protuberance on the left or
    right column. Coordinates are not reduced modulo N.
    """
    if not (0 <= q <= a - 1 or (q == 0 and a >= 1)) or offset < 0 or offset + q > a:
        raise FamilyRangeError(f"bad protuberance q={q}, offset={offset} for side {a}")
    if rotated:
        cells = [(row0 + i, col0 + j) for i in range(a) for j in range(b)]
        pc = col0 - 1 if side in ("top", "left") else col0 + b
        cells += [(row0 + offset + i, pc) for i in range(q)]
    else:
        cells = [(row0 + i, col0 + j) for i in range(b) for j in range(a)]
        pr = row0 - 1 if side in ("top", "left") else row0 + b
        cells += [(pr, col0 + offset + j) for j in range(q)]
    return cells


def column_cells(
    spec: ModelSpec,
    region: str,
    r: int,
    s: int,
    t: int,
    *,
    side: str = "far",
    row0: int = 0,
) -> list[tuple[int, int]]:
    """Cells of the column family: s full columns plus t cells of a neighbouring column."""
    width = spec.n if region == "A" else spec.m
    part = r + s if side == "far" else r - 1
    if s == 0:
        part = r
    if not (1 <= r and r + s - 1 <= width and 0 <= t <= spec.N):
        raise FamilyRangeError(f"column family out of range (r={r}, s={s}, t={t})")
    if t and not (1 <= part <= width):
        raise FamilyRangeError(f"incomplete column at distance {part} outside the strip")

    def col_at(d: int) -> int:
        return spec.n - d if region == "A" else spec.n + spec.k - 1 + d

    cells = [(row, col_at(d)) for d in range(r, r + s) for row in range(spec.N)]
    cells += [((row0 + i) % spec.N, col_at(part)) for i in range(t)]
    return cells


# -- named families -------------------------------------------------------------------
@dataclass(frozen=True)
class NamedFamily:
    tag: str
    params: tuple = ()

    @staticmethod
    def SigmaA(ell: int, p: int) -> "NamedFamily":
        return NamedFamily("SigmaA", (ell, p))

    @staticmethod
    def RectProt(region: str, a: int, b: int, q: int) -> "NamedFamily":
        return NamedFamily("RectProt", (region, a, b, q))

    @staticmethod
    def QuasiSquareProt(region: str, ell: int, q: int) -> "NamedFamily":
        return NamedFamily("QuasiSquareProt", (region, ell, q))

    @staticmethod
    def Column(region: str, r: int, s: int, t: int) -> "NamedFamily":
        return NamedFamily("Column", (region, r, s, t))


GATE_TAGS = ("GateGA", "GateGB", "GateRA", "GateRB", "GateCA", "GateCB")


def build_family(spec: ModelSpec, family: NamedFamily | str, *, all_placements: bool = False):
    """Materialise a named family.

    Parametrised shapes return one canonical placement (or every admissible
    placement with ``all_placements=True``); gate tags return lists.
    """
    if isinstance(family, str):
        family = NamedFamily(family)
    tag, params = family.tag, family.params
    if tag == "SigmaA":
        return sigma_a(spec, *params)
    if tag == "RectProt":
        region, a, b, q = params
        if all_placements:
            return rect_prot_placements(spec, region, a, b, q)
        cols = _region_columns(spec, region)
        if a > len(cols) or b + (1 if q else 0) > spec.N:
            raise FamilyRangeError("rectangle does not fit in the region")
        return _cells_config(spec, rect_prot_cells(a, b, q, 1 if q else 0, cols.start, side="top"), _region_side(region))
    if tag == "QuasiSquareProt":
        region, ell, q = params
        return build_family(spec, NamedFamily.RectProt(region, ell, ell, q), all_placements=all_placements)
    if tag == "Column":
        region, r, s, t = params
        if all_placements:
            out = {}
            for side in ("far", "near"):
                for row0 in range(spec.N):
                    try:
                        cfg = _cells_config(spec, column_cells(spec, region, r, s, t, side=side, row0=row0), region)
                    except FamilyRangeError:
                        continue
                    out[cfg.key()] = cfg
            return list(out.values())
        return _cells_config(spec, column_cells(spec, region, r, s, t), region)
    if tag in GATE_TAGS:
        return gate_set(spec, tag)
    raise FamilyRangeError(f"unknown family tag {tag!r}")


def rect_prot_placements(
    spec: ModelSpec, region: str, a: int, b: int, q: int, *, rotations: bool = True
) -> list[SpinConfiguration]:
    """All translates (and optionally rotations) of RectProt(region, a, b, q) inside the region's columns."""
    cols = _region_columns(spec, region)
    N = spec.N
    if b < 1 or a < 1:
        raise FamilyRangeError("rectangle sides must be positive")
    out: dict[bytes, SpinConfiguration] = {}
    sides = ("top", "bottom") if q else ("top",)
    for rotated in ((False, True) if rotations else (False,)):
        width = (b + (1 if q else 0)) if rotated else a
        height = a if rotated else b + (1 if q else 0)
        if width > len(cols) or height > N:
            continue
        for row0 in range(N):
            for side in sides:
                for col0 in range(cols.start, cols.stop):
                    for offset in range(a - q + 1 if q else 1):
                        cells = rect_prot_cells(a, b, q, row0, col0, rotated=rotated, side=side, offset=offset)
                        if not all(cols.start <= c < cols.stop for _, c in cells):
                            continue
                        cfg = _cells_config(spec, [(r % N, c) for r, c in cells], _region_side(region))
                        out.setdefault(cfg.key(), cfg)
    return list(out.values())


def gate_set(spec: ModelSpec, tag: str) -> list[SpinConfiguration]:
    """Materialise one gate family with all admissible placements."""
    alpha = spec.alpha
    N, n, m = spec.N, spec.n, spec.m
    if tag in ("GateGA", "GateGB"):
        width = n if tag == "GateGA" else m
        if alpha.denominator != 1 or alpha > width or alpha < 2:
            raise FamilyRangeError(f"{tag} needs integer 2 <= alpha <= strip width {width}")
        a = int(alpha)
        return rect_prot_placements(spec, "A" if tag == "GateGA" else "B", a, a - 1, 1)
    if tag in ("GateRA", "GateRB"):
        width = n if tag == "GateRA" else m
        region = "A" if tag == "GateRA" else "B"
        out: dict[bytes, SpinConfiguration] = {}
        for rows in range(width - 1, N - 1):
            for cfg in rect_prot_placements(spec, region, width, rows, 1):
                out.setdefault(cfg.key(), cfg)
        return list(out.values())
    if tag in ("GateCA", "GateCB"):
        region = "A" if tag == "GateCA" else "B"
        width = n if region == "A" else m
        out = {}
        for r in range(1, width + 1):
            for cfg in build_family(spec, NamedFamily.Column(region, r, 1, 1), all_placements=True):
                out.setdefault(cfg.key(), cfg)
        return list(out.values())
    if tag in ("RectA_N2", "RectB_N2"):
        region = "A" if tag == "RectA_N2" else "B"
        width = n if region == "A" else m
        return rect_prot_placements(spec, region, width, N - 2, 1)
    raise FamilyRangeError(f"unknown gate tag {tag!r}")


# -- path records ---------------------------------------------------------------------
@dataclass
class PathRecord:
    """Single-flip path stored as a start configuration plus the flipped sites."""

    spec: ModelSpec
    name: str
    start: SpinConfiguration
    flips: list[int]
    scaled: list[int]  # q * H along the path, including the start
    segments: list[tuple[str, int, int]] = field(default_factory=list)  # (name, first index, last index)

    @property
    def elevations(self) -> list[Fraction]:
        return [self.spec.unscale(v) for v in self.scaled]

    @property
    def max_elevation(self) -> Fraction:
        return self.spec.unscale(max(self.scaled))

    @property
    def saddle_indices(self) -> list[int]:
        top = max(self.scaled)
        return [i for i, v in enumerate(self.scaled) if v == top]

    def __len__(self) -> int:
        return len(self.scaled)

    def iter_states(self) -> Iterator[SpinConfiguration]:
        cur = self.start.copy()
        yield cur.copy()
        for i in self.flips:
            cur.flip(i)
            yield cur.copy()

    @property
    def states(self) -> list[SpinConfiguration]:
        return list(self.iter_states())

    def state(self, index: int) -> SpinConfiguration:
        cur = self.start.copy()
        for i in self.flips[:index]:
            cur.flip(i)
        return cur

    @property
    def end(self) -> SpinConfiguration:
        return self.state(len(self.flips))

    def segment_max(self, name: str) -> Fraction:
        for seg, lo, hi in self.segments:
            if seg == name:
                return self.spec.unscale(max(self.scaled[lo : hi + 1]))
        raise KeyError(name)

    def reversed(self, name: str | None = None) -> "PathRecord":
        end = self.end
        return PathRecord(
            self.spec,
            name or f"reverse({self.name})",
            end,
            list(reversed(self.flips)),
            list(reversed(self.scaled)),
            [(s, len(self.scaled) - 1 - hi, len(self.scaled) - 1 - lo) for s, lo, hi in reversed(self.segments)],
        )

    def validate(self) -> None:
        """Check Hamming-1 steps and exact elevations by full re-evaluation."""
        from .config import direct_energy_scaled

        prev = None
        for idx, st in enumerate(self.iter_states()):
            if direct_energy_scaled(self.spec, st.spins) != self.scaled[idx]:
                raise AssertionError(f"elevation mismatch at step {idx}")
            if prev is not None and int(np.count_nonzero(prev.spins != st.spins)) != 1:
                raise AssertionError(f"step {idx} is not a single flip")
            prev = st

    def to_csv_rows(self) -> list[dict]:
        top = max(self.scaled)
        return [
            {"step": i, "energy": str(self.spec.unscale(v)), "is_saddle": int(v == top)}
            for i, v in enumerate(self.scaled)
        ]


def concatenate(name: str, parts: Sequence[PathRecord]) -> PathRecord:
    first = parts[0]
    flips: list[int] = []
    scaled = [first.scaled[0]]
    segments: list[tuple[str, int, int]] = []
    cur_end = first.start
    for part in parts:
        if part.start != cur_end:
            raise AssertionError(f"path {part.name} does not start where the previous one ended")
        offset = len(scaled) - 1
        for seg, lo, hi in part.segments or [(part.name, 0, len(part.scaled) - 1)]:
            segments.append((seg, lo + offset, hi + offset))
        flips.extend(part.flips)
        scaled.extend(part.scaled[1:])
        cur_end = part.end
    return PathRecord(first.spec, name, first.start.copy(), flips, scaled, segments)


class _Builder:
    """Accumulates flips from a start configuration, tracking exact energies."""

    def __init__(self, spec: ModelSpec, start: SpinConfiguration):
        self.spec = spec
        self.start = start.copy()
        self.cur = start.copy()
        self.flips: list[int] = []
        self.scaled = [start.energy_scaled()]

    def set(self, cell: tuple[int, int], sign: int) -> None:
        i = self.spec.index(cell)
        if self.cur.spins[i] == sign:
            raise AssertionError(f"cell {cell} already has sign {sign}")
        self.cur.flip(i)
        self.flips.append(i)
        self.scaled.append(self.cur.energy_scaled())

    def record(self, name: str) -> PathRecord:
        return PathRecord(self.spec, name, self.start, self.flips, self.scaled, [(name, 0, len(self.scaled) - 1)])


@dataclass
class _Droplet:
    """Axis-aligned rectangle being grown: top-left corner and size (not reduced mod N)."""

    row0: int
    col0: int
    w: int = 0
    h: int = 0


def _add_row(b: _Builder, d: _Droplet, sign: int) -> None:
    r = d.row0 + d.h
    for j in range(d.w):
        b.set((r % b.spec.N, (d.col0 + j) % b.spec.N), sign)
    d.h += 1


def _add_col(b: _Builder, d: _Droplet, sign: int, side: str) -> None:
    c = d.col0 + d.w if side == "right" else d.col0 - 1
    for i in range(d.h):
        b.set(((d.row0 + i) % b.spec.N, c % b.spec.N), sign)
    if side == "left":
        d.col0 -= 1
    d.w += 1


def _grow_quasi_square(
    b: _Builder, d: _Droplet, sign: int, target_w: int, target_h: int, column_side: Callable[[], str]
) -> None:
    """Grow by whole sides, keeping height <= width + 1, until the target size."""
    if d.w == 0:
        b.set((d.row0 % b.spec.N, d.col0 % b.spec.N), sign)
        d.w = d.h = 1
    while (d.w, d.h) != (target_w, target_h):
        want_row = d.h <= d.w
        if want_row and d.h >= target_h:
            want_row = False
        if not want_row and d.w >= target_w:
            want_row = True
        if want_row:
            _add_row(b, d, sign)
        else:
            _add_col(b, d, sign, column_side())


def _always(side: str) -> Callable[[], str]:
    return lambda: side


def _alternating(first: str) -> Callable[[], str]:
    state = {"next": first}

    def nxt() -> str:
        s = state["next"]
        state["next"] = "right" if s == "left" else "left"
        return s

    return nxt


# -- reference paths ------------------------------------------------------------------
LOW_ALPHA_PATHS = ("w̄1", "w̄2", "w̄*1", "w̄*2", "w̄*3")
HIGH_ALPHA_PATHS = ("w̃3", "w̃4", "w̃5", "w̃6", "w̃7", "wprime", "w*1", "w*2", "w*3", "w*4")
SHARED_PATHS = ("w̃1", "w̃2")
PATH_NAMES = LOW_ALPHA_PATHS + SHARED_PATHS + HIGH_ALPHA_PATHS

ASCII_ALIASES = {
    "wbar1": "w̄1",
    "wbar2": "w̄2",
    "wbar*1": "w̄*1",
    "wbar*2": "w̄*2",
    "wbar*3": "w̄*3",
    "wtilde1": "w̃1",
    "wtilde2": "w̃2",
    "wtilde3": "w̃3",
    "wtilde4": "w̃4",
    "wtilde5": "w̃5",
    "wtilde6": "w̃6",
    "wtilde7": "w̃7",
}


def canonical_path_name(name: str) -> str:
    name = ASCII_ALIASES.get(name, name)
    if name not in PATH_NAMES:
        raise RegimeMismatch(f"unknown path name {name!r}")
    return name


def path_is_valid_for(spec: ModelSpec, name: str) -> bool:
    name = canonical_path_name(name)
    a = spec.alpha
    if name in LOW_ALPHA_PATHS:
        return 2 <= a <= spec.n
    if name in HIGH_ALPHA_PATHS:
        return a >= spec.m + 1
    return True


def _b_origin(spec: ModelSpec) -> int:
    return spec.columns[RegionLabel.B].start


def _w_bar1(spec: ModelSpec) -> tuple[PathRecord, _Builder, _Droplet]:
    b = _Builder(spec, SpinConfiguration.all_minus(spec))
    d = _Droplet(0, 0)
    _grow_quasi_square(b, d, +1, spec.n, spec.n + 1, _always("right"))
    return b.record("w̄1"), b, d


def _w_tilde1(spec: ModelSpec) -> tuple[PathRecord, _Builder, _Droplet]:
    b = _Builder(spec, SpinConfiguration.all_plus(spec))
    d = _Droplet(0, _b_origin(spec))
    _grow_quasi_square(b, d, -1, spec.m, spec.m + 1, _always("right"))
    return b.record("w̃1"), b, d


def _continue(spec: ModelSpec, b: _Builder) -> _Builder:
    return _Builder(spec, b.cur)


def _rows_to_full(b: _Builder, d: _Droplet, sign: int) -> None:
    while d.h < b.spec.N:
        _add_row(b, d, sign)


def _w_tilde3(spec: ModelSpec) -> tuple[PathRecord, _Builder, _Droplet]:
    _, b1, d = _w_tilde1(spec)
    b = _continue(spec, b1)
    w = 2 * spec.k + spec.m
    _grow_quasi_square(b, d, -1, w, w + 1, _alternating("left"))
    return b.record("w̃3"), b, d


def _remove_columns(b: _Builder, cols: Iterable[int], sign: int) -> None:
    for c in cols:
        for r in range(b.spec.N):
            b.set((r, c), sign)


def _w_tilde6(spec: ModelSpec) -> PathRecord:
    b = _Builder(spec, sigma_a(spec, 0, 0))
    _remove_columns(b, range(spec.n - 1, -1, -1), -1)
    return b.record("w̃6")


def _w_tilde7_s_part(spec: ModelSpec) -> PathRecord:
    b = _Builder(spec, sigma_a(spec, spec.k, spec.k))
    n, k, m = spec.n, spec.k, spec.m
    s1 = range(n + k - 1, n - 1, -1)
    s2 = range(n + k + m, spec.N)
    _remove_columns(b, list(s1) + list(s2), -1)
    return b.record("w̃7:S")


def _w_prime(spec: ModelSpec) -> PathRecord:
    b = _Builder(spec, SpinConfiguration.all_plus(spec))
    cols = spec.columns[RegionLabel.B]
    _remove_columns(b, cols, -1)
    return b.record("wprime")


def _s_fill(spec: ModelSpec) -> PathRecord:
    """sigma_A(0,0) -> sigma_A(k,k) by filling neutral columns outward from A."""
    b = _Builder(spec, sigma_a(spec, 0, 0))
    n, k, N = spec.n, spec.k, spec.N
    _remove_columns(b, list(range(n, n + k)) + list(range(N - 1, N - 1 - k, -1)), +1)
    return b.record("S-fill")


def build_reference_path(spec: ModelSpec, name: str, *, check_regime: bool = True) -> PathRecord:
    """Concrete single-flip realisation of a named reference path.

    ``check_regime=False`` builds the geometric path even when its closed
    form does not apply to the spec's alpha range.
    """
    name = canonical_path_name(name)
    if check_regime and not path_is_valid_for(spec, name):
        raise RegimeMismatch(f"path {name} is not defined for alpha={spec.alpha} ({spec.regime.value})")

    if name == "w̄1":
        return _w_bar1(spec)[0]
    if name == "w̄2":
        _, b1, d = _w_bar1(spec)
        b = _continue(spec, b1)
        _rows_to_full(b, d, +1)
        return b.record("w̄2")
    if name == "w̃1":
        return _w_tilde1(spec)[0]
    if name == "w̃2":
        _, b1, d = _w_tilde1(spec)
        b = _continue(spec, b1)
        _rows_to_full(b, d, -1)
        return b.record("w̃2")
    if name == "w̃3":
        _, b1, d = _w_tilde1(spec)
        b = _continue(spec, b1)
        w = 2 * spec.k + spec.m
        _grow_quasi_square(b, d, -1, w, w + 1, _alternating("left"))
        return b.record("w̃3")
    if name == "w̃4":
        _, b3, d = _w_tilde3(spec)
        b = _continue(spec, b3)
        _rows_to_full(b, d, -1)
        return b.record("w̃4")
    if name == "w̃5":
        _, b3, d = _w_tilde3(spec)
        b = _continue(spec, b3)
        _grow_quasi_square(b, d, -1, spec.N, spec.N, _alternating("left"))
        return b.record("w̃5")
    if name == "w̃6":
        return _w_tilde6(spec)
    if name == "w̃7":
        return concatenate("w̃7", [_w_tilde7_s_part(spec), _w_tilde6(spec)])
    if name == "wprime":
        return _w_prime(spec)

    def part(n_: str) -> PathRecord:
        return build_reference_path(spec, n_, check_regime=False)

    if name == "w̄*1":
        return concatenate(name, [part("w̃1"), part("w̃2")])
    if name == "w̄*2":
        return concatenate(name, [part("w̄1"), part("w̄2")])
    if name == "w̄*3":
        return concatenate(name, [part("w̄*2"), _s_fill(spec), part("w̄*1").reversed("reverse(w̄*1)")])
    if name == "w*1":
        return concatenate(name, [part("wprime"), part("w̃7")])
    if name == "w*2":
        return concatenate(name, [part("w̃1"), part("w̃2"), part("w̃7")])
    if name == "w*3":
        return concatenate(name, [part("w̃1"), part("w̃3"), part("w̃4"), part("w̃6")])
    if name == "w*4":
        return concatenate(name, [part("w̃1"), part("w̃3"), part("w̃5")])
    raise RegimeMismatch(name)  # pragma: no cover


# -- closed forms as printed ------------------------------------------------------------
def energy_plus(spec: ModelSpec) -> Fraction:
    return Fraction(spec.N * (spec.m - spec.n)) - spec.alpha * spec.N**2


def energy_minus(spec: ModelSpec) -> Fraction:
    return Fraction(spec.N * (spec.n - spec.m)) - spec.alpha * spec.N**2


def energy_sigma_a(spec: ModelSpec) -> Fraction:
    N, n, m, a = spec.N, spec.n, spec.m, spec.alpha
    return -N * (n + m) + 2 * a * N - a * N * N


def _printed_sub_path_forms(spec: ModelSpec) -> dict[str, Fraction]:
    """Each sub-path's max minus H(+1), as tabulated for alpha >= m+1."""
    N, n, m, k, a = spec.N, spec.n, spec.m, spec.k, spec.alpha
    g = max(Fraction(m, 2), Fraction(n + 1))
    d = 2 * N * (n - m)
    out = {
        "wprime": 2 * (N * m - N - 1 - N * n) + 2 * a * (N + 1) + d,
        "w̃2": 2 * (N * m - m * (N - 2) - 1 - N * n) + 2 * a * (m + N - 1) + d,
        "w̃4": 2 * (N * m - (2 * k + m) * (N - 2) - 1 - N * n) + 2 * a * (2 * k + m + N - 1) + d,
        "w̃5": 2 * (N * m - (N - 2) * (N - 2) - 1 - N * n + (n - 2) * (N - 2)) + 2 * a * (2 * N - 3) + d,
        "w̃6": 2 * (N * n - N - 1 - N * m) + 2 * a * (N + 1) + 2 * N * (m - n),
        "w̃7": 2 * (N * n - N - 1 - N * m) + 2 * a * (N + 1) + 2 * N * (m - n),
    }
    if a <= m:
        out["w̃1"] = 2 * (N * m - a * (a + 1) - 1 - N * n) + 2 * a * (2 * a + 2) + d
    else:
        out["w̃1"] = 2 * (N * m - m * (m + 1) - 1 - N * n) + 2 * a * (2 * m + 2) + d
    if a >= g:
        out["w̃3"] = 2 * (N * m - (2 * k + m) * (2 * k + m + 1) - 1 - N * n) + 2 * a * (4 * k + 2 * m + 2) + d
    else:
        out["w̃3"] = 2 * (N * m - m * (m + 1) - 1 - N * n) + 2 * a * (2 * m + 2) + d
    out = {key: Fraction(v) for key, v in out.items()}
    out["w*1"] = max(out["wprime"], out["w̃7"])
    out["w*2"] = max(out["w̃1"], out["w̃2"], out["w̃7"])
    out["w*3"] = max(out["w̃1"], out["w̃3"], out["w̃4"], out["w̃6"])
    out["w*4"] = max(out["w̃1"], out["w̃3"], out["w̃5"])
    return out


@dataclass(frozen=True)
class PrintedForm:
    path: str
    source: str  # which printed statement supplies the value
    value: Fraction


def printed_forms(spec: ModelSpec) -> list[PrintedForm]:
    """Every printed closed form that applies to the spec's regime."""
    N, n, m, a = spec.N, spec.n, spec.m, spec.alpha
    reg = spec.regime
    out: list[PrintedForm] = []
    if reg is Regime.LowAlpha:
        v = N * (m - n) + 2 * a * a - a * (N * N - 2) - 2
        out.append(PrintedForm("w̄*1", "upper bound 2<=alpha<n, +1 side", Fraction(v)))
        out.append(PrintedForm("w̄*2", "upper bound 2<=alpha<n, -1 side", Fraction(v)))
        out.append(PrintedForm("w̃1", "sub-path table, alpha<=m branch", energy_plus(spec) + _printed_sub_path_forms(spec)["w̃1"]))
    elif reg is Regime.CriticalEqual:
        out.append(PrintedForm("w̄*3", "upper bound alpha=n=m", Fraction(2 * n * n - n * (N * N - 2) - 2)))
        out.append(PrintedForm("w̃1", "sub-path table, alpha<=m branch", energy_plus(spec) + _printed_sub_path_forms(spec)["w̃1"]))
    elif reg is Regime.CriticalStrict:
        out.append(
            PrintedForm("w̄*2", "upper bound alpha=n<m, -1 side", Fraction(N * (m - n) + 2 * n * n - n * (N * N - 2) - 2))
        )
        out.append(PrintedForm("w̃1", "sub-path table, alpha<=m branch", energy_plus(spec) + _printed_sub_path_forms(spec)["w̃1"]))
    elif reg in (Regime.MidAlpha, Regime.HighAlpha, Regime.VeryHighAlpha):
        hp = energy_plus(spec)
        for key, val in _printed_sub_path_forms(spec).items():
            out.append(PrintedForm(key, "sub-path table", hp + val))
        if reg is Regime.HighAlpha:
            v = -N * (n + m) - a * N * N + 2 * (2 * m - 1) + 2 * a * (N + m - 1)
            out.append(PrintedForm("w*2", "upper bound 2k+m<=alpha<alpha*", Fraction(v)))
        if reg is Regime.VeryHighAlpha:
            v = N * (m - n) - a * N * N + 2 * (a - 1) * (N + 1)
            out.append(PrintedForm("w*1", "upper bound alpha>=alpha*", Fraction(v)))
    return out


def closed_form_phi(spec: ModelSpec, name: str) -> Fraction:
    """Printed closed form for the maximum along a named path (absolute energy)."""
    name = canonical_path_name(name)
    forms = [f for f in printed_forms(spec) if f.path == name]
    if not forms:
        raise RegimeMismatch(f"no printed closed form for {name} in regime {spec.regime.value}")
    return forms[0].value


# -- independently derived exact maxima ----------------------------------------------
# Each formula below adds up per-cell costs (field change plus alpha times the
# contour change) for whole rows or columns, without flipping any spins.


def _strip_growth_peak(alpha: Fraction, target_w: int, target_h: int) -> Fraction:
    """Peak energy, relative to the sea, of quasi-square growth inside one preferred strip."""
    best = 4 * alpha - 2  # first cell
    w = h = 1
    while (w, h) != (target_w, target_h):
        # a new side starts with a cell touching one droplet neighbour
        best = max(best, -2 * w * h + 2 * alpha * (w + h) + 2 * alpha - 2)
        if h <= w and h < target_h:
            h += 1
        else:
            w += 1
    return max(best, -2 * w * h + 2 * alpha * (w + h))


def _rows_to_full_peak(alpha: Fraction, width: int, h0: int, N: int) -> Fraction:
    """Peak while extending a width x h0 preferred-strip rectangle to full height (relative to the sea)."""
    best = -2 * width * h0 + 2 * alpha * (width + h0)
    for h in range(h0, N - 1):
        best = max(best, -2 * width * h + 2 * alpha * (width + h) + 2 * alpha - 2)
    return max(best, -2 * width * N + 2 * alpha * N)


def _neutral_growth_peaks(spec: ModelSpec) -> tuple[Fraction, Fraction]:
    """Peaks of the B-droplet spreading into both neutral strips, then to full height (relative to +1)."""
    m, k, N, a = spec.m, spec.k, spec.N, spec.alpha

    def rect(h: int, w: int) -> Fraction:
        return -2 * m * h + 2 * a * (w + h)

    w, h = m, m + 1
    cur = rect(h, w)
    best3 = cur
    for _ in range(2 * k):
        # neutral column: +2a on its first cell, flat afterwards
        w += 1
        cur = rect(h, w)
        best3 = max(best3, cur)
        # row: first cell lies in a neutral strip (+2a), then B cells lower it
        best3 = max(best3, cur + 2 * a)
        h += 1
        cur = rect(h, w)
    best4 = cur
    for hh in range(h, N - 1):
        best4 = max(best4, rect(hh, w) + 2 * a)
    best4 = max(best4, -2 * m * N + 2 * a * N)
    return best3, best4


def derived_phi(spec: ModelSpec, name: str) -> Fraction:
    """Hand-derived maximum along a constructed path, as an oracle independent of the flip builder.

    Covers every named path except the growth of the droplet into A, whose
    stages mix three field values and wrap around the torus.
    """
    name = canonical_path_name(name)
    N, n, m, a = spec.N, spec.n, spec.m, spec.alpha
    hp, hm, hs = energy_plus(spec), energy_minus(spec), energy_sigma_a(spec)
    bar1 = hm + _strip_growth_peak(a, n, n + 1)
    bar2 = hm + _rows_to_full_peak(a, n, n + 1, N)
    til1 = hp + _strip_growth_peak(a, m, m + 1)
    til2 = hp + _rows_to_full_peak(a, m, m + 1, N)
    # emptying A column by column from sigma_A(0,0); the last column only costs its field
    til6 = hs + max(Fraction(0), 2 * N * (n - 1) - 2 + 2 * a, Fraction(2 * N * (n - 1) + 2))
    til7 = max(hs + 2 * a, til6)
    # first B column costs 4a-2 then 2a-2 per cell; later columns peak one cell in
    prime = hp + max(2 * a * N - 2 * N + 2, 2 * (a - 1) * (N + 1) if m >= 2 else Fraction(-(10**9)))
    peak3, peak4 = _neutral_growth_peaks(spec)
    table = {
        "w̄1": bar1,
        "w̄2": bar2,
        "w̄*2": max(bar1, bar2),
        "w̃1": til1,
        "w̃2": til2,
        "w̄*1": max(til1, til2),
        "w̄*3": max(bar1, bar2, hs + 2 * a, til1, til2),
        "w̃3": hp + peak3,
        "w̃4": hp + peak4,
        "w̃6": til6,
        "w̃7": til7,
        "wprime": prime,
        "w*1": max(prime, til7),
        "w*2": max(til1, til2, til7),
        "w*3": max(til1, hp + peak3, hp + peak4, til6),
    }
    if name not in table:
        raise RegimeMismatch(f"no derived closed form for {name}")
    return table[name]


# -- gamma star -------------------------------------------------------------------------
@dataclass
class GammaStar:
    regime: Regime
    height: Fraction
    transitions: dict[str, str]  # start name -> target description
    barrier_from: dict[str, Fraction]
    path_barrier_from: dict[str, Fraction]
    reference_paths: dict[str, str]
    discrepancies: list[str]


def named_state(spec: ModelSpec, name: str) -> SpinConfiguration:
    if name == "-1":
        return SpinConfiguration.all_minus(spec)
    if name == "+1":
        return SpinConfiguration.all_plus(spec)
    if name.startswith("sigmaA"):
        ell, p = (int(x) for x in name[len("sigmaA(") : -1].split(","))
        return sigma_a(spec, ell, p)
    raise KeyError(name)


def regime_transitions(spec: ModelSpec) -> dict[str, tuple[str, str]]:
    """Start state -> (target description, reference path) per regime."""
    reg = spec.regime
    if reg is Regime.LowAlpha:
        return {"-1": ("sigmaA family", "w̄*2"), "+1": ("sigmaA family", "w̄*1")}
    if reg is Regime.CriticalEqual:
        return {"-1": ("+1", "w̄*3")}
    if reg is Regime.CriticalStrict:
        return {"-1": ("sigmaA family", "w̄*2")}
    if reg in (Regime.MidAlpha, Regime.HighAlpha, Regime.VeryHighAlpha):
        return {"+1": ("-1", "best of w*1..w*4")}
    raise RegimeMismatch("unsupported regime")


def gamma_star(spec: ModelSpec) -> GammaStar:
    reg = spec.regime
    if reg is Regime.Unsupported:
        raise RegimeMismatch(f"unsupported spec: {'; '.join(spec.assumption_violations()) or 'alpha in (n, m]'}")
    N, n, m, a = spec.N, spec.n, spec.m, spec.alpha
    if reg is Regime.LowAlpha:
        height = Fraction(N * (m - n) + 2 * a * a - a * (N * N - 2) - 2)
    elif reg is Regime.CriticalEqual:
        height = Fraction(2 * n * n - n * (N * N - 2) - 2)
    elif reg is Regime.CriticalStrict:
        height = Fraction(N * (m - n) + 2 * n * n - n * (N * N - 2) - 2)
    elif reg is Regime.MidAlpha:
        height = min(closed_form_phi(spec, f"w*{i}") for i in range(1, 5))
    elif reg is Regime.HighAlpha:
        height = Fraction(-N * (n + m) - a * N * N + 2 * (2 * m - 1) + 2 * a * (N + m - 1))
    else:
        height = Fraction(N * (m - n)) - a * N * N + 2 * (N + 1) * (a - 1)

    transitions = regime_transitions(spec)
    barrier, path_barrier, refs, notes = {}, {}, {}, []
    for start, (target, path_name) in transitions.items():
        h0 = named_state(spec, start).energy()
        barrier[start] = height - h0
        if path_name.startswith("best"):
            maxima = {f"w*{i}": build_reference_path(spec, f"w*{i}").max_elevation for i in range(1, 5)}
            best = min(maxima, key=maxima.get)
            top = maxima[best]
            refs[start] = best
        else:
            top = build_reference_path(spec, path_name).max_elevation
            refs[start] = path_name
        path_barrier[start] = top - h0
        if top != height:
            notes.append(
                f"start {start}: reference path {refs[start]} peaks at {top}, printed height is {height} "
                f"(difference {height - top})"
            )
    return GammaStar(reg, height, {s: t for s, (t, _) in transitions.items()}, barrier, path_barrier, refs, notes)


# -- gate families per regime ---------------------------------------------------------
@dataclass
class GateFamily:
    tag: str
    configs: list[SpinConfiguration]
    note: str = ""


@dataclass
class GateRow:
    start: str
    target: str
    families: list[GateFamily]
    grouping: str  # how the families combine ("each", "union")


def gate_family(spec: ModelSpec) -> list[GateRow]:
    """Gate sets for the regime's transitions, materialised with all placements."""
    reg = spec.regime
    if reg is Regime.Unsupported:
        raise RegimeMismatch("unsupported regime")

    def fam(tag: str) -> GateFamily:
        try:
            return GateFamily(tag, gate_set(spec, tag))
        except FamilyRangeError as exc:
            return GateFamily(tag, [], note=f"empty: {exc}")

    if reg is Regime.LowAlpha:
        return [
            GateRow("-1", "sigmaA family", [fam("GateGA")], "each"),
            GateRow("+1", "sigmaA family", [fam("GateGB")], "each"),
        ]
    if reg is Regime.CriticalEqual:
        return [GateRow("-1", "+1", [fam("GateRA"), fam("GateRB")], "each")]
    if reg is Regime.CriticalStrict:
        return [GateRow("-1", "sigmaA family", [fam("GateRA")], "each")]
    if reg is Regime.MidAlpha:
        return [
            GateRow(
                "+1",
                "-1",
                [fam(t) for t in ("GateGA", "GateRA", "GateCA", "GateGB", "GateRB", "GateCB")],
                "union",
            )
        ]
    if reg is Regime.HighAlpha:
        fams = [fam("RectB_N2")]
        if spec.m == spec.n:
            fams.insert(0, fam("RectA_N2"))
        return [GateRow("+1", "-1", fams, "each")]
    fams = [fam("GateCB")]
    if spec.m == spec.n:
        fams.insert(0, fam("GateCA"))
    return [GateRow("+1", "-1", fams, "each")]
