"""Polyominoes on the N x N torus: perimeters, shape predicates, enumeration.

Shapes are compared up to torus translation only. Enumeration encodes each
cell set as a bit mask in a ``uint64`` (so N <= 8) and grows shapes one cell
at a time, deduplicating by the minimum mask over all N^2 translations.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .config import Winding, _component_winding

MAX_ENUM_SIDE = 8
DEFAULT_AREA_CAP = 12


class ResourceGuard(RuntimeError):
    """A requested computation exceeds a configured size cap."""


# -- Polyomino ---------------------------------------------------------------
class Polyomino:
    """Edge-connected cell set on the torus, stored as its canonical translate."""

    __slots__ = ("N", "cells")

    def __init__(self, cells: Iterable[tuple[int, int]], N: int):
        raw = {(r % N, c % N) for r, c in cells}
        if not raw:
            raise ValueError("a polyomino needs at least one cell")
        idx = [r * N + c for r, c in raw]
        if not _connected(idx, N):
            raise ValueError("cells are not edge-connected")
        self.N = N
        best = min(_translate_cells(raw, N, dr, dc) for dr in range(N) for dc in range(N))
        self.cells: tuple[tuple[int, int], ...] = best

    @classmethod
    def from_mask(cls, mask: int, N: int) -> "Polyomino":
        mask = int(mask)
        return cls([divmod(i, N) for i in range(N * N) if mask >> i & 1], N)

    @property
    def area(self) -> int:
        return len(self.cells)

    @property
    def indices(self) -> list[int]:
        return [r * self.N + c for r, c in self.cells]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Polyomino) and self.N == other.N and self.cells == other.cells

    def __hash__(self) -> int:
        return hash((self.N, self.cells))

    def __repr__(self) -> str:
        return f"Polyomino(N={self.N}, cells={list(self.cells)})"

    def to_json(self) -> list[list[int]]:
        return [list(c) for c in self.cells]


def _translate_cells(cells, N, dr, dc) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(((r + dr) % N, (c + dc) % N) for r, c in cells))


def _neighbours(i: int, N: int) -> tuple[int, int, int, int]:
    r, c = divmod(i, N)
    return (((r - 1) % N) * N + c, ((r + 1) % N) * N + c, r * N + (c - 1) % N, r * N + (c + 1) % N)


def _connected(idx: list[int], N: int) -> bool:
    members = set(idx)
    seen = {idx[0]}
    queue = deque([idx[0]])
    while queue:
        u = queue.popleft()
        for v in _neighbours(u, N):
            if v in members and v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(members)


def edge_perimeter(p: Polyomino) -> int:
    members = set(p.indices)
    return sum(1 for u in members for v in _neighbours(u, p.N) if v not in members)


def site_perimeter(p: Polyomino) -> int:
    members = set(p.indices)
    return len({v for u in members for v in _neighbours(u, p.N) if v not in members})


def winding(p: Polyomino) -> Winding:
    idx = p.indices
    return _component_winding(p.N, idx, set(idx))


def _lift(p: Polyomino) -> list[tuple[int, int]]:
    """Plane coordinates of a non-winding polyomino (BFS lift, shifted to start at 0)."""
    N = p.N
    idx = p.indices
    members = set(idx)
    lift = {idx[0]: (0, 0)}
    queue = deque([idx[0]])
    while queue:
        u = queue.popleft()
        ur, uc = divmod(u, N)
        lr, lc = lift[u]
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            v = ((ur + dr) % N) * N + (uc + dc) % N
            if v in members and v not in lift:
                lift[v] = (lr + dr, lc + dc)
                queue.append(v)
    r0 = min(r for r, _ in lift.values())
    c0 = min(c for _, c in lift.values())
    return sorted((r - r0, c - c0) for r, c in lift.values())


# -- predicates ------------------------------------------------------------------
@dataclass
class Concavity:
    axis: str  # "row" or "col": orientation of the intersecting lines
    cardinality: int
    width: int


@dataclass
class Predicates:
    is_winding: bool
    has_hole: bool
    is_convex: bool
    concavities: list[Concavity]


def _runs_on_cycle(occupied: list[bool]) -> list[list[int]]:
    """Maximal runs of True positions on a cyclic line."""
    L = len(occupied)
    if all(occupied):
        return [list(range(L))]
    if not any(occupied):
        return []
    start = next(i for i in range(L) if not occupied[i])
    runs, cur = [], []
    for step in range(1, L + 1):
        i = (start + step) % L
        if occupied[i]:
            cur.append(i)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return runs


def _line_table(p: Polyomino) -> tuple[list[list[bool]], list[list[bool]]]:
    N = p.N
    grid = [[False] * N for _ in range(N)]
    for r, c in p.cells:
        grid[r][c] = True
    rows = grid
    cols = [[grid[r][c] for r in range(N)] for c in range(N)]
    return rows, cols


def predicates(p: Polyomino) -> Predicates:
    N = p.N
    members = set(p.indices)
    wind = winding(p) is not Winding.none

    # holes: complementary components that do not wrap around the torus
    comp = [i for i in range(N * N) if i not in members]
    seen: set[int] = set()
    has_hole = False
    for s in comp:
        if s in seen:
            continue
        part = [s]
        seen.add(s)
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in _neighbours(u, N):
                if v not in members and v not in seen:
                    seen.add(v)
                    part.append(v)
                    queue.append(v)
        if _component_winding(N, part, set(part)) is Winding.none:
            has_hole = True

    rows, cols = _line_table(p)
    outer = {v for u in members for v in _neighbours(u, N) if v not in members}
    convex = True
    concavities: list[Concavity] = []
    for axis, lines in (("row", rows), ("col", cols)):
        multi = []
        gap_cells = []
        for li, line in enumerate(lines):
            runs = _runs_on_cycle(line)
            if len(runs) >= 2:
                convex = False
                # gaps between components, excluding the largest gap which is the outside
                gaps = _runs_on_cycle([not x for x in line])
                gaps.sort(key=len)
                inner = gaps[:-1]
                cells = [(li, j) if axis == "row" else (j, li) for g in inner for j in g]
                gap_cells.append({r * N + c for r, c in cells} & outer)
                multi.append(li)
            else:
                gap_cells.append(None)
        # consecutive lines with several components form one concavity
        for group in _cyclic_groups(multi, N):
            card = len(set().union(*(gap_cells[li] for li in group)))
            concavities.append(Concavity(axis, card, len(group)))
    return Predicates(wind, has_hole, convex, concavities)


def _cyclic_groups(indices: list[int], L: int) -> list[list[int]]:
    if not indices:
        return []
    s = set(indices)
    if len(s) == L:
        return [sorted(s)]
    groups: list[list[int]] = []
    start = next(i for i in range(L) if i not in s)
    cur: list[int] = []
    for step in range(1, L + 1):
        i = (start + step) % L
        if i in s:
            cur.append(i)
        elif cur:
            groups.append(cur)
            cur = []
    if cur:
        groups.append(cur)
    return groups


# -- shape classification -----------------------------------------------------
class ShapeKind(enum.Enum):
    QuasiSquareProt = "QuasiSquareProt"
    StripProt = "StripProt"
    RectangleProt = "RectangleProt"
    Other = "Other"


@dataclass(frozen=True)
class ShapeClass:
    kind: ShapeKind
    sides: tuple[int, ...] = ()
    protuberance: int = 0
    attached_to: str = ""  # "long", "short", "square", "" (no protuberance) or strip orientation

    def label(self) -> str:
        if self.kind is ShapeKind.Other:
            return "Other"
        side = "x".join(map(str, self.sides))
        extra = f"+{self.protuberance}({self.attached_to})" if self.protuberance else ""
        return f"{self.kind.value}[{side}{extra}]"


def _is_quasi_square(a: int, b: int) -> bool:
    # sides of length 1 are admitted so that areas below 4 have a base shape
    lo, hi = min(a, b), max(a, b)
    return lo >= 1 and hi <= lo + 1


def _rect_decompositions(cells: list[tuple[int, int]]) -> list[tuple[int, int, int, str]]:
    """All ways to read plane cells as an (h x w) rectangle plus one protuberance.

    Returns tuples (h, w, q, side) where side is the length class of the side
    carrying the protuberance.
    """
    S = set(cells)
    h = max(r for r, _ in cells) + 1
    w = max(c for _, c in cells) + 1
    if len(S) == h * w:
        return [(h, w, 0, "")]
    out = []
    # the protuberance occupies one outermost row or column of the bounding box
    candidates = [
        ("top", [(0, c) for c in range(w)], [(r, c) for r in range(1, h) for c in range(w)], h - 1, w),
        ("bottom", [(h - 1, c) for c in range(w)], [(r, c) for r in range(h - 1) for c in range(w)], h - 1, w),
        ("left", [(r, 0) for r in range(h)], [(r, c) for r in range(h) for c in range(1, w)], h, w - 1),
        ("right", [(r, w - 1) for r in range(h)], [(r, c) for r in range(h) for c in range(w - 1)], h, w - 1),
    ]
    for name, line, rest, bh, bw in candidates:
        if bh < 1 or bw < 1 or not set(rest) <= S:
            continue
        prot = [x for x in line if x in S]
        if len(rest) + len(prot) != len(S) or not prot:
            continue
        coords = sorted(x[1] if name in ("top", "bottom") else x[0] for x in prot)
        if coords != list(range(coords[0], coords[0] + len(coords))):
            continue
        side_len = bw if name in ("top", "bottom") else bh
        other = bh if name in ("top", "bottom") else bw
        if len(prot) >= side_len:
            continue
        kind = "square" if side_len == other else ("long" if side_len > other else "short")
        out.append((bh, bw, len(prot), kind))
    return out


def _strip_decomposition(p: Polyomino, wind: Winding) -> ShapeClass | None:
    if wind not in (Winding.vertical, Winding.horizontal):
        return None
    N = p.N
    rows, cols = _line_table(p)
    lines = cols if wind is Winding.vertical else rows
    full = [i for i, line in enumerate(lines) if all(line)]
    partial = [i for i, line in enumerate(lines) if any(line) and not all(line)]
    if not full or len(partial) > 1:
        return None
    if len(_cyclic_groups(full, N)) != 1:
        return None
    orient = "vertical" if wind is Winding.vertical else "horizontal"
    if not partial:
        return ShapeClass(ShapeKind.StripProt, (len(full),), 0, orient)
    j = partial[0]
    if not ((j - 1) % N in full or (j + 1) % N in full):
        return None
    runs = _runs_on_cycle(lines[j])
    if len(runs) != 1:
        return None
    return ShapeClass(ShapeKind.StripProt, (len(full),), len(runs[0]), orient)


def classify_shape(p: Polyomino) -> ShapeClass:
    wind = winding(p)
    if wind is not Winding.none:
        return _strip_decomposition(p, wind) or ShapeClass(ShapeKind.Other)
    decs = _rect_decompositions(_lift(p))
    for h, w, q, side in decs:
        if _is_quasi_square(h, w):
            return ShapeClass(ShapeKind.QuasiSquareProt, (min(h, w), max(h, w)), q, side)
    if decs:
        h, w, q, side = decs[0]
        return ShapeClass(ShapeKind.RectangleProt, (min(h, w), max(h, w)), q, side)
    return ShapeClass(ShapeKind.Other)


def remove_protuberance(p: Polyomino, shape: ShapeClass) -> Polyomino | None:
    """Base shape after deleting the protuberance of a classified shape (None if it has none)."""
    if shape.protuberance == 0 or shape.kind is ShapeKind.Other:
        return None
    N = p.N
    if shape.kind is ShapeKind.StripProt:
        rows, cols = _line_table(p)
        lines = cols if shape.attached_to == "vertical" else rows
        j = next(i for i, line in enumerate(lines) if any(line) and not all(line))
        keep = [(r, c) for r, c in p.cells if (c if shape.attached_to == "vertical" else r) != j]
        return Polyomino(keep, N)
    plane = _lift(p)
    for h, w, q, side in _rect_decompositions(plane):
        if q and (min(h, w), max(h, w)) == shape.sides and q == shape.protuberance:
            keep = None
            S = set(plane)
            H = max(r for r, _ in plane) + 1
            W = max(c for _, c in plane) + 1
            for r0, c0 in ((0, 0), (1, 0), (0, 1)):
                rect = {(r, c) for r in range(r0, r0 + h) for c in range(c0, c0 + w)}
                if rect <= S and len(S - rect) == q and r0 + h <= H and c0 + w <= W:
                    keep = sorted(rect)
                    break
            if keep:
                return Polyomino(keep, N)
    return None


# -- bit-mask enumeration --------------------------------------------------------
class _MaskOps:
    """Vectorised translations and neighbourhoods of cell masks on an N-torus."""

    def __init__(self, N: int):
        if N > MAX_ENUM_SIDE:
            raise ResourceGuard(f"bit-mask enumeration supports N <= {MAX_ENUM_SIDE}")
        self.N = N
        self.bits = N * N
        self.full = np.uint64((1 << self.bits) - 1) if self.bits < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
        self.col_lo = []
        self.col_hi = []
        for c in range(N):
            lo = sum(1 << (r * N + j) for r in range(N) for j in range(N - c))
            self.col_lo.append(np.uint64(lo))
            self.col_hi.append(np.uint64(sum(1 << (r * N + j) for r in range(N) for j in range(N - c, N))))

    def shift_cols(self, x: np.ndarray, c: int) -> np.ndarray:
        c %= self.N
        if c == 0:
            return x.copy()
        return ((x & self.col_lo[c]) << np.uint64(c)) | ((x & self.col_hi[c]) >> np.uint64(self.N - c))

    def shift_rows(self, x: np.ndarray, r: int) -> np.ndarray:
        r %= self.N
        if r == 0:
            return x.copy()
        s = r * self.N
        return ((x << np.uint64(s)) | (x >> np.uint64(self.bits - s))) & self.full

    def canonical(self, x: np.ndarray) -> np.ndarray:
        best = x.copy()
        for r in range(self.N):
            xr = self.shift_rows(x, r)
            for c in range(self.N):
                np.minimum(best, self.shift_cols(xr, c), out=best)
        return best

    def dilate(self, x: np.ndarray) -> np.ndarray:
        return (
            self.shift_rows(x, 1) | self.shift_rows(x, self.N - 1) | self.shift_cols(x, 1) | self.shift_cols(x, self.N - 1)
        )

    def edge_perimeter(self, x: np.ndarray) -> np.ndarray:
        # boundary edges = cells whose right/down neighbour differs, counted from both sides
        return (np.bitwise_count(x ^ self.shift_cols(x, 1)) + np.bitwise_count(x ^ self.shift_rows(x, 1))).astype(
            np.int64
        )


def enumerate_masks(area: int, N: int, area_cap: int = DEFAULT_AREA_CAP) -> np.ndarray:
    """Sorted canonical masks of every polyomino with the given area on the N-torus."""
    if area < 1 or area > N * N:
        raise ValueError("area must lie in [1, N^2]")
    if area > area_cap:
        raise ResourceGuard(f"area {area} above enumeration cap {area_cap}")
    ops = _MaskOps(N)
    level = np.array([1], dtype=np.uint64)
    for _ in range(area - 1):
        level = _grow(ops, level)
    return level


def enumerate_levels(max_area: int, N: int, area_cap: int = DEFAULT_AREA_CAP):
    """Yield (area, canonical masks) for area = 1..max_area, reusing each level."""
    if max_area > area_cap:
        raise ResourceGuard(f"area {max_area} above enumeration cap {area_cap}")
    ops = _MaskOps(N)
    level = np.array([1], dtype=np.uint64)
    yield 1, level
    for a in range(2, min(max_area, N * N) + 1):
        level = _grow(ops, level)
        yield a, level


def _grow(ops: _MaskOps, level: np.ndarray, chunk: int = 1 << 16) -> np.ndarray:
    pieces = []
    for start in range(0, len(level), chunk):
        x = level[start : start + chunk]
        cand = ops.dilate(x) & ~x & ops.full
        out = []
        for b in range(ops.bits):
            bit = np.uint64(1 << b)
            sel = (cand & bit) != 0
            if sel.any():
                out.append(x[sel] | bit)
        grown = np.unique(ops.canonical(np.concatenate(out)))
        pieces.append(grown)
    return np.unique(np.concatenate(pieces))


def enumerate_shapes(area: int, N: int, area_cap: int = DEFAULT_AREA_CAP) -> set[Polyomino]:
    return {Polyomino.from_mask(int(x), N) for x in enumerate_masks(area, N, area_cap)}


@dataclass
class MinimalShapes:
    area: int
    N: int
    winding: bool
    min_perimeter: int | None
    shapes: list[Polyomino]
    classes: list[ShapeClass]

    def summary_row(self) -> dict:
        labels = sorted({c.label() for c in self.classes})
        return {
            "area": self.area,
            "N": self.N,
            "winding": self.winding,
            "min_perimeter": self.min_perimeter,
            "minimizer_count": len(self.shapes),
            "classes": ";".join(labels),
        }


def minimal_perimeter_shapes(
    area: int, N: int, winding_required: bool, area_cap: int = DEFAULT_AREA_CAP, masks: np.ndarray | None = None
) -> MinimalShapes:
    """Minimum edge perimeter among winding (or among non-winding) shapes of an area.

    ``winding_required=False`` restricts to non-winding shapes. Returns
    ``min_perimeter=None`` when the class is empty (e.g. no non-winding
    shape of that area fits on a small torus).
    """
    if winding_required and area < N:
        raise ValueError("a winding polyomino needs area >= N")
    if masks is None:
        masks = enumerate_masks(area, N, area_cap)
    ops = _MaskOps(N)
    per = ops.edge_perimeter(masks)
    order = np.argsort(per, kind="stable")
    best = None
    chosen: list[Polyomino] = []
    i = 0
    while i < len(order):
        p_val = per[order[i]]
        if best is not None and p_val > best:
            break
        j = i
        while j < len(order) and per[order[j]] == p_val:
            j += 1
        for t in order[i:j]:
            poly = Polyomino.from_mask(int(masks[t]), N)
            if (winding(poly) is not Winding.none) == winding_required:
                chosen.append(poly)
        if chosen:
            best = int(p_val)
        i = j
    return MinimalShapes(area, N, winding_required, best, chosen, [classify_shape(p) for p in chosen])


def isoperimetric_lower_bound(area: int) -> float:
    """Edge perimeter lower bound 4*sqrt(area) for non-winding shapes."""
    return 4.0 * math.sqrt(area)


def minimal_planar_perimeter(area: int) -> int:
    """2*ceil(2*sqrt(area)): least edge perimeter of a planar polyomino of that area."""
    t = math.isqrt(4 * area)
    if t * t < 4 * area:
        t += 1
    return 2 * t
