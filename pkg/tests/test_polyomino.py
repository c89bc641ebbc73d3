import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hidden_ising.polyomino import (
    Polyomino,
    ResourceGuard,
    ShapeKind,
    classify_shape,
    edge_perimeter,
    enumerate_levels,
    enumerate_masks,
    enumerate_shapes,
    isoperimetric_lower_bound,
    minimal_perimeter_shapes,
    minimal_planar_perimeter,
    predicates,
    remove_protuberance,
    site_perimeter,
)


def slow_fixed_polyominoes(area: int) -> set[frozenset]:
    """Plane polyominoes up to translation, grown cell by cell from a single cell."""

    def normalise(cells):
        r0 = min(r for r, _ in cells)
        c0 = min(c for _, c in cells)
        return frozenset((r - r0, c - c0) for r, c in cells)

    level = {normalise({(0, 0)})}
    for _ in range(area - 1):
        nxt = set()
        for shape in level:
            for r, c in shape:
                for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    cell = (r + dr, c + dc)
                    if cell not in shape:
                        nxt.add(normalise(shape | {cell}))
        level = nxt
    return level


@pytest.mark.parametrize("area, count", [(1, 1), (2, 2), (3, 6), (4, 19), (5, 63), (6, 216)])
def test_fixed_counts_match_slow_enumerator(area, count):
    assert len(slow_fixed_polyominoes(area)) == count
    assert len(enumerate_masks(area, 8)) == count


def test_small_perimeters():
    cell = Polyomino([(0, 0)], 8)
    domino = Polyomino([(0, 0), (0, 1)], 8)
    strip = Polyomino([(r, 0) for r in range(8)], 8)
    square = Polyomino([(r, c) for r in range(3) for c in range(3)], 8)
    assert edge_perimeter(cell) == 4 and site_perimeter(cell) == 4
    assert site_perimeter(domino) == 6
    assert edge_perimeter(strip) == 16 and site_perimeter(strip) == 16
    assert edge_perimeter(square) == 12


def test_shape_predicates():
    ring = Polyomino([(r, c) for r in range(3) for c in range(3) if (r, c) != (1, 1)], 8)
    assert predicates(ring).has_hole
    ell = Polyomino([(0, 0), (1, 0), (1, 1)], 8)
    assert predicates(ell).is_convex
    u = Polyomino([(0, 0), (1, 0), (1, 1), (1, 2), (0, 2)], 8)
    conc = predicates(u).concavities
    assert len(conc) == 1 and conc[0].cardinality == 1


def test_winding_minimisers_are_strips():
    for N in (4, 6, 8):
        res = minimal_perimeter_shapes(N, N, True)
        assert res.min_perimeter == 2 * N
        assert all(c.kind is ShapeKind.StripProt and c.protuberance == 0 for c in res.classes)


def test_area_six_on_side_eight():
    res = minimal_perimeter_shapes(6, 8, False)
    assert res.min_perimeter == 10
    assert {c.label() for c in res.classes} == {"QuasiSquareProt[2x3]"}


def test_strip_with_one_extra_cell():
    res = minimal_perimeter_shapes(7, 6, True)
    assert res.min_perimeter == 14
    assert all(c.kind is ShapeKind.StripProt and c.protuberance == 1 for c in res.classes)


@pytest.mark.parametrize("area", range(1, 11))
def test_planar_minimum_and_lower_bound(area):
    res = minimal_perimeter_shapes(area, 8, False)
    assert res.min_perimeter == minimal_planar_perimeter(area)
    assert res.min_perimeter >= isoperimetric_lower_bound(area) - 1e-9


@given(st.integers(1, 7), st.integers(0, 10**6))
def test_protuberance_removal_lowers_perimeter_by_two(area, raw):
    shapes = sorted(enumerate_shapes(area, 8), key=lambda p: p.cells)
    p = shapes[raw % len(shapes)]
    shape = classify_shape(p)
    if shape.kind in (ShapeKind.QuasiSquareProt, ShapeKind.StripProt) and shape.protuberance:
        base = remove_protuberance(p, shape)
        assert base is not None
        assert base.area == area - shape.protuberance
        assert edge_perimeter(p) - edge_perimeter(base) == 2


def test_enumeration_guard():
    with pytest.raises(ResourceGuard):
        list(enumerate_levels(13, 6))
    with pytest.raises(ResourceGuard):
        enumerate_masks(3, 10)


def test_canonical_translation():
    a = Polyomino([(2, 3), (2, 4)], 6)
    b = Polyomino([(5, 0), (5, 1)], 6)
    assert a == b and hash(a) == hash(b)
    with pytest.raises(ValueError):
        Polyomino([(0, 0), (2, 2)], 6)
