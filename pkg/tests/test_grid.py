from fractions import Fraction

import numpy as np
import pytest

from src.core.exceptions import DegenerateArc, DomainTopologyError, EmptyDomain, MarkingError, NotInside, OrderViolation
from src.core.grid import (
    build_from_spec,
    arc_target_vertex,
    discretize,
    dual_start_vertex,
    load_domain_file,
    mark_rectangle,
    point_in_polygon,
    step_cells,
    to_fraction,
)
from tests.conftest import UNIT_SQUARE, domain_path


@pytest.mark.parametrize("value,expected", [
    ("1/16", Fraction(1, 16)),
    (" 1/32 ", Fraction(1, 32)),
    (0.1, Fraction(1, 10)),
    (0.0625, Fraction(1, 16)),
    (3, Fraction(3)),
])
def test_to_fraction(value, expected):
    assert to_fraction(value) == expected


def test_point_in_polygon_is_exact():
    poly = [tuple(map(Fraction, p)) for p in UNIT_SQUARE]
    assert point_in_polygon((Fraction(1, 2), Fraction(1, 2)), poly) == 1
    assert point_in_polygon((Fraction(1), Fraction(1, 3)), poly) == 0
    assert point_in_polygon((Fraction(3, 2), Fraction(1, 2)), poly) == -1


def test_step_cells_east_and_north():
    # moving east from the face centre (0, 0): (1, 1) above, (1, 0) below
    assert step_cells((0, 0), 0) == ((1, 1), (1, 0))
    assert step_cells((0, 0), 1) == ((0, 1), (1, 1))


def test_square_sizes(square3):
    assert square3.n_vertices == 9
    assert square3.n_boundary == 12
    assert square3.side == 3
    assert square3.delta == Fraction(1, 4)
    assert len(square3.edges) == 12
    assert len(square3.dual_vertices) == 16
    assert sum(square3.is_interior_dual(w) for w in square3.dual_vertices) == 4


def test_polygon_boundary_points_are_excluded():
    # lattice points on the polygon boundary are not vertices
    domain = discretize(UNIT_SQUARE, "1/4", (0.5, 0.5))
    assert (0, 0) not in domain.index
    assert (4, 2) not in domain.index
    assert (1, 1) in domain.index


def test_contour_is_clockwise(square3):
    # starts at the south-west corner going north, the domain on the right
    assert square3.contour_vertex(0) == (0, 0)
    assert square3.segment_direction(0) == 1
    corners = [square3.contour_vertex(k) for k in (0, 3, 6, 9)]
    assert corners == [(0, 0), (0, 3), (3, 3), (3, 0)]
    assert all(len(v) == 1 for v in square3.contour_index.values())


def test_orientation_of_polygon_does_not_matter(square3):
    reversed_square = discretize(UNIT_SQUARE[::-1], "1/4", (0.5, 0.5))
    assert np.array_equal(reversed_square.contour, square3.contour)


def test_component_of_interior_point():
    # two squares touching along a thin neck at mesh 1 split into components
    dumbbell = [(0, 0), (3, 0), (3, 1.5), (4, 1.5), (4, 0), (7, 0), (7, 3), (4, 3), (4, 1.75), (3, 1.75), (3, 3), (0, 3)]
    left = discretize(dumbbell, 1, (1, 1))
    right = discretize(dumbbell, 1, (6, 1))
    assert left.n_vertices == right.n_vertices == 4
    assert (1, 1) in left.index and (5, 1) in right.index


def test_errors_for_bad_domains():
    with pytest.raises(NotInside):
        discretize(UNIT_SQUARE, "1/4", (2, 2))
    with pytest.raises(EmptyDomain):
        discretize(UNIT_SQUARE, 1, (0.5, 0.5))
    with pytest.raises(ValueError):
        discretize(UNIT_SQUARE, 0, (0.5, 0.5))


def test_enclosed_hole_is_rejected():
    # a slit leading into a small square pocket leaves the vertex (3, 3) out
    keyhole = [(0, 0), (6, 0), (6, 6), (0, 6), (0, 2.5), (2.5, 2.5), (2.5, 3.5), (3.5, 3.5), (3.5, 2.5),
               (2.5, 2.5), (0, 2.5)]
    with pytest.raises(DomainTopologyError):
        discretize(keyhole, 1, (1, 1))


def test_square_marking(square3, square3_marking):
    m = square3_marking
    assert m.cuts == (0, 3, 6, 9)
    assert [tuple(square3.coords[v]) for v in m.vertices] == [(1, 1), (1, 3), (3, 3), (3, 1)]
    assert list(m.edge_arcs) == [0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3]


def test_vertex_arcs_are_closed(square3, square3_marking):
    ab = {tuple(square3.coords[v]) for v in square3_marking.arc_vertices("ab")}
    da = {tuple(square3.coords[v]) for v in square3_marking.arc_vertices("da")}
    assert ab == {(1, 1), (1, 2), (1, 3)}
    assert (1, 1) in ab & da


def test_touch_sets(square3_marking):
    touch = square3_marking.touch_sets
    assert touch["bc"] == frozenset({(0, 3), (1, 3), (2, 3), (3, 3)})
    assert touch["cd"] == frozenset({(3, 2), (3, 1), (3, 0)})


def test_start_and_target_vertices(square3_marking):
    assert dual_start_vertex(square3_marking, "a") == (0, 0)
    assert dual_start_vertex(square3_marking, "c") == (3, 3)
    assert arc_target_vertex(square3_marking, "bc") == (2, 3)


def test_rotated_marking(square3_marking):
    rotated = square3_marking.rotated()
    assert rotated.cuts == (3, 6, 9, 0)
    assert np.array_equal(rotated.arc_mask("ab"), square3_marking.arc_mask("bc"))
    assert np.array_equal(rotated.arc_mask("cd"), square3_marking.arc_mask("da"))


def test_marking_errors(square3):
    with pytest.raises(OrderViolation):
        mark_rectangle(square3, (0, 0), (1, 0), (1, 1), (0, 1))
    with pytest.raises(DegenerateArc):
        mark_rectangle(square3, (0, 0), (0, 0), (1, 1), (1, 0))
    with pytest.raises(MarkingError):
        mark_rectangle(square3, (0.5, 0.5), (0, 1), (1, 1), (1, 0))


def test_marks_near_each_other_collapse(square3):
    with pytest.raises(DegenerateArc):
        mark_rectangle(square3, (0, 0), (0, 0.05), (1, 1), (1, 0))


@pytest.mark.parametrize("name,delta", [
    ("square.json", "1/8"),
    ("rectangle_2x1.json", "1/8"),
    ("disk.json", "1/8"),
    ("trapezoid.json", "1/8"),
])
def test_domain_files_build(name, delta):
    domain, marking = build_from_spec(load_domain_file(domain_path(name)), delta)
    assert domain.n_vertices > 0
    assert len(set(marking.vertices)) == 4
    lengths = [len(marking.arc_edges(arc)) for arc in ("ab", "bc", "cd", "da")]
    assert sum(lengths) == domain.n_boundary
    assert min(lengths) > 0


def test_missing_domain_file():
    with pytest.raises(FileNotFoundError):
        load_domain_file(domain_path("no_such_domain.json"))
