# ---------------------------------------------
# LATTICE DOMAINS AND RECTANGLE MARKINGS
# ---------------------------------------------
"""
Discrete approximations of polygonal domains on the square lattice.

Lattice points are stored as integer pairs (i, j) with physical position
(i*delta, j*delta). A dual vertex (p, q) is the face centre
((p + 1/2)*delta, (q + 1/2)*delta). Every lattice vertex owns the unit cell
centred on it; the union of those cells is a polyomino whose contour is the
dual boundary, traced clockwise with the domain on the right.

Geometry predicates are exact: polygon coordinates and delta are converted to
fractions before anything is compared.

Dependencies:
    - numpy
"""

import json
import logging
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from src.core.exceptions import (
    DegenerateArc,
    DomainTopologyError,
    EmptyDomain,
    MarkingError,
    NotInside,
    OrderViolation,
    SpecError,
)

logger = logging.getLogger(__name__)

Number = Union[int, float, str, Fraction]
Point = Tuple[Fraction, Fraction]
Cell = Tuple[int, int]
DualVertex = Tuple[int, int]

# E, N, W, S; index arithmetic mod 4 is rotation by quarter turns.
DIRECTIONS: Tuple[Cell, ...] = ((1, 0), (0, 1), (-1, 0), (0, -1))
EIGHT_DIRECTIONS: Tuple[Cell, ...] = (
    (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)
)
CORNERS: Tuple[str, ...] = ("a", "b", "c", "d")
ARCS: Tuple[str, ...] = ("ab", "bc", "cd", "da")


# ---------------------------------------------
# SMALL HELPERS
# ---------------------------------------------

def to_fraction(value: Number) -> Fraction:
    """
    Convert a number or a rational string such as "1/32" to an exact fraction.

    Floats go through their shortest repr, so 0.1 becomes 1/10.

    Args:
        value (Number): int, float, Fraction or string.

    Returns:
        Fraction: The exact value.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def rot_ccw(direction: int) -> int:
    return (direction + 1) % 4


def rot_cw(direction: int) -> int:
    return (direction + 3) % 4


def step_cells(w: DualVertex, direction: int) -> Tuple[Cell, Cell]:
    """
    Cells to the left and to the right of the dual step leaving w.

    Args:
        w (DualVertex): Start of the step.
        direction (int): Index into DIRECTIONS.

    Returns:
        Tuple[Cell, Cell]: (left cell, right cell).
    """
    dx, dy = DIRECTIONS[direction]
    p, q = w
    left = (p + (1 + dx - dy) // 2, q + (1 + dy + dx) // 2)
    right = (p + (1 + dx + dy) // 2, q + (1 + dy - dx) // 2)
    return left, right


def _signed_area(polygon: Sequence[Point]) -> Fraction:
    area = Fraction(0)
    for k in range(len(polygon)):
        x0, y0 = polygon[k]
        x1, y1 = polygon[(k + 1) % len(polygon)]
        area += x0 * y1 - x1 * y0
    return area / 2


def _on_segment(pt: Point, a: Point, b: Point) -> bool:
    cross = (b[0] - a[0]) * (pt[1] - a[1]) - (b[1] - a[1]) * (pt[0] - a[0])
    if cross != 0:
        return False
    return (min(a[0], b[0]) <= pt[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= pt[1] <= max(a[1], b[1]))


def point_in_polygon(pt: Point, polygon: Sequence[Point]) -> int:
    """
    Exact location of a point relative to a simple polygon.

    Returns:
        int: 1 strictly inside, 0 on the boundary, -1 outside.
    """
    inside = False
    n = len(polygon)
    for k in range(n):
        a, b = polygon[k], polygon[(k + 1) % n]
        if _on_segment(pt, a, b):
            return 0
        if (a[1] > pt[1]) != (b[1] > pt[1]):
            x_cross = a[0] + (pt[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if pt[0] < x_cross:
                inside = not inside
    return 1 if inside else -1


def _inside_lattice_points(polygon: Sequence[Point]) -> Set[Cell]:
    """Integer points strictly inside a polygon given in lattice units."""
    ys = [p[1] for p in polygon]
    points: Set[Cell] = set()
    n = len(polygon)
    for j in range(math.ceil(min(ys)), math.floor(max(ys)) + 1):
        crossings: List[Fraction] = []
        on_boundary: Set[int] = set()
        for k in range(n):
            a, b = polygon[k], polygon[(k + 1) % n]
            if a[1] == b[1] == j:
                lo, hi = sorted((a[0], b[0]))
                on_boundary.update(range(math.ceil(lo), math.floor(hi) + 1))
                continue
            if min(a[1], b[1]) <= j <= max(a[1], b[1]) and a[1] != b[1]:
                x_hit = a[0] + (j - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
                if x_hit.denominator == 1:
                    on_boundary.add(int(x_hit))
                if (a[1] > j) != (b[1] > j):
                    crossings.append(x_hit)
        crossings.sort()
        for lo, hi in zip(crossings[0::2], crossings[1::2]):
            for i in range(math.floor(lo) + 1, math.ceil(hi)):
                if i not in on_boundary:
                    points.add((i, j))
    return points


# ---------------------------------------------
# LATTICE DOMAIN
# ---------------------------------------------

@dataclass(frozen=True, eq=False)
class LatticeDomain:
    """
    The discretised domain with its boundary cycle and dual graph.

    Attributes:
        polygon (Tuple[Point, ...]): Counterclockwise polygon, physical units.
        delta (Fraction): Mesh size.
        interior_point (Point): Marked point selecting the component.
        coords (np.ndarray): (n, 2) integer lattice coordinates, sorted.
        index (Dict[Cell, int]): Lattice coordinate to vertex index.
        nbr4 (np.ndarray): (n, 4) neighbours in E, N, W, S order, -1 outside.
        nbr8 (np.ndarray): (n, 8) neighbours counterclockwise from E, -1 outside.
        edges (np.ndarray): (m, 2) primal edges.
        boundary_vertex (np.ndarray): Inside vertex of boundary edge k.
        boundary_dir (np.ndarray): Outward direction of boundary edge k.
        contour (np.ndarray): (K, 2) dual vertex where contour segment k starts.
    """
    polygon: Tuple[Point, ...]
    delta: Fraction
    interior_point: Point
    coords: np.ndarray
    index: Dict[Cell, int]
    nbr4: np.ndarray
    nbr8: np.ndarray
    edges: np.ndarray
    boundary_vertex: np.ndarray
    boundary_dir: np.ndarray
    contour: np.ndarray

    # ---------------------------------------------
    # SIZES
    # ---------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.coords)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary_vertex)

    @property
    def side(self) -> int:
        """Largest extent of the vertex set, in vertices."""
        span = self.coords.max(axis=0) - self.coords.min(axis=0) + 1
        return int(span.max())

    @property
    def diameter(self) -> float:
        """Physical diameter of the polyomino bounding box."""
        span = self.coords.max(axis=0) - self.coords.min(axis=0) + 1
        return float(np.hypot(*span)) * float(self.delta)

    # ---------------------------------------------
    # CELLS AND DUAL GRAPH
    # ---------------------------------------------

    def cell_inside(self, cell: Cell) -> bool:
        return cell in self.index

    def has_dual_edge(self, w: DualVertex, direction: int) -> bool:
        left, right = step_cells(w, direction)
        return left in self.index or right in self.index

    def dual_neighbors(self, w: DualVertex) -> Iterator[Tuple[int, DualVertex]]:
        """Yield (direction, neighbour) for every dual edge at w."""
        for direction, (dx, dy) in enumerate(DIRECTIONS):
            if self.has_dual_edge(w, direction):
                yield direction, (w[0] + dx, w[1] + dy)

    def is_dual_vertex(self, w: DualVertex) -> bool:
        p, q = w
        return any(c in self.index for c in ((p, q), (p + 1, q), (p, q + 1), (p + 1, q + 1)))

    def is_interior_dual(self, w: DualVertex) -> bool:
        p, q = w
        return all(c in self.index for c in ((p, q), (p + 1, q), (p, q + 1), (p + 1, q + 1)))

    @cached_property
    def dual_vertices(self) -> FrozenSet[DualVertex]:
        found: Set[DualVertex] = set()
        for i, j in self.coords.tolist():
            found.update(((i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)))
        return frozenset(found)

    @cached_property
    def dual_edges(self) -> List[Tuple[DualVertex, DualVertex]]:
        out = []
        for w in sorted(self.dual_vertices):
            for direction in (0, 1):
                if self.has_dual_edge(w, direction):
                    dx, dy = DIRECTIONS[direction]
                    out.append((w, (w[0] + dx, w[1] + dy)))
        return out

    @cached_property
    def contour_index(self) -> Dict[DualVertex, List[int]]:
        """Contour positions of every dual boundary vertex (pinches appear twice)."""
        positions: Dict[DualVertex, List[int]] = {}
        for k, (p, q) in enumerate(self.contour.tolist()):
            positions.setdefault((p, q), []).append(k)
        return positions

    def contour_vertex(self, k: int) -> DualVertex:
        p, q = self.contour[k % self.n_boundary]
        return int(p), int(q)

    def segment_direction(self, k: int) -> int:
        """Travel direction of contour segment k (clockwise, domain on the right)."""
        return rot_cw(int(self.boundary_dir[k % self.n_boundary]))

    # ---------------------------------------------
    # PHYSICAL POSITIONS
    # ---------------------------------------------

    def vertex_position(self, v: int) -> Tuple[float, float]:
        i, j = self.coords[v]
        return float(i * self.delta), float(j * self.delta)

    def dual_position(self, w: DualVertex) -> Tuple[float, float]:
        return float((w[0] + Fraction(1, 2)) * self.delta), float((w[1] + Fraction(1, 2)) * self.delta)

    def dual_position_exact(self, w: DualVertex) -> Point:
        return (w[0] + Fraction(1, 2)) * self.delta, (w[1] + Fraction(1, 2)) * self.delta


# ---------------------------------------------
# DISCRETIZATION
# ---------------------------------------------

def discretize(polygon: Sequence[Tuple[Number, Number]], delta: Number,
               interior_point: Tuple[Number, Number]) -> LatticeDomain:
    """
    Build the lattice component of a polygon containing the interior point.

    Args:
        polygon (Sequence): Simple polygon vertex list, either orientation.
        delta (Number): Mesh size, e.g. Fraction(1, 32) or "1/32".
        interior_point (Tuple[Number, Number]): Point strictly inside the polygon.

    Returns:
        LatticeDomain: The discretised domain.

    Raises:
        NotInside: interior_point is not strictly inside the polygon.
        EmptyDomain: no lattice point lies inside the polygon.
        DomainTopologyError: the vertex set encloses a hole.
    """
    delta_q = to_fraction(delta)
    if delta_q <= 0:
        raise ValueError(f"mesh size must be positive, got {delta}")
    poly = tuple((to_fraction(x), to_fraction(y)) for x, y in polygon)
    if len(poly) < 3:
        raise ValueError("a polygon needs at least three vertices")
    if _signed_area(poly) < 0:
        poly = poly[::-1]
    x0 = (to_fraction(interior_point[0]), to_fraction(interior_point[1]))
    if point_in_polygon(x0, poly) != 1:
        raise NotInside(f"interior point {interior_point} is not strictly inside the polygon")

    lattice_poly = [(x / delta_q, y / delta_q) for x, y in poly]
    inside = _inside_lattice_points(lattice_poly)
    if not inside:
        raise EmptyDomain(f"no lattice point of mesh {delta_q} lies inside the polygon")

    target = (x0[0] / delta_q, x0[1] / delta_q)
    seed = min(inside, key=lambda c: ((c[0] - target[0]) ** 2 + (c[1] - target[1]) ** 2, c))

    component = {seed}
    queue = deque([seed])
    while queue:
        i, j = queue.popleft()
        for dx, dy in DIRECTIONS:
            nb = (i + dx, j + dy)
            if nb in inside and nb not in component:
                component.add(nb)
                queue.append(nb)

    domain = _assemble(poly, delta_q, x0, component)
    logger.debug("discretised polygon at delta=%s: %d vertices, %d boundary edges",
                 delta_q, domain.n_vertices, domain.n_boundary)
    return domain


def _assemble(poly: Tuple[Point, ...], delta: Fraction, x0: Point, component: Set[Cell]) -> LatticeDomain:
    cells = sorted(component)
    coords = np.array(cells, dtype=np.int64)
    index = {c: k for k, c in enumerate(cells)}

    nbr4 = np.full((len(cells), 4), -1, dtype=np.int64)
    nbr8 = np.full((len(cells), 8), -1, dtype=np.int64)
    for k, (i, j) in enumerate(cells):
        for d, (dx, dy) in enumerate(DIRECTIONS):
            nbr4[k, d] = index.get((i + dx, j + dy), -1)
        for d, (dx, dy) in enumerate(EIGHT_DIRECTIONS):
            nbr8[k, d] = index.get((i + dx, j + dy), -1)

    east, north = nbr4[:, 0], nbr4[:, 1]
    rows = np.arange(len(cells))
    edges = np.concatenate([
        np.stack([rows[east >= 0], east[east >= 0]], axis=1),
        np.stack([rows[north >= 0], north[north >= 0]], axis=1),
    ])

    boundary_vertex, boundary_dir, contour = _trace_contour(cells, index)
    return LatticeDomain(
        polygon=poly,
        delta=delta,
        interior_point=x0,
        coords=coords,
        index=index,
        nbr4=nbr4,
        nbr8=nbr8,
        edges=edges,
        boundary_vertex=boundary_vertex,
        boundary_dir=boundary_dir,
        contour=contour,
    )


def _trace_contour(cells: List[Cell], index: Dict[Cell, int]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Order the boundary edges along the polyomino contour, clockwise.

    At a pinch (diagonal cells touching at a corner) the trace turns right,
    which keeps the vertex set 4-connected along the contour.
    """
    boundary = [(index[c], d) for c in cells for d, (dx, dy) in enumerate(DIRECTIONS)
                if (c[0] + dx, c[1] + dy) not in index]
    origin = min(boundary, key=lambda e: (cells[e[0]], e[1]))

    order: List[Tuple[int, int]] = []
    current = origin
    while True:
        order.append(current)
        v, e = current
        x = cells[v]
        s = rot_cw(e)
        sx, sy = DIRECTIONS[s]
        ex, ey = DIRECTIONS[e]
        ahead_right = (x[0] + sx, x[1] + sy)
        ahead_left = (x[0] + sx + ex, x[1] + sy + ey)
        if ahead_right not in index:
            current = (v, s)
        elif ahead_left not in index:
            current = (index[ahead_right], e)
        else:
            current = (index[ahead_left], (s + 2) % 4)
        if current == origin:
            break
        if len(order) > len(boundary):
            break

    if len(order) != len(boundary):
        raise DomainTopologyError(
            f"contour visits {len(order)} of {len(boundary)} boundary edges; the domain has a hole")

    boundary_vertex = np.array([v for v, _ in order], dtype=np.int64)
    boundary_dir = np.array([e for _, e in order], dtype=np.int64)
    contour = np.empty((len(order), 2), dtype=np.int64)
    for k, (v, e) in enumerate(order):
        i, j = cells[v]
        s = rot_cw(e)
        # doubled coordinates of the segment start corner are odd
        cx = 2 * i + DIRECTIONS[e][0] - DIRECTIONS[s][0]
        cy = 2 * j + DIRECTIONS[e][1] - DIRECTIONS[s][1]
        contour[k] = ((cx - 1) // 2, (cy - 1) // 2)
    return boundary_vertex, boundary_dir, contour


# ---------------------------------------------
# RECTANGLE MARKING
# ---------------------------------------------

@dataclass(frozen=True, eq=False)
class RectangleMarking:
    """
    Four clockwise boundary marks with their arcs.

    The boundary-edge partition is half-open: arc [xy] holds the contour
    segments from cut(x) up to, but excluding, cut(y). A vertex belongs to
    every arc holding one of its boundary edges, so vertex arcs are closed.

    Attributes:
        domain (LatticeDomain): The marked domain.
        points (Tuple[Point, ...]): Physical marks a, b, c, d.
        vertices (Tuple[int, ...]): Nearest boundary vertices a_delta..d_delta.
        cuts (Tuple[int, ...]): Contour index where each arc starts.
    """
    domain: LatticeDomain
    points: Tuple[Point, ...]
    vertices: Tuple[int, ...]
    cuts: Tuple[int, ...]

    @cached_property
    def edge_arcs(self) -> np.ndarray:
        """Arc index (0=ab, 1=bc, 2=cd, 3=da) of every contour segment."""
        n = self.domain.n_boundary
        labels = np.empty(n, dtype=np.int64)
        for arc in range(4):
            start, stop = self.cuts[arc], self.cuts[(arc + 1) % 4]
            length = (stop - start) % n
            labels[(start + np.arange(length)) % n] = arc
        return labels

    def arc_edges(self, name: str) -> np.ndarray:
        arc = ARCS.index(name)
        n = self.domain.n_boundary
        start, stop = self.cuts[arc], self.cuts[(arc + 1) % 4]
        return (start + np.arange((stop - start) % n)) % n

    def arc_mask(self, name: str) -> np.ndarray:
        mask = np.zeros(self.domain.n_vertices, dtype=bool)
        mask[self.domain.boundary_vertex[self.arc_edges(name)]] = True
        return mask

    def arc_vertices(self, name: str) -> np.ndarray:
        return np.flatnonzero(self.arc_mask(name))

    def contour_span(self, name: str) -> List[int]:
        """Contour vertex indices from the arc's start cut to its end cut, inclusive."""
        edges = self.arc_edges(name).tolist()
        return edges + [(edges[-1] + 1) % self.domain.n_boundary]

    @cached_property
    def touch_sets(self) -> Dict[str, FrozenSet[DualVertex]]:
        """
        Dual boundary vertices that count as touching [bc] and [cd].

        [bc] keeps both of its cut points; [cd] drops the c cut and keeps the
        d cut.
        """
        bc = frozenset(self.domain.contour_vertex(k) for k in self.contour_span("bc"))
        cd = frozenset(self.domain.contour_vertex(k) for k in self.contour_span("cd")[1:])
        return {"bc": bc, "cd": cd - bc}

    def rotated(self) -> "RectangleMarking":
        """The marking (b, c, d, a): [bc] becomes the first arc."""
        return RectangleMarking(
            domain=self.domain,
            points=self.points[1:] + self.points[:1],
            vertices=self.vertices[1:] + self.vertices[:1],
            cuts=self.cuts[1:] + self.cuts[:1],
        )


def _perimeter_parameter(polygon: Sequence[Point], pt: Point) -> Tuple[float, float, float]:
    """Arc-length parameter of the polygon point nearest to pt, its distance and the perimeter."""
    poly = [(float(x), float(y)) for x, y in polygon]
    px, py = float(pt[0]), float(pt[1])
    best = (math.inf, 0.0)
    walked = 0.0
    for k in range(len(poly)):
        (ax, ay), (bx, by) = poly[k], poly[(k + 1) % len(poly)]
        length = math.hypot(bx - ax, by - ay)
        t = 0.0 if length == 0 else max(0.0, min(1.0, ((px - ax) * (bx - ax) + (py - ay) * (by - ay)) / length ** 2))
        dist = math.hypot(ax + t * (bx - ax) - px, ay + t * (by - ay) - py)
        if dist < best[0]:
            best = (dist, walked + t * length)
        walked += length
    return best[1], best[0], walked


def mark_rectangle(domain: LatticeDomain, a: Tuple[Number, Number], b: Tuple[Number, Number],
                   c: Tuple[Number, Number], d: Tuple[Number, Number]) -> RectangleMarking:
    """
    Assign the four arcs of a topological rectangle.

    Args:
        domain (LatticeDomain): Discretised domain.
        a, b, c, d: Boundary points of the polygon in clockwise order.

    Returns:
        RectangleMarking: The marking.

    Raises:
        OrderViolation: the points are not clockwise along the polygon.
        DegenerateArc: two points share a boundary vertex or an arc is empty.
    """
    marks = tuple((to_fraction(p[0]), to_fraction(p[1])) for p in (a, b, c, d))
    scale = max(float(abs(x)) + float(abs(y)) for x, y in domain.polygon) or 1.0
    params = []
    for name, pt in zip(CORNERS, marks):
        s, dist, perimeter = _perimeter_parameter(domain.polygon, pt)
        if dist > 1e-9 * scale:
            raise MarkingError(f"mark {name}={tuple(map(float, pt))} is not on the polygon boundary")
        params.append(s)
    # counterclockwise polygon: clockwise travel decreases the parameter
    offsets = [(params[0] - s) % perimeter for s in params[1:]]
    if len(set(offsets)) < 3 or 0.0 in offsets:
        raise DegenerateArc("two marks coincide")
    if not offsets[0] < offsets[1] < offsets[2]:
        raise OrderViolation("marks a, b, c, d are not in clockwise order")

    first_seen: Dict[int, int] = {}
    for k, v in enumerate(domain.boundary_vertex.tolist()):
        first_seen.setdefault(v, k)

    vertices = []
    for pt in marks:
        target = (pt[0] / domain.delta, pt[1] / domain.delta)
        vertices.append(min(first_seen, key=lambda v: (
            (domain.coords[v][0] - target[0]) ** 2 + (domain.coords[v][1] - target[1]) ** 2,
            first_seen[v])))
    if len(set(vertices)) < 4:
        raise DegenerateArc("two marks map to the same boundary vertex")

    n = domain.n_boundary
    cuts = []
    for v, pt in zip(vertices, marks):
        candidates = [k for k in range(n)
                      if domain.boundary_vertex[k] == v or domain.boundary_vertex[(k - 1) % n] == v]

        def corner_distance(k: int) -> Tuple[Fraction, int]:
            x, y = domain.dual_position_exact(domain.contour_vertex(k))
            return (x - pt[0]) ** 2 + (y - pt[1]) ** 2, k

        cuts.append(min(candidates, key=corner_distance))
    cut_offsets = [(k - cuts[0]) % n for k in cuts[1:]]
    if len(set(cut_offsets)) < 3 or 0 in cut_offsets:
        raise DegenerateArc("an arc has no boundary edge")
    if not cut_offsets[0] < cut_offsets[1] < cut_offsets[2]:
        raise OrderViolation("arc cuts are not in clockwise order")

    return RectangleMarking(domain=domain, points=marks, vertices=tuple(vertices), cuts=tuple(cuts))


def dual_start_vertex(marking: RectangleMarking, corner: str) -> DualVertex:
    """
    Boundary dual vertex immediately clockwise of a marked vertex.

    This is the contour vertex at the cut where the arc starting at the
    corner begins.
    """
    return marking.domain.contour_vertex(marking.cuts[CORNERS.index(corner)])


def arc_target_vertex(marking: RectangleMarking, name: str = "bc", fraction: float = 0.5) -> DualVertex:
    """A dual boundary vertex strictly inside an arc, at the given fraction of its length."""
    span = marking.contour_span(name)
    if len(span) < 3:
        raise DegenerateArc(f"arc [{name}] has no interior contour vertex")
    k = min(max(1, int(round(fraction * (len(span) - 1)))), len(span) - 2)
    return marking.domain.contour_vertex(span[k])


# ---------------------------------------------
# DOMAIN FILES
# ---------------------------------------------

def load_domain_file(path: Union[str, Path]) -> dict:
    """
    Read a domain description file.

    Format: {"polygon": [[x, y], ...], "delta": number or "p/q",
    "interior": [x, y], "marks": {"a": [x, y], ...}}.

    Raises:
        FileNotFoundError: the file does not exist.
        SpecError: a required key is missing.
    """
    with open(path, "r") as f:
        spec = json.load(f)
    missing = [key for key in ("polygon", "interior", "marks") if key not in spec]
    if missing:
        raise SpecError(f"domain file {path} lacks {', '.join(missing)}")
    if set(spec["marks"]) != set(CORNERS):
        raise SpecError(f"domain file {path} must mark exactly a, b, c, d")
    return spec


def build_from_spec(spec: dict, delta: Optional[Number] = None) -> Tuple[LatticeDomain, RectangleMarking]:
    """Discretise and mark a domain description at the given (or its own) mesh."""
    mesh = delta if delta is not None else spec.get("delta")
    if mesh is None:
        raise SpecError("no mesh size given")
    domain = discretize(spec["polygon"], mesh, spec["interior"])
    marks = spec["marks"]
    marking = mark_rectangle(domain, marks["a"], marks["b"], marks["c"], marks["d"])
    return domain, marking
