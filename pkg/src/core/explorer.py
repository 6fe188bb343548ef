# ---------------------------------------------
# FREE EXPLORERS
# ---------------------------------------------
"""
Exploration paths on the dual lattice.

An exploration from u to v walks along dual edges with + spins (or the
exterior) on its left and - spins (or the exterior) on its right. It never
uses a dual edge twice and never crosses itself, although it may come back to
a dual vertex it has already visited, and it keeps v reachable in the part of
the dual graph it has not cut off. The leftmost explorer takes the most
counterclockwise admissible step each time, the rightmost the most clockwise.

Orientation -1 swaps the roles of the two sides, which is what a time
reversed exploration satisfies.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np
import pandas as pd

from src.core.exceptions import NoHit, Stuck
from src.core.grid import (
    DIRECTIONS,
    DualVertex,
    LatticeDomain,
    RectangleMarking,
    arc_target_vertex,
    dual_start_vertex,
    step_cells,
)
from src.core.ising import SpinConfiguration

logger = logging.getLogger(__name__)

LEFTMOST = "leftmost"
RIGHTMOST = "rightmost"
HIT_CD_FIRST = "HitCD_first"
HIT_BC_FIRST = "HitBC_first"

DualEdge = Tuple[DualVertex, DualVertex]


# ---------------------------------------------
# PATH TYPES
# ---------------------------------------------

@dataclass(frozen=True)
class ExplorationPath:
    """
    A dual path gamma_0 .. gamma_n.

    Attributes:
        vertices (Tuple[DualVertex, ...]): Dual vertices in travel order.
        orientation (int): +1 when + spins are on the left.
        rule (str): "leftmost", "rightmost" or "given".
        start_segment (Optional[int]): Contour segment the path leaves u from, the first one when None.
    """
    vertices: Tuple[DualVertex, ...]
    orientation: int = 1
    rule: str = "given"
    start_segment: Optional[int] = None

    @property
    def u(self) -> DualVertex:
        return self.vertices[0]

    @property
    def v(self) -> DualVertex:
        return self.vertices[-1]

    @property
    def n_steps(self) -> int:
        return len(self.vertices) - 1

    @property
    def edges(self) -> List[DualEdge]:
        return list(zip(self.vertices[:-1], self.vertices[1:]))

    @property
    def directions(self) -> List[int]:
        return [_direction(a, b) for a, b in self.edges]


@dataclass(frozen=True)
class SlitState:
    """
    Boundary arcs of the slit domain after step n.

    L and R are contour positions counted clockwise from u; jL and jR are the
    steps at which the path last touched them.

    Attributes:
        step (int): n.
        tip (DualVertex): gamma_n.
        L (int): Leftmost boundary position reached.
        R (int): Rightmost boundary position reached.
        jL (int): Step that reached L.
        jR (int): Step that reached R.
        C_plus (Tuple[DualVertex, ...]): From the tip back along the path's left side to L.
        C_minus (Tuple[DualVertex, ...]): From R along the path's right side to the tip.
        C_free (Tuple[DualVertex, ...]): Untouched boundary from L clockwise to R.
    """
    step: int
    tip: DualVertex
    L: int
    R: int
    jL: int
    jR: int
    C_plus: Tuple[DualVertex, ...]
    C_minus: Tuple[DualVertex, ...]
    C_free: Tuple[DualVertex, ...]


# ---------------------------------------------
# LOCAL RULES
# ---------------------------------------------

def _spin_admissible(config: SpinConfiguration, w: DualVertex, direction: int, orientation: int) -> bool:
    left, right = step_cells(w, direction)
    return orientation * config.spin_at(left) >= 0 and orientation * config.spin_at(right) <= 0


def _step(w: DualVertex, direction: int) -> DualVertex:
    dx, dy = DIRECTIONS[direction]
    return w[0] + dx, w[1] + dy


def _direction(a: DualVertex, b: DualVertex) -> int:
    return DIRECTIONS.index((b[0] - a[0], b[1] - a[1]))


def _opposite(direction: int) -> int:
    return (direction + 2) % 4


def _start_direction(domain: LatticeDomain, u: DualVertex, start_segment: Optional[int]) -> int:
    occurrences = domain.contour_index.get(u)
    if not occurrences:
        raise ValueError(f"{u} is not a dual boundary vertex")
    k = occurrences[0] if start_segment is None else start_segment
    if k not in occurrences:
        raise ValueError(f"contour segment {k} does not start at {u}")
    return domain.segment_direction(k)


def _start_slot(domain: LatticeDomain, u: DualVertex, start_segment: Optional[int]) -> int:
    # outside quadrant on the left of the first contour segment
    return 2 * _start_direction(domain, u, start_segment) + 1


class _SlitGraph:
    """
    Dual graph left over by a growing path.

    The eight slots around a dual vertex are numbered counterclockwise: slot
    2d is the ray in direction d and slot 2d + 1 the quadrant between rays d
    and d + 1. Each pass of the path through a vertex cuts the slots of the
    two rays it uses, and the start vertex carries one more cut in its outside
    quadrant. A slot belongs to the sector named by the first cut met
    counterclockwise from it. A path may only leave a vertex inside the sector
    it came in from; at the tip the entry cut is left out.
    """

    def __init__(self, domain: LatticeDomain, start: DualVertex, target: DualVertex, start_slot: int):
        self.domain = domain
        self.target = target
        self.used: Set[DualEdge] = set()
        self.cuts: Dict[DualVertex, Set[int]] = {start: {start_slot}}
        self.history: List[Tuple[DualVertex, int, int]] = []
        self.tip = start
        self.entry = start_slot
        self.searches = 0

    @staticmethod
    def _key(a: DualVertex, b: DualVertex) -> DualEdge:
        return (a, b) if a <= b else (b, a)

    @property
    def vertices(self) -> Tuple[DualVertex, ...]:
        return tuple(w for w, _, _ in self.history) + (self.tip,)

    @property
    def n_steps(self) -> int:
        return len(self.history)

    def is_open(self, w: DualVertex, direction: int) -> bool:
        return (self.domain.has_dual_edge(w, direction)
                and self._key(w, _step(w, direction)) not in self.used)

    def label(self, w: DualVertex, slot: int) -> int:
        cuts = self.cuts.get(w, ())
        skip = self.entry if w == self.tip else None
        for k in range(1, 9):
            s = (slot + k) % 8
            if s in cuts and s != skip:
                return s
        return -1

    def turn_rank(self, direction: int) -> int:
        """0 points back along the entry; smaller ranks turn further left."""
        return (self.entry - 2 * direction) % 8

    def may_leave(self, direction: int) -> bool:
        return (self.is_open(self.tip, direction)
                and self.label(self.tip, 2 * direction) == self.label(self.tip, self.entry))

    def push(self, direction: int) -> None:
        tip, nxt = self.tip, _step(self.tip, direction)
        self.used.add(self._key(tip, nxt))
        self.cuts[tip].add(2 * direction)
        self.history.append((tip, self.entry, direction))
        self.tip, self.entry = nxt, 2 * _opposite(direction)
        self.cuts.setdefault(nxt, set()).add(self.entry)

    def pop(self) -> None:
        tip, entry, direction = self.history.pop()
        self.cuts[self.tip].discard(self.entry)
        self.cuts[tip].discard(2 * direction)
        self.used.discard(self._key(tip, self.tip))
        self.tip, self.entry = tip, entry

    def reaches_target(self) -> bool:
        """Whether the target is still reachable from the tip's sector."""
        if self.tip == self.target:
            return True
        return self._last_step_bypassed() or self._search()

    def _last_step_bypassed(self) -> bool:
        # The step splits the sector it left the previous tip through. Every
        # piece holding an open ray must be reachable from the new tip around
        # the unit square beside the step.
        if not self.history:
            return False
        t, entry, d = self.history[-1]
        if t == self.target:
            return False
        cuts = self.cuts[t]
        for side in (1, -1):
            k, has_rays = 2 * d + side, False
            while k % 8 not in cuts:
                has_rays = has_rays or (k % 2 == 0 and self.is_open(t, (k % 8) // 2))
                k += side
            if k % 8 != entry:
                j = entry - side
                while j % 8 not in cuts:
                    if j % 2 == 0 and self.is_open(t, (j % 8) // 2):
                        return False
                    j -= side
            if has_rays and not self._square_bypass(t, d, (d + side) % 4):
                return False
        return True

    def _square_bypass(self, t: DualVertex, d: int, a: int) -> bool:
        # tip -> tip + a -> t + a -> t, arriving at t through ray a
        tip = self.tip
        x, y = _step(tip, a), _step(t, a)
        if not (self.is_open(tip, a) and self.is_open(x, _opposite(d)) and self.is_open(y, _opposite(a))):
            return False
        return (self.label(tip, 2 * a) == self.label(tip, self.entry)
                and self.label(x, 2 * _opposite(a)) == self.label(x, 2 * _opposite(d))
                and self.label(y, 2 * d) == self.label(y, 2 * _opposite(a)))

    def _search(self) -> bool:
        self.searches += 1
        start = (self.tip, self.label(self.tip, self.entry))
        seen = {start}
        queue = deque([start])
        while queue:
            w, sector = queue.popleft()
            if w == self.target:
                return True
            for d in range(4):
                if not self.is_open(w, d) or self.label(w, 2 * d) != sector:
                    continue
                x = _step(w, d)
                node = (x, self.label(x, 2 * _opposite(d)))
                if node not in seen:
                    seen.add(node)
                    queue.append(node)
        return False


# ---------------------------------------------
# EXPLORERS
# ---------------------------------------------

def explore(config: SpinConfiguration, u: DualVertex, v: DualVertex, rule: str = LEFTMOST,
            orientation: int = 1, start_segment: Optional[int] = None) -> ExplorationPath:
    """
    Run the leftmost or rightmost explorer from u to v.

    Candidate steps are ranked by how far they turn from the way the tip was
    entered: left, straight, right after a step, and at u from the first
    contour segment clockwise round to its reverse. The rightmost rule reads
    the same ranking backwards.

    Args:
        config (SpinConfiguration): Configuration to explore.
        u (DualVertex): Start, a dual boundary vertex.
        v (DualVertex): Target, a dual boundary vertex.
        rule (str): "leftmost" or "rightmost".
        orientation (int): +1 for + on the left.
        start_segment (Optional[int]): Contour segment fixing the start side at a pinch.

    Returns:
        ExplorationPath: The path, ending at its first visit to v.

    Raises:
        Stuck: no admissible step exists.
    """
    domain = config.domain
    if rule not in (LEFTMOST, RIGHTMOST):
        raise ValueError(f"unknown explorer rule {rule!r}")
    if u == v:
        raise ValueError("explorer endpoints must differ")
    if v not in domain.contour_index:
        raise ValueError(f"{v} is not a dual boundary vertex")

    graph = _SlitGraph(domain, u, v, _start_slot(domain, u, start_segment))
    while graph.tip != v:
        order = sorted(range(4), key=graph.turn_rank, reverse=rule == RIGHTMOST)
        for d in order:
            if not graph.may_leave(d) or not _spin_admissible(config, graph.tip, d, orientation):
                continue
            graph.push(d)
            if graph.reaches_target():
                break
            graph.pop()
        else:
            raise Stuck(f"{rule} explorer stuck at {graph.tip} after {graph.n_steps} steps")

    logger.debug("%s explorer: %d steps, %d full searches", rule, graph.n_steps, graph.searches)
    return ExplorationPath(graph.vertices, orientation, rule, start_segment)


def leftmost_explorer(config: SpinConfiguration, u: DualVertex, v: DualVertex,
                      start_segment: Optional[int] = None) -> ExplorationPath:
    return explore(config, u, v, LEFTMOST, 1, start_segment)


def rightmost_explorer(config: SpinConfiguration, u: DualVertex, v: DualVertex,
                       start_segment: Optional[int] = None) -> ExplorationPath:
    return explore(config, u, v, RIGHTMOST, 1, start_segment)


def explore_from_corner(config: SpinConfiguration, marking: RectangleMarking, rule: str = LEFTMOST) -> ExplorationPath:
    """Explorer from the dual vertex at a towards the middle of [bc]."""
    u = dual_start_vertex(marking, "a")
    v = arc_target_vertex(marking, "bc")
    return explore(config, u, v, rule, 1, marking.cuts[0])


# ---------------------------------------------
# VALIDITY AND ENUMERATION
# ---------------------------------------------

def is_valid_exploration(config: SpinConfiguration, path, orientation: Optional[int] = None) -> bool:
    """
    Check a path against the exploration rules.

    The path may pass through its end point before it stops there.

    Args:
        config (SpinConfiguration): Configuration.
        path (ExplorationPath or Sequence[DualVertex]): Candidate path.
        orientation (Optional[int]): Overrides the path's own orientation.

    Returns:
        bool: True when every rule holds.
    """
    start_segment = None
    if isinstance(path, ExplorationPath):
        vertices = list(path.vertices)
        orientation = path.orientation if orientation is None else orientation
        start_segment = path.start_segment
    else:
        vertices = [tuple(w) for w in path]
        orientation = 1 if orientation is None else orientation
    domain = config.domain
    if len(vertices) < 2 or vertices[0] == vertices[-1]:
        return False
    if vertices[0] not in domain.contour_index or vertices[-1] not in domain.contour_index:
        return False
    try:
        start_slot = _start_slot(domain, vertices[0], start_segment)
    except ValueError:
        return False

    graph = _SlitGraph(domain, vertices[0], vertices[-1], start_slot)
    for a, b in zip(vertices[:-1], vertices[1:]):
        step = (b[0] - a[0], b[1] - a[1])
        if step not in DIRECTIONS:
            return False
        d = DIRECTIONS.index(step)
        if not graph.may_leave(d) or not _spin_admissible(config, a, d, orientation):
            return False
        graph.push(d)
        if not graph.reaches_target():
            return False
    return True


def reverse_path(path: ExplorationPath) -> ExplorationPath:
    """Time reversal: same vertices backwards, + now on the right."""
    return ExplorationPath(tuple(reversed(path.vertices)), -path.orientation, "given")


def enumerate_explorations(config: SpinConfiguration, u: DualVertex, v: DualVertex, orientation: int = 1,
                           start_segment: Optional[int] = None) -> Iterator[ExplorationPath]:
    """Every valid exploration from u to its first visit to v. Exponential; tiny grids only."""
    domain = config.domain
    if u == v or u not in domain.contour_index or v not in domain.contour_index:
        return
    graph = _SlitGraph(domain, u, v, _start_slot(domain, u, start_segment))

    def extend() -> Iterator[ExplorationPath]:
        if graph.tip == v:
            yield ExplorationPath(graph.vertices, orientation, "given", start_segment)
            return
        for d in range(4):
            if not graph.may_leave(d) or not _spin_admissible(config, graph.tip, d, orientation):
                continue
            graph.push(d)
            if graph.reaches_target():
                yield from extend()
            graph.pop()

    yield from extend()


# ---------------------------------------------
# PLANAR ORDER
# ---------------------------------------------

def is_left_of(first: ExplorationPath, second: ExplorationPath, domain: LatticeDomain) -> bool:
    """
    Whether first runs weakly counterclockwise of second.

    Both paths leave the same start; they are compared by the turn each takes
    where they first part. Equal paths compare True.
    """
    if first.u != second.u:
        raise ValueError("paths must share their start")
    a, b = first.vertices, second.vertices
    n = next((i for i in range(1, min(len(a), len(b))) if a[i] != b[i]), None)
    if n is None:
        return len(a) <= len(b)
    if n == 1:
        entry = _start_slot(domain, a[0], first.start_segment)
    else:
        entry = 2 * _direction(a[n - 1], a[n - 2])

    def rank(w: DualVertex) -> int:
        return (entry - 2 * _direction(a[n - 1], w)) % 8

    return rank(a[n]) < rank(b[n])


def _slot(w: DualVertex, towards: DualVertex) -> int:
    return 2 * _direction(w, towards)


def _ccw_between(slot: int, lo: int, hi: int) -> bool:
    return 0 < (slot - lo) % 8 < (hi - lo) % 8


def paths_cross(first: ExplorationPath, second: ExplorationPath) -> bool:
    """
    Whether first crosses second transversally.

    Every stretch the paths share (a single vertex or a run of common edges)
    is checked for first arriving on one side of second and leaving on the
    other. Touching, sharing edges and meeting at an end point do not count.
    Passing the same path twice checks it for self-crossings.
    """
    a, b = first.vertices, second.vertices
    where: Dict[DualVertex, List[int]] = {}
    for m in range(1, len(b) - 1):
        where.setdefault(b[m], []).append(m)
    for i in range(1, len(a) - 1):
        for m in where.get(a[i], ()):
            if a[i - 1] == b[m - 1]:
                continue
            k = 0
            while i + k + 1 < len(a) and m + k + 1 < len(b) and a[i + k + 1] == b[m + k + 1]:
                k += 1
            i_end, m_end = i + k, m + k
            if i_end == len(a) - 1 or m_end == len(b) - 1:
                continue
            left_before = _ccw_between(_slot(a[i], a[i - 1]), _slot(b[m], b[m + 1]), _slot(b[m], b[m - 1]))
            left_after = _ccw_between(_slot(a[i_end], a[i_end + 1]), _slot(b[m_end], b[m_end + 1]),
                                      _slot(b[m_end], b[m_end - 1]))
            if left_before != left_after:
                return True
    return False


# ---------------------------------------------
# OBSERVABLES
# ---------------------------------------------

def hit_classification(path: ExplorationPath, marking: RectangleMarking, v: Optional[DualVertex] = None) -> str:
    """
    Which of [bc] and [cd] the path touches first.

    Args:
        path (ExplorationPath): Path started at the dual vertex of a.
        marking (RectangleMarking): Marking of the domain.
        v (Optional[DualVertex]): Target, must touch [bc] when given.

    Returns:
        str: "HitCD_first" or "HitBC_first".

    Raises:
        NoHit: neither arc is touched.
    """
    touch = marking.touch_sets
    if v is not None and v not in touch["bc"]:
        raise ValueError(f"target {v} does not touch [bc]")
    for w in path.vertices[1:]:
        if w in touch["bc"]:
            return HIT_BC_FIRST
        if w in touch["cd"]:
            return HIT_CD_FIRST
    raise NoHit(f"path of {path.n_steps} steps touches neither [bc] nor [cd]")


def slit_states(path: ExplorationPath, domain: LatticeDomain, start_segment: Optional[int] = None) -> List[SlitState]:
    """Slit-domain bookkeeping after every step of a path."""
    n_contour = domain.n_boundary
    if start_segment is None:
        start_segment = path.start_segment
    k_u = domain.contour_index[path.u][0] if start_segment is None else start_segment

    def positions(w: DualVertex) -> List[int]:
        return [(k - k_u) % n_contour for k in domain.contour_index.get(w, [])]

    target_positions = [p for p in positions(path.v) if p > 0]
    p_v = target_positions[0] if target_positions else 0

    L, R, jL, jR = 0, n_contour, 0, 0
    states = []
    for n, w in enumerate(path.vertices):
        if n > 0:
            for p in positions(w):
                if L < p < p_v:
                    L, jL = p, n
                elif p_v < p < R:
                    R, jR = p, n
        states.append(SlitState(
            step=n,
            tip=w,
            L=L,
            R=R,
            jL=jL,
            jR=jR,
            C_plus=tuple(reversed(path.vertices[jL:n + 1])),
            C_minus=tuple(path.vertices[jR:n + 1]),
            C_free=tuple(domain.contour_vertex(k_u + p) for p in range(L, R + 1)),
        ))
    return states


def shared_no_return_edges(left: ExplorationPath, right: ExplorationPath) -> FrozenSet[DualEdge]:
    """Directed dual edges traversed by both paths."""
    if left.u != right.u or left.v != right.v:
        raise ValueError("paths must share their endpoints")
    return frozenset(left.edges) & frozenset(right.edges)


def hair_gaps(path: ExplorationPath, shared: FrozenSet[DualEdge], domain: LatticeDomain) -> np.ndarray:
    """
    Gaps between consecutive shared edges along a path, relative to the diameter.

    The endpoints u and v count as anchors.
    """
    anchors = [domain.dual_position(path.u)]
    for a, b in path.edges:
        if (a, b) in shared:
            pa, pb = domain.dual_position(a), domain.dual_position(b)
            anchors.append(((pa[0] + pb[0]) / 2, (pa[1] + pb[1]) / 2))
    anchors.append(domain.dual_position(path.v))
    points = np.asarray(anchors)
    return np.hypot(*np.diff(points, axis=0).T) / domain.diameter


def discrete_arc_ensemble(config: SpinConfiguration,
                          anchors: Sequence[DualVertex]) -> List[Tuple[DualVertex, DualVertex, ExplorationPath]]:
    """Leftmost and rightmost explorations for every ordered pair of anchors."""
    if len(anchors) < 2:
        raise ValueError("the ensemble needs at least two anchors")
    members = []
    for u in anchors:
        for v in anchors:
            if u == v:
                continue
            members.append((u, v, leftmost_explorer(config, u, v)))
            members.append((u, v, rightmost_explorer(config, u, v)))
    return members


def path_to_frame(path: ExplorationPath, domain: Optional[LatticeDomain] = None) -> pd.DataFrame:
    """Step index with dual coordinates, physical when a domain is given."""
    if domain is None:
        xy = np.asarray(path.vertices, dtype=float)
    else:
        xy = np.asarray([domain.dual_position(w) for w in path.vertices])
    return pd.DataFrame({"step": np.arange(len(path.vertices)), "x": xy[:, 0], "y": xy[:, 1]})
