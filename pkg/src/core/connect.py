# ---------------------------------------------
# CROSSING EVENTS
# ---------------------------------------------
"""
Crossing and star-crossing between opposite arcs of a marked configuration.

plus_crossing uses nearest-neighbour adjacency, star_crossing adds the four
diagonal neighbours. Both run a union-find over + vertices; the BFS versions
are kept as slow oracles.
"""

import logging
from collections import deque
from functools import lru_cache
from typing import List

import numpy as np

from src.core.grid import LatticeDomain, RectangleMarking
from src.core.ising import SpinConfiguration

logger = logging.getLogger(__name__)

PLUS = "plus"
STAR = "star"

# nbr8 columns: E, NE, N, NW, W, SW, S, SE
_FORWARD8 = (0, 1, 2, 3)
_ALL8 = tuple(range(8))
_ALL4_IN_8 = (0, 2, 4, 6)


class UnionFind:
    """
    Disjoint sets over 0..n-1 with a reset buffer.

    Only entries touched since the last reset are restored, so reusing one
    instance across samples costs nothing for untouched vertices.
    """

    def __init__(self, size: int):
        self.parent: List[int] = list(range(size))
        self._touched: List[int] = []

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[rx] = ry
            self._touched.append(rx)

    def reset(self) -> None:
        for x in self._touched:
            self.parent[x] = x
        self._touched.clear()


class CrossingDetector:
    """
    Reusable crossing test for one domain and one adjacency.

    Args:
        domain (LatticeDomain): Domain the configurations live on.
        adjacency (str): "plus" (4 neighbours) or "star" (8 neighbours).
    """

    def __init__(self, domain: LatticeDomain, adjacency: str = PLUS):
        if adjacency not in (PLUS, STAR):
            raise ValueError(f"unknown adjacency {adjacency!r}")
        self.domain = domain
        self.adjacency = adjacency
        columns = (0, 2) if adjacency == PLUS else _FORWARD8
        pairs = [np.stack([np.arange(domain.n_vertices), domain.nbr8[:, col]], axis=1) for col in columns]
        pairs = np.concatenate(pairs)
        self.pairs = pairs[pairs[:, 1] >= 0]
        self.source = domain.n_vertices
        self.target = domain.n_vertices + 1
        self._uf = UnionFind(domain.n_vertices + 2)

    def crosses(self, spins: np.ndarray, source_mask: np.ndarray, target_mask: np.ndarray) -> bool:
        """True iff + vertices connect the source set to the target set."""
        plus = spins > 0
        uf = self._uf
        try:
            for v in np.flatnonzero(plus & source_mask).tolist():
                uf.union(v, self.source)
            for v in np.flatnonzero(plus & target_mask).tolist():
                uf.union(v, self.target)
            if uf.find(self.source) == uf.find(self.target):
                return True
            both = plus[self.pairs[:, 0]] & plus[self.pairs[:, 1]]
            for x, y in self.pairs[both].tolist():
                uf.union(x, y)
            return uf.find(self.source) == uf.find(self.target)
        finally:
            uf.reset()


@lru_cache(maxsize=16)
def _detector(domain: LatticeDomain, adjacency: str) -> CrossingDetector:
    return CrossingDetector(domain, adjacency)


# ---------------------------------------------
# EVENTS
# ---------------------------------------------

def plus_crossing(config: SpinConfiguration, marking: RectangleMarking) -> bool:
    """+ nearest-neighbour path from [ab] to [cd]."""
    detector = _detector(config.domain, PLUS)
    return detector.crosses(config.spins, marking.arc_mask("ab"), marking.arc_mask("cd"))


def star_crossing(config: SpinConfiguration, marking: RectangleMarking) -> bool:
    """+ eight-neighbour path from [ab] to [cd]."""
    detector = _detector(config.domain, STAR)
    return detector.crosses(config.spins, marking.arc_mask("ab"), marking.arc_mask("cd"))


def minus_star_crossing(config: SpinConfiguration, marking_rotated: RectangleMarking) -> bool:
    """
    - eight-neighbour path from [bc] to [da] of the original marking.

    Args:
        config (SpinConfiguration): Configuration.
        marking_rotated (RectangleMarking): The marking rotated once, (b, c, d, a).
    """
    return star_crossing(config.flipped(), marking_rotated)


# ---------------------------------------------
# BFS ORACLES
# ---------------------------------------------

def _bfs_crossing(config: SpinConfiguration, marking: RectangleMarking, columns) -> bool:
    domain = config.domain
    plus = config.spins > 0
    target = marking.arc_mask("cd")
    seen = plus & marking.arc_mask("ab")
    queue = deque(np.flatnonzero(seen).tolist())
    while queue:
        v = queue.popleft()
        if target[v]:
            return True
        for col in columns:
            w = domain.nbr8[v, col]
            if w >= 0 and plus[w] and not seen[w]:
                seen[w] = True
                queue.append(int(w))
    return False


def plus_crossing_bfs(config: SpinConfiguration, marking: RectangleMarking) -> bool:
    return _bfs_crossing(config, marking, _ALL4_IN_8)


def star_crossing_bfs(config: SpinConfiguration, marking: RectangleMarking) -> bool:
    return _bfs_crossing(config, marking, _ALL8)
