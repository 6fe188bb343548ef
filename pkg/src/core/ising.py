# ---------------------------------------------
# ISING SAMPLERS
# ---------------------------------------------
"""
Ising model on a lattice domain with free or arc-wise fixed boundary spins.

Spins live in an int8 array indexed like the domain vertices. Samplers mutate
the configuration they are given and return it.

Dependencies:
    - numpy
    - scipy
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from src.core.exceptions import BoundaryConditionError, TooLarge
from src.core.grid import ARCS, LatticeDomain, RectangleMarking

logger = logging.getLogger(__name__)

MAX_EXACT_FREE_SPINS = 25
THERMALIZE_FACTOR = 10
METROPOLIS_PER_WOLFF = 1
_CHUNK = 1 << 14

Event = Callable[["SpinConfiguration"], bool]


def beta_critical() -> float:
    """Critical inverse temperature of the square-lattice model, ln(1 + sqrt 2) / 2."""
    return 0.5 * math.log1p(math.sqrt(2.0))


# ---------------------------------------------
# BOUNDARY CONDITIONS
# ---------------------------------------------

@dataclass(frozen=True)
class BoundaryCondition:
    """
    Free boundary, or signs fixed on some arcs of a rectangle marking.

    Attributes:
        kind (str): "free" or "fixed".
        fixed_arcs (Tuple[Tuple[str, int], ...]): (arc name, sign) pairs.
        marking (Optional[RectangleMarking]): Marking the arc names refer to.
    """
    kind: str = "free"
    fixed_arcs: Tuple[Tuple[str, int], ...] = ()
    marking: Optional[RectangleMarking] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("free", "fixed"):
            raise BoundaryConditionError(f"unknown boundary condition kind {self.kind!r}")
        names = [name for name, _ in self.fixed_arcs]
        if len(set(names)) != len(names):
            raise BoundaryConditionError("an arc is fixed twice")
        for name, sign in self.fixed_arcs:
            if name not in ARCS or sign not in (-1, 1):
                raise BoundaryConditionError(f"bad fixed arc ({name!r}, {sign!r})")
        if self.fixed_arcs and self.marking is None:
            raise BoundaryConditionError("fixed arcs need a marking")

    @classmethod
    def free(cls) -> "BoundaryCondition":
        return cls()

    @classmethod
    def mixed(cls, marking: RectangleMarking) -> "BoundaryCondition":
        """Free on [ab] and [cd], minus on [bc] and [da]."""
        return cls("fixed", (("bc", -1), ("da", -1)), marking)

    @classmethod
    def three_arc(cls, marking: RectangleMarking, plus: str = "ab", minus: Tuple[str, ...] = ("cd", "da")) -> "BoundaryCondition":
        """Plus on one arc, minus on others, free on the rest."""
        return cls("fixed", ((plus, 1),) + tuple((name, -1) for name in minus), marking)

    def fixed_values(self, domain: LatticeDomain) -> np.ndarray:
        """
        Prescribed sign per vertex, 0 where the spin is free.

        A vertex is fixed by every fixed arc holding one of its boundary edges.

        Raises:
            BoundaryConditionError: a vertex receives both signs.
        """
        values = np.zeros(domain.n_vertices, dtype=np.int8)
        if self.kind == "free":
            return values
        if self.marking.domain is not domain:
            raise BoundaryConditionError("marking belongs to another domain")
        for name, sign in self.fixed_arcs:
            mask = self.marking.arc_mask(name)
            clash = mask & (values == -sign)
            if clash.any():
                v = int(np.flatnonzero(clash)[0])
                raise BoundaryConditionError(
                    f"vertex {tuple(domain.coords[v])} is fixed to both signs")
            values[mask] = sign
        return values


# ---------------------------------------------
# CONFIGURATION
# ---------------------------------------------

@dataclass(eq=False)
class SpinConfiguration:
    """
    A spin assignment on every vertex of a domain.

    Attributes:
        domain (LatticeDomain): Shared, immutable domain.
        spins (np.ndarray): int8 array of +1/-1.
        bc (BoundaryCondition): Boundary condition the spins respect.
        beta (float): Inverse temperature.
    """
    domain: LatticeDomain
    spins: np.ndarray
    bc: BoundaryCondition = field(default_factory=BoundaryCondition.free)
    beta: float = 0.0

    def __post_init__(self):
        self.spins = np.asarray(self.spins, dtype=np.int8)
        self.fixed = self.bc.fixed_values(self.domain)
        self.fixed_mask = self.fixed != 0
        if self.spins.shape != (self.domain.n_vertices,):
            raise ValueError(f"expected {self.domain.n_vertices} spins, got {self.spins.shape}")
        if np.any(np.abs(self.spins) != 1):
            raise ValueError("spins must be +1 or -1")
        if np.any(self.spins[self.fixed_mask] != self.fixed[self.fixed_mask]):
            raise BoundaryConditionError("spins disagree with the fixed arcs")

    @classmethod
    def constant(cls, domain: LatticeDomain, sign: int, bc: Optional[BoundaryCondition] = None,
                 beta: float = 0.0) -> "SpinConfiguration":
        bc = bc or BoundaryCondition.free()
        spins = np.full(domain.n_vertices, sign, dtype=np.int8)
        fixed = bc.fixed_values(domain)
        spins[fixed != 0] = fixed[fixed != 0]
        return cls(domain, spins, bc, beta)

    @classmethod
    def from_cells(cls, domain: LatticeDomain, plus_cells, beta: float = 0.0) -> "SpinConfiguration":
        """Free-boundary configuration with + exactly on the given lattice points."""
        spins = -np.ones(domain.n_vertices, dtype=np.int8)
        for cell in plus_cells:
            spins[domain.index[tuple(cell)]] = 1
        return cls(domain, spins, BoundaryCondition.free(), beta)

    def copy(self) -> "SpinConfiguration":
        return SpinConfiguration(self.domain, self.spins.copy(), self.bc, self.beta)

    def flipped(self) -> "SpinConfiguration":
        """Global spin flip. The fixed arcs flip sign with the spins."""
        bc = self.bc
        if bc.kind == "fixed":
            bc = BoundaryCondition("fixed", tuple((n, -s) for n, s in bc.fixed_arcs), bc.marking)
        return SpinConfiguration(self.domain, (-self.spins).astype(np.int8), bc, self.beta)

    def spin_at(self, cell) -> int:
        """Spin of a lattice point, 0 outside the domain."""
        v = self.domain.index.get(tuple(cell))
        return 0 if v is None else int(self.spins[v])

    @property
    def magnetization(self) -> float:
        return float(self.spins.mean())

    @property
    def energy(self) -> int:
        """Sum of sigma_x * sigma_y over nearest-neighbour pairs."""
        e = self.domain.edges
        return int((self.spins[e[:, 0]].astype(np.int64) * self.spins[e[:, 1]]).sum())


def flip_event(event: Event) -> Event:
    """The event evaluated on the globally flipped configuration."""
    return lambda config: event(config.flipped())


# ---------------------------------------------
# MARKOV CHAIN MOVES
# ---------------------------------------------

def _local_fields(spins: np.ndarray, nbr4: np.ndarray) -> np.ndarray:
    padded = np.append(spins.astype(np.int64), 0)
    return padded[nbr4].sum(axis=1)


def metropolis_sweep(state: SpinConfiguration, rng: np.random.Generator) -> SpinConfiguration:
    """
    One sweep of single-site Metropolis updates at state.beta.

    Sites are updated in two checkerboard half-sweeps; a proposal is a fresh
    uniform sign, so at beta = 0 every free spin is resampled uniformly.
    """
    domain = state.domain
    parity = domain.coords.sum(axis=1) % 2
    for colour in (0, 1):
        sites = np.flatnonzero((parity == colour) & ~state.fixed_mask)
        if sites.size == 0:
            continue
        h = _local_fields(state.spins, domain.nbr4[sites])
        proposal = rng.choice(np.array([-1, 1], dtype=np.int8), size=sites.size)
        log_ratio = state.beta * (proposal.astype(np.int64) - state.spins[sites]) * h
        accept = rng.random(sites.size) < np.exp(np.minimum(log_ratio, 0.0))
        state.spins[sites[accept]] = proposal[accept]
    return state


def wolff_step(state: SpinConfiguration, rng: np.random.Generator) -> SpinConfiguration:
    """
    Grow one Wolff cluster with bond probability 1 - exp(-2 beta) and flip it.

    A cluster reaching a fixed vertex is discarded unflipped.
    """
    free = np.flatnonzero(~state.fixed_mask)
    if free.size == 0:
        return state
    p_add = -math.expm1(-2.0 * state.beta)
    spins, nbr4 = state.spins, state.domain.nbr4
    root = int(rng.choice(free))
    sign = spins[root]
    in_cluster = np.zeros(spins.size, dtype=bool)
    in_cluster[root] = True
    stack = [root]
    cluster = [root]
    while stack:
        v = stack.pop()
        for w in nbr4[v]:
            if w < 0 or in_cluster[w] or spins[w] != sign:
                continue
            if rng.random() < p_add:
                if state.fixed_mask[w]:
                    return state
                in_cluster[w] = True
                stack.append(int(w))
                cluster.append(int(w))
    spins[cluster] = -sign
    return state


def sample(domain: LatticeDomain, bc: BoundaryCondition, beta: float, n_thermalize: Optional[int] = None,
           rng: Optional[np.random.Generator] = None, metropolis_per_wolff: int = METROPOLIS_PER_WOLFF) -> SpinConfiguration:
    """
    Draw a configuration from a uniformly random start.

    Args:
        domain (LatticeDomain): Domain to sample on.
        bc (BoundaryCondition): Boundary condition.
        beta (float): Inverse temperature.
        n_thermalize (Optional[int]): Wolff steps; defaults to 10 * sqrt(|V|).
        rng (Optional[np.random.Generator]): Random stream.
        metropolis_per_wolff (int): Metropolis sweeps after every Wolff step.

    Returns:
        SpinConfiguration: The thermalised configuration.
    """
    rng = rng if rng is not None else np.random.default_rng()
    if n_thermalize is None:
        n_thermalize = default_thermalization(domain)
    if n_thermalize < 1:
        raise ValueError("n_thermalize must be at least 1")
    fixed = bc.fixed_values(domain)
    spins = rng.choice(np.array([-1, 1], dtype=np.int8), size=domain.n_vertices)
    spins[fixed != 0] = fixed[fixed != 0]
    state = SpinConfiguration(domain, spins, bc, beta)
    return advance_chain(state, n_thermalize, rng, metropolis_per_wolff)


def advance_chain(state: SpinConfiguration, n_steps: int, rng: np.random.Generator,
                  metropolis_per_wolff: int = METROPOLIS_PER_WOLFF) -> SpinConfiguration:
    for _ in range(n_steps):
        wolff_step(state, rng)
        for _ in range(metropolis_per_wolff):
            metropolis_sweep(state, rng)
    return state


def default_thermalization(domain: LatticeDomain, factor: float = THERMALIZE_FACTOR) -> int:
    return max(1, math.ceil(factor * math.sqrt(domain.n_vertices)))


# ---------------------------------------------
# EXACT ENUMERATION
# ---------------------------------------------

def exact_distribution(domain: LatticeDomain, bc: BoundaryCondition,
                       beta: float) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """
    Yield (spin rows, log weights) chunks over every admissible state.

    States are ordered by the binary code of the free spins, lowest free
    vertex in the lowest bit, bit set meaning +.

    Raises:
        TooLarge: more than 25 free spins.
    """
    fixed = bc.fixed_values(domain)
    free = np.flatnonzero(fixed == 0)
    if free.size > MAX_EXACT_FREE_SPINS:
        raise TooLarge(f"{free.size} free spins exceed the enumeration cap of {MAX_EXACT_FREE_SPINS}")
    total = 1 << free.size
    edges = domain.edges
    bits = np.arange(free.size, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        rows = np.tile(fixed, (codes.size, 1))
        rows[:, free] = np.where((codes[:, None] >> bits) & 1, 1, -1)
        energy = (rows[:, edges[:, 0]].astype(np.int64) * rows[:, edges[:, 1]]).sum(axis=1)
        yield rows, beta * energy.astype(float)


def enumerate_exact(domain: LatticeDomain, bc: BoundaryCondition, beta: float, event: Event) -> float:
    """
    Exact Gibbs probability of an event by summing over all states.

    Args:
        domain (LatticeDomain): Domain with at most 25 free spins.
        bc (BoundaryCondition): Boundary condition.
        beta (float): Inverse temperature.
        event (Event): Predicate on SpinConfiguration.

    Returns:
        float: The probability.
    """
    log_all, log_event = [], []
    for rows, log_w in exact_distribution(domain, bc, beta):
        log_all.append(logsumexp(log_w))
        hits = np.fromiter((bool(event(SpinConfiguration(domain, row, bc, beta))) for row in rows),
                           dtype=bool, count=len(rows))
        if hits.any():
            log_event.append(logsumexp(log_w[hits]))
    if not log_event:
        return 0.0
    return float(np.exp(logsumexp(log_event) - logsumexp(log_all)))


def state_probabilities(domain: LatticeDomain, bc: BoundaryCondition, beta: float) -> Dict[Tuple[int, ...], float]:
    """Exact probability of every state, keyed by the spin tuple."""
    chunks = list(exact_distribution(domain, bc, beta))
    log_z = logsumexp([logsumexp(log_w) for _, log_w in chunks])
    out: Dict[Tuple[int, ...], float] = {}
    for rows, log_w in chunks:
        for row, p in zip(rows, np.exp(log_w - log_z)):
            out[tuple(int(s) for s in row)] = float(p)
    return out


def all_configurations(domain: LatticeDomain, beta: float = 0.0) -> Iterator[SpinConfiguration]:
    """Every free-boundary configuration of a tiny domain."""
    for signs in itertools.product((-1, 1), repeat=domain.n_vertices):
        yield SpinConfiguration(domain, np.array(signs, dtype=np.int8), BoundaryCondition.free(), beta)
