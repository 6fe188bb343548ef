# ---------------------------------------------
# CONFORMAL TYPE OF QUADRILATERALS
# ---------------------------------------------
"""
Discrete extremal length of a marked lattice domain and the half-plane
four-point configuration of the same modulus.

Dependencies:
    - numpy
    - scipy
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, sparse
from scipy.sparse import linalg as sparse_linalg

from src.core.exceptions import NoConvergence
from src.core.grid import LatticeDomain, RectangleMarking

logger = logging.getLogger(__name__)

# conductance of the half-edge from a boundary vertex to its reservoir
_HALF_EDGE = 2.0


# ---------------------------------------------
# DISCRETE MODULUS
# ---------------------------------------------

def discrete_modulus(domain: LatticeDomain, marking: RectangleMarking, rtol: float = 1e-10,
                     maxiter: Optional[int] = None) -> float:
    """
    Discrete extremal length between [ab] and [cd].

    Potential 0 on [ab] and 1 on [cd] is imposed through half-edge links to
    two reservoirs, with zero flux through [bc] and [da]. The Dirichlet energy
    is the current into the [cd] reservoir; the extremal length is its
    reciprocal. On a lattice rectangle marked at its short sides this is
    exactly length / width.

    Args:
        domain (LatticeDomain): The domain.
        marking (RectangleMarking): Marking on the domain.
        rtol (float): Conjugate-gradient residual tolerance.
        maxiter (Optional[int]): Iteration cap; 10 * |V| by default.

    Returns:
        float: The modulus.

    Raises:
        NoConvergence: CG hit its iteration cap.
    """
    n = domain.n_vertices
    edges = domain.edges
    arcs = marking.edge_arcs
    ab = np.bincount(domain.boundary_vertex[arcs == 0], minlength=n) * _HALF_EDGE
    cd = np.bincount(domain.boundary_vertex[arcs == 2], minlength=n) * _HALF_EDGE

    weights = sparse.coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n)).tocsr()
    weights = weights + weights.T
    degree = np.asarray(weights.sum(axis=1)).ravel()
    diagonal = degree + ab + cd
    matrix = (sparse.diags(diagonal) - weights).tocsr()
    rhs = cd.astype(float)

    preconditioner = sparse.diags(1.0 / diagonal)
    potential, info = sparse_linalg.cg(matrix, rhs, rtol=rtol, atol=0.0, maxiter=maxiter or 10 * n,
                                       M=preconditioner)
    if info > 0:
        raise NoConvergence(f"conjugate gradient stopped after {info} iterations")
    if info < 0:
        raise NoConvergence(f"conjugate gradient failed with code {info}")

    energy = float(np.dot(cd, 1.0 - potential))
    logger.debug("discrete modulus on %d vertices: energy %.6g", n, energy)
    return 1.0 / energy


# ---------------------------------------------
# ELLIPTIC HELPERS
# ---------------------------------------------

def elliptic_K(k: float) -> float:
    """
    Complete elliptic integral of the first kind, modulus k, by the AGM.

    Args:
        k (float): Modulus in (0, 1).

    Returns:
        float: K(k) = pi / (2 AGM(1, sqrt(1 - k^2))).
    """
    if not 0 <= k < 1:
        raise ValueError(f"elliptic modulus must lie in [0, 1), got {k}")
    return math.pi / (2.0 * _agm(1.0, math.sqrt((1.0 - k) * (1.0 + k))))


def _agm(a: float, b: float) -> float:
    while abs(a - b) > 1e-15 * a:
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def _rectangle_modulus(k: float) -> float:
    # K(k') / (2 K(k)) written without forming k' = 1 for tiny k
    return _agm(1.0, math.sqrt((1.0 - k) * (1.0 + k))) / (2.0 * _agm(1.0, k))


def modulus_to_halfplane(m: float) -> Tuple[float, float, float, float]:
    """
    Half-plane points (-1/k, -1, 1, 1/k) of a rectangle with modulus m.

    m is the extremal length between (-1, 1) and the arc through infinity
    from 1/k to -1/k, i.e. K(k') / (2 K(k)).
    """
    if m <= 0:
        raise ValueError(f"modulus must be positive, got {m}")
    lo, hi = 1e-300, 1.0 - 1e-16
    if _rectangle_modulus(hi) > m:
        hi_m = _rectangle_modulus(hi)
        raise ValueError(f"modulus {m} below the representable range (> {hi_m:.3g})")
    if _rectangle_modulus(lo) < m:
        raise ValueError(f"modulus {m} above the representable range")
    k = optimize.bisect(lambda x: _rectangle_modulus(x) - m, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=4000)
    return -1.0 / k, -1.0, 1.0, 1.0 / k


def cross_ratio(z1: float, z2: float, z3: float, z4: float) -> float:
    """(z1 - z3)(z2 - z4) / ((z1 - z4)(z2 - z3))."""
    return (z1 - z3) * (z2 - z4) / ((z1 - z4) * (z2 - z3))


def halfplane_modulus(points: Sequence[float]) -> float:
    """
    Extremal length between (x2, x3) and (x4, x1) for x1 < x2 < x3 < x4.

    Inverse of modulus_to_halfplane up to Moebius maps.
    """
    x1, x2, x3, x4 = points
    lam = (x3 - x2) * (x4 - x1) / ((x4 - x2) * (x3 - x1))
    r = math.sqrt(1.0 - lam)
    return _rectangle_modulus((1.0 - r) / (1.0 + r))


# ---------------------------------------------
# NORMALISATION FOR THE DRIVING PROCESS
# ---------------------------------------------

def harmonic_midpoint(a: float, b: float, c: float, d: float) -> float:
    """
    Point of (b, c) splitting the harmonic measure of [bc] in half.

    It is the root in (b, c) of
    (2x - a - d)(x - b)(x - c) - (x - a)(x - d)(2x - b - c).
    """
    def balance(x: float) -> float:
        return (2 * x - a - d) * (x - b) * (x - c) - (x - a) * (x - d) * (2 * x - b - c)

    return float(optimize.brentq(balance, b, c, xtol=1e-15, rtol=1e-15))


def moebius_normalize(points: Sequence[float], start_index: int = 1,
                      target: Optional[float] = None) -> Tuple[float, float, float, float]:
    """
    Send the start mark to 0 and a point of [bc] to infinity.

    The marks are a = points[start_index] and the following points in
    increasing cyclic order. The map T(z) = (z - a) / (v - z) fixes the upper
    half-plane and yields x_b > 0 and x_c < x_d < 0.

    Args:
        points (Sequence[float]): x1 < x2 < x3 < x4.
        start_index (int): Index of a.
        target (Optional[float]): v in (b, c); the harmonic midpoint by default.

    Returns:
        Tuple[float, float, float, float]: (0, x_b, x_c, x_d).
    """
    xs = list(points)
    if len(xs) != 4:
        raise ValueError(f"expected four marked points, got {len(xs)}")
    if not all(isinstance(p, (int, float, np.floating, np.integer)) and math.isfinite(p) for p in xs):
        raise ValueError(f"marked points must be finite reals, got {xs}")
    if len(set(xs)) != 4:
        raise ValueError(f"marked points must be distinct, got {xs}")
    if any(p >= q for p, q in zip(xs, xs[1:])):
        raise ValueError(f"points must be strictly increasing, got {xs}")
    if start_index not in range(4):
        raise ValueError(f"start_index must be 0..3, got {start_index}")
    a, b, c, d = (xs[(start_index + k) % 4] for k in range(4))
    if not b < c:
        raise ValueError("the arc [bc] must not pass through infinity")
    v = harmonic_midpoint(a, b, c, d) if target is None else target
    if not b < v < c:
        raise ValueError(f"target {v} is not inside ({b}, {c})")

    def T(z: float) -> float:
        return (z - a) / (v - z)

    return 0.0, T(b), T(c), T(d)


def rectangle_configuration(m: float, target: Optional[float] = None) -> Tuple[float, float, float]:
    """(x_b, x_c, x_d) for a rectangle of modulus m, ready for the CDE race."""
    _, x_b, x_c, x_d = moebius_normalize(modulus_to_halfplane(m), start_index=1, target=target)
    return x_b, x_c, x_d
