# ---------------------------------------------
# EXPERIMENT UTILITIES
# ---------------------------------------------
"""
Statistics, parsing and plotting helpers shared by the experiment harness.

This module provides Wilson intervals, two-proportion comparisons, exact
parsing of mesh-size lists, seed spawning for worker streams and Plotly
figures for explorer paths, driving functions and Loewner traces.

Dependencies:
    - numpy
    - scipy
    - pandas
    - plotly
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import plotly.graph_objects as go
from scipy import stats

from src.core.grid import to_fraction


# ---------------------------------------------
# STATISTICS
# ---------------------------------------------

def wilson_interval(successes: int, total: int, z: float = 1.96) -> Tuple[float, float]:
    """
    Wilson score interval for a binomial proportion.

    Args:
        successes (int): Number of successes.
        total (int): Number of trials.
        z (float, optional): Normal quantile. Defaults to 1.96 (95%).

    Returns:
        Tuple[float, float]: (lo, hi); (0, 1) when total is 0.
    """
    if total <= 0:
        return 0.0, 1.0
    p = successes / total
    denom = 1.0 + z * z / total
    centre = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class Comparison:
    """Pooled two-proportion z test."""
    p_left: float
    p_right: float
    n_left: int
    n_right: int
    z: float
    p_value: float
    threshold: float = 3.0

    @property
    def passed(self) -> bool:
        return abs(self.z) < self.threshold


def compare_counts(s1: int, n1: int, s2: int, n2: int, threshold: float = 3.0) -> Comparison:
    if n1 <= 0 or n2 <= 0:
        raise ValueError("both samples need decided trials")
    p1, p2 = s1 / n1, s2 / n2
    pooled = (s1 + s2) / (n1 + n2)
    se = math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    if se == 0:
        z = 0.0 if p1 == p2 else math.copysign(math.inf, p1 - p2)
    else:
        z = (p1 - p2) / se
    return Comparison(p1, p2, n1, n2, z, float(2 * stats.norm.sf(abs(z))), threshold)


def compare(e1, e2, threshold: float = 3.0) -> Comparison:
    """
    Compare two independent estimates.

    Args:
        e1, e2 (Estimate): Estimates of the same event.
        threshold (float, optional): |z| below which they agree. Defaults to 3.

    Returns:
        Comparison: z statistic and verdict.
    """
    return compare_counts(e1.successes, e1.decided, e2.successes, e2.decided, threshold)


def merge_estimates(estimates: Iterable):
    """Fold estimates by count addition; the order does not matter."""
    return reduce(lambda a, b: a.merge(b), estimates)


def spawn_seeds(root: int, n: int) -> List[np.random.SeedSequence]:
    """Independent child streams of a root seed, one per worker."""
    return np.random.SeedSequence(root).spawn(n)


# ---------------------------------------------
# PARSING
# ---------------------------------------------

def parse_delta_list(text: str) -> List[Fraction]:
    """
    Parse "1/16,1/32,0.125" into exact fractions.

    Raises:
        ValueError: an entry is empty or not positive.
    """
    deltas = []
    for item in text.split(","):
        if not item.strip():
            raise ValueError(f"empty entry in mesh list {text!r}")
        delta = to_fraction(item)
        if delta <= 0:
            raise ValueError(f"mesh size must be positive, got {item!r}")
        deltas.append(delta)
    return deltas


def parse_points(text: str) -> Tuple[float, ...]:
    return tuple(float(item) for item in text.split(","))


# ---------------------------------------------
# PLOTTING
# ---------------------------------------------

def _dark_layout(fig: go.Figure, title: str, x_title: str, y_title: str, equal_axes: bool = False) -> go.Figure:
    fig.update_layout(
        title=title,
        xaxis_title=x_title,
        yaxis_title=y_title,
        template='plotly_white',
        font=dict(size=10, color="#e1e1e1"),
        paper_bgcolor="#1e1e1e",
        plot_bgcolor="#1e1e1e",
        showlegend=True,
        xaxis_showgrid=True,
        yaxis_showgrid=True
    )
    fig.update_xaxes(gridcolor="#1f292f")
    fig.update_yaxes(gridcolor="#1f292f")
    if equal_axes:
        fig.update_yaxes(scaleanchor="x", scaleratio=1)
    return fig


def plot_exploration(spins: pd.DataFrame, paths: Sequence[Tuple[str, pd.DataFrame]],
                     fig: Optional[go.Figure] = None) -> go.Figure:
    """
    Spins as coloured markers with explorer paths on top.

    Args:
        spins (pd.DataFrame): Columns x, y, spin in physical units.
        paths (Sequence[Tuple[str, pd.DataFrame]]): (name, frame with x, y) pairs.
        fig (Optional[go.Figure]): Figure to draw into.

    Returns:
        go.Figure: The figure.
    """
    fig = fig if fig is not None else go.Figure()
    for sign, colour, name in ((1, 'orange', '+'), (-1, 'steelblue', '-')):
        part = spins[spins['spin'] == sign]
        fig.add_trace(go.Scatter(x=part['x'], y=part['y'], mode='markers', name=name,
                                 marker=dict(color=colour, size=6, symbol='square')))
    for (name, frame), colour in zip(paths, ('white', 'yellow', 'red', 'green')):
        fig.add_trace(go.Scatter(x=frame['x'], y=frame['y'], mode='lines', name=name,
                                 line=dict(color=colour, width=2)))
    return _dark_layout(fig, 'Explorer paths', 'x', 'y', equal_axes=True)


def plot_driving(driving: pd.DataFrame, fig: Optional[go.Figure] = None) -> go.Figure:
    """Driving value and force-point images against capacity time."""
    fig = fig if fig is not None else go.Figure()
    for column, colour in (('O_L', 'steelblue'), ('U', 'white'), ('O_R', 'orange')):
        fig.add_trace(go.Scatter(x=driving['t'], y=driving[column], mode='lines', name=column,
                                 line=dict(color=colour, width=1.5)))
    return _dark_layout(fig, 'Driving triple', 'capacity time', 'value')


def plot_trace(points: np.ndarray, fig: Optional[go.Figure] = None) -> go.Figure:
    """Approximate Loewner trace in the upper half-plane."""
    fig = fig if fig is not None else go.Figure()
    fig.add_trace(go.Scatter(x=np.real(points), y=np.imag(points), mode='lines', name='trace',
                             line=dict(color='yellow', width=1.5)))
    return _dark_layout(fig, 'Loewner trace', 'Re', 'Im', equal_axes=True)
