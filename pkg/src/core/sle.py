# ---------------------------------------------
# SLE(KAPPA, RHO_L, RHO_R) DRIVING PROCESSES
# ---------------------------------------------
"""
Chordal Loewner chains driven by SLE(kappa, rho_L, rho_R).

The driving value U diffuses with sqrt(kappa) noise and drifts
rho_i / (U - O_i) away from (or towards) the two force-point images, which
are advected by the Loewner flow dO = 2 dt / (O - U). Reflection off the
force points is enforced by projecting a violating gap to its absolute value.
Boundary points are tracked under the same flow and are swallowed when their
image meets U.

The vectorised engine below runs many paths at once, each with its own
adaptive clock.

Dependencies:
    - numpy
    - scipy
    - pandas
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import integrate, special, stats

from src.core.exceptions import OrderingViolation
from src.core.models import Estimate

logger = logging.getLogger(__name__)

GAP_FLOOR = 1e-12


# ---------------------------------------------
# PARAMETERS AND STATE
# ---------------------------------------------

@dataclass(frozen=True)
class SleParams:
    """
    SLE(kappa, rho_left, rho_right) with force points and step control.

    Attributes:
        kappa (float): Diffusivity, > 0.
        rho_left (float): Left force-point weight, > -2.
        rho_right (float): Right force-point weight, > -2.
        x_left (float): Left force point, <= 0; 0 means 0-, -inf drops it.
        x_right (float): Right force point, >= 0; 0 means 0+, +inf drops it.
        startup_gap (Optional[float]): Initial gap at a degenerate start.
        startup_gap_factor (float): Used when startup_gap is None: gap = factor * sqrt(dt).
        substep_fraction (float): h = fraction * gap^2 / kappa.
        dt_floor_ratio (float): Smallest substep is dt / ratio.
        swallow_factor (float): eps_swallow = factor * sqrt(kappa * dt_floor).
        coincidence_steps (float): Window, in dt, for simultaneous swallows.
        t_max_factor (float): Capacity cap = factor * span^2.
        undecided_warning (float): Undecided fraction that flags an estimate.
    """
    kappa: float
    rho_left: float = 0.0
    rho_right: float = 0.0
    x_left: float = 0.0
    x_right: float = 0.0
    startup_gap: Optional[float] = None
    startup_gap_factor: float = 1.0
    substep_fraction: float = 0.1
    dt_floor_ratio: float = 1000.0
    swallow_factor: float = 10.0
    coincidence_steps: float = 100.0
    t_max_factor: float = 50.0
    undecided_warning: float = 0.01

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.rho_left <= -2 or self.rho_right <= -2:
            raise ValueError("force-point weights must exceed -2")
        if self.x_left > 0 or self.x_right < 0:
            raise ValueError("force points must satisfy x_left <= 0 <= x_right")

    @classmethod
    def cde(cls, **overrides) -> "SleParams":
        """SLE(3, -3/2, -3/2) with force points at 0- and 0+."""
        return cls(kappa=3.0, rho_left=-1.5, rho_right=-1.5, x_left=0.0, x_right=0.0, **overrides)

    @classmethod
    def from_config(cls, kappa: float, rho_left: float, rho_right: float, section: Dict,
                    x_left: float = 0.0, x_right: float = 0.0) -> "SleParams":
        """Build parameters with step control taken from the "sle" config section."""
        known = {k: v for k, v in section.items()
                 if k in ("startup_gap_factor", "substep_fraction", "dt_floor_ratio", "swallow_factor",
                          "coincidence_steps", "t_max_factor", "undecided_warning")}
        return cls(kappa, rho_left, rho_right, x_left, x_right, **known)

    def dt_floor(self, dt: float) -> float:
        return dt / self.dt_floor_ratio

    def swallow_epsilon(self, dt: float) -> float:
        return self.swallow_factor * math.sqrt(self.kappa * self.dt_floor(dt))

    def startup(self, dt: float) -> float:
        if self.startup_gap is not None:
            return self.startup_gap
        return self.startup_gap_factor * math.sqrt(dt)

    def initial_state(self, dt: float) -> "DrivingTriple":
        gap = self.startup(dt)
        o_left = -gap if self.x_left == 0 else self.x_left
        o_right = gap if self.x_right == 0 else self.x_right
        return DrivingTriple(0.0, 0.0, o_left, o_right)


@dataclass(frozen=True)
class DrivingTriple:
    t: float
    U: float
    O_L: float
    O_R: float

    @property
    def ordered(self) -> bool:
        return self.O_L <= self.U <= self.O_R


@dataclass
class TrackedPoint:
    """A boundary point and its current image under g_t."""
    x0: float
    y: float = field(default=float("nan"))
    swallowed_at: Optional[float] = None

    def __post_init__(self):
        if math.isnan(self.y):
            self.y = self.x0


@dataclass
class SwallowTimes:
    """
    Output of the vectorised engine.

    Attributes:
        times (np.ndarray): (paths, points) capacity time of swallowing, nan if never.
        stopped_at (np.ndarray): Capacity time each path stopped.
        censored (np.ndarray): True where the stop rule never fired before t_max.
        window (float): Coincidence window used.
    """
    times: np.ndarray
    stopped_at: np.ndarray
    censored: np.ndarray
    window: float


# ---------------------------------------------
# ONE SUBSTEP
# ---------------------------------------------

def _substep(u, o_left, o_right, y, side, h, dB, params: SleParams):
    """
    Euler substep of the driving triple and tracked images, array-compatible.

    y has one row per path and side holds sign(y - U) at the start.
    """
    gap_left = np.maximum(u - o_left, GAP_FLOOR)
    gap_right = np.maximum(o_right - u, GAP_FLOOR)
    drift = params.rho_left / gap_left - params.rho_right / gap_right
    u_new = u + math.sqrt(params.kappa) * dB + drift * h
    o_left_new = o_left - 2.0 * h / gap_left
    o_right_new = o_right + 2.0 * h / gap_right
    if y is not None and y.size:
        rel = y - np.expand_dims(u, -1)
        rel = np.where(np.abs(rel) < GAP_FLOOR, side * GAP_FLOOR, rel)
        y = y + 2.0 * np.expand_dims(h, -1) / rel

    u_new = np.where(u_new < o_left_new, 2.0 * o_left_new - u_new, u_new)
    u_new = np.where(u_new > o_right_new, 2.0 * o_right_new - u_new, u_new)
    if np.any(u_new < o_left_new) or np.any(u_new > o_right_new):
        raise OrderingViolation("reflection could not restore O_L <= U <= O_R")
    return u_new, o_left_new, o_right_new, y


def _substep_size(gap, params: SleParams, dt: float):
    return np.clip(params.substep_fraction * np.square(gap) / params.kappa, params.dt_floor(dt), dt)


def advance(state: DrivingTriple, params: SleParams, dt: float, gaussian_increment: float,
            rng: Optional[np.random.Generator] = None) -> DrivingTriple:
    """
    Advance the driving triple by dt.

    The Brownian increment over dt is split across adaptive substeps, as a
    Brownian bridge when rng is given and evenly otherwise.

    Args:
        state (DrivingTriple): Ordered state.
        params (SleParams): Process parameters.
        dt (float): Time step.
        gaussian_increment (float): Brownian increment over dt (variance dt).
        rng (Optional[np.random.Generator]): Stream for the bridge.

    Returns:
        DrivingTriple: The state at t + dt.
    """
    u, o_left, o_right = state.U, state.O_L, state.O_R
    remaining_t, remaining_b = dt, gaussian_increment
    while remaining_t > 1e-15 * dt:
        gap = min(u - o_left, o_right - u)
        h = min(float(_substep_size(gap, params, dt)), remaining_t)
        if rng is None or h >= remaining_t:
            db = remaining_b * h / remaining_t
        else:
            db = rng.normal(remaining_b * h / remaining_t, math.sqrt(h * (remaining_t - h) / remaining_t))
        u, o_left, o_right, _ = _substep(u, o_left, o_right, None, None, h, db, params)
        u, o_left, o_right = float(u), float(o_left), float(o_right)
        remaining_t -= h
        remaining_b -= db
    return DrivingTriple(state.t + dt, u, o_left, o_right)


def track(points: List[TrackedPoint], state: DrivingTriple, dt: float,
          params: Optional[SleParams] = None) -> List[TrackedPoint]:
    """
    One Loewner step dy = 2 dt / (y - U) for every unswallowed point.

    A point is swallowed at state.t when |y - U| <= eps_swallow or when U has
    crossed it, i.e. y - U no longer has the sign of x0.
    """
    eps = params.swallow_epsilon(dt) if params is not None else 0.0
    out = []
    for p in points:
        if p.swallowed_at is not None:
            out.append(p)
            continue
        rel = p.y - state.U
        if abs(rel) <= eps or math.copysign(1.0, rel) != math.copysign(1.0, p.x0):
            out.append(TrackedPoint(p.x0, p.y, state.t))
            continue
        out.append(TrackedPoint(p.x0, p.y + 2.0 * dt / rel))
    return out


# ---------------------------------------------
# VECTORISED ENGINE
# ---------------------------------------------

def default_t_max(params: SleParams, points: Sequence[float]) -> float:
    finite = [abs(x) for x in points if np.isfinite(x)]
    finite += [abs(x) for x in (params.x_left, params.x_right) if np.isfinite(x)]
    span = max(finite) if finite and max(finite) > 0 else 1.0
    return params.t_max_factor * span ** 2


def simulate_swallow_times(params: SleParams, points: Sequence[float], n_paths: int, dt: float,
                           rng: np.random.Generator, t_max: Optional[float] = None,
                           stop_index: Optional[int] = None, coincidence: Optional[float] = None) -> SwallowTimes:
    """
    Run independent paths until a swallow decides them.

    A path stops once the stop rule fires (the first swallow of any tracked
    point, or of points[stop_index]) plus the coincidence window, or at t_max.

    Args:
        params (SleParams): Process parameters.
        points (Sequence[float]): Boundary points to track, none equal to 0.
        n_paths (int): Number of paths.
        dt (float): Largest substep.
        rng (np.random.Generator): Random stream.
        t_max (Optional[float]): Capacity cap; 50 * span^2 by default.
        stop_index (Optional[int]): Point whose swallow triggers the stop.
        coincidence (Optional[float]): Window after the trigger; 100 * dt by default.

    Returns:
        SwallowTimes: Per-path swallow times.
    """
    pts = np.asarray(points, dtype=float)
    t_max = default_t_max(params, pts) if t_max is None else t_max
    window = params.coincidence_steps * dt if coincidence is None else coincidence
    eps = params.swallow_epsilon(dt)
    start = params.initial_state(dt)

    t = np.zeros(n_paths)
    u = np.full(n_paths, start.U)
    o_left = np.full(n_paths, start.O_L)
    o_right = np.full(n_paths, start.O_R)
    y = np.tile(pts, (n_paths, 1))
    side = np.sign(y - start.U)
    times = np.full((n_paths, pts.size), np.nan)
    deadline = np.full(n_paths, float(t_max))
    fired = np.zeros(n_paths, dtype=bool)
    active = np.ones(n_paths, dtype=bool)

    while True:
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        open_ = np.isnan(times[rows])
        gap = np.minimum(u[rows] - o_left[rows], o_right[rows] - u[rows])
        if pts.size:
            track_gap = np.where(open_, np.abs(y[rows] - u[rows, None]), np.inf).min(axis=1)
            gap = np.minimum(gap, track_gap)
        h = np.minimum(_substep_size(gap, params, dt), deadline[rows] - t[rows])
        dB = rng.standard_normal(rows.size) * np.sqrt(h)
        u2, ol2, or2, y2 = _substep(u[rows], o_left[rows], o_right[rows], y[rows], side[rows], h, dB, params)
        t_new = t[rows] + h

        rel = y2 - u2[:, None]
        hit = open_ & ((np.abs(rel) <= eps) | (np.sign(rel) != side[rows]))
        times[rows] = np.where(hit, t_new[:, None], times[rows])
        y[rows] = np.where(open_ & ~hit, y2, y[rows])
        u[rows], o_left[rows], o_right[rows], t[rows] = u2, ol2, or2, t_new

        trigger = hit.any(axis=1) if stop_index is None else hit[:, stop_index]
        deadline[rows] = np.where(trigger, np.minimum(deadline[rows], t_new + window), deadline[rows])
        fired[rows] |= trigger
        active[rows] = t_new < deadline[rows] * (1 - 1e-12)

    censored = ~fired
    logger.debug("swallow engine: %d paths, %d censored at t_max=%.3g", n_paths, int(censored.sum()), t_max)
    return SwallowTimes(times, t, censored, window)


def _estimate(successes: int, undecided: int, total: int, params: SleParams, event: str,
              started: float, seed: Optional[int]) -> Estimate:
    warning = ""
    if total and undecided / total > params.undecided_warning:
        warning = f"undecided fraction {undecided / total:.3%} exceeds {params.undecided_warning:.1%}"
        logger.warning("%s: %s", event, warning)
    return Estimate(successes=successes, undecided=undecided, total=total, seed=seed,
                    wall_time=time.perf_counter() - started, event=event, warning=warning)


# ---------------------------------------------
# HITTING AND RACE PROBABILITIES
# ---------------------------------------------

def cde_hitting_probability(points: Tuple[float, float, float], n_samples: int, dt: float,
                            rng: np.random.Generator, params: Optional[SleParams] = None,
                            t_max: Optional[float] = None, seed: Optional[int] = None) -> Estimate:
    """
    Probability that the CDE hits (x_c, x_d) before the rest of [bc].

    The half-plane is normalised with a at 0 and the observation point at
    infinity: [ab] = (0, x_b), [cd] = (x_c, x_d), [da] = (x_d, 0). The event is
    that x_d is swallowed before x_b while x_c survives the coincidence window.

    Args:
        points (Tuple[float, float, float]): (x_b > 0, x_c < x_d < 0).
        n_samples (int): Paths.
        dt (float): Largest substep.
        rng (np.random.Generator): Random stream.
        params (Optional[SleParams]): Defaults to the CDE preset.
        t_max (Optional[float]): Capacity cap.
        seed (Optional[int]): Recorded on the estimate.

    Returns:
        Estimate: Successes among decided paths, undecided counted apart.
    """
    x_b, x_c, x_d = points
    if not (x_b > 0 and x_c < x_d < 0):
        raise ValueError(f"expected x_b > 0 and x_c < x_d < 0, got {points}")
    params = params or SleParams.cde()
    started = time.perf_counter()
    run = simulate_swallow_times(params, (x_b, x_c, x_d), n_samples, dt, rng, t_max)
    tb, tc, td = run.times.T
    d_first = ~np.isnan(td) & (np.isnan(tb) | (td < tb))
    c_with_d = ~np.isnan(tc) & (tc <= td + run.window)
    success = d_first & ~c_with_d
    undecided = np.isnan(tb) & np.isnan(td)
    return _estimate(int(success.sum()), int(undecided.sum()), n_samples, params, "cde_hit", started, seed)


def swallow_race_probability(kappa: float, rho_left: float, rho_right: float, x_pos: float, x_neg: float,
                             n_samples: int, dt: float, rng: np.random.Generator,
                             params: Optional[SleParams] = None, t_max: Optional[float] = None,
                             seed: Optional[int] = None) -> Estimate:
    """
    Probability that x_pos is swallowed before x_neg.

    A force point with zero weight is placed at infinity. For rho = 0 and
    kappa > 4 the answer is hypergeometric_race_formula(-x_neg / (x_pos - x_neg)).
    """
    if not (x_pos > 0 > x_neg):
        raise ValueError("expected x_neg < 0 < x_pos")
    base = params or SleParams(kappa)
    params = replace(base, kappa=kappa, rho_left=rho_left, rho_right=rho_right,
                     x_left=0.0 if rho_left else -np.inf, x_right=0.0 if rho_right else np.inf)
    started = time.perf_counter()
    run = simulate_swallow_times(params, (x_pos, x_neg), n_samples, dt, rng, t_max, coincidence=0.0)
    t_pos, t_neg = run.times.T
    success = ~np.isnan(t_pos) & (np.isnan(t_neg) | (t_pos < t_neg))
    undecided = np.isnan(t_pos) & np.isnan(t_neg)
    return _estimate(int(success.sum()), int(undecided.sum()), n_samples, params, "swallow_race", started, seed)


def hypergeometric_race_formula(z: float, kappa: float, epsabs: float = 1e-13, limit: int = 200) -> float:
    """
    Normalised incomplete integral of (u(1 - u))^(-4/kappa) from 0 to z.

    The endpoint singularity is absorbed by an algebraic quadrature weight;
    for z > 1/2 the symmetric complement is integrated instead.
    """
    if kappa <= 4:
        raise ValueError("the race formula needs kappa > 4")
    if not 0 <= z <= 1:
        raise ValueError(f"z must lie in [0, 1], got {z}")
    if z > 0.5:
        return 1.0 - hypergeometric_race_formula(1.0 - z, kappa, epsabs, limit)
    if z == 0:
        return 0.0
    a = 4.0 / kappa
    value, _ = integrate.quad(lambda s: (1.0 - s) ** (-a), 0.0, z, weight="alg", wvar=(-a, 0.0),
                              epsabs=epsabs, epsrel=1e-12, limit=limit)
    return float(value / special.beta(1.0 - a, 1.0 - a))


# ---------------------------------------------
# BESSEL UTILITIES
# ---------------------------------------------

def bessel_dimension(kappa: float, rho: float) -> float:
    """Dimension of the rescaled gap (U - O) / sqrt(kappa)."""
    return 1.0 + 2.0 * (rho + 2.0) / kappa


def _bessel_step(x, d: float, dt: float, rng: np.random.Generator):
    fine = np.square(x) < 10.0 * dt
    n_sub = np.where(fine, 10, 1)
    for k in range(10):
        live = k < n_sub
        h = np.where(fine, dt / 10.0, dt)
        dB = rng.standard_normal(np.shape(x)) * np.sqrt(h)
        moved = np.abs(x + dB + 0.5 * (d - 1.0) * h / np.maximum(x, np.sqrt(h)))
        x = np.where(live, moved, x)
        if not fine.any():
            break
    return x


def bessel_path(d: float, x0: float, t_end: float, dt: float, rng: np.random.Generator) -> np.ndarray:
    """
    Reflected Euler scheme for a Bessel process of dimension d > 1.

    Returns:
        np.ndarray: X at times 0, dt, 2 dt, ... up to t_end.
    """
    if d <= 1:
        raise ValueError("Bessel dimension must exceed 1")
    n_steps = int(round(t_end / dt))
    path = np.empty(n_steps + 1)
    path[0] = x = x0
    for k in range(n_steps):
        x = float(_bessel_step(np.asarray(x), d, dt, rng))
        path[k + 1] = x
    return path


def bessel_second_moment(d: float, x0: float, t_end: float, dt: float, n_paths: int,
                         rng: np.random.Generator) -> float:
    """Monte Carlo E[X_t^2]; the exact value is x0^2 + d t."""
    x = np.full(n_paths, float(x0))
    for _ in range(int(round(t_end / dt))):
        x = _bessel_step(x, d, dt, rng)
    return float(np.mean(np.square(x)))


def bessel_zero_fraction(d: float, t_end: float, dt: float, n_paths: int, rng: np.random.Generator) -> float:
    """Fraction of steps a Bessel process started at 0 spends below sqrt(dt)."""
    x = np.zeros(n_paths)
    below = 0
    n_steps = int(round(t_end / dt))
    for _ in range(n_steps):
        x = _bessel_step(x, d, dt, rng)
        below += int(np.count_nonzero(x < math.sqrt(dt)))
    return below / (n_steps * n_paths)


# ---------------------------------------------
# DRIVING-PROCESS STATISTICS
# ---------------------------------------------

def _run_driving(params: SleParams, n_paths: int, t_end: float, dt: float, rng: np.random.Generator,
                 record_every: Optional[float] = None, eps_values: Sequence[float] = ()):
    """
    Advance n paths to t_end; optionally record on a uniform grid and
    accumulate the time spent with U - O_L below each eps.
    """
    start = params.initial_state(dt)
    t = np.zeros(n_paths)
    u = np.full(n_paths, start.U)
    o_left = np.full(n_paths, start.O_L)
    o_right = np.full(n_paths, start.O_R)
    eps = np.asarray(eps_values, dtype=float)
    occupation = np.zeros(eps.size)
    records: List[np.ndarray] = [np.stack([t, u, o_left, o_right])] if record_every else []
    next_record = np.full(n_paths, record_every if record_every else np.inf)

    while True:
        rows = np.flatnonzero(t < t_end * (1 - 1e-12))
        if rows.size == 0:
            break
        gap = np.minimum(u[rows] - o_left[rows], o_right[rows] - u[rows])
        h = np.minimum(_substep_size(gap, params, dt), t_end - t[rows])
        h = np.minimum(h, next_record[rows] - t[rows])
        dB = rng.standard_normal(rows.size) * np.sqrt(h)
        u[rows], o_left[rows], o_right[rows], _ = _substep(u[rows], o_left[rows], o_right[rows], None, None,
                                                           h, dB, params)
        t[rows] += h
        if eps.size:
            occupation += ((u[rows] - o_left[rows])[None, :] < eps[:, None]) @ h
        if record_every and np.all(t >= next_record * (1 - 1e-12)):
            records.append(np.stack([next_record.copy(), u.copy(), o_left.copy(), o_right.copy()]))
            next_record += record_every
    return u, o_left, o_right, occupation / (n_paths * t_end), records


def simulate_driving(params: SleParams, t_end: float, dt: float, rng: np.random.Generator) -> pd.DataFrame:
    """One driving path sampled every dt: columns t, U, O_L, O_R."""
    _, _, _, _, records = _run_driving(params, 1, t_end, dt, rng, record_every=dt)
    data = np.array([r[:, 0] for r in records])
    return pd.DataFrame(data, columns=["t", "U", "O_L", "O_R"])


def brownian_variance(kappa: float, t_end: float, dt: float, n_paths: int, rng: np.random.Generator) -> float:
    """Var(U_t) with both force points dropped; should equal kappa * t."""
    params = SleParams(kappa, 0.0, 0.0, -np.inf, np.inf)
    u, *_ = _run_driving(params, n_paths, t_end, dt, rng)
    return float(np.var(u))


def reflection_profile(params: SleParams, t_end: float, dt: float, n_paths: int, rng: np.random.Generator,
                       eps_values: Sequence[float] = (0.02, 0.05, 0.1, 0.2)) -> Dict[str, object]:
    """
    Time fraction with U - O_L below eps, over a range of eps.

    The slope of log fraction against log eps estimates the occupation
    exponent of the rescaled gap, which equals its Bessel dimension.

    Returns:
        Dict[str, object]: frame (eps, fraction), slope, predicted, passed.
    """
    *_, occupation, _ = _run_driving(params, n_paths, t_end, dt, rng, eps_values=eps_values)
    frame = pd.DataFrame({"eps": list(eps_values), "fraction": occupation})
    positive = frame[frame["fraction"] > 0]
    slope = float(np.polyfit(np.log(positive["eps"]), np.log(positive["fraction"]), 1)[0]) if len(positive) > 1 else float("nan")
    predicted = bessel_dimension(params.kappa, params.rho_left)
    passed = bool(np.isfinite(slope) and predicted / 2 <= slope <= predicted * 2)
    return {"frame": frame, "slope": slope, "predicted": predicted, "passed": passed}


def holder_exponent(driving: pd.DataFrame, lags: Optional[Sequence[int]] = None) -> float:
    """Slope of log E|U_{t+h} - U_t| against log h for a uniformly sampled path."""
    u = driving["U"].to_numpy()
    dt = float(driving["t"].iloc[1] - driving["t"].iloc[0])
    if lags is None:
        top = max(11, min(1000, len(u) // 10))
        lags = np.unique(np.geomspace(10, top, 8).astype(int))
    modulus = [np.mean(np.abs(u[lag:] - u[:-lag])) for lag in lags]
    return float(np.polyfit(np.log(np.asarray(lags) * dt), np.log(modulus), 1)[0])


def scaling_check(kappa: float, rho_left: float, rho_right: float, x_pos: float, x_neg: float, scale: float,
                  n_samples: int, dt: float, rng: np.random.Generator) -> Tuple[Estimate, Estimate]:
    """The same swallow race at two spatial scales; the laws agree by Brownian scaling."""
    small = swallow_race_probability(kappa, rho_left, rho_right, x_pos, x_neg, n_samples, dt, rng)
    large = swallow_race_probability(kappa, rho_left, rho_right, scale * x_pos, scale * x_neg, n_samples,
                                     dt * scale ** 2, rng)
    return small, large


# ---------------------------------------------
# COORDINATE CHANGE
# ---------------------------------------------

@dataclass
class CoordinateChangeReport:
    """Two-sample comparison of one- and two-force-point runs."""
    ks_statistic: float
    ks_pvalue: float
    event_z: float
    event_rates: Tuple[float, float]
    used: Tuple[int, int]
    censored: Tuple[int, int]
    rho_right: float

    @property
    def passed(self) -> bool:
        return abs(self.event_z) < 3.0


def _leftmost_swallowed(run: SwallowTimes, grid: np.ndarray) -> np.ndarray:
    """Leftmost grid point swallowed before the stop point; 0 when none is."""
    stop = run.times[:, 0]
    inside = run.times[:, 1:] < stop[:, None]
    return np.where(inside, grid[None, :], 0.0).min(axis=1)


def coordinate_change_check(n_samples: int, dt: float, rng: np.random.Generator, rho_right: Optional[float] = None,
                            x_obs: float = 1.0, grid: Optional[Sequence[float]] = None,
                            t_max: Optional[float] = None) -> CoordinateChangeReport:
    """
    Compare SLE(3, -3/2) aimed at x_obs with SLE(3, -3/2, rho) aimed at infinity.

    With rho = kappa - 6 - rho_left = -3/2 both describe the same curve until
    x_obs and infinity are disconnected. The one-force-point run is carried out
    in coordinates where x_obs sits at infinity, via z -> x_obs z / (x_obs - z);
    there disconnection is the swallowing of -x_obs.

    The compared functional is the leftmost point of a negative grid swallowed
    before disconnection, plus the binary event that the middle grid point is.
    """
    kappa, rho_left = 3.0, -1.5
    rho_right = kappa - 6.0 - rho_left if rho_right is None else rho_right
    grid = np.asarray(grid if grid is not None else -x_obs * np.array([0.25, 0.5, 1.0, 2.0, 4.0]), dtype=float)

    two_point = SleParams(kappa, rho_left, rho_right, 0.0, x_obs)
    t_cap = t_max if t_max is not None else default_t_max(two_point, grid)
    run_b = simulate_swallow_times(two_point, np.concatenate([[x_obs], grid]), n_samples, dt, rng, t_cap,
                                   stop_index=0, coincidence=0.0)

    one_point = SleParams(kappa, rho_left, 0.0, 0.0, np.inf)
    mapped = x_obs * grid / (x_obs - grid)
    run_a = simulate_swallow_times(one_point, np.concatenate([[-x_obs], mapped]), n_samples, dt, rng, t_cap,
                                   stop_index=0, coincidence=0.0)

    sample_b = _leftmost_swallowed(run_b, grid)[~run_b.censored]
    sample_a = _leftmost_swallowed(run_a, grid)[~run_a.censored]
    ks = stats.ks_2samp(sample_a, sample_b)

    middle = grid[len(grid) // 2]
    event_a, event_b = np.mean(sample_a <= middle), np.mean(sample_b <= middle)
    pooled = (event_a * len(sample_a) + event_b * len(sample_b)) / (len(sample_a) + len(sample_b))
    se = math.sqrt(max(pooled * (1 - pooled), 1e-300) * (1 / len(sample_a) + 1 / len(sample_b)))
    report = CoordinateChangeReport(
        ks_statistic=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        event_z=float((event_a - event_b) / se),
        event_rates=(float(event_a), float(event_b)),
        used=(len(sample_a), len(sample_b)),
        censored=(int(run_a.censored.sum()), int(run_b.censored.sum())),
        rho_right=rho_right,
    )
    logger.info("coordinate change rho_R=%.3g: KS p=%.3g, event z=%.2f", rho_right, report.ks_pvalue, report.event_z)
    return report


# ---------------------------------------------
# TRACE RECONSTRUCTION (PLOTTING ONLY)
# ---------------------------------------------

def trace_points(driving: pd.DataFrame, n_points: int = 100) -> np.ndarray:
    """
    Approximate trace by backward composition of vertical-slit maps.

    Each interval [t_{k-1}, t_k] is treated as constant driving U_k, whose
    inverse map is w -> U_k + sqrt((w - U_k)^2 - 4 dt_k) on the upper branch.
    """
    t = driving["t"].to_numpy()
    u = driving["U"].to_numpy()
    dts = np.diff(t)
    drive = u[1:]
    picks = np.unique(np.linspace(1, len(dts), min(n_points, len(dts))).astype(int))
    out = np.empty(picks.size, dtype=complex)
    for j, n in enumerate(picks):
        w = complex(drive[n - 1])
        for k in range(n - 1, -1, -1):
            s = np.sqrt((w - drive[k]) ** 2 - 4.0 * dts[k])
            w = drive[k] + (s if s.imag >= 0 else -s)
        out[j] = w
    return out
