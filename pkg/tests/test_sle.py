import numpy as np
import pytest
from scipy import special

from src.core.sle import (
    DrivingTriple,
    SleParams,
    TrackedPoint,
    advance,
    bessel_dimension,
    bessel_path,
    bessel_second_moment,
    bessel_zero_fraction,
    brownian_variance,
    cde_hitting_probability,
    coordinate_change_check,
    holder_exponent,
    hypergeometric_race_formula,
    reflection_profile,
    scaling_check,
    simulate_driving,
    simulate_swallow_times,
    swallow_race_probability,
    trace_points,
    track,
)


def test_params_validation():
    with pytest.raises(ValueError):
        SleParams(0.0)
    with pytest.raises(ValueError):
        SleParams(3.0, rho_left=-2.0)
    with pytest.raises(ValueError):
        SleParams(3.0, x_left=1.0)


def test_cde_preset_and_startup():
    params = SleParams.cde()
    assert (params.kappa, params.rho_left, params.rho_right) == (3.0, -1.5, -1.5)
    start = params.initial_state(1e-4)
    assert (start.t, start.U) == (0.0, 0.0)
    assert start.O_L == pytest.approx(-0.01)
    assert start.O_R == pytest.approx(0.01)
    assert params.dt_floor(1e-3) == pytest.approx(1e-6)


def test_from_config_ignores_unknown_keys():
    params = SleParams.from_config(3.0, -1.5, -1.5, {"dt": 1e-3, "swallow_factor": 5})
    assert params.swallow_factor == 5


@pytest.mark.parametrize("kappa,rho,expected", [
    (3.0, -1.5, 4 / 3),
    (6.0, 0.0, 5 / 3),
    (4.0, 0.0, 2.0),
])
def test_bessel_dimension(kappa, rho, expected):
    assert bessel_dimension(kappa, rho) == pytest.approx(expected)


def test_advance_keeps_ordering(rng):
    params = SleParams.cde()
    state = params.initial_state(1e-3)
    for _ in range(200):
        state = advance(state, params, 1e-3, rng.normal(0.0, np.sqrt(1e-3)), rng)
        assert state.ordered
    assert state.t == pytest.approx(0.2)
    assert state.O_L < 0 < state.O_R


def test_track_moves_points_outward():
    points = track([TrackedPoint(2.0), TrackedPoint(-1.0)], DrivingTriple(0.0, 0.0, 0.0, 0.0), 0.01)
    assert points[0].y == pytest.approx(2.01)
    assert points[1].y == pytest.approx(-1.02)
    assert all(p.swallowed_at is None for p in points)


def test_track_swallows_a_point_next_to_the_driver():
    params = SleParams.cde()
    (point,) = track([TrackedPoint(0.001)], DrivingTriple(0.5, 0.0, 0.0, 0.0), 1e-3, params)
    assert point.swallowed_at == 0.5
    assert point.y == 0.001


def test_track_swallows_a_point_the_driver_has_passed():
    (point,) = track([TrackedPoint(1.0, 0.5)], DrivingTriple(0.2, 0.7, 0.0, 1.0), 0.01)
    assert point.swallowed_at == 0.2


@pytest.mark.parametrize("z", [0.0, 0.1, 0.3, 0.5, 0.8, 1.0])
def test_race_formula_is_a_regularised_beta(z):
    assert hypergeometric_race_formula(z, 6.0) == pytest.approx(special.betainc(1 / 3, 1 / 3, z), abs=1e-10)
    assert hypergeometric_race_formula(z, 8.0) == pytest.approx(2 / np.pi * np.arcsin(np.sqrt(z)), abs=1e-10)


def test_race_formula_domain():
    with pytest.raises(ValueError):
        hypergeometric_race_formula(0.5, 4.0)
    with pytest.raises(ValueError):
        hypergeometric_race_formula(1.5, 6.0)


def test_engine_shapes(rng):
    params = SleParams(6.0, 0.0, 0.0, -np.inf, np.inf)
    run = simulate_swallow_times(params, (1.0, -1.0), 50, 1e-2, rng)
    assert run.times.shape == (50, 2)
    assert run.stopped_at.shape == (50,)
    assert not run.censored.any()
    # no path stops before its first swallow
    first = np.nanmin(run.times, axis=1)
    assert np.all(run.stopped_at >= first)


def test_symmetric_race(rng):
    estimate = swallow_race_probability(6.0, 0.0, 0.0, 1.0, -1.0, 400, 1e-2, rng)
    assert estimate.total == 400
    assert estimate.p_hat == pytest.approx(0.5, abs=0.1)


def test_cde_estimate_counts(rng):
    estimate = cde_hitting_probability((1.0, -2.0, -1.0), 50, 1e-2, rng, seed=3)
    assert estimate.total == 50
    assert estimate.successes + estimate.undecided <= 50
    assert estimate.seed == 3
    assert estimate.event == "cde_hit"


def test_cde_rejects_misordered_points(rng):
    with pytest.raises(ValueError):
        cde_hitting_probability((1.0, -1.0, -2.0), 10, 1e-2, rng)


def test_bessel_path_is_nonnegative(rng):
    path = bessel_path(4 / 3, 0.0, 1.0, 1e-3, rng)
    assert path.shape == (1001,)
    assert np.all(path >= 0)
    with pytest.raises(ValueError):
        bessel_path(1.0, 0.0, 1.0, 1e-3, rng)


def test_bessel_zero_fraction_shrinks_with_the_step(rng):
    coarse = bessel_zero_fraction(4 / 3, 0.5, 1e-2, 400, rng)
    fine = bessel_zero_fraction(4 / 3, 0.5, 1e-4, 400, rng)
    assert 0 < fine < coarse < 1


def test_bessel_second_moment(rng):
    assert bessel_second_moment(2.0, 1.0, 1.0, 1e-2, 4000, rng) == pytest.approx(3.0, abs=0.25)


def test_brownian_variance(rng):
    assert brownian_variance(3.0, 1.0, 1e-2, 4000, rng) == pytest.approx(3.0, abs=0.4)


def test_simulate_driving(rng):
    driving = simulate_driving(SleParams.cde(), 0.1, 1e-3, rng)
    assert list(driving.columns) == ["t", "U", "O_L", "O_R"]
    assert driving["t"].iloc[0] == 0.0
    assert driving["t"].iloc[-1] == pytest.approx(0.1)
    assert np.all(np.diff(driving["t"]) > 0)
    assert np.all(driving["O_L"] <= driving["U"]) and np.all(driving["U"] <= driving["O_R"])


def test_trace_stays_in_upper_half_plane(rng):
    driving = simulate_driving(SleParams.cde(), 0.05, 1e-3, rng)
    points = trace_points(driving, n_points=20)
    assert 0 < len(points) <= 20
    assert np.all(points.imag >= 0)


@pytest.mark.slow
def test_cardy_race_matches_formula():
    rng = np.random.default_rng(5)
    estimate = swallow_race_probability(6.0, 0.0, 0.0, 1.0, -3.0, 4000, 2e-3, rng)
    exact = hypergeometric_race_formula(0.75, 6.0)
    assert abs(estimate.p_hat - exact) < 0.01 + 3 * estimate.stderr


@pytest.mark.slow
def test_race_is_scale_invariant():
    small, large = scaling_check(6.0, 0.0, 0.0, 1.0, -2.0, 4.0, 2000, 2e-3, np.random.default_rng(9))
    assert abs(small.p_hat - large.p_hat) < 4 * np.hypot(small.stderr, large.stderr)


@pytest.mark.slow
def test_holder_exponent_of_brownian_driver():
    driving = simulate_driving(SleParams(3.0, 0.0, 0.0, -np.inf, np.inf), 1.0, 1e-4, np.random.default_rng(2))
    assert holder_exponent(driving) == pytest.approx(0.5, abs=0.1)


@pytest.mark.slow
def test_reflection_occupation_slope():
    profile = reflection_profile(SleParams.cde(), 1.0, 1e-3, 400, np.random.default_rng(4))
    assert profile["passed"]
    assert profile["predicted"] == pytest.approx(4 / 3)


@pytest.mark.slow
def test_coordinate_change_matches_for_the_dual_exponent():
    report = coordinate_change_check(2000, 2e-3, np.random.default_rng(6))
    assert report.rho_right == pytest.approx(-1.5)
    assert report.passed


@pytest.mark.slow
def test_observation_point_does_not_change_the_cde_estimate():
    from src.core.conformal import modulus_to_halfplane, moebius_normalize

    x = modulus_to_halfplane(2.0)
    b, c = x[2], x[3]
    estimates = []
    for i, fraction in enumerate((0.5, 0.25)):
        points = moebius_normalize(x, start_index=1, target=b * (c / b) ** fraction)[1:]
        estimates.append(cde_hitting_probability(points, 3000, 2e-3, np.random.default_rng(20 + i)))
    first, second = estimates
    assert abs(first.p_hat - second.p_hat) < 0.01 + 4 * np.hypot(first.stderr, second.stderr)
