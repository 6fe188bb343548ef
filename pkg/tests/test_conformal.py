import pytest
from scipy import special

from src.core.conformal import (
    cross_ratio,
    discrete_modulus,
    elliptic_K,
    halfplane_modulus,
    harmonic_midpoint,
    modulus_to_halfplane,
    moebius_normalize,
    rectangle_configuration,
)
from src.core.exceptions import NoConvergence
from src.core.grid import build_from_spec, load_domain_file
from tests.conftest import domain_path


def test_square_modulus_is_one(square3, square3_marking):
    assert discrete_modulus(square3, square3_marking) == pytest.approx(1.0, rel=1e-8)


def test_lattice_rectangle_modulus_is_exact():
    # 15 columns by 7 rows of vertices
    domain, marking = build_from_spec(load_domain_file(domain_path("rectangle_2x1.json")), "1/8")
    assert discrete_modulus(domain, marking) == pytest.approx(15 / 7, rel=1e-8)


def test_disk_modulus_close_to_one():
    domain, marking = build_from_spec(load_domain_file(domain_path("disk.json")), "1/16")
    assert discrete_modulus(domain, marking) == pytest.approx(1.0, abs=0.1)


def test_iteration_cap_raises():
    domain, marking = build_from_spec(load_domain_file(domain_path("square.json")), "1/16")
    with pytest.raises(NoConvergence):
        discrete_modulus(domain, marking, maxiter=1)


@pytest.mark.parametrize("k", [0.0, 0.1, 0.5, 0.9, 0.999])
def test_elliptic_k(k):
    assert elliptic_K(k) == pytest.approx(special.ellipk(k * k), rel=1e-12)


@pytest.mark.parametrize("m", [0.5, 1.0, 2.0, 4.0])
def test_halfplane_points_have_the_requested_modulus(m):
    points = modulus_to_halfplane(m)
    assert points[0] < points[1] < points[2] < points[3]
    assert halfplane_modulus(points) == pytest.approx(m, rel=1e-9)


def test_modulus_out_of_range():
    with pytest.raises(ValueError):
        modulus_to_halfplane(0.0)


def test_cross_ratio_is_moebius_invariant():
    points = (-3.0, -1.0, 0.5, 2.0)
    a, v = points[1], 0.0

    def T(z):
        return (z - a) / (v - z)

    assert cross_ratio(*points) == pytest.approx(cross_ratio(*map(T, points)))


def test_harmonic_midpoint_of_symmetric_configuration():
    assert harmonic_midpoint(-2.0, -1.0, 1.0, 2.0) == pytest.approx(0.0, abs=1e-12)


def test_moebius_normalize_signs():
    _, x_b, x_c, x_d = moebius_normalize((-4.0, -1.0, 1.0, 4.0), start_index=1)
    assert x_b > 0
    assert x_c < x_d < 0


def test_moebius_normalize_rejects_bad_input():
    with pytest.raises(ValueError):
        moebius_normalize((0.0, 2.0, 1.0, 3.0))
    with pytest.raises(ValueError):
        moebius_normalize((-4.0, -1.0, 1.0, 4.0), start_index=1, target=2.0)


@pytest.mark.parametrize("points", [
    (-1.0, -1.0, 1.0, 4.0),
    (-4.0, -1.0, 1.0j, 4.0),
    (-4.0, -1.0, 1.0, float("inf")),
    (-4.0, -1.0, float("nan"), 4.0),
    (-1.0, 1.0, 4.0),
])
def test_moebius_normalize_rejects_degenerate_points(points):
    with pytest.raises(ValueError):
        moebius_normalize(points)


def test_moebius_normalize_rejects_start_through_infinity():
    with pytest.raises(ValueError):
        moebius_normalize((-4.0, -1.0, 1.0, 4.0), start_index=2)
    with pytest.raises(ValueError):
        moebius_normalize((-4.0, -1.0, 1.0, 4.0), start_index=5)


def test_rectangle_configuration_preserves_modulus():
    x_b, x_c, x_d = rectangle_configuration(2.0)
    assert x_b > 0 > x_d > x_c
    # in this order the measured pair is [da] against [bc], the conjugate of [ab] against [cd]
    assert halfplane_modulus((x_c, x_d, 0.0, x_b)) == pytest.approx(0.5, rel=1e-8)
