import numpy as np
import pytest
from scipy import stats

from src.core.connect import plus_crossing, star_crossing
from src.core.exceptions import BoundaryConditionError, TooLarge
from src.core.grid import discretize
from src.core.ising import (
    BoundaryCondition,
    SpinConfiguration,
    all_configurations,
    beta_critical,
    default_thermalization,
    enumerate_exact,
    exact_distribution,
    flip_event,
    metropolis_sweep,
    sample,
    state_probabilities,
    wolff_step,
)
from tests.conftest import UNIT_SQUARE


def test_beta_critical():
    assert beta_critical() == pytest.approx(0.44068679350977147)


def test_constant_configuration(square3):
    plus = SpinConfiguration.constant(square3, 1)
    assert plus.magnetization == 1.0
    assert plus.energy == 12
    assert plus.flipped().magnetization == -1.0
    assert plus.spin_at((0, 0)) == 0
    assert plus.spin_at((2, 2)) == 1


def test_from_cells(square3):
    config = SpinConfiguration.from_cells(square3, [(1, 1), (2, 2)])
    assert config.spin_at((1, 1)) == 1
    assert config.spin_at((1, 2)) == -1
    assert config.magnetization == pytest.approx(-5 / 9)


def test_invalid_spins_rejected(square3):
    with pytest.raises(ValueError):
        SpinConfiguration(square3, np.zeros(9, dtype=np.int8))
    with pytest.raises(ValueError):
        SpinConfiguration(square3, np.ones(8, dtype=np.int8))


def test_mixed_boundary_fixes_two_arcs(square3, square3_marking):
    bc = BoundaryCondition.mixed(square3_marking)
    values = bc.fixed_values(square3)
    fixed = {tuple(square3.coords[v]) for v in np.flatnonzero(values)}
    assert fixed == {(1, 3), (2, 3), (3, 3), (1, 1), (2, 1), (3, 1)}
    assert set(values[values != 0]) == {-1}
    with pytest.raises(BoundaryConditionError):
        SpinConfiguration(square3, np.ones(9, dtype=np.int8), bc)


def test_clashing_arcs_rejected(square3, square3_marking):
    # the corner vertex at a lies on both [ab] and [da]
    bc = BoundaryCondition.three_arc(square3_marking, plus="ab", minus=("cd", "da"))
    with pytest.raises(BoundaryConditionError):
        bc.fixed_values(square3)


def test_bad_boundary_conditions(square3_marking):
    with pytest.raises(BoundaryConditionError):
        BoundaryCondition("periodic")
    with pytest.raises(BoundaryConditionError):
        BoundaryCondition("fixed", (("ab", 1),))
    with pytest.raises(BoundaryConditionError):
        BoundaryCondition("fixed", (("ab", 2),), square3_marking)


def test_flip_reverses_fixed_arcs(square3, square3_marking):
    bc = BoundaryCondition.mixed(square3_marking)
    config = SpinConfiguration.constant(square3, -1, bc)
    flipped = config.flipped()
    assert np.all(flipped.fixed[config.fixed_mask] == 1)


def test_wolff_at_infinite_temperature_flips_one_spin(square3, rng):
    state = SpinConfiguration.constant(square3, 1)
    wolff_step(state, rng)
    assert state.magnetization == pytest.approx(7 / 9)


def test_samplers_respect_fixed_spins(square3, square3_marking, rng):
    bc = BoundaryCondition.mixed(square3_marking)
    state = sample(square3, bc, beta_critical(), n_thermalize=20, rng=rng)
    for _ in range(20):
        wolff_step(state, rng)
        metropolis_sweep(state, rng)
    assert np.all(state.spins[state.fixed_mask] == -1)


def test_default_thermalization(square3):
    assert default_thermalization(square3) == 30


def test_exact_enumeration_at_zero_coupling(square2, square2_marking):
    bc = BoundaryCondition.free()
    # a full + row joins the two columns; with diagonals any + in each column does
    assert enumerate_exact(square2, bc, 0.0, lambda c: plus_crossing(c, square2_marking)) == pytest.approx(7 / 16)
    assert enumerate_exact(square2, bc, 0.0, lambda c: star_crossing(c, square2_marking)) == pytest.approx(9 / 16)


def test_exact_probabilities_sum_to_one(square3):
    probs = state_probabilities(square3, BoundaryCondition.free(), beta_critical())
    assert len(probs) == 512
    assert sum(probs.values()) == pytest.approx(1.0)
    assert probs[(1,) * 9] == pytest.approx(probs[(-1,) * 9])
    assert probs[(1,) * 9] == max(probs.values())


def test_spin_flip_symmetry_under_free_boundary(square3, square3_marking):
    beta = beta_critical()
    bc = BoundaryCondition.free()
    event = lambda c: plus_crossing(c, square3_marking)
    assert enumerate_exact(square3, bc, beta, event) == pytest.approx(enumerate_exact(square3, bc, beta, flip_event(event)))


def test_all_configurations_count(square2):
    assert sum(1 for _ in all_configurations(square2)) == 16


def test_enumeration_cap():
    domain = discretize(UNIT_SQUARE, "1/7", (0.5, 0.5))
    with pytest.raises(TooLarge):
        next(exact_distribution(domain, BoundaryCondition.free(), 0.3))


@pytest.mark.slow
def test_sampler_matches_exact_distribution(square2):
    beta = beta_critical()
    bc = BoundaryCondition.free()
    exact = state_probabilities(square2, bc, beta)
    keys = sorted(exact)
    rng = np.random.default_rng(7)
    state = sample(square2, bc, beta, n_thermalize=50, rng=rng)
    counts = dict.fromkeys(keys, 0)
    n = 10000
    for _ in range(n):
        for _ in range(3):
            wolff_step(state, rng)
            metropolis_sweep(state, rng)
        counts[tuple(int(s) for s in state.spins)] += 1
    observed = np.array([counts[k] for k in keys])
    expected = np.array([exact[k] for k in keys]) * n
    # thinned chain; residual correlation is covered by the low p-value floor
    assert stats.chisquare(observed, expected).pvalue > 1e-4


@pytest.mark.slow
def test_wolff_alone_matches_exact_energy(square3):
    beta = beta_critical()
    bc = BoundaryCondition.free()
    exact = state_probabilities(square3, bc, beta)
    mean_energy = sum(p * SpinConfiguration(square3, np.array(k), bc).energy for k, p in exact.items())
    rng = np.random.default_rng(11)
    state = sample(square3, bc, beta, n_thermalize=100, rng=rng, metropolis_per_wolff=0)
    energies = []
    for _ in range(20000):
        wolff_step(state, rng)
        energies.append(state.energy)
    assert np.mean(energies) == pytest.approx(mean_energy, abs=0.3)


def test_two_vertex_domain_agreement():
    domain = discretize([(0, 0), (3, 0), (3, 2), (0, 2)], 1, (1.5, 1))
    assert domain.n_vertices == 2
    bc = BoundaryCondition.free()
    for beta in (0.0, 0.3, beta_critical(), 1.0):
        agree = enumerate_exact(domain, bc, beta, lambda c: c.spins[0] == c.spins[1])
        assert agree == pytest.approx(np.exp(beta) / (np.exp(beta) + np.exp(-beta)))


@pytest.mark.slow
def test_metropolis_alone_matches_exact_distribution(square2):
    beta = beta_critical()
    bc = BoundaryCondition.free()
    exact = state_probabilities(square2, bc, beta)
    keys = sorted(exact)
    rng = np.random.default_rng(3)
    state = SpinConfiguration.constant(square2, 1, bc, beta)
    for _ in range(100):
        metropolis_sweep(state, rng)
    counts = dict.fromkeys(keys, 0)
    n = 20000
    for _ in range(n):
        for _ in range(3):
            metropolis_sweep(state, rng)
        counts[tuple(int(s) for s in state.spins)] += 1
    observed = np.array([counts[k] for k in keys])
    expected = np.array([exact[k] for k in keys]) * n
    assert stats.chisquare(observed, expected).pvalue > 1e-4


@pytest.mark.slow
def test_sampled_crossing_frequency_matches_exact(square3, square3_marking):
    beta = beta_critical()
    bc = BoundaryCondition.free()
    exact = enumerate_exact(square3, bc, beta, lambda c: plus_crossing(c, square3_marking))
    rng = np.random.default_rng(5)
    state = sample(square3, bc, beta, n_thermalize=50, rng=rng)
    hits = []
    for _ in range(20000):
        wolff_step(state, rng)
        metropolis_sweep(state, rng)
        hits.append(plus_crossing(state, square3_marking))
    assert np.mean(hits) == pytest.approx(exact, abs=0.02)


@pytest.mark.slow
def test_ordered_phase_is_magnetized():
    domain = discretize(UNIT_SQUARE, "1/17", (0.5, 0.5))
    bc = BoundaryCondition.free()
    rng = np.random.default_rng(9)

    def mean_abs_magnetization(beta):
        state = sample(domain, bc, beta, n_thermalize=200, rng=rng)
        values = []
        for _ in range(200):
            wolff_step(state, rng)
            metropolis_sweep(state, rng)
            values.append(abs(state.magnetization))
        return np.mean(values)

    cold = mean_abs_magnetization(1.3 * beta_critical())
    hot = mean_abs_magnetization(0.7 * beta_critical())
    assert cold > 0.8
    assert cold > hot + 0.4
