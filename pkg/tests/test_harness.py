import json
from fractions import Fraction

import pandas as pd
import pytest

from src.core.controllers import CSV_COLUMNS, ExperimentController
from src.core.exceptions import SpecError
from src.core.models import Estimate, ExperimentSpec
from src.core.services import WorkerPoolService
from src.core.utils import compare_counts, merge_estimates, parse_delta_list, spawn_seeds, wilson_interval
from tests.conftest import domain_path

SQUARE = domain_path("square.json")


def _square(kind="lattice-crossing", **kwargs):
    kwargs.setdefault("n_samples", 30)
    kwargs.setdefault("seed", 1)
    return ExperimentSpec(kind=kind, domain=SQUARE, deltas=["1/4"], **kwargs)


@pytest.fixture
def controller(isolated_output):
    return ExperimentController(progress=False)


# ---------------------------------------------
# STATISTICS
# ---------------------------------------------

def test_wilson_interval():
    assert wilson_interval(0, 0) == (0.0, 1.0)
    lo, hi = wilson_interval(5, 10)
    assert lo == pytest.approx(1 - hi)
    assert 0 < lo < 0.5 < hi < 1
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 1.0


def test_estimate_excludes_undecided():
    estimate = Estimate(successes=3, undecided=2, total=10, event="e")
    assert estimate.decided == 8
    assert estimate.p_hat == pytest.approx(3 / 8)
    assert estimate.ci_lo < estimate.p_hat < estimate.ci_hi
    with pytest.raises(ValueError):
        Estimate(successes=9, undecided=2, total=10)


def test_estimate_merge_adds_counts():
    parts = [Estimate(2, 0, 5, seed=1, event="e"), Estimate(3, 1, 5, event="e"), Estimate(0, 0, 4, event="e")]
    merged = merge_estimates(parts)
    assert (merged.successes, merged.undecided, merged.total, merged.seed) == (5, 1, 14, 1)
    assert merge_estimates(reversed(parts)).p_hat == pytest.approx(merged.p_hat)
    with pytest.raises(ValueError):
        parts[0].merge(Estimate(1, 0, 2, event="other"))


def test_compare_counts():
    assert compare_counts(40, 100, 40, 100).z == 0.0
    assert compare_counts(0, 10, 0, 10).passed
    assert not compare_counts(90, 100, 10, 100).passed
    with pytest.raises(ValueError):
        compare_counts(0, 0, 1, 2)


def test_parse_delta_list():
    assert parse_delta_list("1/16, 0.125") == [Fraction(1, 16), Fraction(1, 8)]
    with pytest.raises(ValueError):
        parse_delta_list("1/16,,1/8")
    with pytest.raises(ValueError):
        parse_delta_list("-1/4")


def test_spawned_seeds_are_distinct():
    seeds = spawn_seeds(7, 3)
    assert len({tuple(s.generate_state(2)) for s in seeds}) == 3
    assert [s.spawn_key for s in seeds] == [(0,), (1,), (2,)]


# ---------------------------------------------
# WORKER POOL
# ---------------------------------------------

@pytest.mark.parametrize("total,parts,expected", [
    (10, 3, [4, 3, 3]),
    (2, 5, [1, 1]),
    (7, 1, [7]),
])
def test_split(total, parts, expected):
    assert WorkerPoolService.split(total, parts) == expected


def test_in_process_map_keeps_order():
    pool = WorkerPoolService(1, progress=False)
    assert pool.map(abs, [-3, 2, -1]) == [3, 2, 1]
    with pytest.raises(ValueError):
        WorkerPoolService(0)


# ---------------------------------------------
# EXPERIMENT SPECS
# ---------------------------------------------

def test_spec_validation():
    with pytest.raises(SpecError):
        ExperimentSpec(kind="histogram")
    with pytest.raises(SpecError):
        ExperimentSpec(kind="lattice-crossing", deltas=["1/4"])
    with pytest.raises(SpecError):
        ExperimentSpec(kind="lattice-hair", domain=SQUARE)
    with pytest.raises(SpecError):
        ExperimentSpec(kind="sle-hit", points=[1.0, -1.0, -2.0])
    with pytest.raises(SpecError):
        ExperimentSpec(kind="validation", suite="nope")
    with pytest.raises(SpecError):
        _square(explorers=["middle"])


def test_spec_identity():
    spec = _square()
    assert spec.experiment_id == _square().experiment_id
    assert spec.experiment_id != _square(seed=2).experiment_id
    assert ExperimentSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(SpecError):
        ExperimentSpec.from_dict({**spec.to_dict(), "colour": "red"})


def test_spec_from_json(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"kind": "sle-hit", "points": [1.0, -2.0, -1.0], "n_samples": 10}))
    spec = ExperimentSpec.from_json(path)
    assert spec.points == [1.0, -2.0, -1.0]


# ---------------------------------------------
# CONTROLLER
# ---------------------------------------------

def test_lattice_crossing_counts(controller):
    plus, star, minus_star = controller.run_lattice_crossing(_square())
    assert plus.total == star.total == minus_star.total == 30
    assert plus.successes + minus_star.successes == 30
    assert star.successes >= plus.successes
    assert [r["event"] for r in controller.records] == ["plus", "star", "minus_star"]
    assert controller.records[0]["N"] == 3


def test_lattice_runs_are_reproducible(isolated_output):
    first = ExperimentController(progress=False).run_lattice_crossing(_square(seed=4))
    second = ExperimentController(progress=False).run_lattice_crossing(_square(seed=4))
    assert [e.successes for e in first] == [e.successes for e in second]


def test_explorer_counts_match_crossings(controller):
    plus, star, _ = controller.run_lattice_crossing(_square())
    left, right = controller.run_explorer_hit(_square(kind="lattice-explorer-hit"))
    assert (left.event, right.event) == ("leftmost", "rightmost")
    assert left.successes == plus.successes
    assert right.successes == star.successes


def test_modulus_run(controller):
    spec = ExperimentSpec(kind="modulus", domain=SQUARE, deltas=["1/4", "1/8"])
    frame = controller.run_modulus(spec)
    assert list(frame["N"]) == [3, 7]
    assert frame["modulus"].to_numpy() == pytest.approx([1.0, 1.0], rel=1e-8)


def test_sle_hit_record(controller):
    spec = ExperimentSpec(kind="sle-hit", points=[1.0, -2.0, -1.0], n_samples=20, dt=1e-2, seed=3)
    estimate = controller.run_sle_hit(spec)
    assert estimate.total == 20
    (record,) = controller.records
    assert record["dt"] == 1e-2
    assert record["marking"] == "1,-2,-1"


def test_persist_appends_rows_and_writes_manifest(controller, isolated_output):
    spec = _square()
    controller.run_lattice_crossing(spec)
    paths = controller.persist(spec)
    controller.persist(spec)
    frame = pd.read_csv(paths["csv"])
    assert list(frame.columns) == CSV_COLUMNS
    assert len(frame) == 6
    manifest = json.loads(paths["manifest"].read_text())
    assert paths["manifest"].parent == isolated_output
    assert manifest["spec"]["deltas"] == ["1/4"]
    assert manifest["seeds"]["root"] == 1
    assert set(manifest["versions"]) >= {"python", "numpy", "scipy", "pandas"}


def test_compare_identical_runs(controller):
    spec = _square()
    controller.run_lattice_crossing(spec)
    csv_path = controller.persist(spec)["csv"]
    report = ExperimentController.compare_runs(str(csv_path), str(csv_path))
    assert len(report) == 3
    assert (report["z"] == 0).all()
    assert report["passed"].all()


def test_export_to_excel(controller, tmp_path):
    assert controller.export_to_excel(str(tmp_path / "none.xlsx")) is None
    controller.run_lattice_crossing(_square(n_samples=10))
    target = controller.export_to_excel(str(tmp_path / "results.xlsx"))
    assert target is not None and target.exists()
    assert len(pd.read_excel(target)) == 3


@pytest.mark.slow
def test_bessel_suite(controller):
    spec = ExperimentSpec(kind="validation", suite="bessel", n_samples=4000, dt=1e-3, seed=2)
    report = controller.run_validation(spec)
    assert len(report["rows"]) == 3
    assert report["passed"]


def test_closure_table(controller):
    spec = ExperimentSpec(kind="closure", domain=SQUARE, deltas=["1/8"], n_samples=50, dt=1e-2, seed=2,
                          observation=[0.5, 0.25])
    table = controller.run_closure(spec)
    assert list(table["observation"]) == [0.5, 0.25]
    assert table["modulus"].to_numpy() == pytest.approx([1.0, 1.0], rel=1e-8)
    assert (table["lattice_star"] == table["lattice_star"].iloc[0]).all()
    assert table["difference"].to_numpy() == pytest.approx((table["cde"] - table["lattice_star"]).to_numpy())
    assert [r["event"] for r in controller.records] == ["plus", "star", "cde_hit", "cde_hit"]
    assert table["shift"].to_numpy() == pytest.approx([abs(table["cde"].iloc[0] - table["cde"].iloc[1])] * 2)
    within = (table["difference"].abs() <= 0.03) & (table["shift"] < 0.01)
    assert (table["passed"] == within).all()


def test_closure_pass_requires_shift_below_bound(controller):
    controller.config.set("harness", "closure_tolerance", 1.0)
    controller.config.set("harness", "closure_shift_tolerance", -1.0)
    spec = ExperimentSpec(kind="closure", domain=SQUARE, deltas=["1/8"], n_samples=20, dt=1e-2, seed=2,
                          observation=[0.5])
    table = controller.run_closure(spec)
    assert table["shift"].tolist() == [0.0]
    assert not table["passed"].any()


def test_hair_table(controller):
    spec = _square(kind="lattice-hair", n_samples=5)
    table = controller.run_hair(spec)
    (row,) = table.to_dict("records")
    assert row["N"] == 3 and row["n_samples"] == 5
    assert row["mean_shared"] >= 1
    assert 0 < row["gap_q50"] <= row["gap_q90"] <= 1
    assert row["median_gap"] == row["gap_q50"]
    assert row["non_increasing"]
    assert controller.records == []
    paths = controller.persist(spec)
    assert "csv" not in paths
    stored = pd.read_csv(paths["hair"])
    assert list(stored["experiment_id"]) == [spec.experiment_id]


def test_hair_rows_are_ordered_by_size(controller):
    spec = ExperimentSpec(kind="lattice-hair", domain=SQUARE, deltas=["1/6", "1/4"], n_samples=4, seed=1)
    table = controller.run_hair(spec)
    assert list(table["N"]) == [3, 5]
    assert table["non_increasing"].iloc[0]
    assert table["non_increasing"].iloc[1] == (table["median_gap"].iloc[1] <= table["median_gap"].iloc[0])
