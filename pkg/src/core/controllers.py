# ---------------------------------------------
# EXPERIMENT CONTROLLER
# ---------------------------------------------
import json
import logging
import os
import platform
import time
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy

from src.core import conformal, sle
from src.core.connect import minus_star_crossing, plus_crossing, star_crossing
from src.core.exceptions import IdentityViolation, SpecError
from src.core.explorer import (
    HIT_CD_FIRST,
    LEFTMOST,
    RIGHTMOST,
    explore_from_corner,
    hair_gaps,
    hit_classification,
    shared_no_return_edges,
)
from src.core.grid import RectangleMarking, build_from_spec, load_domain_file, to_fraction
from src.core.ising import (
    BoundaryCondition,
    SpinConfiguration,
    advance_chain,
    beta_critical,
    default_thermalization,
    sample,
)
from src.core.models import Estimate, ExperimentSpec
from src.core.services import WorkerPoolService
from src.core.utils import compare_counts, spawn_seeds
from src.data.config_manager import ConfigManager

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["experiment_id", "kind", "domain", "delta", "N", "marking", "event", "n_total", "n_undecided",
               "p_hat", "ci_lo", "ci_hi", "seed", "dt", "wall_time_s", "note"]


# ---------------------------------------------
# WORKER TASKS
# ---------------------------------------------

def _chain(payload: Dict) -> Iterator[Tuple[int, SpinConfiguration, RectangleMarking]]:
    """Thermalise one chain and yield its decorrelated samples."""
    domain, marking = build_from_spec(payload["domain_spec"], payload["delta"])
    bc = BoundaryCondition.mixed(marking) if payload["boundary"] == "mixed" else BoundaryCondition.free()
    rng = np.random.default_rng(payload["seed_seq"])
    mpw = payload["metropolis_per_wolff"]
    n_thermalize = payload["n_thermalize"] or default_thermalization(domain, payload["thermalize_factor"])
    state = sample(domain, bc, payload["beta"], n_thermalize, rng, mpw)
    for i in range(payload["n"]):
        if i:
            advance_chain(state, payload["decorrelation_steps"], rng, mpw)
        yield i, state, marking


def _lattice_batch(payload: Dict) -> Dict[str, int]:
    """Evaluate crossing or explorer events on the samples of one chain."""
    counts = {"n": 0, "plus": 0, "star": 0, "minus_star": 0}
    counts.update({rule: 0 for rule in payload["explorers"]})
    rotated = None
    for i, state, marking in _chain(payload):
        if rotated is None:
            rotated = marking.rotated()
        plus, star = plus_crossing(state, marking), star_crossing(state, marking)
        counts["n"] += 1
        counts["plus"] += plus
        counts["star"] += star
        counts["minus_star"] += minus_star_crossing(state, rotated)
        for rule in payload["explorers"]:
            hit = hit_classification(explore_from_corner(state, marking, rule), marking) == HIT_CD_FIRST
            counts[rule] += hit
            expected = plus if rule == LEFTMOST else star
            if payload["check_identities"] and hit != expected:
                raise IdentityViolation(
                    f"{rule} explorer {'hit' if hit else 'missed'} [cd] first while the "
                    f"{'plus' if rule == LEFTMOST else 'star'} crossing is {expected} (sample {i})")
    return counts


def _hair_batch(payload: Dict) -> Dict[str, List[float]]:
    """Largest gap between shared no-return edges along the leftmost explorer, per sample."""
    gaps, shared_counts = [], []
    for _, state, marking in _chain(payload):
        left = explore_from_corner(state, marking, LEFTMOST)
        right = explore_from_corner(state, marking, RIGHTMOST)
        shared = shared_no_return_edges(left, right)
        gaps.append(float(hair_gaps(left, shared, state.domain).max()))
        shared_counts.append(len(shared))
    return {"max_gap": gaps, "n_shared": shared_counts}


def _cde_batch(payload: Dict) -> Estimate:
    rng = np.random.default_rng(payload["seed_seq"])
    return sle.cde_hitting_probability(tuple(payload["points"]), payload["n"], payload["dt"], rng,
                                       params=payload["params"], seed=payload["seed"])


# ---------------------------------------------
# CONTROLLER
# ---------------------------------------------

class ExperimentController:
    """Controller for running, persisting and exporting experiments."""

    def __init__(self, config: Optional[ConfigManager] = None, output_dir: Optional[str] = None,
                 progress: bool = True) -> None:
        """
        Initialize the experiment controller.

        Args:
            config (Optional[ConfigManager]): Lab configuration.
            output_dir (Optional[str]): Overrides the configured output directory.
            progress (bool): Show progress bars.
        """
        self.config = config or ConfigManager()
        self.output_dir = Path(output_dir or self.config.get_output_dir())
        self.progress = progress
        self.records: List[Dict] = []
        self.tables: Dict[str, pd.DataFrame] = {}

    # ---------------------------------------------
    # LATTICE RUNS
    # ---------------------------------------------

    def _chain_payloads(self, spec: ExperimentSpec, delta: Fraction, explorers: Sequence[str] = (),
                        check_identities: bool = False) -> List[Dict]:
        sampler = self.config.get_section("sampler")
        domain_spec = load_domain_file(spec.domain)
        sizes = WorkerPoolService.split(spec.n_samples, spec.workers)
        seeds = spawn_seeds(spec.seed, len(sizes))
        return [{
            "domain_spec": domain_spec,
            "delta": delta,
            "boundary": spec.boundary,
            "beta": spec.beta if spec.beta is not None else beta_critical(),
            "seed_seq": seed_seq,
            "n": n,
            "n_thermalize": spec.n_thermalize,
            "thermalize_factor": sampler["thermalize_factor"],
            "decorrelation_steps": spec.decorrelation_steps or sampler["decorrelation_steps"],
            "metropolis_per_wolff": spec.metropolis_per_wolff or sampler["metropolis_per_wolff"],
            "explorers": list(explorers),
            "check_identities": check_identities,
        } for n, seed_seq in zip(sizes, seeds)]

    def _lattice_counts(self, spec: ExperimentSpec, delta: Fraction, explorers: Sequence[str],
                        check_identities: bool) -> Dict[str, int]:
        payloads = self._chain_payloads(spec, delta, explorers, check_identities)
        pool = WorkerPoolService(spec.workers, self.progress)
        results = pool.map(_lattice_batch, payloads, description=f"delta={delta}")
        totals: Dict[str, int] = {}
        for counts in results:
            for key, value in counts.items():
                totals[key] = totals.get(key, 0) + int(value)
        return totals

    def _lattice_estimates(self, spec: ExperimentSpec, events: Sequence[str], explorers: Sequence[str],
                           check_identities: bool) -> List[Estimate]:
        domain_spec = load_domain_file(spec.domain)
        z = self.config.get("harness", "confidence_z", 1.96)
        estimates = []
        for text in spec.deltas:
            delta = to_fraction(text)
            domain, _ = build_from_spec(domain_spec, delta)
            started = time.perf_counter()
            totals = self._lattice_counts(spec, delta, explorers, check_identities)
            wall = time.perf_counter() - started
            for event in events:
                estimate = Estimate(successes=totals[event], total=totals["n"], seed=spec.seed, wall_time=wall,
                                    event=event, label=str(delta), confidence_z=z)
                estimates.append(estimate)
                self._record(spec, estimate, delta=delta, N=domain.side)
            logger.info("delta=%s N=%d: %s", delta, domain.side,
                        ", ".join(f"{e}={totals[e] / max(totals['n'], 1):.4f}" for e in events))
        return estimates

    def run_lattice_crossing(self, spec: ExperimentSpec) -> List[Estimate]:
        """
        Crossing estimates per mesh size for the events plus, star and minus_star.

        All events are evaluated on the same samples; plus and minus_star are
        complementary on every sample.
        """
        logger.info("lattice crossing on %s, deltas %s, %d samples", spec.domain, spec.deltas, spec.n_samples)
        return self._lattice_estimates(spec, ("plus", "star", "minus_star"), (), False)

    def run_explorer_hit(self, spec: ExperimentSpec) -> List[Estimate]:
        """
        Explorer hit estimates per mesh size and explorer rule.

        Raises:
            IdentityViolation: an explorer hit disagrees with its crossing event.
        """
        logger.info("explorer hits on %s, deltas %s, %d samples", spec.domain, spec.deltas, spec.n_samples)
        try:
            return self._lattice_estimates(spec, tuple(spec.explorers), spec.explorers, spec.check_identities)
        except IdentityViolation as e:
            logger.error("Explorer identity violated: %s", e)
            raise

    def run_hair(self, spec: ExperimentSpec) -> pd.DataFrame:
        """
        Hair statistic per mesh size.

        Each sample contributes the largest gap, in units of the domain
        diameter, between consecutive edges that the leftmost and rightmost
        explorers share, measured along the leftmost one. Rows are ordered by
        N; the median gap should not grow with N.
        """
        logger.info("hair statistic on %s, deltas %s, %d samples", spec.domain, spec.deltas, spec.n_samples)
        quantiles = self.config.get("harness", "hair_quantiles", [0.5, 0.9])
        domain_spec = load_domain_file(spec.domain)
        rows = []
        for text in spec.deltas:
            delta = to_fraction(text)
            domain, _ = build_from_spec(domain_spec, delta)
            started = time.perf_counter()
            pool = WorkerPoolService(spec.workers, self.progress)
            results = pool.map(_hair_batch, self._chain_payloads(spec, delta), description=f"hair delta={delta}")
            gaps = np.concatenate([r["max_gap"] for r in results])
            shared = np.concatenate([r["n_shared"] for r in results])
            row = {"delta": str(delta), "N": domain.side, "n_samples": int(gaps.size),
                   "mean_shared": float(shared.mean()), "median_gap": float(np.median(gaps))}
            row.update({f"gap_q{round(100 * q)}": float(np.quantile(gaps, q)) for q in quantiles})
            row["wall_time_s"] = time.perf_counter() - started
            rows.append(row)
            logger.info("delta=%s N=%d: median gap %.4f, %.1f shared edges", delta, domain.side,
                        row["median_gap"], row["mean_shared"])
        frame = pd.DataFrame(rows).sort_values("N", kind="stable").reset_index(drop=True)
        frame["non_increasing"] = frame["median_gap"].diff().fillna(0.0) <= 0.0
        if not frame["non_increasing"].all():
            logger.warning("median hair gap grows with N: %s", frame["median_gap"].round(4).tolist())
        self.tables["hair"] = frame
        return frame

    # ---------------------------------------------
    # SLE RUNS
    # ---------------------------------------------

    def sle_params(self, **overrides) -> sle.SleParams:
        section = self.config.get_section("sle")
        params = sle.SleParams.from_config(3.0, -1.5, -1.5, section)
        return replace(params, **overrides)

    def _dt(self, spec: ExperimentSpec) -> float:
        return spec.dt if spec.dt is not None else float(self.config.get("sle", "dt", 1e-3))

    def cde_estimate(self, points: Sequence[float], n_samples: int, dt: float, seed: int, workers: int = 1) -> Estimate:
        """CDE hitting estimate split across workers and merged by count addition."""
        sizes = WorkerPoolService.split(n_samples, workers)
        payloads = [{"points": list(points), "n": n, "dt": dt, "seed_seq": seed_seq, "seed": seed,
                     "params": self.sle_params()}
                    for n, seed_seq in zip(sizes, spawn_seeds(seed, len(sizes)))]
        results = WorkerPoolService(workers, self.progress).map(_cde_batch, payloads, description="cde paths")
        merged = results[0]
        for other in results[1:]:
            merged = merged.merge(other)
        merged.confidence_z = self.config.get("harness", "confidence_z", 1.96)
        return merged

    def run_sle_hit(self, spec: ExperimentSpec) -> Estimate:
        dt = self._dt(spec)
        logger.info("CDE hit at points %s, %d paths, dt=%g", spec.points, spec.n_samples, dt)
        estimate = self.cde_estimate(spec.points, spec.n_samples, dt, spec.seed, spec.workers)
        self._record(spec, estimate, dt=dt, marking=",".join(f"{x:g}" for x in spec.points))
        return estimate

    # ---------------------------------------------
    # CONFORMAL RUNS
    # ---------------------------------------------

    def run_modulus(self, spec: ExperimentSpec) -> pd.DataFrame:
        """Discrete extremal length of ([ab], [cd]) per mesh size."""
        domain_spec = load_domain_file(spec.domain)
        section = self.config.get_section("conformal")
        rows = []
        for text in spec.deltas:
            domain, marking = build_from_spec(domain_spec, text)
            value = conformal.discrete_modulus(domain, marking, rtol=section["cg_rtol"],
                                               maxiter=section["cg_maxiter_factor"] * domain.n_vertices)
            rows.append({"delta": str(to_fraction(text)), "N": domain.side, "n_vertices": domain.n_vertices,
                         "modulus": value})
            logger.info("modulus at delta=%s: %.6f", text, value)
        return pd.DataFrame(rows)

    def run_closure(self, spec: ExperimentSpec) -> pd.DataFrame:
        """
        Lattice star-crossing probability against the CDE at the modulus-matched points.

        Each observation fraction picks a different point of [bc] sent to
        infinity; the CDE estimate should not depend on it. All observation
        points reuse the same seed, so their shift measures that dependence
        rather than the sampling noise. A row passes when the CDE agrees with
        the lattice and the shift across observation points stays below the
        configured bound.
        """
        tolerance = self.config.get("harness", "closure_tolerance", 0.03)
        shift_tolerance = self.config.get("harness", "closure_shift_tolerance", 0.01)
        modulus = self.run_modulus(spec)
        lattice = self._lattice_estimates(spec, ("plus", "star"), (), False)
        stars = [e for e in lattice if e.event == "star"]
        dt = self._dt(spec)
        rows = []
        for (_, row), star in zip(modulus.iterrows(), stars):
            x = conformal.modulus_to_halfplane(row["modulus"])
            b, c = x[2], x[3]
            cde_by_fraction = {}
            for fraction in spec.observation:
                target = b * (c / b) ** fraction
                points = conformal.moebius_normalize(x, start_index=1, target=target)[1:]
                cde = self.cde_estimate(points, spec.n_samples, dt, spec.seed, spec.workers)
                self._record(spec, cde, delta=row["delta"], N=row["N"], dt=dt,
                             note=f"cde observation={fraction:g}")
                cde_by_fraction[fraction] = cde.p_hat
            shift = max(cde_by_fraction.values()) - min(cde_by_fraction.values())
            if shift >= shift_tolerance:
                logger.warning("CDE moved by %.4f across observation points at delta=%s", shift, row["delta"])
            for fraction, p_cde in cde_by_fraction.items():
                rows.append({
                    "delta": row["delta"],
                    "modulus": row["modulus"],
                    "observation": fraction,
                    "lattice_star": star.p_hat,
                    "cde": p_cde,
                    "difference": p_cde - star.p_hat,
                    "shift": shift,
                    "passed": abs(p_cde - star.p_hat) <= tolerance and shift < shift_tolerance,
                })
        return pd.DataFrame(rows)

    # ---------------------------------------------
    # VALIDATION SUITES
    # ---------------------------------------------

    def run_validation(self, spec: ExperimentSpec) -> Dict[str, object]:
        """
        Run one validation suite against its closed form.

        Returns:
            Dict[str, object]: suite, rows (DataFrame) and passed.
        """
        rng = np.random.default_rng(spec.seed)
        dt = self._dt(spec)
        n = spec.n_samples
        logger.info("validation suite %s, %d samples, dt=%g", spec.suite, n, dt)
        rows = []
        if spec.suite == "cardy":
            base = self.sle_params(kappa=6.0, rho_left=0.0, rho_right=0.0)
            for x_pos, x_neg in ((1.0, -1.0), (1.0, -3.0)):
                est = sle.swallow_race_probability(6.0, 0.0, 0.0, x_pos, x_neg, n, dt, rng, params=base)
                exact = sle.hypergeometric_race_formula(-x_neg / (x_pos - x_neg), 6.0)
                slack = max(0.01, 3 * est.stderr)
                rows.append({"case": f"x_pos={x_pos:g},x_neg={x_neg:g}", "estimate": est.p_hat, "expected": exact,
                             "passed": abs(est.p_hat - exact) <= slack})
        elif spec.suite == "bessel":
            for d in (4 / 3, 2.0, 3.0):
                moment = sle.bessel_second_moment(d, 1.0, 1.0, dt, n, rng)
                rows.append({"case": f"d={d:.4g}", "estimate": moment - 1.0, "expected": d,
                             "passed": abs(moment - 1.0 - d) <= 0.01 * d + 3 * np.sqrt(2 * d + 4) / np.sqrt(n)})
        elif spec.suite == "coordchange":
            matched = sle.coordinate_change_check(n, dt, rng)
            mismatched = sle.coordinate_change_check(n, dt, rng, rho_right=0.0)
            rows.append({"case": "rho_R=-3/2", "estimate": matched.event_z, "expected": 0.0,
                         "passed": matched.passed})
            rows.append({"case": "rho_R=0 (power)", "estimate": mismatched.event_z, "expected": float("nan"),
                         "passed": not mismatched.passed or mismatched.ks_pvalue < 1e-3})
        elif spec.suite == "reflection":
            profile = sle.reflection_profile(self.sle_params(), 1.0, dt, n, rng)
            rows.append({"case": "occupation slope", "estimate": profile["slope"], "expected": profile["predicted"],
                         "passed": profile["passed"]})
        else:
            raise SpecError(f"unknown validation suite {spec.suite!r}")
        frame = pd.DataFrame(rows)
        passed = bool(frame["passed"].all())
        log = logger.info if passed else logger.warning
        log("validation %s %s", spec.suite, "passed" if passed else "FAILED")
        return {"suite": spec.suite, "rows": frame, "passed": passed}

    # ---------------------------------------------
    # PERSISTENCE
    # ---------------------------------------------

    def _record(self, spec: ExperimentSpec, estimate: Estimate, delta=None, N=None, dt=None,
                marking: str = "", note: str = "") -> None:
        record = {
            "experiment_id": spec.experiment_id,
            "kind": spec.kind,
            "domain": os.path.basename(spec.domain) if spec.domain else "",
            "delta": str(delta) if delta is not None else "",
            "N": N if N is not None else "",
            "marking": marking or "abcd",
            "dt": dt if dt is not None else "",
            "note": note or estimate.warning,
        }
        record.update(estimate.to_record())
        if not note and spec.kind != "sle-hit":
            record["note"] = record["note"] or "events share samples"
        self.records.append(record)

    def persist(self, spec: ExperimentSpec, records: Optional[List[Dict]] = None) -> Dict[str, Path]:
        """
        Append result rows and tables to their CSV files and write the run manifest.

        Estimates go to the results CSV; every table of the session (e.g. the
        hair statistic) goes to <name>.csv tagged with the experiment id.

        Returns:
            Dict[str, Path]: Paths written, keyed "csv", "manifest" and by table name.
        """
        records = self.records if records is None else records
        self.output_dir.mkdir(parents=True, exist_ok=True)
        paths: Dict[str, Path] = {}
        if records:
            csv_path = self.output_dir / self.config.get("harness", "csv_name", "results.csv")
            frame = pd.DataFrame(records, columns=CSV_COLUMNS)
            frame.to_csv(csv_path, mode="a", header=not csv_path.exists(), index=False)
            paths["csv"] = csv_path
            logger.info("Wrote %d rows to %s", len(frame), csv_path)
        for name, table in self.tables.items():
            table_path = self.output_dir / f"{name}.csv"
            tagged = table.assign(experiment_id=spec.experiment_id)
            tagged.to_csv(table_path, mode="a", header=not table_path.exists(), index=False)
            paths[name] = table_path
            logger.info("Wrote %d %s rows to %s", len(tagged), name, table_path)

        manifest_path = self.output_dir / f"{spec.experiment_id}.json"
        manifest = {
            "experiment_id": spec.experiment_id,
            "spec": spec.to_dict(),
            "seeds": {"root": spec.seed,
                      "worker_spawn_keys": [list(s.spawn_key) for s in spawn_seeds(spec.seed, spec.workers)]},
            "config": self.config.config,
            "versions": {"python": platform.python_version(), "numpy": np.__version__,
                         "scipy": scipy.__version__, "pandas": pd.__version__},
        }
        with open(manifest_path, "w") as f:
            json.dump(manifest, f, indent=4, default=str)
        logger.info("Wrote manifest %s", manifest_path)
        paths["manifest"] = manifest_path
        return paths

    def export_to_excel(self, path: Optional[str] = None) -> Optional[Path]:
        """Export the recorded rows of this session to an Excel file."""
        try:
            if not self.records:
                logger.info("No results to export.")
                return None
            target = Path(path) if path else self.output_dir / "results.xlsx"
            target.parent.mkdir(parents=True, exist_ok=True)
            pd.DataFrame(self.records, columns=CSV_COLUMNS).to_excel(target, index=False, engine="openpyxl")
            logger.info("Results exported to %s.", target)
            return target
        except Exception as e:
            logger.error("Error exporting to Excel: %s", e)
            return None

    @staticmethod
    def compare_runs(left_csv: str, right_csv: str, threshold: float = 3.0) -> pd.DataFrame:
        """
        z-scores between matching rows of two result files.

        Rows are matched on (kind, domain, delta, event, marking); unmatched rows are dropped.
        """
        keys = ["kind", "domain", "delta", "event", "marking"]
        left = pd.read_csv(left_csv, dtype={"delta": str}).fillna({"domain": "", "delta": ""})
        right = pd.read_csv(right_csv, dtype={"delta": str}).fillna({"domain": "", "delta": ""})
        merged = left.merge(right, on=keys, suffixes=("_left", "_right"))
        rows = []
        for _, row in merged.iterrows():
            decided_l = int(row["n_total_left"] - row["n_undecided_left"])
            decided_r = int(row["n_total_right"] - row["n_undecided_right"])
            result = compare_counts(int(round(row["p_hat_left"] * decided_l)), decided_l,
                                    int(round(row["p_hat_right"] * decided_r)), decided_r, threshold)
            rows.append({**{k: row[k] for k in keys}, "p_left": result.p_left, "p_right": result.p_right,
                         "z": result.z, "passed": result.passed})
        return pd.DataFrame(rows, columns=keys + ["p_left", "p_right", "z", "passed"])
