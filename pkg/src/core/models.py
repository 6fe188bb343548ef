# ---------------------------------------------
# DATA MODELS
# ---------------------------------------------
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from src.core.exceptions import SpecError
from src.core.utils import wilson_interval

KINDS = ("lattice-crossing", "lattice-explorer-hit", "lattice-hair", "sle-hit", "modulus", "validation", "closure")
SUITES = ("cardy", "bessel", "coordchange", "reflection")


@dataclass
class Estimate:
    """
    Monte Carlo count of an event with its Wilson interval.

    Undecided samples are counted but excluded from p_hat.

    Attributes:
        successes (int): Samples where the event held.
        undecided (int): Samples that could not be decided.
        total (int): All samples.
        seed (Optional[int]): Root seed of the run.
        wall_time (float): Seconds spent.
        event (str): Event name.
        label (str): Free-form tag, e.g. the mesh size.
        warning (str): Set when the undecided fraction is too large.
    """
    successes: int
    undecided: int = 0
    total: int = 0
    seed: Optional[int] = None
    wall_time: float = 0.0
    event: str = ""
    label: str = ""
    warning: str = ""
    confidence_z: float = 1.96

    def __post_init__(self):
        if not 0 <= self.successes <= self.total - self.undecided:
            raise ValueError(f"inconsistent counts: {self.successes} successes, "
                             f"{self.undecided} undecided, {self.total} total")

    @property
    def decided(self) -> int:
        return self.total - self.undecided

    @property
    def p_hat(self) -> float:
        return self.successes / self.decided if self.decided else float("nan")

    @property
    def ci(self) -> Tuple[float, float]:
        return wilson_interval(self.successes, self.decided, self.confidence_z)

    @property
    def ci_lo(self) -> float:
        return self.ci[0]

    @property
    def ci_hi(self) -> float:
        return self.ci[1]

    @property
    def stderr(self) -> float:
        p = self.p_hat
        return (p * (1 - p) / self.decided) ** 0.5 if self.decided else float("nan")

    def merge(self, other: "Estimate") -> "Estimate":
        """Count addition; wall time adds, the first seed is kept."""
        if other.event != self.event:
            raise ValueError(f"cannot merge {self.event!r} with {other.event!r}")
        warning = "; ".join(w for w in (self.warning, other.warning) if w)
        return Estimate(
            successes=self.successes + other.successes,
            undecided=self.undecided + other.undecided,
            total=self.total + other.total,
            seed=self.seed if self.seed is not None else other.seed,
            wall_time=self.wall_time + other.wall_time,
            event=self.event,
            label=self.label or other.label,
            warning=warning,
            confidence_z=self.confidence_z,
        )

    __add__ = merge

    def to_record(self) -> Dict[str, object]:
        lo, hi = self.ci
        return {
            "event": self.event,
            "n_total": self.total,
            "n_undecided": self.undecided,
            "n_success": self.successes,
            "p_hat": self.p_hat,
            "ci_lo": lo,
            "ci_hi": hi,
            "seed": self.seed,
            "wall_time_s": round(self.wall_time, 6),
        }


@dataclass
class ExperimentSpec:
    """
    Everything needed to reproduce one run.

    Attributes:
        kind (str): One of KINDS.
        domain (Optional[str]): Domain file for lattice kinds.
        deltas (List[str]): Mesh sizes as exact strings, e.g. "1/32".
        beta (Optional[float]): Inverse temperature; critical when None.
        boundary (str): "free" or "mixed".
        n_samples (int): Samples per mesh size, or SLE paths.
        seed (int): Root seed.
        workers (int): Worker processes.
        n_thermalize (Optional[int]): Wolff steps before the first sample.
        decorrelation_steps (Optional[int]): Wolff steps between samples.
        metropolis_per_wolff (Optional[int]): Metropolis sweeps per Wolff step.
        explorers (List[str]): Rules for explorer-hit runs.
        check_identities (bool): Fail on an explorer/crossing mismatch.
        points (Optional[List[float]]): (x_b, x_c, x_d) for sle-hit.
        dt (Optional[float]): SLE substep.
        suite (Optional[str]): Validation suite.
        observation (List[float]): Fractions of [bc] used as target in closure runs.
    """
    kind: str
    domain: Optional[str] = None
    deltas: List[str] = field(default_factory=list)
    beta: Optional[float] = None
    boundary: str = "free"
    n_samples: int = 1000
    seed: int = 0
    workers: int = 1
    n_thermalize: Optional[int] = None
    decorrelation_steps: Optional[int] = None
    metropolis_per_wolff: Optional[int] = None
    explorers: List[str] = field(default_factory=lambda: ["leftmost", "rightmost"])
    check_identities: bool = True
    points: Optional[List[float]] = None
    dt: Optional[float] = None
    suite: Optional[str] = None
    observation: List[float] = field(default_factory=lambda: [0.5])

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        Raises:
            SpecError: a field is missing or out of range.
        """
        if self.kind not in KINDS:
            raise SpecError(f"unknown experiment kind {self.kind!r}")
        if self.kind in ("lattice-crossing", "lattice-explorer-hit", "lattice-hair", "modulus", "closure"):
            if not self.domain:
                raise SpecError(f"{self.kind} needs a domain file")
            if not self.deltas:
                raise SpecError(f"{self.kind} needs at least one mesh size")
        if self.kind == "sle-hit":
            if not self.points or len(self.points) != 3:
                raise SpecError("sle-hit needs three points x_b, x_c, x_d")
            x_b, x_c, x_d = self.points
            if not (x_b > 0 and x_c < x_d < 0):
                raise SpecError("sle-hit points must satisfy x_b > 0 and x_c < x_d < 0")
        if self.kind == "validation" and self.suite not in SUITES:
            raise SpecError(f"validation suite must be one of {', '.join(SUITES)}")
        if self.boundary not in ("free", "mixed"):
            raise SpecError(f"unknown boundary condition {self.boundary!r}")
        if self.n_samples < 1:
            raise SpecError("n_samples must be positive")
        if self.workers < 1:
            raise SpecError("workers must be positive")
        for rule in self.explorers:
            if rule not in ("leftmost", "rightmost"):
                raise SpecError(f"unknown explorer {rule!r}")
        self.deltas = [str(d) for d in self.deltas]

    @classmethod
    def from_dict(cls, data: Dict) -> "ExperimentSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise SpecError(f"unknown spec fields: {', '.join(sorted(unknown))}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "ExperimentSpec":
        with open(path, "r") as f:
            return cls.from_dict(json.load(f))

    def to_dict(self) -> Dict:
        return asdict(self)

    @property
    def experiment_id(self) -> str:
        """Stable short hash of the spec."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha1(canonical.encode()).hexdigest()[:12]
