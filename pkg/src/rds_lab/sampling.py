"""Simulation of the RDS recruitment process and sample-side summaries."""

from __future__ import annotations

import csv
import random
from collections import deque
from dataclasses import dataclass, field, replace
from typing import IO

import numpy as np

from .errors import EstimatorError, SampleFormatError
from .graph import DirectedGraph, RecruitmentMatrix

__all__ = [
    "SEED",
    "SamplerConfig",
    "RdsSample",
    "GroupDegreeSummary",
    "run_rds",
    "sample_recruitment_matrix",
    "sample_group_counts_and_degrees",
    "write_sample_csv",
    "read_sample_csv",
]

SEED = -1
CSV_COLUMNS = ("respondent", "recruiter", "wave", "out_degree", "in_degree", "trait")


@dataclass(frozen=True)
class SamplerConfig:
    """RDS design: seeds, coupons, sample size and replacement mode."""

    seed_count: int = 10
    coupons_per_respondent: int = 3
    target_sample_size: int = 500
    with_replacement: bool = False
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.seed_count < 1:
            raise ValueError("seed_count must be positive")
        if self.coupons_per_respondent < 1:
            raise ValueError("coupons_per_respondent must be positive")
        if self.target_sample_size < 1:
            raise ValueError("target_sample_size must be positive")


@dataclass(frozen=True, eq=False)
class RdsSample:
    """Ordered recruitment records.

    All fields are parallel arrays over records. ``recruiter`` holds ``-1`` for
    seeds. ``in_degree`` is ``None`` for field data where indegrees were not
    collected. With-replacement samples may list a respondent more than once;
    every record then counts as one draw.
    """

    respondent: np.ndarray
    recruiter: np.ndarray
    wave: np.ndarray
    out_degree: np.ndarray
    in_degree: np.ndarray | None
    is_a: np.ndarray
    config: SamplerConfig | None = field(default=None)

    def __post_init__(self) -> None:
        n = self.respondent.size
        for name in ("recruiter", "wave", "out_degree", "is_a"):
            if getattr(self, name).size != n:
                raise SampleFormatError(f"column {name} length differs from respondent column")
        if self.in_degree is not None and self.in_degree.size != n:
            raise SampleFormatError("column in_degree length differs from respondent column")

    def __len__(self) -> int:
        return int(self.respondent.size)

    @property
    def n_a(self) -> int:
        return int(np.count_nonzero(self.is_a))

    @property
    def n_b(self) -> int:
        return len(self) - self.n_a

    @property
    def has_in_degree(self) -> bool:
        return self.in_degree is not None

    def require_in_degree(self) -> np.ndarray:
        if self.in_degree is None:
            raise EstimatorError("indegree unavailable in this sample")
        return self.in_degree

    def swap_traits(self) -> "RdsSample":
        """The same sample with A and B relabelled."""
        return replace(self, is_a=~self.is_a)

    def records(self):
        """Iterate over records as tuples in CSV column order."""
        din = self.in_degree.tolist() if self.in_degree is not None else [None] * len(self)
        for r, p, w, do, di, a in zip(
            self.respondent.tolist(),
            self.recruiter.tolist(),
            self.wave.tolist(),
            self.out_degree.tolist(),
            din,
            self.is_a.tolist(),
        ):
            yield r, p, w, do, di, "A" if a else "B"

    def equals(self, other: "RdsSample") -> bool:
        same = all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("respondent", "recruiter", "wave", "out_degree", "is_a")
        )
        if (self.in_degree is None) != (other.in_degree is None):
            return False
        return same and (self.in_degree is None or np.array_equal(self.in_degree, other.in_degree))


def run_rds(
    g: DirectedGraph, cfg: SamplerConfig, rng: np.random.Generator | None = None
) -> RdsSample:
    """Simulate one RDS sample on ``g``.

    Seeds are drawn uniformly. Respondents are processed first-in first-out
    and each hands out up to ``coupons_per_respondent`` coupons to out-
    neighbours drawn uniformly: among all out-neighbours when sampling with
    replacement, among not-yet-sampled ones otherwise (coupons with no
    eligible neighbour are forfeited). If every chain dies before the target
    size, a fresh seed is drawn uniformly from the unsampled nodes.
    """
    n_nodes = g.n_nodes
    size = cfg.target_sample_size
    if not cfg.with_replacement and size > n_nodes:
        raise ValueError("target_sample_size exceeds population without replacement")
    if not g.strongly_connected:
        raise ValueError("graph is not strongly connected")
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    rnd = random.Random(int(rng.integers(0, 2**63 - 1)))
    out = g.out_lists
    coupons = cfg.coupons_per_respondent
    wr = cfg.with_replacement

    resp: list[int] = []
    recr: list[int] = []
    wave: list[int] = []
    sampled = bytearray(n_nodes)
    queue: deque[int] = deque()

    def add(node: int, parent: int, w: int) -> None:
        queue.append(len(resp))
        resp.append(node)
        recr.append(parent)
        wave.append(w)
        sampled[node] = 1

    for s in rng.choice(n_nodes, size=min(cfg.seed_count, size), replace=False).tolist():
        add(s, SEED, 0)

    while len(resp) < size:
        if not queue:
            if wr:
                add(int(rnd.random() * n_nodes), SEED, 0)
            else:
                unsampled = [i for i in range(n_nodes) if not sampled[i]]
                add(unsampled[int(rnd.random() * len(unsampled))], SEED, 0)
            continue
        rec = queue.popleft()
        node = resp[rec]
        nbrs = out[node]
        if wr:
            picks = [nbrs[int(rnd.random() * len(nbrs))] for _ in range(coupons)]
        else:
            eligible = [v for v in nbrs if not sampled[v]]
            picks = rnd.sample(eligible, min(coupons, len(eligible)))
        w = wave[rec] + 1
        for v in picks:
            if len(resp) >= size:
                break
            add(v, node, w)

    idx = np.asarray(resp, dtype=np.int64)
    return RdsSample(
        respondent=idx,
        recruiter=np.asarray(recr, dtype=np.int64),
        wave=np.asarray(wave, dtype=np.int64),
        out_degree=g.out_degree[idx].copy(),
        in_degree=g.in_degree[idx].copy(),
        is_a=g.is_a[idx].copy(),
        config=cfg,
    )


def _recruiter_traits(s: RdsSample) -> tuple[np.ndarray, np.ndarray]:
    """Traits of (recruiter, recruit) for every non-seed record."""
    trait_of: dict[int, bool] = {}
    for r, a in zip(s.respondent.tolist(), s.is_a.tolist()):
        trait_of.setdefault(r, a)
    mask = s.recruiter != SEED
    try:
        parent = np.array([trait_of[r] for r in s.recruiter[mask].tolist()], dtype=bool)
    except KeyError as exc:
        raise SampleFormatError(f"recruiter {exc.args[0]} is not a respondent") from None
    return parent, s.is_a[mask]


def _recruitment_counts(s: RdsSample, weights: np.ndarray | None = None):
    parent, child = _recruiter_traits(s)
    w = np.ones(child.size) if weights is None else weights[s.recruiter != SEED]
    aa = float(w[parent & child].sum())
    ab = float(w[parent & ~child].sum())
    ba = float(w[~parent & child].sum())
    bb = float(w[~parent & ~child].sum())
    if aa + ab == 0:
        raise EstimatorError("group A made no recruitments")
    if ba + bb == 0:
        raise EstimatorError("group B made no recruitments")
    return aa, ab, ba, bb


def sample_recruitment_matrix(s: RdsSample) -> RecruitmentMatrix:
    """Observed proportions of A/B recruits per recruiter group."""
    return RecruitmentMatrix.from_counts(*_recruitment_counts(s))


@dataclass(frozen=True)
class GroupDegreeSummary:
    n_a: int
    n_b: int
    harmonic_out_a: float
    harmonic_out_b: float
    mean_out_a: float
    mean_out_b: float
    harmonic_in_a: float | None = None
    harmonic_in_b: float | None = None
    mean_in_a: float | None = None
    mean_in_b: float | None = None

    @property
    def w_hat(self) -> float:
        """Sample activity ratio from harmonic mean outdegrees."""
        return self.harmonic_out_a / self.harmonic_out_b

    @property
    def m_hat(self) -> float:
        """Sample attractivity ratio from harmonic mean indegrees."""
        if self.harmonic_in_a is None or self.harmonic_in_b is None:
            raise EstimatorError("indegree unavailable in this sample")
        return self.harmonic_in_a / self.harmonic_in_b


def _harmonic(d: np.ndarray) -> float:
    return d.size / float(np.sum(1.0 / d))


def sample_group_counts_and_degrees(s: RdsSample) -> GroupDegreeSummary:
    """Group sizes with harmonic and arithmetic mean degrees per group."""
    a = s.is_a
    if not a.any() or a.all():
        raise EstimatorError("both groups must be present in the sample")
    dout = s.out_degree.astype(np.float64)
    if np.any(dout < 1):
        raise EstimatorError("zero outdegree in sample")
    kw = {}
    if s.in_degree is not None:
        din = s.in_degree.astype(np.float64)
        if np.any(din < 1):
            raise EstimatorError("zero indegree in sample")
        kw = dict(
            harmonic_in_a=_harmonic(din[a]),
            harmonic_in_b=_harmonic(din[~a]),
            mean_in_a=float(din[a].mean()),
            mean_in_b=float(din[~a].mean()),
        )
    return GroupDegreeSummary(
        n_a=int(a.sum()),
        n_b=int((~a).sum()),
        harmonic_out_a=_harmonic(dout[a]),
        harmonic_out_b=_harmonic(dout[~a]),
        mean_out_a=float(dout[a].mean()),
        mean_out_b=float(dout[~a].mean()),
        **kw,
    )


# -- CSV ------------------------------------------------------------------------


def write_sample_csv(s: RdsSample, stream: IO[str]) -> None:
    """Write ``s`` with columns respondent,recruiter,wave,out_degree,in_degree,trait.

    The in_degree column is omitted when the sample carries no indegrees.
    """
    cols = list(CSV_COLUMNS) if s.has_in_degree else [c for c in CSV_COLUMNS if c != "in_degree"]
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(cols)
    for row in s.records():
        writer.writerow(row if s.has_in_degree else row[:4] + row[5:])


def _int(value: str, column: str, lineno: int) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise SampleFormatError(f"line {lineno}: column {column} is not an integer: {value!r}") from None


def read_sample_csv(stream: IO[str]) -> RdsSample:
    """Parse a sample CSV without the linkage checks done by ``ingest_sample``."""
    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    required = [c for c in CSV_COLUMNS if c != "in_degree"]
    missing = [c for c in required if c not in header]
    if missing:
        raise SampleFormatError(f"schema mismatch: missing column(s) {', '.join(missing)}")
    has_in = "in_degree" in header
    cols: dict[str, list] = {c: [] for c in CSV_COLUMNS}
    for lineno, row in enumerate(reader, start=2):
        for c in ("respondent", "recruiter", "wave", "out_degree"):
            cols[c].append(_int(row[c], c, lineno))
        if has_in:
            cols["in_degree"].append(_int(row["in_degree"], "in_degree", lineno))
        t = (row["trait"] or "").strip()
        if t not in ("A", "B"):
            raise SampleFormatError(f"line {lineno}: trait must be A or B, got {t!r}")
        cols["trait"].append(t == "A")
    if not cols["respondent"]:
        raise SampleFormatError("sample file has no records")
    return RdsSample(
        respondent=np.asarray(cols["respondent"], dtype=np.int64),
        recruiter=np.asarray(cols["recruiter"], dtype=np.int64),
        wave=np.asarray(cols["wave"], dtype=np.int64),
        out_degree=np.asarray(cols["out_degree"], dtype=np.int64),
        in_degree=np.asarray(cols["in_degree"], dtype=np.int64) if has_in else None,
        is_a=np.asarray(cols["trait"], dtype=bool),
    )
