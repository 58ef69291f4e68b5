"""Bootstrap intervals, coverage studies, m-sensitivity sweeps and sample ingestion."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import IO, Callable, Sequence, Union

import numpy as np

from . import estimators as est
from .errors import EstimatorError, SampleFormatError
from .graph import DirectedGraph
from .sampling import (
    SEED,
    RdsSample,
    SamplerConfig,
    read_sample_csv,
    run_rds,
    sample_group_counts_and_degrees,
    sample_recruitment_matrix,
)

__all__ = [
    "BootstrapConfig",
    "BootstrapResult",
    "CoverageResult",
    "SensitivityPoint",
    "SensitivityCurve",
    "trait_chain_replicates",
    "bootstrap_ci",
    "coverage_study",
    "sensitivity_sweep",
    "ingest_sample",
    "vh_m_derivative",
    "MAX_SKIPPED_FRACTION",
]

MAX_SKIPPED_FRACTION = 0.01

EstimatorSpec = Union[str, Callable[[RdsSample], "est.EstimatorResult | float"]]
_VECTORISED = ("naive", "vh_out", "vh_m")


@dataclass(frozen=True)
class BootstrapConfig:
    """Trait-chain bootstrap settings.

    ``estimator`` is ``"vh_out"``, ``"vh_m"`` (requires ``m``), ``"naive"`` or
    a callable taking a replicate :class:`RdsSample`.
    """

    replicates: int = 1000
    levels: tuple[float, ...] = (0.90, 0.95)
    estimator: EstimatorSpec = "vh_m"
    m: float | None = None
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.replicates < 2:
            raise ValueError("replicates must be at least 2")
        if not self.levels or any(not 0.0 < lv < 1.0 for lv in self.levels):
            raise ValueError("confidence levels must lie in (0, 1)")
        if isinstance(self.estimator, str):
            if self.estimator not in _VECTORISED:
                raise ValueError(f"unknown bootstrap estimator {self.estimator!r}")
            if self.estimator == "vh_m" and not (self.m is not None and self.m > 0):
                raise ValueError("vh_m bootstrap needs a positive m")
        elif not callable(self.estimator):
            raise TypeError("estimator must be a name or a callable")


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    point: float
    intervals: dict[float, tuple[float, float]]
    estimates: np.ndarray
    skipped: int

    def covers(self, value: float, level: float) -> bool:
        lo, hi = self.intervals[level]
        return lo <= value <= hi


def trait_chain_replicates(
    s: RdsSample, replicates: int, rng: np.random.Generator
) -> np.ndarray:
    """Record indices of ``replicates`` bootstrap samples, shape ``(replicates, len(s))``.

    The first trait comes from a uniformly chosen record. Later traits follow
    the two-state chain with the sample recruitment matrix as transition rows.
    Each position then draws a record uniformly, with replacement, among the
    records carrying that trait.
    """
    S = sample_recruitment_matrix(s)
    n = len(s)
    a_rec = np.flatnonzero(s.is_a)
    b_rec = np.flatnonzero(~s.is_a)
    u = rng.random((replicates, n))
    traits = np.empty((replicates, n), dtype=bool)
    traits[:, 0] = s.is_a[(u[:, 0] * n).astype(np.int64)]
    for t in range(1, n):
        stay_a = np.where(traits[:, t - 1], S.s_aa, S.s_ba)
        traits[:, t] = u[:, t] < stay_a
    pick = rng.random((replicates, n))
    idx = np.empty((replicates, n), dtype=np.int64)
    if a_rec.size:
        idx[traits] = a_rec[(pick[traits] * a_rec.size).astype(np.int64)]
    if b_rec.size:
        idx[~traits] = b_rec[(pick[~traits] * b_rec.size).astype(np.int64)]
    return idx


def _replicate_sample(s: RdsSample, rows: np.ndarray) -> RdsSample:
    """Materialise one replicate as a single chain (each record recruits the next)."""
    resp = s.respondent[rows]
    recruiter = np.empty_like(resp)
    recruiter[0] = SEED
    recruiter[1:] = resp[:-1]
    return RdsSample(
        respondent=resp,
        recruiter=recruiter,
        wave=np.arange(rows.size, dtype=np.int64),
        out_degree=s.out_degree[rows],
        in_degree=None if s.in_degree is None else s.in_degree[rows],
        is_a=s.is_a[rows],
    )


def _point(spec: EstimatorSpec, s: RdsSample, m: float | None) -> float:
    if spec == "naive":
        return est.naive(s).estimate
    if spec == "vh_out":
        return est.vh_out(s).estimate
    if spec == "vh_m":
        return est.vh_m(s, m).estimate
    out = spec(s)
    return float(getattr(out, "estimate", out))


def _vectorised(spec: str, s: RdsSample, idx: np.ndarray, m: float | None) -> np.ndarray:
    a = s.is_a[idx]
    if spec == "naive":
        return a.mean(axis=1)
    if spec == "vh_out":
        w = 1.0 / s.out_degree[idx]
        return (w * a).sum(axis=1) / w.sum(axis=1)
    n_a = a.sum(axis=1)
    n_b = a.shape[1] - n_a
    with np.errstate(divide="ignore", invalid="ignore"):
        r = n_a / n_b
        return np.where(n_b > 0, r / (r + m), np.nan)


def _replicate_estimates(s: RdsSample, cfg: BootstrapConfig, idx: np.ndarray) -> np.ndarray:
    if isinstance(cfg.estimator, str):
        return _vectorised(cfg.estimator, s, idx, cfg.m)
    vals = np.empty(idx.shape[0])
    for b, rows in enumerate(idx):
        try:
            vals[b] = _point(cfg.estimator, _replicate_sample(s, rows), cfg.m)
        except EstimatorError:
            vals[b] = np.nan
    return vals


def _intervals(values: np.ndarray, levels: Sequence[float]) -> dict[float, tuple[float, float]]:
    out = {}
    for lv in levels:
        lo, hi = np.quantile(values, [(1.0 - lv) / 2.0, (1.0 + lv) / 2.0])
        out[lv] = (float(lo), float(hi))
    return out


def _check_skipped(values: np.ndarray) -> tuple[np.ndarray, int]:
    ok = np.isfinite(values)
    skipped = int(values.size - ok.sum())
    if skipped > MAX_SKIPPED_FRACTION * values.size:
        raise EstimatorError(f"{skipped} of {values.size} bootstrap replicates failed")
    return values[ok], skipped


def bootstrap_ci(
    s: RdsSample, cfg: BootstrapConfig, rng: np.random.Generator | None = None
) -> BootstrapResult:
    """Percentile intervals from trait-chain bootstrap replicates of ``s``."""
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    point = _point(cfg.estimator, s, cfg.m)
    idx = trait_chain_replicates(s, cfg.replicates, rng)
    values, skipped = _check_skipped(_replicate_estimates(s, cfg, idx))
    return BootstrapResult(point, _intervals(values, cfg.levels), values, skipped)


@dataclass(frozen=True)
class CoverageResult:
    coverage: dict[float, float]
    outer_reps: int
    failures: int
    true_p: float


def coverage_study(
    g: DirectedGraph,
    sampler_cfg: SamplerConfig,
    bootstrap_cfg: BootstrapConfig,
    outer_reps: int,
    true_p: float | None = None,
) -> CoverageResult:
    """Share of outer RDS samples whose bootstrap interval contains ``true_p``.

    Outer replication ``k`` samples with substream ``(sampler seed, k, 0)`` and
    bootstraps with ``(bootstrap seed, k, 1)``. Replications whose estimator
    fails are counted and left out of the denominator.
    """
    if outer_reps < 1:
        raise ValueError("outer_reps must be positive")
    if true_p is None:
        true_p = float(g.is_a.mean())
    hits = {lv: 0 for lv in bootstrap_cfg.levels}
    failures = 0
    for k in range(outer_reps):
        s_rng = np.random.default_rng(np.random.SeedSequence(sampler_cfg.rng_seed, spawn_key=(k, 0)))
        b_rng = np.random.default_rng(np.random.SeedSequence(bootstrap_cfg.rng_seed, spawn_key=(k, 1)))
        s = run_rds(g, sampler_cfg, s_rng)
        try:
            res = bootstrap_ci(s, bootstrap_cfg, b_rng)
        except EstimatorError:
            failures += 1
            continue
        for lv in hits:
            hits[lv] += res.covers(true_p, lv)
    done = outer_reps - failures
    if done == 0:
        raise EstimatorError("every outer replication failed")
    return CoverageResult({lv: h / done for lv, h in hits.items()}, outer_reps, failures, true_p)


# -- sensitivity --------------------------------------------------------------------------


@dataclass(frozen=True)
class SensitivityPoint:
    m: float
    estimate: float
    lo: float | None
    hi: float | None
    derivative: float
    sh_estimate: float | None = None


@dataclass(frozen=True)
class SensitivityCurve:
    """VH_m over a grid of m with the analytic slope at every grid point.

    ``derivative_at`` also holds the slope at the sample activity ratio
    ``w_hat`` when it could be computed.
    """

    points: tuple[SensitivityPoint, ...]
    derivative_at: dict[float, float]
    ratio: float
    w_hat: float | None = None
    level: float | None = None
    columns: tuple[str, ...] = field(default=("m", "estimate", "lo", "hi", "derivative"))

    def rows(self):
        for p in self.points:
            yield p.m, p.estimate, p.lo, p.hi, p.derivative

    def to_csv(self, stream: IO[str]) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows():
            w.writerow(["" if v is None else repr(float(v)) for v in row])

    def to_json(self) -> str:
        return json.dumps(
            {
                "ratio": self.ratio,
                "w_hat": self.w_hat,
                "level": self.level,
                "derivative_at": {repr(k): v for k, v in self.derivative_at.items()},
                "points": [
                    {"m": p.m, "estimate": p.estimate, "lo": p.lo, "hi": p.hi,
                     "derivative": p.derivative, "sh_estimate": p.sh_estimate}
                    for p in self.points
                ],
            },
            indent=2,
        )


def vh_m_derivative(ratio: float, m: float) -> float:
    """Slope of ``r / (r + m)`` in ``m``."""
    return -ratio / (ratio + m) ** 2


def sensitivity_sweep(
    s: RdsSample,
    m_min: float,
    m_max: float,
    steps: int = 15,
    bootstrap_cfg: BootstrapConfig | None = None,
    level: float | None = None,
    include_sh: bool = False,
) -> SensitivityCurve:
    """Evaluate VH_m on ``steps`` evenly spaced values of m, endpoints included.

    With ``bootstrap_cfg`` every grid point gets a percentile interval at
    ``level`` (default: the config's first level). The replicate samples are
    drawn once and reused for all m.
    """
    if not 0 < m_min < m_max:
        raise ValueError("need 0 < m_min < m_max")
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if s.n_b == 0:
        raise EstimatorError("degenerate sample: no B respondents")
    grid = np.linspace(m_min, m_max, steps)
    grid[0], grid[-1] = m_min, m_max
    ratio = s.n_a / s.n_b

    reps_ratio = None
    if bootstrap_cfg is not None:
        level = bootstrap_cfg.levels[0] if level is None else level
        idx = trait_chain_replicates(s, bootstrap_cfg.replicates, np.random.default_rng(bootstrap_cfg.rng_seed))
        a = s.is_a[idx].sum(axis=1)
        b = idx.shape[1] - a
        rr = np.where(b > 0, a / np.maximum(b, 1), np.nan)
        reps_ratio, _ = _check_skipped(rr)

    points = []
    deriv = {}
    for m in grid.tolist():
        e = est.vh_m(s, m).estimate
        lo = hi = None
        if reps_ratio is not None:
            lo, hi = _intervals(reps_ratio / (reps_ratio + m), [level])[level]
        sh = est.sh_m(s, m).estimate if include_sh else None
        d = vh_m_derivative(ratio, m)
        deriv[m] = d
        points.append(SensitivityPoint(m, e, lo, hi, d, sh))

    w_hat = None
    try:
        w_hat = sample_group_counts_and_degrees(s).w_hat
        deriv[w_hat] = vh_m_derivative(ratio, w_hat)
    except EstimatorError:
        pass
    return SensitivityCurve(tuple(points), deriv, ratio, w_hat, level)


# -- ingestion ----------------------------------------------------------------------------


def ingest_sample(stream: IO[str] | str) -> RdsSample:
    """Read and validate a sample CSV in the simulator's export schema.

    Checks beyond the schema: degrees are nonnegative, seeds sit in wave 0,
    every recruiter appears as a respondent on an earlier record, and each
    recruit's wave is one more than a wave recorded for its recruiter.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    s = read_sample_csv(stream)
    waves_of: dict[int, set[int]] = {}
    din = s.in_degree.tolist() if s.in_degree is not None else None
    for k, (r, p, w, do) in enumerate(
        zip(s.respondent.tolist(), s.recruiter.tolist(), s.wave.tolist(), s.out_degree.tolist())
    ):
        where = f"record {k + 1} (line {k + 2}, respondent {r})"
        if do < 0 or (din is not None and din[k] < 0):
            raise SampleFormatError(f"{where}: negative degree")
        if w < 0:
            raise SampleFormatError(f"{where}: negative wave")
        if p == SEED:
            if w != 0:
                raise SampleFormatError(f"{where}: seed must be in wave 0, got {w}")
        else:
            if p not in waves_of:
                raise SampleFormatError(f"{where}: recruiter {p} does not appear on an earlier record")
            if w - 1 not in waves_of[p]:
                raise SampleFormatError(
                    f"{where}: wave {w} is not one more than recruiter {p}'s wave"
                )
        waves_of.setdefault(r, set()).add(w)
    return s
