"""Monte-Carlo experiment runner: graphs, replicated RDS samples, estimator battery, aggregates.

Config files are JSON::

    {
      "gen_targets": [{"family": "Net1", "node_count": 10000, "mean_degree": 10,
                       "directedness_target": 1.0, "attractivity_target": 1.4,
                       "rng_seed": 1, "id": "net1-a"}],
      "sampler": {"seed_count": 10, "coupons_per_respondent": 3,
                  "target_sample_size": 500, "with_replacement": false},
      "estimators": [{"name": "naive"}, {"name": "vh_m", "m": "true"},
                     {"name": "ss_out", "N": "true", "M": 500, "r": 3}],
      "replications": 1000,
      "master_seed": 7,
      "output_path": "results.csv",
      "regenerate_per_replication": false
    }

``"true"`` as a value of ``m`` or ``N`` stands for the generated graph's
attractivity ratio or node count. Recognised estimator names are listed in
``ESTIMATOR_NAMES``; ``sh_m`` also accepts ``w_mean`` and ``recruitment``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import IO, Any, Callable

import numpy as np

from . import estimators as est
from .errors import EstimatorError, GenerationError
from .graph import DirectedGraph, graph_metrics, group_degree_ratios
from .netgen import GenTarget, generate
from .sampling import RdsSample, SamplerConfig, run_rds
from .stationary import mean_field_pi, stationary_distribution
from .successive import ss_estimator

logger = logging.getLogger(__name__)

__all__ = [
    "ESTIMATOR_NAMES",
    "EstimatorSpec",
    "ExperimentConfig",
    "SummaryRow",
    "SummaryTable",
    "run_experiment",
    "replicate_estimates",
    "emit_results",
    "read_results",
    "FAILURE_FLAG_FRACTION",
]

FAILURE_FLAG_FRACTION = 0.05
ESTIMATOR_NAMES = (
    "naive", "vh_out", "vh_in", "vh_m", "sh_out", "sh_in", "sh_m", "eig", "eig_mf", "ss_out", "ss_in",
)
_ALLOWED_PARAMS = {
    "vh_m": {"m"},
    "sh_m": {"m", "w_mean", "recruitment"},
    "sh_in": {"w_mean"},
    "ss_out": {"N", "M", "r"},
    "ss_in": {"N", "M", "r"},
}
_REQUIRED_PARAMS = {"vh_m": {"m"}, "sh_m": {"m"}, "ss_out": {"N"}, "ss_in": {"N"}}


@dataclass(frozen=True)
class EstimatorSpec:
    name: str
    params: dict = field(default_factory=dict)
    label: str | None = None

    def __post_init__(self) -> None:
        if self.name not in ESTIMATOR_NAMES:
            raise ValueError(f"unknown estimator {self.name!r}")
        extra = set(self.params) - _ALLOWED_PARAMS.get(self.name, set())
        if extra:
            raise ValueError(f"estimator {self.name} does not take {sorted(extra)}")
        missing = _REQUIRED_PARAMS.get(self.name, set()) - set(self.params)
        if missing:
            raise ValueError(f"estimator {self.name} needs {sorted(missing)}")
        for key in ("m", "N"):
            v = self.params.get(key)
            if v is not None and v != "true" and not (isinstance(v, (int, float)) and v > 0):
                raise ValueError(f"estimator {self.name}: {key} must be positive or \"true\"")

    @property
    def display(self) -> str:
        if self.label:
            return self.label
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.name}[{inner}]"

    @classmethod
    def from_dict(cls, d: dict) -> "EstimatorSpec":
        d = dict(d)
        name = d.pop("name")
        label = d.pop("label", None)
        return cls(name, d, label)

    def to_dict(self) -> dict:
        out = {"name": self.name, **self.params}
        if self.label:
            out["label"] = self.label
        return out


@dataclass
class _GraphContext:
    graph: DirectedGraph
    true_p: float
    m_star: float
    pi: np.ndarray | None = None
    pi_mf: np.ndarray | None = None


def _resolve(spec: EstimatorSpec, ctx: _GraphContext) -> tuple[Callable[[RdsSample, np.random.Generator], float], dict]:
    """Bind graph-dependent parameters; returns the estimator and the resolved params."""
    p = dict(spec.params)
    if p.get("m") == "true":
        p["m"] = ctx.m_star
    if p.get("N") == "true":
        p["N"] = ctx.graph.n_nodes
    name = spec.name
    if name == "eig":
        if ctx.pi is None:
            ctx.pi = stationary_distribution(ctx.graph).probabilities
        pi = ctx.pi
        return (lambda s, rng: est.eig_estimator(s, pi).estimate), p
    if name == "eig_mf":
        if ctx.pi_mf is None:
            ctx.pi_mf = mean_field_pi(ctx.graph).node_values()
        pi_mf = ctx.pi_mf
        return (lambda s, rng: est.eig_estimator(s, pi_mf).estimate), p
    if name in ("ss_out", "ss_in"):
        src = name[3:]
        kw = {"M": p.get("M", 500), "r": p.get("r", 3)}
        return (lambda s, rng: ss_estimator(s, p["N"], src, rng=rng, **kw).estimate), p
    if name == "vh_m":
        return (lambda s, rng: est.vh_m(s, p["m"]).estimate), p
    if name == "sh_m":
        kw = {k: p[k] for k in ("w_mean", "recruitment") if k in p}
        return (lambda s, rng: est.sh_m(s, p["m"], **kw).estimate), p
    if name == "sh_in":
        kw = {k: p[k] for k in ("w_mean",) if k in p}
        return (lambda s, rng: est.sh_in(s, **kw).estimate), p
    fn = getattr(est, name)
    return (lambda s, rng: fn(s).estimate), p


@dataclass(frozen=True)
class ExperimentConfig:
    gen_targets: tuple[GenTarget, ...]
    sampler: SamplerConfig
    estimator_battery: tuple[EstimatorSpec, ...]
    replications: int
    master_seed: int
    output_path: str | None = None
    target_ids: tuple[str, ...] | None = None
    regenerate_per_replication: bool = False

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not self.gen_targets:
            raise ValueError("at least one gen target is required")
        if not self.estimator_battery:
            raise ValueError("at least one estimator is required")
        if self.target_ids is not None and len(self.target_ids) != len(self.gen_targets):
            raise ValueError("target_ids must match gen_targets")

    def ids(self) -> tuple[str, ...]:
        if self.target_ids is not None:
            return self.target_ids
        return tuple(f"{t.family}-{i}" for i, t in enumerate(self.gen_targets))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(GenTarget)}
        targets, ids = [], []
        for i, t in enumerate(d["gen_targets"]):
            t = dict(t)
            ids.append(str(t.pop("id", f"{t.get('family')}-{i}")))
            unknown = set(t) - known
            if unknown:
                raise ValueError(f"gen target {i}: unknown field(s) {sorted(unknown)}")
            targets.append(GenTarget(**t))
        return cls(
            gen_targets=tuple(targets),
            sampler=SamplerConfig(**d.get("sampler", {})),
            estimator_battery=tuple(EstimatorSpec.from_dict(e) for e in d["estimators"]),
            replications=int(d["replications"]),
            master_seed=int(d["master_seed"]),
            output_path=d.get("output_path"),
            target_ids=tuple(ids),
            regenerate_per_replication=bool(d.get("regenerate_per_replication", False)),
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {
            "gen_targets": [{"id": i, **t.to_dict()} for i, t in zip(self.ids(), self.gen_targets)],
            "sampler": asdict(self.sampler),
            "estimators": [e.to_dict() for e in self.estimator_battery],
            "replications": self.replications,
            "master_seed": self.master_seed,
            "output_path": self.output_path,
            "regenerate_per_replication": self.regenerate_per_replication,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SummaryRow:
    target_id: str
    estimator: str
    params: str
    true_p: float
    bias: float
    sd: float
    rmse: float
    failure_count: int
    replications: int
    flagged: bool


_FLOAT_COLS = ("true_p", "bias", "sd", "rmse")
_INT_COLS = ("failure_count", "replications")
CSV_COLUMNS = tuple(f.name for f in fields(SummaryRow)) + ("config_hash", "master_seed")


def _sig6(x: float) -> float:
    return float(f"{x:.6g}")


@dataclass(frozen=True)
class SummaryTable:
    """Aggregates per (gen target, estimator); ``graph_metrics`` is keyed by target id."""

    rows: tuple[SummaryRow, ...]
    config_hash: str
    master_seed: int
    graph_metrics: dict = field(default_factory=dict, compare=False)

    def row(self, target_id: str, estimator: str) -> SummaryRow:
        for r in self.rows:
            if r.target_id == target_id and r.estimator == estimator:
                return r
        raise KeyError((target_id, estimator))

    def rounded(self) -> "SummaryTable":
        """Copy with floats at the 6 significant digits used in result files."""
        rows = tuple(
            SummaryRow(**{**asdict(r), **{c: _sig6(getattr(r, c)) for c in _FLOAT_COLS}}) for r in self.rows
        )
        return SummaryTable(rows, self.config_hash, self.master_seed, self.graph_metrics)


def _aggregate(values: list[float], truths: list[float]) -> tuple[float, float, float]:
    """Bias, population SD of the errors and RMSE; ``rmse**2 == bias**2 + sd**2``."""
    err = np.asarray(values) - np.asarray(truths)
    bias = float(err.mean())
    sd = float(err.std())
    return bias, sd, math.sqrt(float(np.mean(err * err)))


def _context(g: DirectedGraph) -> _GraphContext:
    return _GraphContext(g, float(g.is_a.mean()), group_degree_ratios(g)[0])


def _threads() -> int:
    raw = os.environ.get("RDS_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"RDS_LAB_THREADS must be an integer, got {raw!r}") from None


def _replication(cfg: ExperimentConfig, t: int, k: int, shared: _GraphContext | None):
    """One replication of target ``t``: (true p, per-estimator estimate or None)."""
    if shared is None:
        ss = np.random.SeedSequence(cfg.master_seed, spawn_key=(t, k, 2))
        seed = int(ss.generate_state(1, np.uint64)[0])
        target = GenTarget(**{**asdict(cfg.gen_targets[t]), "rng_seed": seed})
        ctx = _context(generate(target))
    else:
        ctx = shared
    rng = np.random.default_rng(np.random.SeedSequence(cfg.master_seed, spawn_key=(t, k, 0)))
    s = run_rds(ctx.graph, cfg.sampler, rng)
    out: list[float | None] = []
    for j, spec in enumerate(cfg.estimator_battery):
        fn, _ = _resolve(spec, ctx)
        e_rng = np.random.default_rng(np.random.SeedSequence(cfg.master_seed, spawn_key=(t, k, 1, j)))
        try:
            out.append(fn(s, e_rng))
        except EstimatorError as exc:
            logger.debug("target %d rep %d %s failed: %s", t, k, spec.display, exc)
            out.append(None)
    return ctx.true_p, out


def _shared_context(cfg: ExperimentConfig, t: int) -> _GraphContext:
    tid = cfg.ids()[t]
    try:
        shared = _context(generate(cfg.gen_targets[t]))
    except GenerationError as exc:
        raise GenerationError(f"target {tid}: {exc}") from exc
    for spec in cfg.estimator_battery:
        _resolve(spec, shared)  # precompute stationary vectors before fan-out
    return shared


def _run_target(cfg: ExperimentConfig, t: int, shared: _GraphContext | None):
    def job(k: int):
        return _replication(cfg, t, k, shared)

    threads = _threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(job, range(cfg.replications)))
    return [job(k) for k in range(cfg.replications)]


def replicate_estimates(cfg: ExperimentConfig, target_index: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Per-replication estimates for one target, before aggregation.

    Returns ``(estimates, true_p)`` where ``estimates[k, j]`` is estimator
    ``j`` on replication ``k`` (NaN on failure). Values are identical to the
    ones :func:`run_experiment` aggregates.
    """
    shared = None if cfg.regenerate_per_replication else _shared_context(cfg, target_index)
    results = _run_target(cfg, target_index, shared)
    est_ = np.array([[np.nan if v is None else v for v in r[1]] for r in results], dtype=np.float64)
    return est_, np.array([r[0] for r in results])


def run_experiment(cfg: ExperimentConfig) -> SummaryTable:
    """Run every target's replications and aggregate each estimator's errors.

    Replication ``k`` of target ``t`` samples with substream ``(master, t, k, 0)``
    and gives estimator ``j`` substream ``(master, t, k, 1, j)``, so its output
    does not depend on which other replications ran. One graph per target is
    shared by all replications unless ``regenerate_per_replication`` is set.
    Parallelism is capped by ``RDS_LAB_THREADS`` (default 1).
    """
    rows: list[SummaryRow] = []
    metrics: dict[str, dict] = {}
    for t, tid in enumerate(cfg.ids()):
        shared = None
        if not cfg.regenerate_per_replication:
            shared = _shared_context(cfg, t)
            metrics[tid] = graph_metrics(shared.graph).to_dict()
        results = _run_target(cfg, t, shared)

        for j, spec in enumerate(cfg.estimator_battery):
            vals = [(r[1][j], r[0]) for r in results if r[1][j] is not None]
            failures = cfg.replications - len(vals)
            if shared is not None:
                _, params = _resolve(spec, shared)
            else:
                params = dict(spec.params)
            if vals:
                bias, sd, rmse = _aggregate([v for v, _ in vals], [p for _, p in vals])
                true_p = float(np.mean([p for _, p in vals]))
            else:
                bias = sd = rmse = float("nan")
                true_p = float(np.mean([r[0] for r in results]))
            flagged = failures > FAILURE_FLAG_FRACTION * cfg.replications
            if flagged:
                logger.warning("target %s estimator %s: %d failed replications", tid, spec.display, failures)
            rows.append(
                SummaryRow(
                    target_id=tid,
                    estimator=spec.display,
                    params=json.dumps(
                        {k: _sig6(v) if isinstance(v, float) else v for k, v in params.items()}, sort_keys=True
                    ),
                    true_p=true_p,
                    bias=bias,
                    sd=sd,
                    rmse=rmse,
                    failure_count=failures,
                    replications=cfg.replications,
                    flagged=flagged,
                )
            )
    return SummaryTable(tuple(rows), cfg.config_hash(), cfg.master_seed, metrics)


# -- result files -------------------------------------------------------------------------


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _write_csv(t: SummaryTable, stream: IO[str]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in t.rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS[:-2]] + [t.config_hash, t.master_seed])


def _json_text(t: SummaryTable) -> str:
    doc = {
        "config_hash": t.config_hash,
        "master_seed": t.master_seed,
        "rows": [
            {c: (_sig6(getattr(r, c)) if c in _FLOAT_COLS else getattr(r, c)) for c in CSV_COLUMNS[:-2]}
            for r in t.rows
        ],
        "graph_metrics": {
            k: {m: (_sig6(v) if isinstance(v, float) else v) for m, v in d.items()}
            for k, d in t.graph_metrics.items()
        },
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def emit_results(t: SummaryTable, dest: str | Path | IO[str], format: str = "csv") -> None:
    """Write ``t`` as CSV or JSON with floats at 6 significant digits."""
    if not t.rows:
        raise ValueError("refusing to write an empty summary table")
    if format not in ("csv", "json"):
        raise ValueError(f"unknown format {format!r}")
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            emit_results(t, fh, format)
        return
    if format == "csv":
        _write_csv(t, dest)
    else:
        dest.write(_json_text(t))


def _row_from(d: dict) -> SummaryRow:
    kw = {}
    for f in fields(SummaryRow):
        v = d[f.name]
        if f.name in _FLOAT_COLS:
            v = float(v)
        elif f.name in _INT_COLS:
            v = int(v)
        elif f.name == "flagged":
            v = v if isinstance(v, bool) else v == "true"
        kw[f.name] = v
    return SummaryRow(**kw)


def read_results(src: str | Path | IO[str], format: str | None = None) -> SummaryTable:
    """Parse a result file written by :func:`emit_results`."""
    if isinstance(src, (str, Path)):
        format = format or ("json" if str(src).endswith(".json") else "csv")
        with open(src, encoding="utf-8", newline="") as fh:
            return read_results(fh, format)
    text = src.read()
    if (format or "csv") == "json":
        doc = json.loads(text)
        rows = tuple(_row_from(r) for r in doc["rows"])
        return SummaryTable(rows, doc["config_hash"], int(doc["master_seed"]), doc.get("graph_metrics", {}))
    reader = list(csv.DictReader(io.StringIO(text)))
    if not reader:
        raise ValueError("result file has no rows")
    rows = tuple(_row_from(r) for r in reader)
    return SummaryTable(rows, reader[0]["config_hash"], int(reader[0]["master_seed"]))
