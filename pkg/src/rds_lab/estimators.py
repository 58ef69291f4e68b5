"""Population-proportion estimators computed from an RDS sample.

Every estimator returns an :class:`EstimatorResult` whose ``estimate`` is the
estimated proportion of group A. Samples are treated as multisets of draws:
a respondent recorded twice (with-replacement designs) is weighted twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import EstimatorError
from .graph import RecruitmentMatrix
from .sampling import (
    RdsSample,
    _recruitment_counts,
    sample_group_counts_and_degrees,
    sample_recruitment_matrix,
)

__all__ = [
    "EstimatorResult",
    "naive",
    "vh_out",
    "vh_in",
    "vh_m",
    "sh_out",
    "sh_in",
    "sh_m",
    "solve_phi",
    "eig_estimator",
    "adjusted_recruitment_matrix",
]


@dataclass(frozen=True)
class EstimatorResult:
    name: str
    estimate: float
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (0.0 <= self.estimate <= 1.0):
            raise EstimatorError(f"{self.name} produced {self.estimate} outside [0, 1]")

    def to_dict(self) -> dict:
        return {"name": self.name, "estimate": self.estimate, "params": dict(self.params)}


def _inverse_weighted(is_a: np.ndarray, weights: np.ndarray) -> float:
    total = float(weights.sum())
    return float(weights[is_a].sum()) / total


def naive(s: RdsSample) -> EstimatorResult:
    """Raw sample composition ``n_A / n``."""
    if len(s) == 0:
        raise EstimatorError("empty sample")
    return EstimatorResult("naive", s.n_a / len(s))


def _inverse_degrees(d: np.ndarray, what: str) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    if np.any(d < 1):
        raise EstimatorError(f"zero {what} encountered")
    return 1.0 / d


def vh_out(s: RdsSample) -> EstimatorResult:
    """Inverse-outdegree weighted proportion."""
    if len(s) == 0:
        raise EstimatorError("empty sample")
    return EstimatorResult("vh_out", _inverse_weighted(s.is_a, _inverse_degrees(s.out_degree, "outdegree")))


def vh_in(s: RdsSample) -> EstimatorResult:
    """Inverse-indegree weighted proportion (needs indegrees; simulation only)."""
    if len(s) == 0:
        raise EstimatorError("empty sample")
    w = _inverse_degrees(s.require_in_degree(), "indegree")
    return EstimatorResult("vh_in", _inverse_weighted(s.is_a, w))


def vh_m(s: RdsSample, m: float) -> EstimatorResult:
    """``(n_A/n_B) / (n_A/n_B + m)`` for a supplied attractivity ratio ``m``."""
    if not m > 0:
        raise EstimatorError("m must be positive")
    if s.n_b == 0:
        raise EstimatorError("degenerate sample: no B respondents")
    r = s.n_a / s.n_b
    return EstimatorResult("vh_m", r / (r + m), {"m": float(m)})


def sh_out(s: RdsSample) -> EstimatorResult:
    """Cross-recruitment balance estimator with harmonic mean outdegrees."""
    S = sample_recruitment_matrix(s)
    if S.s_ab == 0 or S.s_ba == 0:
        raise EstimatorError("zero cross-group recruitment observed")
    stats = sample_group_counts_and_degrees(s)
    num = S.s_ba * stats.harmonic_out_b
    return EstimatorResult("sh_out", num / (S.s_ab * stats.harmonic_out_a + num))


def solve_phi(S: RecruitmentMatrix, m: float, w: float) -> float:
    """Positive root for the group-size ratio ``N_A / N_B``.

    Dividing the two indegree-sum balance identities gives
    ``m w S_AB phi^2 + (m S_BB - w S_AA) phi - S_BA = 0``.
    """
    if not (m > 0 and w > 0):
        raise EstimatorError("m and w must be positive")
    if S.s_ab <= 0:
        raise EstimatorError("S_AB = 0: group-size ratio undefined")
    den = 2.0 * m * w * S.s_ab
    b = (w * S.s_aa - m * S.s_bb) / den
    return b + math.sqrt(S.s_ba / (m * w * S.s_ab) + b * b)


WMean = Literal["harmonic", "arithmetic"]
SSource = Literal["observed", "adjusted"]


def _w_hat(s: RdsSample, w_mean: WMean) -> float:
    stats = sample_group_counts_and_degrees(s)
    if w_mean == "harmonic":
        return stats.w_hat
    if w_mean == "arithmetic":
        return stats.mean_out_a / stats.mean_out_b
    raise ValueError(f"unknown w_mean {w_mean!r}")


def sh_m(
    s: RdsSample,
    m: float,
    w_mean: WMean = "harmonic",
    recruitment: SSource = "observed",
) -> EstimatorResult:
    """``phi / (1 + phi)`` from the sample recruitment matrix, sample activity ratio and ``m``.

    ``recruitment="adjusted"`` swaps in the recruit-outdegree weighted matrix
    of :func:`adjusted_recruitment_matrix`; it is kept for comparison and is
    not the default because it does worse in simulation.
    """
    if recruitment == "observed":
        S = sample_recruitment_matrix(s)
    elif recruitment == "adjusted":
        S = adjusted_recruitment_matrix(s)
    else:
        raise ValueError(f"unknown recruitment {recruitment!r}")
    if S.s_ab == 0 or S.s_ba == 0:
        raise EstimatorError("zero cross-group recruitment observed")
    w = _w_hat(s, w_mean)
    phi = solve_phi(S, m, w)
    params = {"m": float(m), "w": w}
    if w_mean != "harmonic":
        params["w_mean"] = w_mean
    if recruitment != "observed":
        params["recruitment"] = recruitment
    return EstimatorResult("sh_m", phi / (1.0 + phi), params)


def sh_in(s: RdsSample, w_mean: WMean = "harmonic") -> EstimatorResult:
    """:func:`sh_m` with ``m`` set to the sample harmonic indegree ratio."""
    m_hat = sample_group_counts_and_degrees(s).m_hat
    res = sh_m(s, m_hat, w_mean=w_mean)
    return EstimatorResult("sh_in", res.estimate, res.params)


def eig_estimator(s: RdsSample, pi) -> EstimatorResult:
    """Inverse stationary-probability weighted proportion.

    ``pi`` is a per-node probability vector (or a ``StationaryDistribution``).
    Its unbiasedness argument assumes with-replacement draws; it is computed
    for without-replacement samples all the same.
    """
    if len(s) == 0:
        raise EstimatorError("empty sample")
    probs = np.asarray(getattr(pi, "probabilities", pi), dtype=np.float64)
    p = probs[s.respondent]
    if np.any(p <= 0):
        raise EstimatorError("non-positive stationary probability for a respondent")
    return EstimatorResult("eig", _inverse_weighted(s.is_a, 1.0 / p))


def adjusted_recruitment_matrix(s: RdsSample) -> RecruitmentMatrix:
    """Recruitment proportions weighted by each recruit's outdegree."""
    weights = np.asarray(s.out_degree, dtype=np.float64)
    return RecruitmentMatrix.from_counts(*_recruitment_counts(s, weights))
