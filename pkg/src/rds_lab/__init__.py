"""Respondent-driven sampling on partially directed networks: generators, sampler, estimators."""

from .errors import (
    EstimatorError,
    GenerationError,
    GraphFormatError,
    InfeasibleTargetError,
    RdsLabError,
    SampleFormatError,
    UndefinedMetricError,
)
from .estimators import (
    EstimatorResult,
    adjusted_recruitment_matrix,
    eig_estimator,
    naive,
    sh_in,
    sh_m,
    sh_out,
    solve_phi,
    vh_in,
    vh_m,
    vh_out,
)
from .experiment import (
    EstimatorSpec,
    ExperimentConfig,
    SummaryTable,
    emit_results,
    read_results,
    replicate_estimates,
    run_experiment,
)
from .graph import (
    DirectedGraph,
    GraphMetrics,
    RecruitmentMatrix,
    directedness,
    graph_metrics,
    group_degree_ratios,
    homophily,
    in_out_correlation,
    indegree_assortativity,
    is_strongly_connected,
    load_graph,
    true_recruitment_matrix,
)
from .inference import (
    BootstrapConfig,
    SensitivityCurve,
    bootstrap_ci,
    coverage_study,
    ingest_sample,
    sensitivity_sweep,
)
from .netgen import GenTarget, generate
from .sampling import RdsSample, SamplerConfig, run_rds, sample_group_counts_and_degrees, sample_recruitment_matrix
from .stationary import DegreeClassTable, StationaryDistribution, mean_field_pi, stationary_distribution
from .successive import ss_estimator

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
