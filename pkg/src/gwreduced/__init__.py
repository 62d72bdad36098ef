"""Exact and Monte Carlo tools for critical Galton-Watson reduced processes."""

from .errors import (
    AcceptanceBudgetExhausted,
    ConditioningImpossibleError,
    DegenerateVarianceError,
    GWReducedError,
    JetOverflowError,
    NodeBudgetExceededError,
    NonCriticalError,
    SeriesBudgetError,
)
from .harness import (
    ComparisonReport,
    ExperimentConfig,
    PhiSpec,
    bootstrap_tv_se,
    config_hash,
    empirical_pmf,
    format_report_summary,
    gf_supnorm,
    parse_config_file,
    parse_phi,
    run_experiment,
    table_gf,
    tv_distance,
    write_report_csv,
    write_report_json,
)
from .limits import (
    LimitQuery,
    Regime,
    band_pmf_values,
    classical_reduced_gf,
    gamma_reg_lower,
    limit_band_pmf,
    limit_gf_linear_band,
    limit_gf_small_phi,
    limit_mrca_cdf_band,
    limit_mrca_cdf_small_phi,
    limit_reduced_small_pmf,
    small_phi_pmf_values,
    yaglom_cdf,
)
from .offspring import (
    Family,
    OffspringLaw,
    law_from_name,
    make_builtin,
    make_custom,
    pgf_derivatives,
    pgf_value,
    sample_offspring,
)
from .reduced import (
    ReducedLawTable,
    bounded_survival_prob,
    conditional_reduced_pmf,
    conditioned_positive_pmf,
    joint_reduced_bounded,
    mrca_distance_cdf,
    reduced_pmf,
    write_table_csv,
    write_table_json,
)
from .series import (
    DerivativeJet,
    TruncatedSeries,
    compose_step,
    default_truncation,
    derivative_jet,
    enumerate_partitions,
    extinction_prob,
    iter_derivative_jets,
    iter_extinction_probs,
    pmf_Zn,
)
from .simulate import (
    GenealogyRecord,
    SimBatch,
    mrca_distance,
    reduced_counts,
    run_conditioned_batch,
    simulate_tree,
    write_batch_csv,
    write_batch_json,
)

__all__ = [
    "AcceptanceBudgetExhausted",
    "ConditioningImpossibleError",
    "DegenerateVarianceError",
    "GWReducedError",
    "JetOverflowError",
    "NodeBudgetExceededError",
    "NonCriticalError",
    "SeriesBudgetError",
    "Family",
    "OffspringLaw",
    "law_from_name",
    "make_builtin",
    "make_custom",
    "pgf_derivatives",
    "pgf_value",
    "sample_offspring",
    "DerivativeJet",
    "TruncatedSeries",
    "compose_step",
    "default_truncation",
    "derivative_jet",
    "enumerate_partitions",
    "extinction_prob",
    "iter_derivative_jets",
    "iter_extinction_probs",
    "pmf_Zn",
    "ReducedLawTable",
    "bounded_survival_prob",
    "conditional_reduced_pmf",
    "conditioned_positive_pmf",
    "joint_reduced_bounded",
    "mrca_distance_cdf",
    "reduced_pmf",
    "write_table_csv",
    "write_table_json",
    "LimitQuery",
    "Regime",
    "band_pmf_values",
    "classical_reduced_gf",
    "gamma_reg_lower",
    "limit_band_pmf",
    "limit_gf_linear_band",
    "limit_gf_small_phi",
    "limit_mrca_cdf_band",
    "limit_mrca_cdf_small_phi",
    "limit_reduced_small_pmf",
    "small_phi_pmf_values",
    "yaglom_cdf",
    "GenealogyRecord",
    "SimBatch",
    "mrca_distance",
    "reduced_counts",
    "run_conditioned_batch",
    "simulate_tree",
    "write_batch_csv",
    "write_batch_json",
    "ComparisonReport",
    "ExperimentConfig",
    "PhiSpec",
    "bootstrap_tv_se",
    "config_hash",
    "empirical_pmf",
    "format_report_summary",
    "gf_supnorm",
    "parse_config_file",
    "parse_phi",
    "run_experiment",
    "table_gf",
    "tv_distance",
    "write_report_csv",
    "write_report_json",
]
