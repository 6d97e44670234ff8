"""Dataset composition toolkit: diversity-optimized sampling plans, detection
metrics and scaling-law fits."""

from ._core import (
    DossParams,
    MetricReport,
    PowerLawFit,
    __version__,
    acc,
    aggregate_trials,
    build_scaling_config,
    cde,
    domain_distribution,
    domain_sizes,
    doss_select,
    doss_weight,
    eer,
    fit_power_law,
    macro_report,
    parse_manifest,
    run_cli,
    sample_stream,
    scaling_grid,
)

__all__ = [
    "DossParams",
    "MetricReport",
    "PowerLawFit",
    "__version__",
    "acc",
    "aggregate_trials",
    "build_scaling_config",
    "cde",
    "domain_distribution",
    "domain_sizes",
    "doss_select",
    "doss_weight",
    "eer",
    "fit_power_law",
    "macro_report",
    "parse_manifest",
    "run_cli",
    "sample_stream",
    "scaling_grid",
]
