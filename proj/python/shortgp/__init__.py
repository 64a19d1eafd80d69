"""GP regression for short time series with a Nyquist length-scale bound."""

from ._core import (
    ConfigError,
    DataError,
    DomainError,
    Error,
    FitFailed,
    FitResult,
    InvalidScenario,
    KernelFamily,
    LowerRule,
    NoiseRule,
    Scenario,
    SyntheticConfig,
    TimeSeries,
    UpperRule,
    __version__,
    diagnose,
    energy_fraction,
    export_csv,
    expression_scenarios,
    fit,
    generate_sinc_series,
    ingest_csv,
    length_scale_bound,
    log_marginal_likelihood,
    predict,
    run_batch,
    run_synthetic_experiment,
    sampling_interval,
    synthetic_scenarios,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
