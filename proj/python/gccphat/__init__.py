"""GCC-PHAT direction-of-arrival estimation."""

from ._gccphat import (
    ConfigError,
    DimensionError,
    Error,
    Estimator,
    FormatError,
    InputError,
    LowRankFactors,
    NumericalError,
    Params,
    SignalError,
    cross_spectra,
    factorize,
    fft_correlate,
    make_scenario,
    method_names,
    mm_correlate,
    normalization_gains,
    read_stereo_wav,
    render,
    run_accuracy_sweep,
    run_bench,
    speech_like_source,
    steering_matrix,
    svd_correlate,
    theta_grid,
    write_wav,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "Error",
    "Estimator",
    "FormatError",
    "InputError",
    "LowRankFactors",
    "NumericalError",
    "Params",
    "SignalError",
    "cross_spectra",
    "factorize",
    "fft_correlate",
    "make_scenario",
    "method_names",
    "mm_correlate",
    "normalization_gains",
    "read_stereo_wav",
    "render",
    "run_accuracy_sweep",
    "run_bench",
    "speech_like_source",
    "steering_matrix",
    "svd_correlate",
    "theta_grid",
    "write_wav",
]
