"""Calibration of inexact computer models under input-dependent noise.

Thin re-export of the compiled core. The heavy lifting (likelihoods,
optimization, inference) lives in the C++ extension `_hetcal`.
"""

try:
    from ._hetcal import *  # packaged builds place the extension here
    from ._hetcal import __version__
except ImportError:  # in-tree builds: extension sits on sys.path
    from _hetcal import *
    from _hetcal import __version__

__all__ = [
    "__version__",
    "Design",
    "Model",
    "Params",
    "Fit",
    "Scenario",
    "design",
    "read_design_csv",
    "builtin_model",
    "builtin_scenario",
    "load_scenario",
    "fit",
    "fit_from_json",
    "fit_wls",
    "l2_truth_oracle",
    "wls_limit_oracle",
    "ConfigError",
    "DataError",
    "NumericError",
    "EvalError",
    "IoError",
]
