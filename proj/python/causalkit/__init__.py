"""DAG identification queries, structural simulation, and treatment-effect
estimation.  Thin façade over the compiled _core module; every estimator
returns a plain dict whose shape matches the command-line JSON output."""

from causalkit._core import (
    Dag,
    Dataset,
    Error,
    Scenario,
    __version__,
    ate_wald,
    backdoor_check,
    balance_check,
    cate_interaction,
    d_separated,
    debiased_lasso,
    double_selection,
    fit_propensity,
    ipw_ate,
    lasso,
    make_scenario,
    minimal_backdoor_sets,
    ortho_check,
    partial_out,
    relative_effect,
    risk_measures,
    select_lambda,
    single_selection,
    standardized_contrast,
    swig,
)

__all__ = [
    "Dag",
    "Dataset",
    "Error",
    "Scenario",
    "__version__",
    "ate_wald",
    "backdoor_check",
    "balance_check",
    "cate_interaction",
    "d_separated",
    "debiased_lasso",
    "double_selection",
    "fit_propensity",
    "ipw_ate",
    "lasso",
    "make_scenario",
    "minimal_backdoor_sets",
    "ortho_check",
    "partial_out",
    "relative_effect",
    "risk_measures",
    "select_lambda",
    "single_selection",
    "standardized_contrast",
    "swig",
]
