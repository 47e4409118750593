"""Traffic flow through a signalised junction.

    import sigflow
    s = sigflow.Scenario.load("scenarios/reference.yaml")
    run = sigflow.run(s)
    run.mass_balance()["relative_residual"]
"""

from ._core import (
    REPORT_SCHEMA_VERSION,
    BreakdownError,
    Run,
    Scenario,
    ScenarioError,
    SigflowError,
    compare_with_oracle,
    emit_plot,
    oracle_horizon,
    report_json,
    run,
    validate,
)

__all__ = [
    "REPORT_SCHEMA_VERSION",
    "BreakdownError",
    "Run",
    "Scenario",
    "ScenarioError",
    "SigflowError",
    "compare_with_oracle",
    "emit_plot",
    "oracle_horizon",
    "report_json",
    "run",
    "validate",
]
