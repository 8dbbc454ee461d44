"""Posted-price network slicing simulator (Python bindings)."""

from ._dpos import (
    DposError,
    Instance,
    MarketSetup,
    PricingSchedule,
    default_config,
    ga_heuristic,
    generate_instance,
    lp_upper_bound,
    myopic_slicing,
    offline_exact,
    random_slicing,
    run_experiment,
    run_session,
    scpa_adapted,
    social_welfare,
    summarize,
    tenant_decide,
    validate_instance,
    validate_transcript,
)

__all__ = [
    "DposError",
    "Instance",
    "MarketSetup",
    "PricingSchedule",
    "default_config",
    "ga_heuristic",
    "generate_instance",
    "lp_upper_bound",
    "myopic_slicing",
    "offline_exact",
    "random_slicing",
    "run_experiment",
    "run_session",
    "scpa_adapted",
    "social_welfare",
    "summarize",
    "tenant_decide",
    "validate_instance",
    "validate_transcript",
]
