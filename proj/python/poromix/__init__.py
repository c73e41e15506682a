"""Mixed finite elements for dynamic Biot poroelasticity."""

from ._core import (
    ManufacturedCase,
    PoromixError,
    RunConfig,
    assemble,
    config_from_text,
    config_keys,
    eoc,
    load_config,
    run_study,
    scenario_names,
    structured_mesh,
)

__all__ = [
    "ManufacturedCase",
    "PoromixError",
    "RunConfig",
    "assemble",
    "config_from_text",
    "config_keys",
    "eoc",
    "load_config",
    "run_study",
    "scenario_names",
    "structured_mesh",
]
