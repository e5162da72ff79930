"""Pseudo-spectral 3D incompressible MHD in Elsasser variables on the periodic cube,
with smallness-condition evaluation and a priori estimate monitoring."""

__version__ = "0.1.0"

from .conditions import ConditionParams, ConditionReport, evaluate_all, evaluate_thm1, evaluate_thm2
from .dynamics import IntegratorConfig, RunResult, simulate, step
from .fields import (
    ElsasserState,
    FluidParams,
    InitialDataSpec,
    PrimitiveState,
    from_elsasser,
    generate_initial,
    initial_elsasser,
    make_params,
    rescale_to_v,
    to_elsasser,
)
from .norms import MonitorSeries, hs_norm, lp_norm, record_monitors
from .spectral import Grid, PhysicalVectorField, SpectralVectorField, get_grid, to_physical, to_spectral

__all__ = [
    "ConditionParams",
    "ConditionReport",
    "ElsasserState",
    "FluidParams",
    "Grid",
    "InitialDataSpec",
    "IntegratorConfig",
    "MonitorSeries",
    "PhysicalVectorField",
    "PrimitiveState",
    "RunResult",
    "SpectralVectorField",
    "evaluate_all",
    "evaluate_thm1",
    "evaluate_thm2",
    "from_elsasser",
    "generate_initial",
    "get_grid",
    "hs_norm",
    "initial_elsasser",
    "lp_norm",
    "make_params",
    "record_monitors",
    "rescale_to_v",
    "simulate",
    "step",
    "to_elsasser",
    "to_physical",
    "to_spectral",
]
