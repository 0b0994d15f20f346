"""Finite element pricing under the SABR model."""

from ._core import (
    DiscretizationSpec,
    Error,
    IoError,
    MassAtZeroResult,
    NumericalError,
    OriginBC,
    ParseError,
    PriceSurface,
    SabrParams,
    SingularIntegralError,
    ThetaConfig,
    ValidationError,
    VolEdgeBC,
    WellPosednessCert,
    black_scholes_price,
    cev_absorption_probability,
    cev_price,
    is_well_posed,
    mass_at_zero,
    mc_price,
    preset_ini,
    preset_names,
    price,
    price_barrier,
    run_cli,
    wellposedness_constants,
)

__all__ = [name for name in dir() if not name.startswith("_")]
