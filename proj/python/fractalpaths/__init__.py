"""Geodesics, Bazanski geodesic deviation, spinning/charged force laws and
stochastic path ensembles on curved and fluctuating backgrounds.

The heavy lifting lives in the compiled extension; this package re-exports
its surface.
"""

from ._core import (  # noqa: F401
    AmplitudeFloorError,
    DomainError,
    Metric,
    SingularMetricError,
    __version__,
    circular_orbit_velocity,
    integrate_deviation,
    integrate_geodesic,
    integrate_lorentz,
    nelson_stationary_ks,
    run_scenario,
    scenario_names,
    schrodinger_residual_plane_wave,
    stochastic_geodesic_ensemble,
    two_geodesic_oracle,
    validate_config,
)

__all__ = [
    "AmplitudeFloorError",
    "DomainError",
    "Metric",
    "SingularMetricError",
    "__version__",
    "circular_orbit_velocity",
    "integrate_deviation",
    "integrate_geodesic",
    "integrate_lorentz",
    "nelson_stationary_ks",
    "run_scenario",
    "scenario_names",
    "schrodinger_residual_plane_wave",
    "stochastic_geodesic_ensemble",
    "two_geodesic_oracle",
    "validate_config",
]
