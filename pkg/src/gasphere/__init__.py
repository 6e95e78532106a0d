"""gasphere: a laboratory for spherically symmetric self-gravitating gas flow.

The package splits into five layers:

- polytrope: hydrostatic profile ODEs (classic index-n profiles, forced
  power/isothermal variants, the closed-form gamma = 6/5 sphere)
- similarity: separable collapse/expansion solutions built from a profile
  and a scale factor a(t), plus a finite-difference PDE residual check
- hydro: a well-balanced finite-volume solver for the damped compressible
  Euler equations with self-consistent radial gravity
- diagnostics: conserved quantities, virial series, stationary identities
  and the classification of runs against blowup/expansion criteria
- cli: the `gasphere` command wrapping all of the above
"""

__version__ = "0.1.0"

from .errors import ConfigError, NumericalError
from .geometry import DimensionConstants, dimension_constants, unit_ball_volume
from .polytrope import (PolytropeProfile, density_ratio, first_zero,
                        solve_generalized_profile, solve_lane_emden,
                        stationary_density_6_5)
from .similarity import (FamilySolution, ScaleTrajectory, blowup_time,
                         build_family, collapse_time_quadrature, family_state,
                         integrate_scale, pde_residual)
from .hydro import (EvolveResult, GravityField, RadialState, cfl_limit, evolve,
                    make_grid, poisson_radial, step)
from .diagnostics import (BlowupVerdict, EnergyBreakdown, StationaryReport,
                          VirialSample, blowup_time_bound, classify_blowup,
                          critical_gamma, energy, expansion_bound,
                          ring_potential_energy, stationary_identities,
                          total_mass, virial_sample, virial_series)

__all__ = [
    "__version__",
    "ConfigError", "NumericalError",
    "DimensionConstants", "dimension_constants", "unit_ball_volume",
    "PolytropeProfile", "density_ratio", "first_zero",
    "solve_generalized_profile", "solve_lane_emden", "stationary_density_6_5",
    "FamilySolution", "ScaleTrajectory", "blowup_time", "build_family",
    "collapse_time_quadrature", "family_state", "integrate_scale",
    "pde_residual",
    "EvolveResult", "GravityField", "RadialState", "cfl_limit", "evolve",
    "make_grid", "poisson_radial", "step",
    "BlowupVerdict", "EnergyBreakdown", "StationaryReport", "VirialSample",
    "blowup_time_bound", "classify_blowup", "critical_gamma", "energy",
    "expansion_bound", "ring_potential_energy", "stationary_identities",
    "total_mass", "virial_sample", "virial_series",
]
