"""Conservative solutions of the nonlinear variational wave equation
u_tt - c(u) (c(u) u_x)_x = 0 by integration of an equivalent smooth
semilinear system on a characteristic lattice, with reconstruction of
the physical fields, energy measures, and characteristic curves, and
continuation of the solution past gradient blow-up with conserved
total energy.
"""

__version__ = "0.1.0"

from .errors import NumericalError, ValidationError
from .wavespeed import WaveSpeedModel, make_model, log_derivative_ratio
from .initial_data import (CauchyData, BoundaryCurve, sample_profile,
                           profile_support, riemann_invariants,
                           total_energy, build_boundary_curve)
from .goursat import CharGrid, ResidualReport, seed_lattice, integrate, \
    consistency_residuals
from .reconstruct import (LevelCurve, Atom, PhysicalSnapshot, level_set,
                          energies, measure_elements, snapshot,
                          adapted_coordinate)
from .characteristics import (CharacteristicCurve, FieldLattice,
                              trace_from_grid, fields_from_grid,
                              picard_characteristic, interaction_potential,
                              rs_product_integral, InteractionBoundReport,
                              check_interaction_bound)
from .oracles import dalembert, FDFields, fd_solve
from .config import RunConfig, parse_config_text, load_config
from .runner import run, convergence_study, save_grid, load_grid

__all__ = [
    "__version__", "NumericalError", "ValidationError",
    "WaveSpeedModel", "make_model", "log_derivative_ratio",
    "CauchyData", "BoundaryCurve", "sample_profile", "profile_support",
    "riemann_invariants", "total_energy", "build_boundary_curve",
    "CharGrid", "ResidualReport", "seed_lattice", "integrate",
    "consistency_residuals",
    "LevelCurve", "Atom", "PhysicalSnapshot", "level_set", "energies",
    "measure_elements", "snapshot", "adapted_coordinate",
    "CharacteristicCurve", "FieldLattice", "trace_from_grid",
    "fields_from_grid", "picard_characteristic", "interaction_potential",
    "rs_product_integral", "InteractionBoundReport",
    "check_interaction_bound",
    "dalembert", "FDFields", "fd_solve",
    "RunConfig", "parse_config_text", "load_config",
    "run", "convergence_study", "save_grid", "load_grid",
]
