"""Pseudo-spectral solver and vector-field diagnostics for 2D
incompressible Hookean viscoelasticity in potential form."""

from .dynamics import (BlowUpError, StepperConfig, choose_dt, evolve,
                       rhs_potential, rhs_primitive, step, step_primitive)
from .families import (DerivedFamily, Jet, MultiIndex, apply_field, base_jet,
                       commutator_residuals, derived_family, nonlinearity_f,
                       time_derivative)
from .grid import Grid
from .state import (InitialDataParams, PotentialState, PrimitiveState,
                    constraint_norms, constraint_residual, deformation_of,
                    make_initial_data, potentials_of, primitive_of,
                    read_snapshot, velocity_of, write_snapshot)

__version__ = "0.1.0"
