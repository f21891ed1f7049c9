"""Structure-preserving time stepping for port-Hamiltonian systems via discrete gradient pairs."""

__version__ = "0.1.0"

from .core import (PHSystem, StructureError, StructureReport, TimeGrid, Trajectory,
                   check_ph_structure, continuous_power_residual, read_trajectory_csv,
                   write_trajectory_csv, zero_input)
from .discrete_gradients import (DiscreteGradient, DiscreteGradientPair, MassMatrixError,
                                 midpoint_discrete_gradient, midpoint_discrete_gradient_pair,
                                 midpoint_dg, verify_pair_axioms)
from .integrators import (BarCoefficients, ExplicitODE, IntegrationError, SchemeConfig,
                          StepError, classical_dg_step, dgp_step, implicit_midpoint_step,
                          integrate, midpoint_bars, radau5_step, transform_to_explicit)
from .models import MODELS, ModelSpec, get_model
from .newton import NewtonError, NewtonResult, NewtonSettings, newton_solve
