"""Semi-implicit flux-split relaxation schemes for the Euler and ideal MHD equations."""

from .errors import ConfigError, NumericalError, OutputError, SolverError, StateError, VacuumError
from .grid import BoundaryCondition, Field, Grid, build_grid, fill_ghosts
from .integrators import LSDIRK2, ButcherPair, StepContext, step
from .models import Eos, EulerModel, MhdModel

__version__ = "0.1.0"
