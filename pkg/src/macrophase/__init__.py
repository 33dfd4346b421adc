"""
Relative phases of macroscopically distinguishable measurement branches.

A system coupled to a pointer by ``exp(-i L O p)`` keeps its relative phases
only through the overlap factor ``Z`` of the displaced pointer states. This
package propagates the pointer, evaluates the phase operators, the
uncertainty and triangle bounds on the relative phase, and runs the
Stern-Gerlach and measurement-undoing scenarios.
"""
__version__ = "0.1.0"

from .errors import (ConfigurationError, DegenerateVectorError, GeometryError, MacrophaseError,
                     NumericalInstabilityError, UndefinedPhaseError)
from .pointer import Grid, PointerWave, gaussian_packet, inner, make_grid, translate
from .composite import BranchSpec, CompositeState, PhasePair, couple, overlap_factor
from .dynamics import ApparatusHamiltonian, PropagatorConfig, propagate, propagate_back
from .bounds import BoundReport, OverlapZ, overlap_Z, relative_phase
from .config import ScenarioConfig, config_from_dict, parse_config
from .scenarios import (PeresReport, TimeSeries, definite_state_check, run_general, run_peres,
                        run_stern_gerlach)
from .falsifier import (FalsifierReport, bound_sign_census, falsify_triangle, falsify_uncertainty,
                        sample_random_composite)
