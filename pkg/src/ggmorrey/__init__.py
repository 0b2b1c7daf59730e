"""Grand grand Morrey norms, maximal and singular integral operators on grids,
and numerical checks of the inequalities relating them."""

from .constants import (
    ConstantConfig,
    admissible_sigma,
    cz_constant,
    dominance_constant,
    maximal_constant,
    reduction_constant,
)
from .dsl import FamilySpec, evaluate, family_to_ast, parse, unparse
from .grid import Ball, Domain, Grading, Grid, GridFunction, ball_measure, integrate, intersected_measure, make_grid
from .norms import (
    ParameterError,
    SpaceParams,
    SweepGrids,
    delta_exponent,
    grand_grand_norm,
    lebesgue_norm,
    make_sweeps,
    morrey_norm,
    shifted_morrey_norms,
    phi,
    s_max,
)
from .operators import Kernel, ModulusW, maximal, singular

__version__ = "0.1.0"
