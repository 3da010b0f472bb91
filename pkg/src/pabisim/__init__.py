"""Exact bisimulation checks for probabilistic automata and their belief-state transformer."""

from .algebra import BOTTOM, SetValue, axioms_report, blackhole_combine, minkowski
from .bisim import Partition, bisimilarity, convex_bisimilarity, strong_bisimilarity
from .errors import (ArityError, CapacityError, ChoiceError, CoefficientError, InputError,
                     PabisimError, ParseError, ShapeError, SumError)
from .lifting import Polytope, conv_member, conv_reduce, convex_steps, lift_related
from .model import PA, Dist, convex_combine, load_pa, parse_dist, parse_pa, serialize_pa
from .ratlp import LinSystem, feasible
from .transformer import can_step, mix_law_check, step, successors
from .upto import (Certificate, TechniqueConfig, check_certificate, closure_member,
                   refute_bounded, search_witness)

__version__ = "0.1.0"
