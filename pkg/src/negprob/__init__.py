"""Signed-measure (negative probability) contextuality toolkit."""
from .constraints import ConstraintSystem, build, rank_report
from .errors import DomainError, InputError, NegProbError, ScenarioError, SignalingError, SolverError
from .l1solver import L1Solution, enumerate_vertices, minimize_l1
from .measure import (
    ContextAlgebra,
    OutcomeSpace,
    SignedMeasure,
    Variable,
    context_entropy,
    evaluate,
    marginalize,
    restrict_is_kolmogorovian,
    total_variation,
)
from .scenario import EmpiricalModel, builtin, check_no_signal, load

__version__ = "0.1.0"
