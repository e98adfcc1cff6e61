"""freecalc: a calculus for noncommutative functions on matrix tuples.

Evaluate expressions in noncommuting variables on tuples of square complex
matrices, differentiate them exactly through block dilations, classify
points of sublevel domains by exhaustion level, put tuples into shift form,
and invert or implicitly parametrize maps with a damped Newton solver.
"""

from .errors import (
    ArityError,
    ConditioningError,
    DegenerateDerivative,
    DemoInsufficient,
    DilationError,
    FreecalcError,
    InvalidInput,
    ParseError,
    RangeError,
    SingularError,
    StallError,
)
from .linalg import (
    Embedding,
    MatrixTuple,
    basis_tuple,
    conjugate,
    direct_sum,
    op_norm,
    random_invertible,
    random_tuple,
    random_unitary,
    tuple_norm,
    upper_block2,
    zero_tuple,
)
from .expr import (
    Const,
    Inv,
    NcExpr,
    NcMap,
    Neg,
    Prod,
    Sum,
    UNBOUNDED,
    Var,
    eval_map,
    evaluate,
    parse,
    parse_map,
    poly_degree,
    pretty,
)
from .domain import (
    DomainSpec,
    bdelta,
    contains,
    delta_eval,
    exhaustion_audit,
    invertibles,
    level_index,
    polydisk,
    rowball,
    sample_point,
)
from .diff import (
    DerivativeReport,
    derivative,
    derivative_fd,
    directsum_derivative_check,
    hessian,
    linearize,
    partial_linearize,
)
from .shift import (
    GradedFlag,
    ShiftFormResult,
    alpha,
    build_flag,
    build_shift_form,
    sizeshift_check,
    sizeshift_refined_check,
    truncated_sot_demo,
)
from .solve import (
    NewtonTrace,
    ProbeReport,
    implicit_solve,
    injectivity_probe,
    newton_invert,
)
from .suites import SuiteConfig, SuiteReport, run_suite

__version__ = "0.1.0"
