"""Shift-periodic solutions of neutral delay dynamic systems on isolated time scales."""

from .deltacalc import (GridFunction, delta_derivative, delta_integral, delta_shift_derivative,
                        is_delta_periodic_in_shifts, is_periodic_in_shifts, vnorm)
from .errors import (ArityError, Critical, EvalDomain, ExpressionSyntaxError, InvariantViolation,
                     LogBranchFailure, MaxIterExceeded, NoSuccessor, NotContractive, NotInScale,
                     NotRegressive, NumericalFailure, OutOfDomain, ParseError, ShiftFloquetError,
                     SingularM, UnknownIdentifier)
from .expr import compile_expression, evaluate, parse_expression, serialize
from .floquet import (FloquetData, MatrixFunction, exp_R, floquet_decompose, G_of, m_of,
                      noncritical_check, peano_baker, periodic_solution_exists_homogeneous,
                      solve_R, theta, transition_matrix)
from .periodic_solver import (ConditionReport, NeutralProblem, PeriodicVectorFunction,
                              check_conditions, compute_r, estimate_lipschitz, operator_B,
                              operator_C, operator_H, solve_picard, sup_norm_A, verify_solution)
from .problem import load_problem, parse_problem
from .timescale import (CustomMonotone, GeometricLattice, IntegerLattice, IsolatedTimeScale,
                        PowerLattice, ShiftSystem, SignedSquares, SquareRootLattice,
                        canonicalize, catalog_systems, iterate_shift, make_system, mu, rho,
                        shift_minus, shift_plus, sigma, verify_period, verify_shift_axioms)

__version__ = "0.1.0"
