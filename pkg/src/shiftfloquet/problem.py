"""Problem files: TOML documents describing a neutral system on a shift system."""

from __future__ import annotations

import sys as _sys
from importlib import resources
from pathlib import Path

import numpy as np

if _sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ExpressionSyntaxError, InvariantViolation, NotInScale, OutOfDomain, ParseError
from .expr import compile_expression, parse_expression
from .floquet import MatrixFunction
from .periodic_solver import NeutralProblem
from .timescale import (GeometricLattice, IntegerLattice, PowerLattice, ShiftSystem,
                        SignedSquares, SquareRootLattice)

BUNDLED = ("dyadic_example", "alternating_example")

# kind -> (constructor, accepted parameters)
SCALES = {
    "integer": (IntegerLattice, ("h", "offset")),
    "geometric": (GeometricLattice, ("q",)),
    "power": (PowerLattice, ("base",)),
    "sqrt": (SquareRootLattice, ()),
    "signed_squares": (SignedSquares, ()),
}


def bundled_path(name: str):
    return resources.files("shiftfloquet") / "data" / f"{name}.toml"


def _read(path) -> tuple:
    p = Path(path)
    if not p.exists() and str(path) in BUNDLED:
        return bundled_path(str(path)).read_text(encoding="utf-8"), str(path)
    try:
        return p.read_text(encoding="utf-8"), str(p)
    except OSError as exc:
        raise ParseError(f"cannot read problem file {path!r}: {exc.strerror}") from None


def _require(doc, key, where="problem"):
    if key not in doc:
        raise ParseError(f"{where}: missing key {key!r}")
    return doc[key]


def _number(doc, key, where="problem", default=None):
    v = doc.get(key, default) if default is not None else _require(doc, key, where)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: {key!r} must be a number")
    return float(v)


def build_system(table: dict, P=None) -> ShiftSystem:
    kind = _require(table, "kind", "timescale")
    if kind not in SCALES:
        raise ParseError(f"timescale: unknown kind {kind!r}; known: {', '.join(sorted(SCALES))}")
    cls, names = SCALES[kind]
    extra = set(table) - set(names) - {"kind", "t0"}
    if extra:
        raise ParseError(f"timescale: unexpected parameter(s) {sorted(extra)} for kind {kind!r}")
    params = {k: _number(table, k, "timescale") for k in names if k in table}
    try:
        scale = cls(**params)
    except ValueError as exc:
        raise ParseError(f"timescale: {exc}") from None
    t0 = _number(table, "t0", "timescale")
    try:
        return ShiftSystem(scale, t0, P)
    except NotInScale:
        raise InvariantViolation("initial point on scale", f"t0={t0!r}") from None


def _compile(src, variables, where):
    if not isinstance(src, str):
        raise ParseError(f"{where}: expected an expression string")
    try:
        return compile_expression(parse_expression(src, variables))
    except ExpressionSyntaxError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def _vector_of_strings(doc, key, n):
    v = _require(doc, key)
    if not isinstance(v, list) or len(v) != n:
        raise ParseError(f"{key!r} must be a list of {n} expression strings")
    return v


def parse_problem(text: str, source="<string>") -> NeutralProblem:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{source}: {exc}") from None

    n = _require(doc, "n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError("'n' must be a positive integer")
    P = _number(doc, "P") if "P" in doc else None
    T = _number(doc, "T")
    s = _number(doc, "s")
    sys = build_system(_require(doc, "timescale"), P)

    sc = sys.scale
    for label, value in (("scale period", P), ("function period", T), ("delay", s)):
        if value is not None and not sc.contains(value):
            raise InvariantViolation(f"{label} on scale", f"{value!r} is not a scale point")
    if P is not None and sc.index(P) <= sys.k0:
        raise InvariantViolation("scale period exceeds t0")
    if P is not None and sc.index(T) < sc.index(P):
        raise InvariantViolation("function period below scale period")
    if sc.index(T) <= sys.k0:
        raise InvariantViolation("function period exceeds t0")

    us = [f"u{i}" for i in range(1, n + 1)]
    xs = [f"x{i}" for i in range(1, n + 1)]
    rows = _require(doc, "A")
    if not isinstance(rows, list) or len(rows) != n or any(
            not isinstance(r, list) or len(r) != n for r in rows):
        raise ParseError(f"'A' must be a {n}x{n} array of expression strings")
    a_fns = [[_compile(e, ("t",), f"A[{i}][{j}]") for j, e in enumerate(r)]
             for i, r in enumerate(rows)]
    q_fns = [_compile(e, ["t"] + us, f"Q[{i}]") for i, e in enumerate(_vector_of_strings(doc, "Q", n))]
    g_fns = [_compile(e, ["t"] + xs + us, f"G[{i}]")
             for i, e in enumerate(_vector_of_strings(doc, "G", n))]

    def A(t):
        env = {"t": t}
        return np.array([[f(env) for f in row] for row in a_fns])

    def Q(t, u):
        env = {"t": t, **dict(zip(us, u))}
        return np.array([f(env) for f in q_fns])

    def G(t, x, u):
        env = {"t": t, **dict(zip(xs, x)), **dict(zip(us, u))}
        return np.array([f(env) for f in g_fns])

    lipschitz = {}
    for k, v in doc.get("lipschitz", {}).items():
        if k not in ("E1", "E2", "E3"):
            raise ParseError(f"lipschitz: unknown key {k!r}")
        lipschitz[k] = _number(doc["lipschitz"], k, "lipschitz")
    solver = dict(doc.get("solver", {}))
    unknown = set(solver) - {"tol", "max_iter", "J"}
    if unknown:
        raise ParseError(f"solver: unknown key(s) {sorted(unknown)}")

    try:
        return NeutralProblem(sys, n, MatrixFunction(sys, n, A, T), Q, G, s, T,
                              lipschitz=lipschitz, solver=solver, name=doc.get("name", source))
    except OutOfDomain as exc:
        raise InvariantViolation("function period", str(exc)) from None


def load_problem(path, validate=True, require_nontrivial=False) -> NeutralProblem:
    """Load a problem file (or a bundled example by name) and run its invariant checks.

    A failed nontriviality test is recorded in ``problem.checks`` and only
    refused when ``require_nontrivial`` is set.
    """
    text, source = _read(path)
    p = parse_problem(text, source)
    if validate:
        p.check_invariants()
        p.checks["nontrivial"] = p.nontrivial()
        if require_nontrivial and not p.checks["nontrivial"]:
            raise InvariantViolation("nontrivial forcing")
    return p
