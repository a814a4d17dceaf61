"""Isolated time scales and shift operators.

Points of an isolated time scale are addressed by an integer index, so the
jump operators and every shift on the catalog scales are exact integer
arithmetic.  Floating point values only appear at the boundary (user input
and output).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import NoSuccessor, NotInScale, OutOfDomain

RTOL = 1e-12


def _close(a, b, rtol=RTOL):
    return a == b or abs(a - b) <= rtol * max(abs(a), abs(b))


class IsolatedTimeScale:
    """A closed point set t_k, k in [lo, hi], with a strictly increasing index map."""

    kind = "abstract"
    lo: Optional[int] = None
    hi: Optional[int] = None

    def point(self, k: int) -> float:
        raise NotImplementedError

    def _guess_index(self, t: float) -> int:
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def has_index(self, k: int) -> bool:
        return (self.lo is None or k >= self.lo) and (self.hi is None or k <= self.hi)

    def index(self, t) -> int:
        t = float(t)
        if not math.isfinite(t):
            raise NotInScale(f"{t!r} is not a point of {self}")
        try:
            k = int(self._guess_index(t))
        except (ValueError, OverflowError, ZeroDivisionError):
            raise NotInScale(f"{t!r} is not a point of {self}") from None
        if not self.has_index(k) or not _close(self.point(k), t):
            raise NotInScale(f"{t!r} is not a point of {self}")
        return k

    def contains(self, t) -> bool:
        try:
            self.index(t)
        except NotInScale:
            return False
        return True

    def sigma(self, t) -> float:
        k = self.index(t)
        if not self.has_index(k + 1):
            raise NoSuccessor(f"{t!r} is the maximum of {self}")
        return self.point(k + 1)

    def rho(self, t) -> float:
        k = self.index(t)
        if not self.has_index(k - 1):
            raise NoSuccessor(f"{t!r} is the minimum of {self}")
        return self.point(k - 1)

    def mu(self, t) -> float:
        return self.sigma(t) - float(t)

    def mu_index(self, k: int) -> float:
        if not self.has_index(k + 1):
            raise NoSuccessor(f"index {k} is the maximum of {self}")
        return self.point(k + 1) - self.point(k)

    def points(self, k_from: int, k_to: int) -> list:
        """Points with index in [k_from, k_to)."""
        return [self.point(k) for k in range(k_from, k_to)]

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class IntegerLattice(IsolatedTimeScale):
    kind = "integer"

    def __init__(self, h=1.0, offset=0.0):
        if not h > 0:
            raise ValueError("lattice step must be positive")
        self.h = float(h)
        self.offset = float(offset)

    def point(self, k):
        return self.offset + k * self.h

    def _guess_index(self, t):
        return round((t - self.offset) / self.h)

    def params(self):
        return {"h": self.h, "offset": self.offset}


class GeometricLattice(IsolatedTimeScale):
    """q^Z; the closure point 0 is not isolated and is not represented."""

    kind = "geometric"

    def __init__(self, q):
        if not q > 1:
            raise ValueError("ratio q must exceed 1")
        self.q = float(q)
        self._logq = math.log(self.q)

    def point(self, k):
        return self.q ** k

    def _guess_index(self, t):
        if t <= 0:
            raise ValueError
        return round(math.log(t) / self._logq)

    def params(self):
        return {"q": self.q}


class PowerLattice(GeometricLattice):
    """{b^n : n in Z} together with the limit point 0."""

    kind = "power"

    def __init__(self, base=2.0):
        super().__init__(base)

    def params(self):
        return {"base": self.q}


class SquareRootLattice(IsolatedTimeScale):
    """N^{1/2} = {sqrt(n) : n >= 0}."""

    kind = "sqrt"
    lo = 0

    def point(self, k):
        return math.sqrt(k)

    def _guess_index(self, t):
        if t < 0:
            raise ValueError
        return round(t * t)


class SignedSquares(IsolatedTimeScale):
    """{+-n^2 : n in Z}, indexed so that t_k = sign(k) k^2."""

    kind = "signed_squares"

    def point(self, k):
        return float(k * abs(k))

    def _guess_index(self, t):
        m = round(math.sqrt(abs(t)))
        return m if t >= 0 else -m


class CustomMonotone(IsolatedTimeScale):
    """Caller-supplied bijection between an index range and the points."""

    kind = "custom"

    def __init__(self, point_fn: Callable[[int], float], index_fn: Callable[[float], int],
                 lo=None, hi=None, name="custom"):
        self._point_fn = point_fn
        self._index_fn = index_fn
        self.lo = lo
        self.hi = hi
        self.name = name

    def point(self, k):
        return float(self._point_fn(k))

    def _guess_index(self, t):
        return self._index_fn(t)

    def params(self):
        return {"name": self.name, "lo": self.lo, "hi": self.hi}


class ShiftSystem:
    """Forward/backward shifts delta_+- on a scale with initial point t0.

    Without explicit ``delta_plus``/``delta_minus`` the shifts are
    index-additive, k(delta_+-(s, t)) = k(t) +- (k(s) - k(t0)); this
    reproduces t +- s on Z, s^{+-1} t on q^Z, sqrt(t^2 +- s^2) on N^{1/2}
    and the signed-square shifts.  Custom closed forms take floats and are
    mapped back onto the scale with relative tolerance 1e-12.
    """

    def __init__(self, scale: IsolatedTimeScale, t0, P=None,
                 delta_plus: Optional[Callable] = None,
                 delta_minus: Optional[Callable] = None):
        if (delta_plus is None) != (delta_minus is None):
            raise ValueError("supply both delta_plus and delta_minus or neither")
        self.scale = scale
        self.k0 = scale.index(t0)
        self.t0 = scale.point(self.k0)
        self.P = None if P is None else float(P)
        self._dp = delta_plus
        self._dm = delta_minus

    @property
    def index_additive(self) -> bool:
        return self._dp is None

    def __repr__(self):
        return f"ShiftSystem({self.scale!r}, t0={self.t0!r}, P={self.P!r})"

    # index level -------------------------------------------------------

    def index(self, t) -> int:
        return self.scale.index(t)

    def point(self, k: int) -> float:
        return self.scale.point(k)

    def _shift_index(self, ks, kt, sign):
        sc = self.scale
        if ks < self.k0 or not sc.has_index(ks) or not sc.has_index(kt):
            raise OutOfDomain(f"({ks}, {kt}) outside the shift domain")
        if self._dp is None:
            k = kt + sign * (ks - self.k0)
            if not sc.has_index(k):
                raise OutOfDomain(f"shift of index {kt} by {ks} leaves the scale")
            return k
        fn = self._dp if sign > 0 else self._dm
        try:
            v = fn(sc.point(ks), sc.point(kt))
            return sc.index(v)
        except (NotInScale, ValueError, ZeroDivisionError, OverflowError, TypeError):
            raise OutOfDomain(f"shift of {sc.point(kt)!r} by {sc.point(ks)!r} leaves the scale") from None

    def plus_index(self, ks: int, kt: int) -> int:
        return self._shift_index(ks, kt, +1)

    def minus_index(self, ks: int, kt: int) -> int:
        return self._shift_index(ks, kt, -1)

    def shift_index(self, ks, kt, sign):
        return self._shift_index(ks, kt, 1 if sign > 0 else -1)

    def _try(self, ks, kt, sign):
        try:
            return self._shift_index(ks, kt, sign)
        except OutOfDomain:
            return None

    # value level -------------------------------------------------------

    def _indices(self, s, t):
        try:
            return self.scale.index(s), self.scale.index(t)
        except NotInScale as exc:
            raise OutOfDomain(str(exc)) from None

    def shift_plus(self, s, t) -> float:
        ks, kt = self._indices(s, t)
        return self.point(self.plus_index(ks, kt))

    def shift_minus(self, s, t) -> float:
        ks, kt = self._indices(s, t)
        return self.point(self.minus_index(ks, kt))

    def in_domain_plus(self, s, t) -> bool:
        try:
            self.shift_plus(s, t)
        except OutOfDomain:
            return False
        return True

    def in_domain_minus(self, s, t) -> bool:
        try:
            self.shift_minus(s, t)
        except OutOfDomain:
            return False
        return True

    # periods -----------------------------------------------------------

    def period_span(self, T=None) -> int:
        """Index distance covered by one shift with T (or P); 4 when neither is known."""
        T = self.P if T is None else T
        if T is None:
            return 4
        kT = self.scale.index(T)
        return max(self.plus_index(kT, self.k0) - self.k0, 1)

    def window_indices(self, T) -> range:
        """Indices of the fundamental window [t0, delta_+^T(t0))."""
        kT = self.scale.index(T)
        if kT <= self.k0:
            raise OutOfDomain(f"period {T!r} must exceed t0={self.t0!r}")
        return range(self.k0, self.plus_index(kT, self.k0))

    def window(self, T) -> list:
        return [self.point(k) for k in self.window_indices(T)]

    def iterate_index(self, kT: int, kt: int, k: int) -> int:
        sign = 1 if k >= 0 else -1
        for _ in range(abs(k)):
            kt = self._shift_index(kT, kt, sign)
        return kt

    def canonicalize_index(self, kT: int, kt: int):
        """Return (window index, winding) with kt = delta_+^(winding)(T, window index)."""
        end = self.plus_index(kT, self.k0)
        if self.index_additive:
            d = end - self.k0
            w, r = divmod(kt - self.k0, d)
            if w and not self.scale.has_index(self.k0 + r):
                raise OutOfDomain("reduction leaves the scale")
            return self.k0 + r, w
        w = 0
        guard = 1 << 20
        while kt >= end:
            kt = self.minus_index(kT, kt)
            w += 1
            if w > guard:
                raise OutOfDomain("canonicalization does not terminate")
        while kt < self.k0:
            kt = self.plus_index(kT, kt)
            w -= 1
            if -w > guard:
                raise OutOfDomain("canonicalization does not terminate")
        return kt, w


def sigma(ts: IsolatedTimeScale, t) -> float:
    return ts.sigma(t)


def rho(ts: IsolatedTimeScale, t) -> float:
    return ts.rho(t)


def mu(ts: IsolatedTimeScale, t) -> float:
    return ts.mu(t)


def shift_plus(sys: ShiftSystem, s, t) -> float:
    return sys.shift_plus(s, t)


def shift_minus(sys: ShiftSystem, s, t) -> float:
    return sys.shift_minus(s, t)


def iterate_shift(sys: ShiftSystem, T, t, k: int) -> float:
    """delta_+^(k)(T, t) for k >= 0, delta_-^(|k|)(T, t) for k < 0."""
    kT, kt = sys._indices(T, t)
    return sys.point(sys.iterate_index(kT, kt, int(k)))


def canonicalize(sys: ShiftSystem, T, t):
    """Reduce t into [t0, delta_+^T(t0)); returns (window point, winding)."""
    kT, kt = sys._indices(T, t)
    k, w = sys.canonicalize_index(kT, kt)
    return sys.point(k), w


# ---------------------------------------------------------------------------
# catalog

def integer_system(h=1.0, offset=0.0, t0=None, P=None) -> ShiftSystem:
    sc = IntegerLattice(h, offset)
    t0 = sc.offset if t0 is None else t0
    if P is None:
        P = sc.sigma(t0)
    return ShiftSystem(sc, t0, P)


def geometric_system(q, t0=1.0, P=None) -> ShiftSystem:
    sc = GeometricLattice(q)
    if P is None:
        P = sc.sigma(t0)
    return ShiftSystem(sc, t0, P)


def power_system(base=2.0, t0=1.0, P=None) -> ShiftSystem:
    sc = PowerLattice(base)
    if P is None:
        P = sc.sigma(t0)
    return ShiftSystem(sc, t0, P)


def sqrt_system() -> ShiftSystem:
    # not periodic in shifts: delta_-(p, 0) is never defined for p > 0
    return ShiftSystem(SquareRootLattice(), 0.0)


def signed_squares_system() -> ShiftSystem:
    return ShiftSystem(SignedSquares(), 0.0, 1.0)


def bounded_logistic_system(q=2.0) -> ShiftSystem:
    """{q^n/(1+q^n)} with the closed-form logit shifts; bounded, periodic with P = q/(1+q)."""
    q = float(q)
    lq = math.log(q)

    def logit(t):
        return math.log(t / (1.0 - t))

    def point(k):
        return q ** k / (1.0 + q ** k)

    def index(t):
        if not 0.0 < t < 1.0:
            raise ValueError
        return round(logit(t) / lq)

    def shifted(s, t, sign):
        e = (logit(t) + sign * logit(s)) / lq
        return q ** e / (1.0 + q ** e)

    sc = CustomMonotone(point, index, name=f"bounded_logistic(q={q:g})")
    return ShiftSystem(sc, 0.5, q / (1.0 + q),
                       delta_plus=lambda s, t: shifted(s, t, 1.0),
                       delta_minus=lambda s, t: shifted(s, t, -1.0))


SYSTEM_KINDS = {
    "integer": integer_system,
    "geometric": geometric_system,
    "power": power_system,
    "sqrt": sqrt_system,
    "signed_squares": signed_squares_system,
}


def catalog_systems() -> dict:
    """Every catalog scale with its declared period, keyed by a short label."""
    return {
        "integer": integer_system(),
        "integer_t0_3": integer_system(t0=3.0),
        "geometric_q2": geometric_system(2.0),
        "geometric_q3": geometric_system(3.0),
        "sqrt": sqrt_system(),
        "signed_squares": signed_squares_system(),
        "power_2": power_system(2.0),
        "bounded_logistic": bounded_logistic_system(),
    }


def make_system(kind: str, **params) -> ShiftSystem:
    try:
        factory = SYSTEM_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown time scale kind {kind!r}; known: {sorted(SYSTEM_KINDS)}") from None
    return factory(**params)


# ---------------------------------------------------------------------------
# axiom verification

@dataclass
class AxiomResult:
    name: str
    description: str
    checked: int = 0
    counterexample: Optional[tuple] = None

    @property
    def passed(self) -> bool:
        return self.counterexample is None

    def record(self, ok, witness):
        self.checked += 1
        if not ok and self.counterexample is None:
            self.counterexample = witness


@dataclass
class AxiomReport:
    system: str
    results: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def failures(self) -> list:
        return [r for r in self.results.values() if not r.passed]

    def __getitem__(self, name):
        return self.results[name]

    def to_dict(self):
        return {
            "system": self.system,
            "all_passed": self.passed,
            "axioms": [
                {"name": r.name, "description": r.description, "passed": r.passed,
                 "checked": r.checked,
                 "counterexample": None if r.counterexample is None else list(r.counterexample)}
                for r in self.results.values()
            ],
        }


_AXIOMS = {
    "P1": "delta_+- strictly increasing in the second argument",
    "P2": "delta_- decreasing, delta_+ increasing in the first argument",
    "P3": "delta_+(t, t0) = t and delta_+(t0, t) = t",
    "P4": "delta_-+(s, delta_+-(s, t)) = t",
    "P5": "delta_-+(u, delta_+-(s, t)) = delta_+-(s, delta_-+(u, t))",
    "L1": "delta_-(t, t) = t0",
    "L2": "delta_-(t0, t) = t",
    "L3": "delta_+(s, t) = u iff delta_-(s, u) = t",
    "L4": "delta_+(t, delta_-(s, t0)) = delta_-(s, t)",
    "L5": "delta_+(u, t) = delta_+(t, u)",
    "L6": "delta_+(s, t) >= t0 for t >= t0",
    "L7": "delta_-(s, t) >= t0 for t >= s >= t0",
    "L8": "delta_+(s, .) has positive delta derivative",
    "L9": "delta_+(delta_-(u, s), delta_-(s, v)) = delta_-(u, v)",
    "L10": "delta_-(s, t) = t0 implies s = t",
}


def default_index_pairs(sys: ShiftSystem, periods=3, n_random=64, seed=0) -> list:
    """Deterministic lattice over `periods` periods plus seeded random pairs."""
    sc = sys.scale
    d = sys.period_span()
    k0 = sys.k0

    def clip(lo, hi):
        if sc.lo is not None:
            lo = max(lo, sc.lo)
        if sc.hi is not None:
            hi = min(hi, sc.hi)
        return lo, hi

    s_lo, s_hi = clip(k0, k0 + periods * d)
    t_lo, t_hi = clip(k0 - periods * d, k0 + periods * d)
    pairs = list(product(range(s_lo, s_hi + 1), range(t_lo, t_hi + 1)))
    rng = np.random.default_rng(seed)
    rs_lo, rs_hi = clip(k0, k0 + 8 * d)
    rt_lo, rt_hi = clip(k0 - 8 * d, k0 + 8 * d)
    ks = rng.integers(rs_lo, rs_hi + 1, size=n_random)
    kt = rng.integers(rt_lo, rt_hi + 1, size=n_random)
    pairs.extend(zip(ks.tolist(), kt.tolist()))
    return pairs


def default_sample(sys: ShiftSystem, periods=3, n_random=64, seed=0) -> list:
    return [(sys.point(a), sys.point(b)) for a, b in default_index_pairs(sys, periods, n_random, seed)]


def verify_shift_axioms(sys: ShiftSystem, sample: Optional[Iterable] = None,
                        max_third=24) -> AxiomReport:
    """Check the shift axioms and derived properties on sampled pairs.

    Failures are returned as data: each entry keeps the first counterexample
    found, expressed in time values.  Identities involving an expression
    such as delta_-(u, t) are only checked where that expression is defined.
    """
    if sample is None:
        pairs = default_index_pairs(sys)
    else:
        pairs = [(sys.index(s), sys.index(t)) for s, t in sample]
    pairs = sorted(set(pairs))
    k0 = sys.k0
    pt = sys.point
    dp = lambda a, b: sys._try(a, b, +1)  # noqa: E731
    dm = lambda a, b: sys._try(a, b, -1)  # noqa: E731
    res = {name: AxiomResult(name, desc) for name, desc in _AXIOMS.items()}

    s_vals = sorted({s for s, _ in pairs if s >= k0})
    t_vals = sorted({t for _, t in pairs})
    third = s_vals[:: max(1, len(s_vals) // max_third)] if s_vals else []

    by_s, by_t = {}, {}
    for s, t in pairs:
        by_s.setdefault(s, []).append(t)
        by_t.setdefault(t, []).append(s)

    for s, ts in by_s.items():
        if s < k0:
            continue
        for f, name in ((dp, "+"), (dm, "-")):
            prev = None
            for t in sorted(ts):
                v = f(s, t)
                if v is None:
                    continue
                if prev is not None:
                    res["P1"].record(v > prev[1], (name, pt(s), pt(prev[0]), pt(t)))
                prev = (t, v)

    for t, ss in by_t.items():
        prev_p = prev_m = None
        for s in sorted(x for x in ss if x >= k0):
            vp, vm = dp(s, t), dm(s, t)
            if vp is not None:
                if prev_p is not None:
                    res["P2"].record(vp > prev_p[1], ("+", pt(prev_p[0]), pt(s), pt(t)))
                prev_p = (s, vp)
            if vm is not None:
                if prev_m is not None:
                    res["P2"].record(vm < prev_m[1], ("-", pt(prev_m[0]), pt(s), pt(t)))
                prev_m = (s, vm)

    for s in s_vals:
        res["P3"].record(dp(s, k0) == s, (pt(s), pt(k0)))
        res["L1"].record(dm(s, s) == k0, (pt(s),))
    for t in t_vals:
        res["P3"].record(dp(k0, t) == t, (pt(k0), pt(t)))
        res["L2"].record(dm(k0, t) == t, (pt(k0), pt(t)))

    for s, t in pairs:
        if s < k0:
            continue
        vp, vm = dp(s, t), dm(s, t)
        if vp is not None:
            back = dm(s, vp)
            res["P4"].record(back == t, ("+", pt(s), pt(t)))
            res["L3"].record(back == t, ("+", pt(s), pt(t)))
            if t >= k0:
                res["L6"].record(vp >= k0, (pt(s), pt(t)))
                if s >= k0:
                    res["L5"].record(dp(t, s) == vp, (pt(s), pt(t)))
                a, b = dm(s, k0), vm
                if a is not None and b is not None:
                    res["L4"].record(dp(t, a) == b, (pt(s), pt(t)))
            if sys.scale.has_index(t + 1):
                vp1 = dp(s, t + 1)
                if vp1 is not None:
                    deriv = (pt(vp1) - pt(vp)) / sys.scale.mu_index(t)
                    res["L8"].record(deriv > 0, (pt(s), pt(t)))
        if vm is not None:
            fwd = dp(s, vm)
            res["P4"].record(fwd == t, ("-", pt(s), pt(t)))
            res["L3"].record(fwd == t, ("-", pt(s), pt(t)))
            if t >= s:
                res["L7"].record(vm >= k0, (pt(s), pt(t)))
            if vm == k0:
                res["L10"].record(s == t, (pt(s), pt(t)))
        for u in third:
            for sign in (+1, -1):
                v = sys._try(s, t, sign)
                if v is None:
                    continue
                lhs = sys._try(u, v, -sign)
                inner = sys._try(u, t, -sign)
                if lhs is None or inner is None:
                    continue
                rhs = sys._try(s, inner, sign)
                res["P5"].record(rhs is not None and lhs == rhs,
                                 ("+" if sign > 0 else "-", pt(s), pt(t), pt(u)))

    for u in third:
        for s in third:
            if s < u:
                continue
            a = dm(u, s)
            if a is None:
                continue
            for v in t_vals:
                if v < s:
                    continue
                b = dm(s, v)
                if b is None:
                    continue
                c = dm(u, v)
                if c is None:
                    continue
                res["L9"].record(dp(a, b) == c, (pt(u), pt(s), pt(v)))

    return AxiomReport(system=repr(sys), results=res)


@dataclass
class PeriodReport:
    P: float
    valid_point: bool
    checked: int = 0
    domain_failure: Optional[float] = None
    sigma_failure: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.valid_point and self.domain_failure is None and self.sigma_failure is None

    def to_dict(self):
        return {"P": self.P, "passed": self.passed, "valid_point": self.valid_point,
                "checked": self.checked, "domain_failure": self.domain_failure,
                "sigma_failure": self.sigma_failure}


def verify_period(sys: ShiftSystem, P, sample: Optional[Iterable] = None):
    """Check that P is a period of the scale in shifts.

    Returns (passed, PeriodReport).  Requires P in (t0, oo), (P, t) in both
    shift domains and delta_+-(P, sigma(t)) = sigma(delta_+-(P, t)) at every
    sampled t.
    """
    sc = sys.scale
    try:
        kP = sc.index(P)
    except NotInScale:
        return False, PeriodReport(float(P), False)
    rep = PeriodReport(sc.point(kP), kP > sys.k0)
    if not rep.valid_point:
        return False, rep
    if sample is None:
        d = max(kP - sys.k0, 1)
        lo, hi = sys.k0 - 3 * d, sys.k0 + 3 * d
        if sc.lo is not None:
            lo = max(lo, sc.lo)
        if sc.hi is not None:
            hi = min(hi, sc.hi)
        ks = list(range(lo, hi + 1))
        rng = np.random.default_rng(0)
        rlo = lo - 5 * d if sc.lo is None else max(sc.lo, lo - 5 * d)
        ks += rng.integers(rlo, hi + 5 * d + 1, size=64).tolist()
        ks = sorted(set(k for k in ks if sc.has_index(k)))
    else:
        ks = sorted({sc.index(t) for t in sample})
    for k in ks:
        rep.checked += 1
        vals = [sys._try(kP, k, +1), sys._try(kP, k, -1)]
        if any(v is None for v in vals):
            if rep.domain_failure is None:
                rep.domain_failure = sc.point(k)
            continue
        if not sc.has_index(k + 1):
            continue
        nxt = [sys._try(kP, k + 1, +1), sys._try(kP, k + 1, -1)]
        if nxt[0] != vals[0] + 1 or nxt[1] != vals[1] + 1:
            if rep.sigma_failure is None:
                rep.sigma_failure = sc.point(k)
    return rep.passed, rep
