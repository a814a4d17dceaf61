"""Delta derivative, delta integral and shift periodicity of grid functions."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .errors import NoSuccessor, NotInScale, OutOfDomain
from .timescale import ShiftSystem

DEFAULT_TOL = 1e-10

RULES = ("periodic", "delta_periodic", "none")


def vnorm(v) -> float:
    """Max-absolute-component norm; for matrices the max row sum."""
    a = np.asarray(v)
    if a.ndim == 0:
        return float(abs(a))
    if a.ndim == 1:
        return float(np.max(np.abs(a))) if a.size else 0.0
    return float(np.max(np.sum(np.abs(a), axis=-1)))


def delta_shift_derivative(sys: ShiftSystem, T, t, sign=+1) -> float:
    """Delta derivative of t -> delta_+-(T, t), exact on isolated scales."""
    kT = sys.index(T)
    kt = sys.index(t)
    return _shift_derivative_index(sys, kT, kt, sign)


def _shift_derivative_index(sys, kT, kt, sign=+1):
    sc = sys.scale
    try:
        a = sys.shift_index(kT, kt, sign)
        b = sys.shift_index(kT, kt + 1, sign)
        return (sc.point(b) - sc.point(a)) / sc.mu_index(kt)
    except NoSuccessor as exc:
        raise OutOfDomain(str(exc)) from None


class GridFunction:
    """Values on the fundamental window, extended by a shift-periodicity rule.

    ``rule`` is one of ``"periodic"`` (f(delta_+-^T(t)) = f(t)),
    ``"delta_periodic"`` (f(delta_+-^T(t)) delta_+-^{Delta T}(t) = f(t)) or
    ``"none"``, in which case ``values`` may sit on any finite set of scale
    points and nothing is extrapolated.
    """

    def __init__(self, sys: ShiftSystem, T, values, rule="periodic"):
        if rule not in RULES:
            raise ValueError(f"unknown extension rule {rule!r}")
        self.sys = sys
        self.rule = rule
        self.T = None if T is None else float(T)
        if rule == "none":
            if isinstance(values, dict):
                items = sorted((sys.index(t), np.asarray(v)) for t, v in values.items())
            else:
                raise TypeError("rule 'none' needs a mapping point -> value")
            self._kwin = [k for k, _ in items]
            self.values = np.array([v for _, v in items])
        else:
            self._kT = sys.index(self.T)
            self._kwin = list(sys.window_indices(self.T))
            if isinstance(values, dict):
                by_k = {sys.index(t): np.asarray(v) for t, v in values.items()}
                if set(by_k) != set(self._kwin):
                    raise ValueError("values must cover exactly the fundamental window")
                self.values = np.array([by_k[k] for k in self._kwin])
            else:
                self.values = np.array(values)
                if len(self.values) != len(self._kwin):
                    raise ValueError(f"expected {len(self._kwin)} window values, got {len(self.values)}")
        self._pos = {k: i for i, k in enumerate(self._kwin)}

    @classmethod
    def from_callable(cls, sys, T, fn: Callable, rule="periodic"):
        return cls(sys, T, [fn(sys.point(k)) for k in sys.window_indices(T)], rule)

    @classmethod
    def tabulate(cls, sys, fn: Callable, points):
        """Finite-support function with values fn(t) at the given points."""
        return cls(sys, None, {t: fn(t) for t in points}, rule="none")

    @property
    def points(self) -> list:
        return [self.sys.point(k) for k in self._kwin]

    def at_index(self, k: int):
        if k in self._pos:
            return self.values[self._pos[k]]
        if self.rule == "none":
            raise OutOfDomain(f"{self.sys.point(k)!r} outside the support")
        kh, w = self.sys.canonicalize_index(self._kT, k)
        v = self.values[self._pos[kh]]
        if self.rule == "periodic" or w == 0:
            return v
        # f(delta_+(T, y)) = f(y) / delta_+^{Delta T}(y)
        weight = 1.0
        if w > 0:
            y = kh
            for _ in range(w):
                weight /= _shift_derivative_index(self.sys, self._kT, y, +1)
                y = self.sys.plus_index(self._kT, y)
        else:
            y = kh
            for _ in range(-w):
                y = self.sys.minus_index(self._kT, y)
                weight *= _shift_derivative_index(self.sys, self._kT, y, +1)
        return v * weight

    def __call__(self, t):
        try:
            k = self.sys.index(t)
        except NotInScale as exc:
            raise OutOfDomain(str(exc)) from None
        return self.at_index(k)

    evaluate = __call__


def _scale_of(f, scale):
    if scale is not None:
        return scale
    sys = getattr(f, "sys", None)
    if sys is None:
        raise TypeError("pass scale= for plain callables")
    return sys.scale


def delta_derivative(f, t, scale=None):
    """(f(sigma(t)) - f(t)) / mu(t)."""
    sc = _scale_of(f, scale)
    try:
        k = sc.index(t)
        t1 = sc.point(k + 1) if sc.has_index(k + 1) else None
    except NotInScale as exc:
        raise OutOfDomain(str(exc)) from None
    if t1 is None:
        raise OutOfDomain(f"{t!r} has no successor")
    t = sc.point(k)
    return (np.asarray(f(t1)) - np.asarray(f(t))) / (t1 - t)


def delta_integral(f, a, b, scale=None):
    """Sum of f(tau) mu(tau) over tau in [a, b)."""
    sc = _scale_of(f, scale)
    try:
        ka, kb = sc.index(a), sc.index(b)
    except NotInScale as exc:
        raise OutOfDomain(str(exc)) from None
    if kb < ka:
        raise OutOfDomain("integration bounds must satisfy a <= b")
    total = 0.0
    for k in range(ka, kb):
        total = total + np.asarray(f(sc.point(k))) * sc.mu_index(k)
    return total


def _sample_points(sys, T, sample, periods=2):
    if sample is not None:
        return [sys.index(t) for t in sample]
    win = list(sys.window_indices(T))
    d = len(win)
    ks = range(win[0] - periods * d, win[-1] + periods * d + 1)
    return [k for k in ks if sys.scale.has_index(k)]


def is_periodic_in_shifts(f, T, sample=None, tol=DEFAULT_TOL, sys: Optional[ShiftSystem] = None) -> bool:
    """|f(delta_+-^T(t)) - f(t)| <= tol at every sampled t."""
    sys = sys or f.sys
    kT = sys.index(T)
    for k in _sample_points(sys, T, sample):
        t = sys.point(k)
        ft = np.asarray(f(t))
        for sign in (+1, -1):
            try:
                kk = sys.shift_index(kT, k, sign)
            except OutOfDomain:
                return False
            if vnorm(np.asarray(f(sys.point(kk))) - ft) > tol:
                return False
    return True


def is_delta_periodic_in_shifts(f, T, sample=None, tol=DEFAULT_TOL,
                                sys: Optional[ShiftSystem] = None) -> bool:
    """|f(delta_+-^T(t)) delta_+-^{Delta T}(t) - f(t)| <= tol at every sampled t."""
    sys = sys or f.sys
    kT = sys.index(T)
    for k in _sample_points(sys, T, sample):
        t = sys.point(k)
        ft = np.asarray(f(t))
        for sign in (+1, -1):
            try:
                kk = sys.shift_index(kT, k, sign)
                w = _shift_derivative_index(sys, kT, k, sign)
            except OutOfDomain:
                return False
            if vnorm(np.asarray(f(sys.point(kk))) * w - ft) > tol:
                return False
    return True
