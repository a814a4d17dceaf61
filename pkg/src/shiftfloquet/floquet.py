"""Transition matrices and Floquet theory for Delta-periodic linear systems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .deltacalc import GridFunction, vnorm
from .errors import NotRegressive, OutOfDomain
from .matfun import PrincipalPower
from .timescale import ShiftSystem

SPECTRAL_TOL = 1e-8
_EPS = np.finfo(float).eps


class MatrixFunction:
    """t -> n x n matrix on the scale of ``sys``.

    ``T`` records a declared Delta-periodicity period; it is informational
    and checked elsewhere.
    """

    def __init__(self, sys: ShiftSystem, n: int, fn: Callable, T=None):
        self.sys = sys
        self.n = int(n)
        self.fn = fn
        self.T = None if T is None else float(T)

    def __call__(self, t):
        return np.asarray(self.fn(t))

    def at_index(self, k):
        return self(self.sys.point(k))

    @classmethod
    def from_window(cls, sys, T, window_values):
        """Delta-periodic extension of values given on [t0, delta_+^T(t0))."""
        g = GridFunction(sys, T, [np.asarray(v, dtype=float) for v in window_values],
                         rule="delta_periodic")
        n = g.values.shape[-1]
        return cls(sys, n, g, T)

    @classmethod
    def constant(cls, sys, M, T=None):
        M = np.asarray(M)
        return cls(sys, M.shape[0], lambda t: M, T)


def _factor(F, k, sys):
    if not np.all(np.isfinite(F)) or np.linalg.cond(F) > 1.0 / _EPS:
        raise NotRegressive(sys.point(k))
    return F


def _step(A: MatrixFunction, k):
    sys = A.sys
    mu = sys.scale.mu_index(k)
    F = np.eye(A.n) + mu * A.at_index(k)
    return _factor(F, k, sys)


def transition_table(A: MatrixFunction, k_to: int, k_from: Optional[int] = None) -> dict:
    """{k: Phi_A(t_k, t_from)} for every index k in [k_from, k_to]."""
    sys = A.sys
    k_from = sys.k0 if k_from is None else k_from
    Phi = np.eye(A.n)
    out = {k_from: Phi}
    for k in range(k_from, k_to):
        Phi = _step(A, k) @ Phi
        out[k + 1] = Phi
    return out


def transition_matrix(A: MatrixFunction, t, t0=None):
    """Phi_A(t, t0) as the ordered product of (I + mu A), later factors on the left.

    For t < t0 the inverse of the forward product Phi_A(t0, t) is returned.
    """
    sys = A.sys
    kt = sys.index(t)
    k0 = sys.k0 if t0 is None else sys.index(t0)
    if kt >= k0:
        return transition_table(A, kt, k0)[kt]
    return np.linalg.inv(transition_table(A, k0, kt)[k0])


def peano_baker(A: MatrixFunction, t, t0=None, order=8):
    """Truncated iterated-integral series for Phi_A(t, t0).

    S_0 = I and S_j(tau) = int_{t0}^{tau} A(u) S_{j-1}(u) Delta u; the
    integrals are finite delta sums.  Exact once ``order`` reaches the
    number of steps in [t0, t).
    """
    sys = A.sys
    k0 = sys.k0 if t0 is None else sys.index(t0)
    kt = sys.index(t)
    if kt < k0:
        raise OutOfDomain("peano_baker needs t >= t0")
    n = A.n
    ks = list(range(k0, kt))
    Amu = [A.at_index(k) * sys.scale.mu_index(k) for k in ks]
    # term[i] = S_j at the i-th grid point, last entry at t itself
    term = [np.eye(n) for _ in range(len(ks) + 1)]
    total = np.eye(n)
    for _ in range(order):
        nxt = [np.zeros((n, n))]
        acc = np.zeros((n, n))
        for i in range(len(ks)):
            acc = acc + Amu[i] @ term[i]
            nxt.append(acc)
        term = nxt
        total = total + term[-1]
        if not np.any(term[-1]):
            break
    return total


# ---------------------------------------------------------------------------
# Theta, m, G

def _orbit(sys, kT, kt):
    if kt < sys.k0:
        raise OutOfDomain(f"{sys.point(kt)!r} precedes t0")
    b = [sys.k0]
    while b[-1] < kt:
        b.append(sys.plus_index(kT, b[-1]))
    return b


def theta_parts(sys: ShiftSystem, T, t):
    """(m(t), G(t), Theta(t), t in P(t0)) decided by index arithmetic."""
    kT, kt = sys.index(T), sys.index(t)
    return _theta_index(sys, kT, kt)


def _theta_index(sys, kT, kt):
    b = _orbit(sys, kT, kt)
    m = len(b) - 1
    total = 0.0
    for j in range(1, m + 1):
        total += sys.point(sys.minus_index(b[j - 1], b[j]))
    member = b[m] == kt
    G = 0.0 if member else -sys.point(sys.minus_index(kt, b[m]))
    return m, G, total + G, member


def in_P(sys, T, t) -> bool:
    return theta_parts(sys, T, t)[3]


def m_of(sys, T, t) -> int:
    return theta_parts(sys, T, t)[0]


def G_of(sys, T, t) -> float:
    return theta_parts(sys, T, t)[1]


def theta(sys, T, t) -> float:
    return theta_parts(sys, T, t)[2]


# ---------------------------------------------------------------------------
# R, e_R, Floquet decomposition

def _R_index(power: PrincipalPower, sys, kT, k, T):
    th0 = _theta_index(sys, kT, k)[2]
    th1 = _theta_index(sys, kT, k + 1)[2]
    X = power((th1 - th0) / T)
    return (X - np.eye(X.shape[0])) / sys.scale.mu_index(k)


def solve_R(M, sys: ShiftSystem, T, t):
    """R(t) = (M^{[Theta(sigma(t)) - Theta(t)]/T} - I) / mu(t)."""
    return _R_index(PrincipalPower(M), sys, sys.index(T), sys.index(t), float(T))


def r_function(M, sys: ShiftSystem, T) -> MatrixFunction:
    power = M if isinstance(M, PrincipalPower) else PrincipalPower(M)
    kT = sys.index(T)
    T = float(T)
    cache = {}

    def R(t):
        k = sys.index(t)
        if k not in cache:
            cache[k] = _R_index(power, sys, kT, k, T)
        return cache[k]

    return MatrixFunction(sys, power.M.shape[0], R, T)


def exp_R(R: MatrixFunction, t, t0=None):
    """Ordered product of (I + mu R) over [t0, t)."""
    sys = R.sys
    k0 = sys.k0 if t0 is None else sys.index(t0)
    kt = sys.index(t)
    if kt < k0:
        raise OutOfDomain("exp_R needs t >= t0")
    E = np.eye(R.n)
    for k in range(k0, kt):
        F = np.eye(R.n) + sys.scale.mu_index(k) * R.at_index(k)
        E = _factor(F, k, sys) @ E
    return E


@dataclass
class FloquetData:
    M: np.ndarray
    R: MatrixFunction
    L: dict
    T: float
    t0: float
    spectrum: np.ndarray
    A: MatrixFunction

    def L_at(self, t):
        """L(t) = Phi_A(t, t0) e_R(t, t0)^{-1}, defined for t >= t0."""
        return transition_matrix(self.A, t) @ np.linalg.inv(exp_R(self.R, t))

    def residuals(self) -> dict:
        """Max deviations of the defining identities over the window."""
        sys = self.A.sys
        kT = sys.index(self.T)
        end = sys.point(sys.plus_index(kT, sys.k0))
        out = {
            "monodromy": vnorm(exp_R(self.R, end) - self.M),
            "L_t0": vnorm(self.L[self.t0] - np.eye(self.M.shape[0])),
            "decomposition": 0.0,
            "L_periodic": 0.0,
        }
        for t, Lt in self.L.items():
            Phi = transition_matrix(self.A, t)
            out["decomposition"] = max(out["decomposition"], vnorm(Phi - Lt @ exp_R(self.R, t)))
            tt = sys.shift_plus(self.T, t)
            out["L_periodic"] = max(out["L_periodic"], vnorm(self.L_at(tt) - Lt))
        return out


def monodromy(A: MatrixFunction, T):
    sys = A.sys
    end = sys.plus_index(sys.index(T), sys.k0)
    return transition_table(A, end)[end]


def floquet_decompose(A: MatrixFunction, T) -> FloquetData:
    sys = A.sys
    kT = sys.index(T)
    end = sys.plus_index(kT, sys.k0)
    table = transition_table(A, end)
    M = table[end]
    power = PrincipalPower(M)
    R = r_function(power, sys, T)
    L = {}
    E = np.eye(A.n)
    for k in range(sys.k0, end):
        L[sys.point(k)] = table[k] @ np.linalg.inv(E)
        E = (np.eye(A.n) + sys.scale.mu_index(k) * R.at_index(k)) @ E
    return FloquetData(M=M, R=R, L=L, T=float(T), t0=sys.t0,
                       spectrum=power.eigenvalues, A=A)


def periodic_solution_exists_homogeneous(A: MatrixFunction, T, tol=SPECTRAL_TOL):
    """True iff the monodromy matrix has an eigenvalue within tol of 1."""
    w = np.linalg.eigvals(monodromy(A, T))
    return bool(np.any(np.abs(w - 1.0) <= tol)), w


def noncritical_check(A: MatrixFunction, T, tol=SPECTRAL_TOL) -> bool:
    return not periodic_solution_exists_homogeneous(A, T, tol)[0]
