"""Periodic solutions of the neutral delay system

    x^Delta(t) = A(t) x(t) + [Q(t, x(delta_-(s, t)))]^Delta + G(t, x(t), x(delta_-(s, t)))

through the fixed-point operator H = B + C on shift-periodic functions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .deltacalc import DEFAULT_TOL, GridFunction, is_delta_periodic_in_shifts, vnorm
from .errors import (Critical, InvariantViolation, MaxIterExceeded, NotContractive,
                     NotInScale, OutOfDomain)
from .floquet import SPECTRAL_TOL, MatrixFunction, transition_table
from .timescale import ShiftSystem, verify_period


class PeriodicVectorFunction(GridFunction):
    """Vector-valued function on the window, extended periodically in shifts."""

    def __init__(self, sys, T, values):
        super().__init__(sys, T, np.asarray(values, dtype=float), rule="periodic")
        if self.values.ndim != 2:
            raise ValueError("expected one vector per window point")

    @property
    def n(self):
        return self.values.shape[1]

    def norm(self) -> float:
        # the closed window adds delta_+^T(t0), where the value repeats x(t0)
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @classmethod
    def zeros(cls, sys, T, n):
        return cls(sys, T, np.zeros((len(sys.window_indices(T)), n)))

    @classmethod
    def random(cls, sys, T, n, bound, rng):
        m = len(sys.window_indices(T))
        return cls(sys, T, rng.uniform(-bound, bound, size=(m, n)))

    def __sub__(self, other):
        return PeriodicVectorFunction(self.sys, self.T, self.values - other.values)

    def __add__(self, other):
        return PeriodicVectorFunction(self.sys, self.T, self.values + other.values)


class NeutralProblem:
    """A, Q, G, the delay s and the function period T on a shift system.

    ``Q(t, u)`` and ``G(t, x, u)`` take and return length-n arrays.
    """

    def __init__(self, sys: ShiftSystem, n: int, A: MatrixFunction, Q: Callable, G: Callable,
                 s, T, lipschitz: Optional[dict] = None, solver: Optional[dict] = None,
                 name: str = ""):
        self.sys = sys
        self.n = int(n)
        self.A = A
        self.Q = Q
        self.G = G
        self.s = float(s)
        self.T = float(T)
        self.lipschitz = dict(lipschitz or {})
        self.solver = dict(solver or {})
        self.name = name
        self.kT = sys.index(self.T)
        self.ks = sys.index(self.s)
        self.window = list(sys.window_indices(self.T))
        self.k_end = sys.plus_index(self.kT, sys.k0)
        self._kernel = None
        self._delay = {}
        self.checks = {}

    # -- index helpers ------------------------------------------------------

    def point(self, k):
        return self.sys.point(k)

    def shift_T(self, k, sign=+1):
        return self.sys.shift_index(self.kT, k, sign)

    def delay(self, k):
        """Index of delta_-(s, t_k)."""
        if k not in self._delay:
            try:
                self._delay[k] = self.sys.minus_index(self.ks, k)
            except OutOfDomain as exc:
                raise InvariantViolation("delay compatibility", str(exc)) from None
        return self._delay[k]

    def Qv(self, k, u):
        return np.asarray(self.Q(self.point(k), np.asarray(u, dtype=float)), dtype=float)

    def Gv(self, k, x, u):
        return np.asarray(self.G(self.point(k), np.asarray(x, dtype=float),
                                 np.asarray(u, dtype=float)), dtype=float)

    # -- cached linear data ---------------------------------------------------

    @property
    def kernel(self):
        """Transition matrices, their inverses and K = (M^{-1} - I)^{-1}."""
        if self._kernel is None:
            k_far = self.shift_T(self.k_end) + 1
            Phi = transition_table(self.A, k_far)
            M = Phi[self.k_end]
            w = np.linalg.eigvals(M)
            if np.any(np.abs(w - 1.0) <= SPECTRAL_TOL):
                raise Critical(f"monodromy has eigenvalue 1 (spectrum {w.tolist()})")
            Minv = np.linalg.inv(M)
            K = np.linalg.inv(Minv - np.eye(self.n))
            Phi_inv = {k: np.linalg.inv(P) for k, P in Phi.items()}
            # Phi(delta_+^T(t), delta_+^T(t0)) should reproduce Phi(t, t0)
            shift_res = 0.0
            for k in range(self.sys.k0, self.k_end + 1):
                shifted = Phi[self.shift_T(k)] @ Minv
                shift_res = max(shift_res, vnorm(shifted - Phi[k]) / max(1.0, vnorm(Phi[k])))
            self._kernel = {"Phi": Phi, "Phi_inv": Phi_inv, "M": M, "K": K,
                            "spectrum": w, "shift_residual": shift_res}
        return self._kernel

    # -- invariants -----------------------------------------------------------

    def validate(self, samples=8, seed=0, tol=DEFAULT_TOL) -> dict:
        """Run every load-time check; returns {check name: passed}."""
        sys = self.sys
        checks = {}
        checks["function period below scale period"] = sys.P is None or self.kT >= sys.index(sys.P)
        checks["function period"] = verify_period(sys, self.T)[0]
        checks["delay argument"] = self.ks >= sys.k0
        try:
            last = self.shift_T(self.k_end) + 1
            for k in range(sys.k0, last + 1):
                self.delay(k)
            checks["delay compatibility"] = True
        except (InvariantViolation, OutOfDomain):
            checks["delay compatibility"] = False
        if not all(checks.values()):
            self.checks = checks
            return checks

        closed = list(range(sys.k0, self.k_end + 1))
        pts = [self.point(k) for k in closed]
        checks["A delta-periodic"] = is_delta_periodic_in_shifts(self.A, self.T, pts, tol, sys)

        rng = np.random.default_rng(seed)
        xs = [PeriodicVectorFunction.zeros(sys, self.T, self.n)]
        xs += [PeriodicVectorFunction.random(sys, self.T, self.n, 1.0, rng) for _ in range(samples)]
        q_ok = g_ok = True
        for x in xs:
            for k in closed:
                q0 = self.Qv(k, x.at_index(self.delay(k)))
                g0 = self.Gv(k, x.at_index(k), x.at_index(self.delay(k)))
                for sign in (+1, -1):
                    kk = self.shift_T(k, sign)
                    d = self._shift_derivative(k, sign)
                    q1 = self.Qv(kk, x.at_index(self.delay(kk)))
                    g1 = self.Gv(kk, x.at_index(kk), x.at_index(self.delay(kk)))
                    q_ok &= vnorm(q1 - q0) <= tol
                    g_ok &= vnorm(g1 * d - g0) <= tol
        checks["Q periodic"] = bool(q_ok)
        checks["G delta-periodic"] = bool(g_ok)
        self.checks = checks
        return checks

    def _shift_derivative(self, k, sign):
        a = self.shift_T(k, sign)
        b = self.shift_T(k + 1, sign)
        return (self.point(b) - self.point(a)) / self.sys.scale.mu_index(k)

    def check_invariants(self, **kw):
        for name, ok in self.validate(**kw).items():
            if not ok:
                raise InvariantViolation(name)
        return self.checks

    def forcing_at_zero(self):
        """Q^Delta(t, 0) + G(t, 0, 0) at each window point."""
        z = np.zeros(self.n)
        mu = self.sys.scale.mu_index
        return [(self.Qv(k + 1, z) - self.Qv(k, z)) / mu(k) + self.Gv(k, z, z) for k in self.window]

    def nontrivial(self, tol=DEFAULT_TOL) -> bool:
        return any(vnorm(v) > tol for v in self.forcing_at_zero())


# ---------------------------------------------------------------------------
# norms and r

def window_maxima_A(p: NeutralProblem, horizon_periods=4) -> list:
    """Max row-sum of A over each of the first horizon_periods windows."""
    if horizon_periods < 1:
        raise ValueError("horizon_periods must be >= 1")
    out = []
    start = p.sys.k0
    for _ in range(horizon_periods):
        stop = p.shift_T(start)
        out.append(max(vnorm(p.A.at_index(k)) for k in range(start, stop)))
        start = stop
    return out


def sup_norm_A(p: NeutralProblem, horizon_periods=4) -> float:
    maxima = window_maxima_A(p, horizon_periods)
    if any(m > maxima[0] * (1 + 1e-12) for m in maxima[1:]):
        warnings.warn("|A(t)| grows beyond the first window; the sup norm may be underestimated",
                      RuntimeWarning, stacklevel=2)
    return max(maxima)


def compute_r(p: NeutralProblem) -> float:
    """Double maximum of |Phi(t) K Phi^{-1}(sigma(u))| over t in the closed window
    and u in [t, delta_+^T(t)]."""
    ker = p.kernel
    Phi, Phi_inv, K = ker["Phi"], ker["Phi_inv"], ker["K"]
    r = 0.0
    for k in range(p.sys.k0, p.k_end + 1):
        left = Phi[k] @ K
        for u in range(k, p.shift_T(k) + 1):
            r = max(r, vnorm(left @ Phi_inv[u + 1]))
    return r


# ---------------------------------------------------------------------------
# operators

def _as_pvf(p, values):
    return PeriodicVectorFunction(p.sys, p.T, values)


def operator_B(p: NeutralProblem, x: PeriodicVectorFunction) -> PeriodicVectorFunction:
    return _as_pvf(p, [p.Qv(k, x.at_index(p.delay(k))) for k in p.window])


def _integrand(p, x, u):
    xd = x.at_index(p.delay(u))
    return p.A.at_index(u) @ p.Qv(u, xd) + p.Gv(u, x.at_index(u), xd)


def operator_C(p: NeutralProblem, x: PeriodicVectorFunction) -> PeriodicVectorFunction:
    ker = p.kernel
    Phi, Phi_inv, K = ker["Phi"], ker["Phi_inv"], ker["K"]
    mu = p.sys.scale.mu_index
    terms = {}
    out = []
    for k in p.window:
        acc = np.zeros(p.n)
        for u in range(k, p.shift_T(k)):
            if u not in terms:
                terms[u] = Phi_inv[u + 1] @ _integrand(p, x, u) * mu(u)
            acc = acc + terms[u]
        out.append(Phi[k] @ K @ acc)
    return _as_pvf(p, out)


def operator_H(p: NeutralProblem, x: PeriodicVectorFunction) -> PeriodicVectorFunction:
    return operator_B(p, x) + operator_C(p, x)


def integrand_norm(p: NeutralProblem, x: PeriodicVectorFunction) -> float:
    """|A Q(., x(delta_-(s,.))) + G(., x, x(delta_-(s,.)))| maximized over the closed window."""
    return max(vnorm(_integrand(p, x, k)) for k in range(p.sys.k0, p.k_end + 1))


# ---------------------------------------------------------------------------
# conditions

@dataclass
class ConditionReport:
    r: float
    normA: float
    E1: float
    E2: float
    E3: float
    alpha: float
    beta: float
    windowLength: float
    N: float
    contractionConstant: float
    Jmin: float
    noncritical: bool
    krasnoselskii_ok: bool
    contraction_ok: bool
    lipschitz_estimated: bool
    nontrivial: bool
    spectrum: list = field(default_factory=list)
    windowMaximaA: list = field(default_factory=list)

    def inq_lhs(self, J) -> float:
        """Left side of the ball-invariance inequality at radius J."""
        rw = self.r * self.windowLength
        return (self.E1 * J + self.alpha
                + rw * (self.normA * (self.alpha + self.E1 * J) + (self.E2 + self.E3) * J + self.beta))

    def inq_holds(self, J, rtol=1e-12) -> bool:
        return self.inq_lhs(J) <= J + rtol * max(1.0, abs(J))

    def to_dict(self) -> dict:
        return asdict(self)


def _sup_over_horizon(p, fn, horizon_periods):
    start, best = p.sys.k0, 0.0
    for _ in range(horizon_periods):
        stop = p.shift_T(start)
        best = max(best, max(vnorm(fn(k)) for k in range(start, stop)))
        start = stop
    return best


def estimate_lipschitz(p: NeutralProblem, J=1.0, samples=64, seed=0, safety=1.2):
    """Empirical Lipschitz constants (E1, E2, E3) from random vectors bounded by J.

    Not a proof: the observed maximum ratios are inflated by ``safety``.
    """
    if J <= 0:
        raise ValueError("J must be positive")
    rng = np.random.default_rng(seed)
    ks = range(p.sys.k0, p.k_end + 1)
    e1 = e2 = e3 = 0.0
    for _ in range(samples):
        x, y, z, w = rng.uniform(-J, J, size=(4, p.n))
        for k in ks:
            d = vnorm(x - z)
            if d > 0:
                e1 = max(e1, vnorm(p.Qv(k, x) - p.Qv(k, z)) / d)
                e2 = max(e2, vnorm(p.Gv(k, x, y) - p.Gv(k, z, y)) / d)
            d = vnorm(y - w)
            if d > 0:
                e3 = max(e3, vnorm(p.Gv(k, x, y) - p.Gv(k, x, w)) / d)
    return e1 * safety, e2 * safety, e3 * safety


def check_conditions(p: NeutralProblem, E1=None, E2=None, E3=None, J=None,
                     samples=64, seed=0, horizon_periods=4) -> ConditionReport:
    E1 = p.lipschitz.get("E1") if E1 is None else E1
    E2 = p.lipschitz.get("E2") if E2 is None else E2
    E3 = p.lipschitz.get("E3") if E3 is None else E3
    estimated = None in (E1, E2, E3)
    if estimated:
        J = p.solver.get("J", 1.0) if J is None else J
        est = estimate_lipschitz(p, J, samples, seed)
        E1, E2, E3 = (v if v is not None else e for v, e in zip((E1, E2, E3), est))

    ker = p.kernel  # raises Critical
    r = compute_r(p)
    maxima = window_maxima_A(p, horizon_periods)
    normA = sup_norm_A(p, horizon_periods)
    z = np.zeros(p.n)
    alpha = max(vnorm(p.Qv(k, z)) for k in range(p.sys.k0, p.k_end + 1))
    beta = _sup_over_horizon(p, lambda k: p.Gv(k, z, z), horizon_periods)
    w = p.point(p.k_end) - p.sys.t0
    N = r * w * (normA * E1 + E2 + E3)
    contraction = E1 + N
    denom = 1.0 - contraction
    Jmin = (alpha + r * w * (normA * alpha + beta)) / denom if denom > 0 else math.inf
    return ConditionReport(
        r=r, normA=normA, E1=float(E1), E2=float(E2), E3=float(E3),
        alpha=alpha, beta=beta, windowLength=w, N=N,
        contractionConstant=contraction, Jmin=Jmin,
        noncritical=True,
        krasnoselskii_ok=bool(E1 < 1 and math.isfinite(Jmin)),
        contraction_ok=bool(contraction < 1),
        lipschitz_estimated=estimated,
        nontrivial=p.nontrivial(),
        spectrum=[complex(v) for v in ker["spectrum"]],
        windowMaximaA=maxima,
    )


# ---------------------------------------------------------------------------
# iteration and residuals

@dataclass
class PicardDiagnostics:
    iterations: int
    converged: bool
    step_norms: list
    ratios: list
    contraction_bound: float
    max_ratio: float
    ratios_within_bound: bool
    damping: float


def solve_picard(p: NeutralProblem, x0: Optional[PeriodicVectorFunction] = None, tol=1e-12,
                 max_iter=10000, report: Optional[ConditionReport] = None, force=False,
                 damping=0.5):
    """Iterate x <- H x from x0 (zero by default) until the step norm is below tol.

    Problems that fail the contraction condition are refused unless ``force``
    is set, in which case the damped map x <- (1 - damping) x + damping H x is used.
    """
    report = check_conditions(p) if report is None else report
    lam = 1.0
    if not report.contraction_ok:
        if not force:
            raise NotContractive(
                f"contraction constant {report.contractionConstant:.6g} >= 1; "
                "existence may still hold but iteration is not guaranteed")
        lam = damping
    x = PeriodicVectorFunction.zeros(p.sys, p.T, p.n) if x0 is None else x0
    steps, ratios = [], []
    for it in range(1, max_iter + 1):
        hx = operator_H(p, x)
        nxt = _as_pvf(p, (1 - lam) * x.values + lam * hx.values)
        step = (nxt - x).norm()
        if steps and steps[-1] > 0:
            ratios.append(step / steps[-1])
        steps.append(step)
        x = nxt
        if step <= tol:
            break
    else:
        raise MaxIterExceeded(f"no convergence after {max_iter} iterations (last step {steps[-1]:.3e})")
    bound = report.contractionConstant
    max_ratio = max(ratios) if ratios else 0.0
    diag = PicardDiagnostics(
        iterations=it, converged=True, step_norms=steps, ratios=ratios,
        contraction_bound=bound, max_ratio=max_ratio,
        ratios_within_bound=lam != 1.0 or max_ratio <= bound + 1e-6, damping=lam)
    return x, diag


def verify_solution(p: NeutralProblem, x: PeriodicVectorFunction) -> dict:
    """Integral, differential and periodicity residuals of a candidate solution."""
    hx = operator_H(p, x)
    integral = (x - hx).norm()
    mu = p.sys.scale.mu_index
    diff = 0.0
    for k in p.window:
        xk, x1 = x.at_index(k), x.at_index(k + 1)
        dk = x.at_index(p.delay(k))
        q0 = p.Qv(k, dk)
        q1 = p.Qv(k + 1, x.at_index(p.delay(k + 1)))
        lhs = (x1 - xk) / mu(k)
        rhs = p.A.at_index(k) @ xk + (q1 - q0) / mu(k) + p.Gv(k, xk, dk)
        diff = max(diff, vnorm(lhs - rhs))
    per = 0.0
    for k in range(p.sys.k0, p.k_end + 1):
        for sign in (+1, -1):
            try:
                kk = p.shift_T(k, sign)
            except (OutOfDomain, NotInScale):
                continue
            per = max(per, vnorm(x.at_index(kk) - x.at_index(k)))
    return {"integral": integral, "differential": diff, "periodicity": per}
