"""Principal logarithm and real powers of a nonsingular matrix."""

import numpy as np
import scipy.linalg

from .errors import LogBranchFailure, SingularM

_EPS = np.finfo(float).eps


def _clean(X, like):
    """Drop a negligible imaginary part when the input was real."""
    if np.iscomplexobj(X) and not np.iscomplexobj(like):
        scale = max(1.0, float(np.max(np.abs(X))))
        if float(np.max(np.abs(X.imag))) <= 1e-12 * scale:
            return X.real.copy()
    return X


class PrincipalPower:
    """x -> M^x = exp(x Log M) with the principal branch of Log.

    Diagonalizable M goes through its eigendecomposition; otherwise the
    Schur-based ``scipy.linalg.logm`` is used.  Integer exponents are
    evaluated by repeated multiplication so dyadic data stays exact.
    """

    def __init__(self, M, diag_cond=1e8):
        M = np.array(M, dtype=complex if np.iscomplexobj(M) else float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("M must be square")
        self.M = M
        n = M.shape[0]
        w, V = np.linalg.eig(M)
        self.eigenvalues = w
        scale = max(1.0, float(np.max(np.abs(w)))) if n else 1.0
        if n and (np.min(np.abs(w)) <= n * _EPS * scale or np.linalg.cond(M) > 1.0 / _EPS):
            raise SingularM("monodromy matrix is singular")
        on_cut = (np.abs(np.imag(w)) <= 1e-12 * np.abs(w)) & (np.real(w) < 0)
        # integer powers need no logarithm, so the branch check is deferred
        self._branch_error = None
        if np.any(on_cut):
            self._branch_error = (
                f"eigenvalue {float(np.real(w[on_cut][0])):.17g} lies on the negative real axis; "
                "the principal logarithm is undefined")
        self._Minv = None
        self._log = None
        if n == 0 or np.linalg.cond(V) < diag_cond:
            self.mode = "eig"
            self._w = w.astype(complex)
            self._V = V
            self._Vinv = np.linalg.inv(V)
        else:
            self.mode = "schur"

    @property
    def has_principal_log(self) -> bool:
        return self._branch_error is None

    def _require_log(self):
        if self._branch_error is not None:
            raise LogBranchFailure(self._branch_error)

    def log(self):
        self._require_log()
        if self._log is None:
            if self.mode == "eig":
                self._log = _clean((self._V * np.log(self._w)) @ self._Vinv, self.M)
            else:
                self._log = _clean(scipy.linalg.logm(self.M), self.M)
        return self._log

    def __call__(self, x):
        x = float(x)
        if x.is_integer() and abs(x) <= 64:
            k = int(x)
            if k >= 0:
                return np.linalg.matrix_power(self.M, k)
            if self._Minv is None:
                self._Minv = np.linalg.inv(self.M)
            return np.linalg.matrix_power(self._Minv, -k)
        self._require_log()
        if self.mode == "eig":
            X = (self._V * np.power(self._w, x)) @ self._Vinv
        else:
            X = scipy.linalg.expm(x * self.log())
        return _clean(X, self.M)


def fractional_power(M, x):
    return PrincipalPower(M)(x)


def principal_log(M):
    return PrincipalPower(M).log()
