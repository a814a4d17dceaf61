"""Reference computations written independently of the package internals.

They work from closed forms and exact rationals rather than the index
arithmetic the library uses.
"""

import math
from fractions import Fraction

import numpy as np


# closed-form shifts --------------------------------------------------------

def shift_integer(s, t, sign, t0=0):
    return t + sign * (s - t0)


def shift_geometric(s, t, sign):
    return t * s if sign > 0 else t / s


def shift_sqrt(s, t, sign):
    return math.sqrt(t * t + sign * s * s)


def shift_signed_squares(s, t, sign):
    # for t >= 0 and s >= 0: (sqrt(t) +- sqrt(s))^2 carrying the sign of the root
    r = math.sqrt(t) + sign * math.sqrt(s)
    return math.copysign(r * r, r)


# Theta by enumerating the orbit of t0 in exact rationals -------------------

def theta_bruteforce(t, t0, T, plus, minus):
    """Theta(t) from the literal definition; plus/minus act on Fractions."""
    t, t0, T = Fraction(t), Fraction(t0), Fraction(T)
    orbit = [t0]
    while orbit[-1] < t:
        orbit.append(plus(T, orbit[-1]))
    m = len(orbit) - 1
    total = sum((minus(orbit[j - 1], orbit[j]) for j in range(1, m + 1)), Fraction(0))
    G = Fraction(0) if orbit[m] == t else -minus(t, orbit[m])
    return m, G, total + G


# transition matrices ---------------------------------------------------------

def product_transition(points, A):
    """Ordered product of I + mu A over consecutive points (all but the last)."""
    n = A(points[0]).shape[0]
    Phi = np.eye(n)
    for a, b in zip(points[:-1], points[1:]):
        Phi = (np.eye(n) + (b - a) * A(a)) @ Phi
    return Phi


def scalar_power(m, x):
    return m ** x


# periodic solution of a linear forced system by shooting ------------------

def linear_periodic_solution(points, A, f):
    """x with x(last) = x(first) solving x^Delta = A x + f on the listed points."""
    n = A(points[0]).shape[0]
    M = np.eye(n)
    S = np.zeros(n)
    for a, b in zip(points[:-1], points[1:]):
        mu = b - a
        F = np.eye(n) + mu * A(a)
        M = F @ M
        S = F @ S + mu * f(a)
    x0 = np.linalg.solve(np.eye(n) - M, S)
    xs = [x0]
    for a, b in zip(points[:-2], points[1:-1]):
        xs.append(xs[-1] + (b - a) * (A(a) @ xs[-1] + f(a)))
    return np.array(xs)
