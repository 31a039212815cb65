"""Adaptive Gauss-Legendre quadrature used when no closed form is available."""

from __future__ import annotations

import numpy as np

ORDER = 16
ABS_TOL = 1e-12
REL_TOL = 1e-10
MAX_DEPTH = 40

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(ORDER)


class QuadratureError(RuntimeError):
    pass


def gauss_legendre(func, a: float, b: float) -> float:
    """Fixed-order rule on ``[a, b]``; ``func`` must accept arrays."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * float(np.dot(_WEIGHTS, func(mid + half * _NODES)))


def adaptive_gauss(func, a: float, b: float, abs_tol: float = ABS_TOL,
                   rel_tol: float = REL_TOL, max_depth: int = MAX_DEPTH) -> float:
    """Integrate ``func`` over ``[a, b]`` by recursive bisection.

    An interval is accepted once the rule on it and the sum over its two halves
    differ by at most ``max(abs_tol, rel_tol * |halves|)``. Bisection naturally
    concentrates near endpoint singularities such as ``sqrt`` at a zero.
    """
    if b == a:
        return 0.0
    total = 0.0
    stack = [(a, b, gauss_legendre(func, a, b), 0)]
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = gauss_legendre(func, lo, mid)
        right = gauss_legendre(func, mid, hi)
        fine = left + right
        if abs(fine - whole) <= max(abs_tol, rel_tol * abs(fine)):
            total += fine
            continue
        if depth >= max_depth:
            raise QuadratureError(f"no convergence on [{lo!r}, {hi!r}] after {max_depth} bisections")
        stack.append((mid, hi, right, depth + 1))
        stack.append((lo, mid, left, depth + 1))
    return total
