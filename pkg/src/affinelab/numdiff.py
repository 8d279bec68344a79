"""Central finite differences with truncation/roundoff-balanced steps.

First derivatives use h1 = eps^(1/3) * max(1, |x|), second derivatives
h2 = eps^(1/4) * max(1, |x|).  Callers that care about chart domains pass
an `inside` predicate; a stencil point failing it raises
StencilLeavesDomain.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import StencilLeavesDomain

EPS = float(np.finfo(float).eps)
H1 = EPS ** (1.0 / 3.0)
H2 = EPS ** 0.25


def step1(x: np.ndarray) -> float:
    return H1 * max(1.0, float(np.linalg.norm(x)))


def step2(x: np.ndarray) -> float:
    return H2 * max(1.0, float(np.linalg.norm(x)))


def _guard(inside, pts):
    if inside is None:
        return
    for p in pts:
        if not inside(p):
            raise StencilLeavesDomain(f"stencil point {p} outside chart domain")


def jacobian(f: Callable, x: np.ndarray, h: float | None = None, inside=None) -> np.ndarray:
    """Jacobian of f at x by central differences, columns stacked."""
    x = np.asarray(x, float)
    h = step1(x) if h is None else h
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        _guard(inside, (x + e, x - e))
        cols.append((np.asarray(f(x + e), float) - np.asarray(f(x - e), float)) / (2.0 * h))
    return np.stack(cols, axis=-1)


def second_derivative(f: Callable, x: np.ndarray, h: float | None = None, inside=None) -> np.ndarray:
    """Symmetric second derivative T[..., j, k] = d^2 f / dx_j dx_k at x."""
    x = np.asarray(x, float)
    n = x.size
    h = step2(x) if h is None else h
    f0 = np.asarray(f(x), float)
    T = np.zeros(f0.shape + (n, n))
    for j in range(n):
        ej = np.zeros_like(x)
        ej[j] = h
        _guard(inside, (x + ej, x - ej))
        T[..., j, j] = (np.asarray(f(x + ej), float) - 2.0 * f0 + np.asarray(f(x - ej), float)) / h**2
        for k in range(j):
            ek = np.zeros_like(x)
            ek[k] = h
            _guard(inside, (x + ej + ek, x + ej - ek, x - ej + ek, x - ej - ek))
            m = (
                np.asarray(f(x + ej + ek), float)
                - np.asarray(f(x + ej - ek), float)
                - np.asarray(f(x - ej + ek), float)
                + np.asarray(f(x - ej - ek), float)
            ) / (4.0 * h**2)
            T[..., j, k] = m
            T[..., k, j] = m
    return T


def directional(f: Callable, x: np.ndarray, u: np.ndarray, h: float | None = None, inside=None):
    """Directional derivative of f at x along u (linear in |u|)."""
    x = np.asarray(x, float)
    u = np.asarray(u, float)
    nu = float(np.linalg.norm(u))
    if nu == 0.0:
        return np.zeros_like(np.asarray(f(x), float))
    h = (step1(x) if h is None else h) / nu
    _guard(inside, (x + h * u, x - h * u))
    return (np.asarray(f(x + h * u), float) - np.asarray(f(x - h * u), float)) / (2.0 * h)
