"""Small numerical helpers: golden-section search, Gauss-Legendre rules, entropy."""

import functools
import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section(f, a, b, tol=1e-10, max_iters=500):
    """Minimize a unimodal scalar function on ``[a, b]``.

    Returns ``(x, f(x))`` for the best point evaluated. The bracket shrinks
    by the inverse golden ratio each step until its width is below ``tol``.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)

    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    for _ in range(max_iters):
        if h <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            h = INV_PHI * h
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = INV_PHI * h
            d = a + INV_PHI * h
            fd = f(d)
    if fc < fd:
        return c, fc
    return d, fd


@functools.lru_cache(maxsize=None)
def gauss_legendre(order):
    """Nodes and weights of the ``order``-point rule on [-1, 1] (read-only)."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def entropy_bits(probs):
    """Shannon entropy in bits, skipping zero-probability entries."""
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))
