"""Scalar quantizers: uniform and Lloyd-Max, with MSE distortion and output entropy.

Per-cell integrals use a composite Gauss-Legendre rule applied cell by cell,
so no panel ever straddles a cell boundary. The number of panels per cell is
doubled until two successive refinements agree to the requested tolerance.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._numerics import entropy_bits, gauss_legendre
from .errors import IntegrationError, ParameterError
from .sources import SourceModel

GL_ORDER = 16
MAX_PANELS = 256


class ConvergenceWarning(UserWarning):
    """Lloyd-Max stopped at its iteration budget."""


@dataclass(frozen=True)
class QuantizerSpec:
    """A scalar quantizer evaluated against a source.

    ``endpoints`` has ``levels + 1`` entries spanning the support, ``reps``,
    ``probs`` one entry per cell. ``cell_size`` is set for uniform
    quantizers only.
    """

    kind: str
    endpoints: np.ndarray
    reps: np.ndarray
    probs: np.ndarray
    distortion: float
    entropy_bits: float
    cell_size: Optional[float] = None
    rep_rule: str = "centroid"
    iterations: int = 0
    converged: bool = True
    distortion_history: tuple = field(default=(), repr=False)
    repairs: int = 0
    merged: int = 0

    @property
    def levels(self):
        return int(self.reps.size)

    @property
    def active(self):
        """Mask of cells that occur with positive probability."""
        return self.probs > 0

    @property
    def active_probs(self):
        return self.probs[self.active]

    def cell_index(self, x):
        """Index of the cell containing each ``x`` (right-closed except the last)."""
        return np.searchsorted(self.endpoints[1:-1], x, side="left")


def _moments_fixed(model, a, b, panels):
    # Moments of f about each cell midpoint: int u^k f(mid + u) du, k = 0, 1, 2.
    t, w = gauss_legendre(GL_ORDER)
    mid = 0.5 * (a + b)
    edges = a[:, None] + (b - a)[:, None] * np.linspace(0.0, 1.0, panels + 1)[None, :]
    half = 0.5 * np.diff(edges, axis=1)
    centers = 0.5 * (edges[:, 1:] + edges[:, :-1])
    x = centers[:, :, None] + half[:, :, None] * t[None, None, :]
    wf = half[:, :, None] * w[None, None, :] * model.pdf(x)
    u = x - mid[:, None, None]
    m0 = wf.sum(axis=(1, 2))
    m1 = (wf * u).sum(axis=(1, 2))
    m2 = (wf * u * u).sum(axis=(1, 2))
    return m0, m1, m2


def cell_moments(model: SourceModel, endpoints, abs_tol=None):
    """Per-cell ``(mass, first, second)`` moments of the pdf about cell midpoints."""
    tol = model.abs_tol if abs_tol is None else abs_tol
    e = np.asarray(endpoints, dtype=float)
    a, b = e[:-1], e[1:]
    panels = 1
    prev = _moments_fixed(model, a, b, panels)
    while True:
        panels *= 2
        cur = _moments_fixed(model, a, b, panels)
        err = max(np.max(np.abs(c - p)) for c, p in zip(cur, prev))
        if err <= tol:
            return cur
        if panels >= MAX_PANELS:
            raise IntegrationError(
                f"cell moments did not settle below {tol:.3g} with {panels} panels",
                residual=err,
            )
        prev = cur


def _validate_partition(model, endpoints, reps=None):
    e = np.asarray(endpoints, dtype=float)
    if e.ndim != 1 or e.size < 2:
        raise ParameterError("endpoints need at least two entries")
    if np.any(np.diff(e) <= 0):
        raise ParameterError("endpoints must be strictly increasing")
    scale = max(1.0, abs(model.support_lo), abs(model.support_hi))
    if abs(e[0] - model.support_lo) > 1e-9 * scale or abs(e[-1] - model.support_hi) > 1e-9 * scale:
        raise ParameterError(
            f"endpoints [{e[0]}, {e[-1]}] do not span the support "
            f"[{model.support_lo}, {model.support_hi}]"
        )
    if reps is not None:
        r = np.asarray(reps, dtype=float)
        if r.shape != (e.size - 1,):
            raise ParameterError(f"expected {e.size - 1} representation points, got {r.size}")
        return e, r
    return e


def _cell_distortion(e, reps, m0, m1, m2):
    d = reps - 0.5 * (e[:-1] + e[1:])
    return m2 - 2.0 * d * m1 + d * d * m0


def distortion_of(model: SourceModel, endpoints, reps):
    """Mean-squared error of the quantizer given by ``endpoints`` and ``reps``.

    Sums ``int_{a_{i-1}}^{a_i} (x - c_i)^2 f(x) dx`` over cells.
    """
    e, r = _validate_partition(model, endpoints, reps)
    m0, m1, m2 = cell_moments(model, e)
    return float(np.sum(_cell_distortion(e, r, m0, m1, m2)))


def _evaluate(model, e, rep_rule):
    m0, m1, m2 = cell_moments(model, e)
    mid = 0.5 * (e[:-1] + e[1:])
    pos = m0 > 0
    if rep_rule == "centroid":
        reps = mid.copy()
        reps[pos] = mid[pos] + m1[pos] / m0[pos]
    elif rep_rule == "midpoint":
        reps = mid
    else:
        raise ParameterError(f"unknown representation rule {rep_rule!r}")
    dist = float(np.sum(_cell_distortion(e, reps, m0, m1, m2)))
    probs = np.where(pos, m0, 0.0)
    probs = probs / probs.sum()
    return reps, probs, dist


def build_uniform(model: SourceModel, levels: int, rep_rule="centroid"):
    """Uniform quantizer with ``levels`` equal cells over the support.

    ``rep_rule`` is ``"centroid"`` (conditional means, the MSE-optimal choice
    for a fixed partition) or ``"midpoint"``.
    """
    levels = int(levels)
    if levels < 1:
        raise ParameterError(f"levels must be >= 1, got {levels}")
    e = np.linspace(model.support_lo, model.support_hi, levels + 1)
    e[0], e[-1] = model.support_lo, model.support_hi
    reps, probs, dist = _evaluate(model, e, rep_rule)
    return QuantizerSpec(
        kind="uniform",
        endpoints=e,
        reps=reps,
        probs=probs,
        distortion=dist,
        entropy_bits=entropy_bits(probs),
        cell_size=model.width / levels,
        rep_rule=rep_rule,
    )


def _repair_empty(e, m0, m1):
    # Merge the first empty cell into a neighbour, then split the heaviest
    # cell at its centroid so the level count is preserved.
    empty = int(np.flatnonzero(m0 <= 0)[0])
    heavy = int(np.argmax(m0))
    a, b = e[heavy], e[heavy + 1]
    cut = 0.5 * (a + b) + m1[heavy] / m0[heavy]
    if not a < cut < b:
        cut = 0.5 * (a + b)
    drop = empty + 1 if empty + 1 < e.size - 1 else empty
    return np.sort(np.append(np.delete(e, drop), cut))


def build_lloyd_max(model: SourceModel, levels: int, tol=1e-12, max_iters=10_000):
    """Lloyd-Max quantizer started from the uniform partition.

    Alternates the centroid step and the midpoint (nearest-neighbour)
    boundary step until the relative drop in distortion is at most ``tol``.
    If ``max_iters`` is reached the result carries ``converged=False`` and a
    :class:`ConvergenceWarning` is issued.
    """
    levels = int(levels)
    if levels < 1:
        raise ParameterError(f"levels must be >= 1, got {levels}")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")

    e = np.linspace(model.support_lo, model.support_hi, levels + 1)
    history = []
    repairs = 0
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        m0, m1, m2 = cell_moments(model, e)
        if np.any(m0 <= 0) and levels > 1:
            e = _repair_empty(e, m0, m1)
            repairs += 1
            continue
        mid = 0.5 * (e[:-1] + e[1:])
        reps = mid + m1 / m0
        dist = float(np.sum(_cell_distortion(e, reps, m0, m1, m2)))
        history.append(dist)
        if len(history) > 1 and (history[-2] - dist) <= tol * history[-2]:
            converged = True
            break
        if levels == 1:
            converged = True
            break
        new = np.empty_like(e)
        new[0], new[-1] = e[0], e[-1]
        new[1:-1] = 0.5 * (reps[:-1] + reps[1:])
        e = new

    merged = 0
    keep = np.concatenate([[True], np.diff(reps) > 1e-12 * model.width])
    if not np.all(keep):
        merged = int(np.sum(~keep))
        reps = reps[keep]
        e = np.concatenate([e[:-1][keep], [e[-1]]])
        m0, m1, m2 = cell_moments(model, e)
        reps = 0.5 * (e[:-1] + e[1:]) + m1 / m0
        dist = float(np.sum(_cell_distortion(e, reps, m0, m1, m2)))

    probs = m0 / m0.sum()
    if not converged:
        warnings.warn(
            f"Lloyd-Max with {levels} levels stopped after {max_iters} iterations "
            f"(last relative change {(history[-2] - history[-1]) / history[-2]:.3g})",
            ConvergenceWarning,
            stacklevel=2,
        )
    return QuantizerSpec(
        kind="lloyd_max",
        endpoints=e,
        reps=reps,
        probs=probs,
        distortion=dist,
        entropy_bits=entropy_bits(probs),
        iterations=it,
        converged=converged,
        distortion_history=tuple(history),
        repairs=repairs,
        merged=merged,
    )
