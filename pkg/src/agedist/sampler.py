"""Average age under i.i.d. service with deterministic waiting.

For service times ``L`` and a waiting rule ``Z = z(L)`` inserted after each
delivery, the long-run average age is

    AoI = E[(L + Z)^2] / (2 E[L + Z]) + E[L].

Waiting rules come from the threshold family ``z(l) = max(0, beta - l)``,
which contains zero-wait as ``beta = 0``.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ._numerics import entropy_bits, golden_section
from .coder import CodeLengths
from .errors import DegenerateCodeError, ParameterError

_SCAN_POINTS = 257


@dataclass(frozen=True)
class SamplingPolicy:
    kind: str = "zero_wait"
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero_wait", "threshold"):
            raise ParameterError(f"unknown sampling policy {self.kind!r}")
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ParameterError(f"beta must be finite and >= 0, got {self.beta}")
        if self.kind == "zero_wait" and self.beta != 0:
            raise ParameterError("zero-wait policy takes no threshold")

    @classmethod
    def zero_wait(cls):
        return cls("zero_wait", 0.0)

    @classmethod
    def threshold(cls, beta):
        return cls("threshold", float(beta))

    def waiting(self, service):
        """Waiting time inserted after a service of the given duration."""
        service = np.asarray(service, dtype=float)
        if self.kind == "zero_wait":
            return np.zeros_like(service)
        return np.maximum(0.0, self.beta - service)


ZERO_WAIT = SamplingPolicy.zero_wait()


@dataclass(frozen=True)
class AoIReport:
    """Average age with its two terms and the ``(3/2) H`` floor.

    ``aoi == second_moment_term + mean_term``.
    """

    aoi: float
    second_moment_term: float
    mean_term: float
    lower_bound: float
    policy: SamplingPolicy
    search_upper: Optional[float] = None


@dataclass(frozen=True)
class ZeroWaitCheck:
    holds: bool
    margin: float


def _aligned(probs, code):
    if probs is None:
        return code.probs
    p = np.asarray(probs, dtype=float)
    if p.shape != code.lengths.shape:
        raise ParameterError(
            f"{p.size} probabilities for a code with {code.lengths.size} lengths"
        )
    return p


def aoi_analytic(probs, code: CodeLengths, policy: SamplingPolicy = ZERO_WAIT):
    """Evaluate the average age of ``code`` under ``policy``.

    ``probs`` may be ``None`` to use the probabilities stored on the code.

    Raises
    ------
    DegenerateCodeError
        When ``E[L + Z] = 0`` (all lengths zero and no waiting).
    """
    p = _aligned(probs, code)
    l = code.lengths
    y = l + policy.waiting(l)
    cycle = float(p @ y)
    if cycle <= 0:
        raise DegenerateCodeError("E[L + Z] is zero; the average age is undefined")
    second = float(p @ (y * y)) / (2.0 * cycle)
    mean = float(p @ l)
    return AoIReport(
        aoi=second + mean,
        second_moment_term=second,
        mean_term=mean,
        lower_bound=1.5 * entropy_bits(p),
        policy=policy,
    )


def zero_wait_condition(code: CodeLengths):
    """Check ``ess inf L >= E[L^2] / (2 E[L])``; zero-wait is optimal iff it holds."""
    mean, second = code.mean_len, code.second_moment
    if mean <= 0:
        raise DegenerateCodeError("E[L] is zero; the zero-wait condition is undefined")
    margin = code.ess_inf - second / (2.0 * mean)
    return ZeroWaitCheck(holds=bool(margin >= 0), margin=float(margin))


def ess_inf_approximation(max_density, cell_size):
    """High-resolution estimate ``-log2(delta M)`` of the shortest Shannon length."""
    return -math.log2(cell_size * max_density)


def optimize_threshold(probs, code: CodeLengths, tol=1e-10):
    """Best threshold ``beta`` in ``[0, max l + E[L]]`` for the waiting rule.

    A uniform scan brackets the minimum, golden-section search refines it to
    ``tol``, and the zero-wait value is kept if nothing beats it. Returns
    ``(beta_star, report)``; ``report.search_upper`` records the interval end.
    """
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    p = _aligned(probs, code)
    upper = float(np.max(code.lengths) + p @ code.lengths)

    def age(beta):
        return aoi_analytic(p, code, SamplingPolicy.threshold(beta)).aoi

    grid = np.linspace(0.0, upper, _SCAN_POINTS)
    values = np.array([age(b) for b in grid])
    j = int(np.argmin(values))
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
    beta, value = golden_section(age, lo, hi, tol=tol)

    candidates = [(value, beta), (float(values[j]), float(grid[j])), (age(0.0), 0.0)]
    value, beta = min(candidates, key=lambda c: (c[0], c[1]))
    policy = SamplingPolicy.zero_wait() if beta == 0.0 else SamplingPolicy.threshold(beta)
    report = aoi_analytic(p, code, policy)
    return beta, replace(report, search_upper=upper)
