"""Prefix-free codeword length assignments and the age-optimal length problem.

Every constructor returns a :class:`CodeLengths` aligned to the cells with
positive probability. Cells that never occur get no codeword at all.

The age-optimal problem minimizes the zero-wait age

    J(L) = E[L^2] / (2 E[L]) + E[L]

over real lengths satisfying the Kraft inequality. Because ``J(cL) = c J(L)``,
slack in the Kraft sum can always be removed by shrinking the lengths, so
the optimum is Kraft-tight and we may write ``l_i = -log2 q_i`` with ``q`` on
the probability simplex. The solver then runs exponentiated-gradient descent
on ``q`` in log coordinates with a backtracking step.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SolverError

LN2 = math.log(2.0)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 100_000
DEFAULT_RESTARTS = 8

# Integer rounding guard: lengths within this of an integer are not bumped up.
CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class CodeLengths:
    """Codeword lengths for the occurring cells, plus their moments."""

    kind: str
    probs: np.ndarray
    lengths: np.ndarray
    integer_valued: bool
    iterations: int = 0
    residual: float = 0.0

    @property
    def kraft_sum(self):
        return float(np.sum(np.exp2(-self.lengths)))

    @property
    def mean_len(self):
        return code_moments(self.probs, self.lengths)[0]

    @property
    def second_moment(self):
        return code_moments(self.probs, self.lengths)[1]

    @property
    def ess_inf(self):
        return code_moments(self.probs, self.lengths)[2]

    @property
    def objective(self):
        """Zero-wait age ``E[L^2]/(2E[L]) + E[L]``."""
        return zero_wait_objective(self.probs, self.lengths)

    @property
    def moment_ratio(self):
        m, s, _ = code_moments(self.probs, self.lengths)
        return s / (m * m) if m > 0 else float("nan")


def _check_probs(probs):
    p = np.asarray(probs, dtype=float).ravel()
    if p.size == 0:
        raise ParameterError("probability vector is empty")
    if not np.all(np.isfinite(p)) or np.any(p <= 0):
        raise ParameterError("probabilities must be finite and strictly positive "
                             "(drop zero-probability cells first)")
    if abs(p.sum() - 1.0) > 1e-8:
        raise ParameterError(f"probabilities sum to {p.sum():.12g}, not 1")
    return p


def code_moments(probs, lengths):
    """Return ``(E[L], E[L^2], ess inf L)`` for aligned vectors."""
    p = np.asarray(probs, dtype=float)
    l = np.asarray(lengths, dtype=float)
    if p.shape != l.shape:
        raise ParameterError(f"probs and lengths differ in shape: {p.shape} vs {l.shape}")
    mean = float(p @ l)
    second = float(p @ (l * l))
    occurring = p > 0
    ess_inf = float(np.min(l[occurring])) if np.any(occurring) else 0.0
    return mean, second, ess_inf


def zero_wait_objective(probs, lengths):
    mean, second, _ = code_moments(probs, lengths)
    if mean == 0.0:
        # The single-symbol code: nothing is ever transmitted.
        return 0.0
    return second / (2.0 * mean) + mean


def _ceil(lengths):
    return np.ceil(np.asarray(lengths) - CEIL_SLACK)


def shannon_real(probs):
    p = _check_probs(probs)
    return CodeLengths("shannon_real", p, -np.log2(p), integer_valued=False)


def shannon_integer(probs):
    p = _check_probs(probs)
    l = _ceil(-np.log2(p))
    if p.size > 1:
        l = np.maximum(l, 1.0)
    return CodeLengths("shannon_int", p, l, integer_valued=True)


def constant_length(levels, integer_valued=False, probs=None):
    """All ``levels`` codewords get length ``log2 N`` (or its ceiling).

    ``probs`` defaults to the uniform distribution over the levels; pass the
    quantizer's cell probabilities to evaluate moments against the source.
    """
    levels = int(levels)
    if levels < 1:
        raise ParameterError(f"levels must be >= 1, got {levels}")
    p = np.full(levels, 1.0 / levels) if probs is None else _check_probs(probs)
    if p.size != levels:
        raise ParameterError(f"{p.size} probabilities for {levels} levels")
    length = math.log2(levels)
    if integer_valued:
        length = float(math.ceil(length - CEIL_SLACK))
    kind = "const_int" if integer_valued else "const_real"
    return CodeLengths(kind, p, np.full(levels, length), integer_valued=integer_valued)


def _lengths_from_logits(z):
    # l_i = -log2 softmax(z)_i, accurate even when one weight is close to 1.
    k = int(np.argmax(z))
    d = z - z[k]
    e = np.exp(d)
    e[k] = 0.0
    return (math.log1p(float(e.sum())) - d) / LN2


def _kkt_residual(p, l):
    # At the optimum the gradient in l is proportional to 2^{-l}.
    m = p @ l
    s = p @ (l * l)
    q = np.exp2(-l)
    score = p * (l / m + 1.0 - s / (2.0 * m * m)) / q
    avg = q @ score
    return score, float(np.max(np.abs(score / avg - 1.0))) if avg != 0 else float("inf")


def _descend(p, z, tol, max_iters, patience=5):
    l = _lengths_from_logits(z)
    f = zero_wait_objective(p, l)
    step = 0.5
    quiet = 0
    rel = float("inf")
    for it in range(1, max_iters + 1):
        score, kkt = _kkt_residual(p, l)
        if kkt < 1e-9:
            return l, f, it, rel
        q = np.exp2(-l)
        direction = score - q @ score
        scale = np.max(np.abs(direction))
        if not scale > 0:
            return l, f, it, rel
        direction = direction / scale
        while step > 1e-18:
            zn = z + step * direction
            zn = zn - zn.max()
            ln = _lengths_from_logits(zn)
            fn = zero_wait_objective(p, ln)
            if math.isfinite(fn) and fn <= f:
                break
            step *= 0.5
        else:
            # No descent left at floating-point resolution.
            return l, f, it, rel
        rel = (f - fn) / f if f > 0 else 0.0
        z, l, f = zn, ln, fn
        step = min(2.0 * step, 16.0)
        quiet = quiet + 1 if rel < tol else 0
        if quiet >= patience or (rel < tol and kkt < 1e-6):
            return l, f, it, rel
    raise SolverError(
        f"age-optimal solver used its {max_iters}-iteration budget "
        f"(last relative change {rel:.3g})",
        best=l,
        residual=rel,
    )


def aoi_optimal_real(probs, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS,
                     restarts=DEFAULT_RESTARTS):
    """Real-valued lengths minimizing the zero-wait age under the Kraft inequality.

    The search starts at the Shannon lengths and at ``restarts`` seeded
    perturbations of them; the best end point is returned. The result is
    Kraft-tight by construction.

    Raises
    ------
    SolverError
        If every start exhausts ``max_iters``; ``best`` holds the best
        iterate seen.
    """
    p = _check_probs(probs)
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if p.size == 1:
        return CodeLengths("aoi_opt_real", p, np.zeros(1), integer_valued=False)

    base = np.log(p)
    starts = [base] + [
        base + 0.5 * np.random.default_rng(seed).standard_normal(p.size)
        for seed in range(restarts)
    ]
    best = None
    failures = []
    for z0 in starts:
        try:
            l, f, it, rel = _descend(p, z0 - z0.max(), tol, max_iters)
        except SolverError as exc:
            failures.append(exc)
            continue
        if best is None or f < best[1]:
            best = (l, f, it, rel)
    if best is None:
        err = min(failures, key=lambda e: zero_wait_objective(p, e.best))
        raise err
    l, f, it, rel = best
    return CodeLengths("aoi_opt_real", p, l, integer_valued=False,
                       iterations=it, residual=rel)


def aoi_optimal_integer(probs, tol=DEFAULT_TOL, **kwargs):
    """Ceiling of :func:`aoi_optimal_real`; rounding up keeps the Kraft sum <= 1."""
    real = aoi_optimal_real(probs, tol=tol, **kwargs)
    l = _ceil(real.lengths)
    if l.size > 1:
        l = np.maximum(l, 1.0)
    return CodeLengths("aoi_opt_int", real.probs, l, integer_valued=True,
                       iterations=real.iterations, residual=real.residual)


def brute_force_optimum(probs, step=1e-3, window=0.5):
    """Grid-search oracle for the age-optimal lengths with at most three cells.

    A coarse pass runs over Kraft-tight points whose first ``N - 1`` simplex
    weights are multiples of ``step``; a fine pass then scans lengths on a
    ``step`` grid within ``window`` of the coarse winner, closing the Kraft
    sum with the last length. Ties resolve to the lexicographically smallest
    length vector. Returns ``(lengths, objective)``.
    """
    p = _check_probs(probs)
    n = p.size
    if n == 1:
        return np.zeros(1), 0.0
    if n > 3:
        raise ParameterError("the grid oracle handles at most three cells")

    def close(free):
        rest = 1.0 - np.sum(np.exp2(-free), axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            last = np.where(rest > 0, -np.log2(np.where(rest > 0, rest, 1.0)), np.inf)
        return np.concatenate([free, last[..., None]], axis=-1)

    def evaluate(lengths):
        ok = np.all(np.isfinite(lengths), axis=-1)
        l = np.where(ok[..., None], lengths, 1.0)
        m = l @ p
        s = (l * l) @ p
        j = np.where(ok, s / (2.0 * m) + m, np.inf)
        return j

    ticks = np.arange(1, int(round(1.0 / step))) * step
    if n == 2:
        coarse = -np.log2(ticks)[:, None]
    else:
        a, b = np.meshgrid(ticks, ticks, indexing="ij")
        keep = a + b < 1.0 - 0.5 * step
        coarse = np.stack([-np.log2(a[keep]), -np.log2(b[keep])], axis=-1)
    cands = close(coarse)
    j = evaluate(cands)
    centre = cands[int(np.argmin(j)), :-1]

    axes = [np.arange(max(0.0, c - window), c + window + step / 2, step) for c in centre]
    fine = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n - 1)
    cands = np.concatenate([cands, close(fine)])
    j = evaluate(cands)
    order = np.lexsort(tuple(cands[:, k] for k in reversed(range(n))) + (j,))
    k = int(order[0])
    return cands[k], float(j[k])


CODE_KINDS = ("shannon_real", "shannon_int", "aoi_opt_real", "aoi_opt_int",
              "const_real", "const_int")


def make_code(kind, probs, tol=DEFAULT_TOL):
    """Dispatch on a code-kind name (one of :data:`CODE_KINDS`)."""
    p = _check_probs(probs)
    if kind == "shannon_real":
        return shannon_real(p)
    if kind == "shannon_int":
        return shannon_integer(p)
    if kind == "aoi_opt_real":
        return aoi_optimal_real(p, tol=tol)
    if kind == "aoi_opt_int":
        return aoi_optimal_integer(p, tol=tol)
    if kind == "const_real":
        return constant_length(p.size, False, probs=p)
    if kind == "const_int":
        return constant_length(p.size, True, probs=p)
    raise ParameterError(f"unknown code kind {kind!r}; expected one of {CODE_KINDS}")
