"""Seeded Monte-Carlo simulation of the sawtooth age process.

Each update draws a source sample by inverse-CDF, quantizes it, and occupies
the channel for its codeword length. After a delivery the sampler waits
``z(L)`` where ``L`` is the service time of the update just delivered, then
samples again. Between two deliveries the age grows linearly from the
previous service time, so each inter-delivery interval contributes an exact
trapezoid to the age integral.
"""

from dataclasses import dataclass

import numpy as np

from .coder import CodeLengths
from .errors import ParameterError
from .quantizer import QuantizerSpec
from .sampler import ZERO_WAIT, SamplingPolicy
from .sources import SourceModel

GENERATOR = "PCG64"


@dataclass(frozen=True)
class SimConfig:
    num_updates: int
    seed: int = 0
    policy: SamplingPolicy = ZERO_WAIT
    warmup_updates: int = 1000
    batches: int = 32

    def __post_init__(self):
        if self.num_updates < 1:
            raise ParameterError("num_updates must be >= 1")
        if self.warmup_updates < 0:
            raise ParameterError("warmup_updates must be >= 0")
        if self.num_updates <= self.warmup_updates:
            raise ParameterError("num_updates must exceed warmup_updates")
        if not 2 <= self.batches <= self.num_updates - self.warmup_updates:
            raise ParameterError("need at least two batches and one update per batch")
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool):
            raise ParameterError(f"seed must be an integer, got {self.seed!r}")


@dataclass(frozen=True)
class SimResult:
    time_avg_age: float
    std_error: float
    empirical_mse: float
    mse_std_error: float
    total_time: float
    updates_counted: int
    mean_cycle: float
    cycle_std_error: float
    generator: str = GENERATOR


def _batch_se(values):
    values = np.asarray(values, dtype=float)
    return float(np.std(values, ddof=1) / np.sqrt(values.size))


def simulate(model: SourceModel, quant: QuantizerSpec, code: CodeLengths, cfg: SimConfig):
    """Run ``cfg.num_updates`` updates and return time-average age and MSE.

    The first ``cfg.warmup_updates`` inter-delivery intervals are discarded;
    the remainder is split into ``cfg.batches`` consecutive batches whose
    ratio estimates give the standard errors.
    """
    active = quant.active
    if code.lengths.size != int(np.sum(active)):
        raise ParameterError(
            f"code has {code.lengths.size} lengths for {int(np.sum(active))} occurring cells"
        )
    cell_length = np.full(quant.levels, np.nan)
    cell_length[active] = code.lengths

    rng = np.random.default_rng(cfg.seed)
    n = cfg.num_updates
    # Update 0 is the one in service at time zero; it seeds the first interval.
    x = model.inverse_cdf(rng.random(n + 1))
    cell = quant.cell_index(x)
    service = cell_length[cell]
    if np.any(np.isnan(service)):
        raise ParameterError("a sample fell in a cell that has no codeword")

    prev = service[:-1]
    cycle = cfg.policy.waiting(prev) + service[1:]
    area = prev * cycle + 0.5 * cycle * cycle
    sq_err = (x[1:] - quant.reps[cell[1:]]) ** 2

    w = cfg.warmup_updates
    area, cycle, sq_err = area[w:], cycle[w:], sq_err[w:]
    total_area = float(np.sum(area))
    total_time = float(np.sum(cycle))

    splits = np.array_split(np.arange(area.size), cfg.batches)
    batch_age = [np.sum(area[s]) / np.sum(cycle[s]) for s in splits]
    batch_mse = [np.mean(sq_err[s]) for s in splits]
    batch_cycle = [np.mean(cycle[s]) for s in splits]

    return SimResult(
        time_avg_age=total_area / total_time,
        std_error=_batch_se(batch_age),
        empirical_mse=float(np.mean(sq_err)),
        mse_std_error=_batch_se(batch_mse),
        total_time=total_time,
        updates_counted=int(area.size),
        mean_cycle=total_time / area.size,
        cycle_std_error=_batch_se(batch_cycle),
    )
