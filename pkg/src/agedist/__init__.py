"""Joint sampling, quantization and coding for timely status updates.

Quantize a bounded analog source, assign prefix-free codeword lengths, and
evaluate the resulting average age of information against the mean-squared
distortion, both analytically and by simulation.
"""

__version__ = "0.1.0"

from .errors import (
    AgedistError,
    DegenerateCodeError,
    DegenerateSourceError,
    IntegrationError,
    ParameterError,
    SolverError,
)
from .sources import (
    SourceModel,
    integrate,
    inverse_cdf_sample,
    make_source,
    make_truncated_exponential,
    make_truncated_gaussian,
    make_uniform_source,
)
from .quantizer import (
    ConvergenceWarning,
    QuantizerSpec,
    build_lloyd_max,
    build_uniform,
    distortion_of,
)
from .coder import (
    CODE_KINDS,
    CodeLengths,
    aoi_optimal_integer,
    aoi_optimal_real,
    brute_force_optimum,
    code_moments,
    constant_length,
    make_code,
    shannon_integer,
    shannon_real,
    zero_wait_objective,
)
from .sampler import (
    ZERO_WAIT,
    AoIReport,
    SamplingPolicy,
    ZeroWaitCheck,
    aoi_analytic,
    optimize_threshold,
    zero_wait_condition,
)
from .mc_sim import SimConfig, SimResult, simulate
from .experiments import (
    AsymptoticsReport,
    SweepRow,
    emit_csv,
    emit_plot,
    fit_asymptotics,
    reproduce_figure,
    run_sweep,
)

__all__ = [
    "__version__",
    "AgedistError",
    "AoIReport",
    "AsymptoticsReport",
    "CODE_KINDS",
    "CodeLengths",
    "ConvergenceWarning",
    "DegenerateCodeError",
    "DegenerateSourceError",
    "IntegrationError",
    "ParameterError",
    "QuantizerSpec",
    "SamplingPolicy",
    "SimConfig",
    "SimResult",
    "SolverError",
    "SourceModel",
    "SweepRow",
    "ZERO_WAIT",
    "ZeroWaitCheck",
    "aoi_analytic",
    "aoi_optimal_integer",
    "aoi_optimal_real",
    "brute_force_optimum",
    "build_lloyd_max",
    "build_uniform",
    "code_moments",
    "constant_length",
    "distortion_of",
    "emit_csv",
    "emit_plot",
    "fit_asymptotics",
    "integrate",
    "inverse_cdf_sample",
    "make_code",
    "make_source",
    "make_truncated_exponential",
    "make_truncated_gaussian",
    "make_uniform_source",
    "optimize_threshold",
    "reproduce_figure",
    "run_sweep",
    "shannon_integer",
    "shannon_real",
    "simulate",
    "zero_wait_condition",
    "zero_wait_objective",
]
