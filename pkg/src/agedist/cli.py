"""Command-line front end: ``agedist {evaluate,sweep,simulate,solve-code}``.

Every command reads an optional JSON config (``--config``); flags override
individual fields. The resolved config is echoed into output metadata so a
CSV is enough to rerun the computation.

Exit status: 0 on success, 1 when a computation failed or did not converge,
2 on usage or configuration errors.
"""

import argparse
import json
import os
import sys
import warnings
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

from . import __version__
from .coder import CODE_KINDS, DEFAULT_TOL, brute_force_optimum, make_code
from .errors import AgedistError, ParameterError
from .experiments import (
    DEFAULT_LEVELS,
    DENSE_LEVELS,
    FIGURES,
    SweepRow,
    emit_csv,
    fit_asymptotics,
    reproduce_figure,
    run_sweep,
    emit_plot,
    sweep_metadata,
)
from .mc_sim import GENERATOR, SimConfig, simulate
from .quantizer import ConvergenceWarning, build_lloyd_max, build_uniform
from .sampler import SamplingPolicy, aoi_analytic, optimize_threshold, zero_wait_condition
from .sources import make_truncated_exponential, make_truncated_gaussian, make_uniform_source

OUT_DIR_ENV = "AGEDIST_OUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ParameterError):
    """The configuration file or a flag value is malformed."""


@dataclass
class SourceConfig:
    family: str = "exp"
    rate: float = 1.0
    mean: float = 0.0
    std: float = 1.0
    lo: Optional[float] = None
    hi: Optional[float] = None


@dataclass
class QuantizerConfig:
    kind: str = "uniform"
    levels: int = 32
    reps: str = "centroid"
    tol: float = 1e-12
    max_iters: int = 10_000


@dataclass
class CodeConfig:
    kind: str = "aoi_opt_real"
    tol: float = DEFAULT_TOL
    probs: Optional[List[float]] = None


@dataclass
class PolicyConfig:
    kind: str = "zero_wait"
    beta: float = 0.0
    tol: float = 1e-10


@dataclass
class SimConfigSection:
    seed: int = 0
    updates: int = 1_000_000
    warmup: int = 1000


@dataclass
class SweepConfig:
    figure: Optional[str] = None
    levels: Optional[List[int]] = None
    dense: bool = False


@dataclass
class OutputConfig:
    out_dir: Optional[str] = None
    csv: Optional[str] = None


@dataclass
class RunConfig:
    source: SourceConfig = field(default_factory=SourceConfig)
    quantizer: QuantizerConfig = field(default_factory=QuantizerConfig)
    code: CodeConfig = field(default_factory=CodeConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    sim: SimConfigSection = field(default_factory=SimConfigSection)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
        sections = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in sections:
                raise ConfigError(f"config.{key}: unknown section (expected one of {sorted(sections)})")
            kwargs[key] = _section(sections[key].default_factory, value, f"config.{key}")
        cfg = cls(**kwargs)
        _validate(cfg)
        return cfg


_TYPES = {
    "rate": float, "mean": float, "std": float, "lo": float, "hi": float, "tol": float,
    "beta": float, "levels": int, "max_iters": int, "seed": int, "updates": int,
    "warmup": int, "dense": bool,
}


def _coerce(value, kind, where):
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _section(factory, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    obj = factory()
    names = {f.name for f in fields(obj)}
    for key, value in data.items():
        path = f"{where}.{key}"
        if key not in names:
            raise ConfigError(f"{path}: unknown key (expected one of {sorted(names)})")
        if value is None:
            setattr(obj, key, None)
        elif key == "probs":
            if not isinstance(value, list):
                raise ConfigError(f"{path}: expected a list of numbers")
            setattr(obj, key, [_coerce(v, float, f"{path}[{i}]") for i, v in enumerate(value)])
        elif key == "levels" and isinstance(value, list):
            setattr(obj, key, [_coerce(v, int, f"{path}[{i}]") for i, v in enumerate(value)])
        elif key in _TYPES:
            setattr(obj, key, _coerce(value, _TYPES[key], path))
        else:
            if not isinstance(value, str):
                raise ConfigError(f"{path}: expected a string, got {value!r}")
            setattr(obj, key, value)
    return obj


def _validate(cfg):
    if cfg.source.family not in ("exp", "gauss", "uniform"):
        raise ConfigError(f"config.source.family: unknown family {cfg.source.family!r}")
    if cfg.quantizer.kind not in ("uniform", "lloyd_max"):
        raise ConfigError(f"config.quantizer.kind: unknown kind {cfg.quantizer.kind!r}")
    if cfg.quantizer.reps not in ("centroid", "midpoint"):
        raise ConfigError(f"config.quantizer.reps: unknown rule {cfg.quantizer.reps!r}")
    if isinstance(cfg.quantizer.levels, list):
        raise ConfigError("config.quantizer.levels: give a single integer (use sweep.levels for lists)")
    if cfg.code.kind not in CODE_KINDS:
        raise ConfigError(f"config.code.kind: unknown kind {cfg.code.kind!r}")
    if cfg.policy.kind not in ("zero_wait", "threshold", "threshold_search"):
        raise ConfigError(f"config.policy.kind: unknown kind {cfg.policy.kind!r}")
    if cfg.sweep.figure is not None and str(cfg.sweep.figure) not in FIGURES:
        raise ConfigError(f"config.sweep.figure: expected one of {sorted(FIGURES)}")
    if cfg.sweep.levels is not None and not isinstance(cfg.sweep.levels, list):
        cfg.sweep.levels = [cfg.sweep.levels]


def load_config(path):
    """Parse and validate a JSON config file into a :class:`RunConfig`."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return RunConfig.from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def dump_config(cfg):
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)


def build_source(sc: SourceConfig):
    if sc.family == "exp":
        lo = 0.0 if sc.lo is None else sc.lo
        hi = 15.0 if sc.hi is None else sc.hi
        return make_truncated_exponential(sc.rate, lo, hi)
    if sc.family == "gauss":
        lo = -5.0 if sc.lo is None else sc.lo
        hi = 5.0 if sc.hi is None else sc.hi
        return make_truncated_gaussian(sc.mean, sc.std, lo, hi)
    lo = 0.0 if sc.lo is None else sc.lo
    hi = 1.0 if sc.hi is None else sc.hi
    return make_uniform_source(lo, hi)


def build_quantizer(model, qc: QuantizerConfig):
    if qc.kind == "uniform":
        return build_uniform(model, qc.levels, rep_rule=qc.reps)
    return build_lloyd_max(model, qc.levels, tol=qc.tol, max_iters=qc.max_iters)


def _parse_int_list(text, what):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--{what}: expected comma-separated integers, got {text!r}") from exc
    return values


def _parse_probs(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--probs: expected comma-separated numbers, got {text!r}") from exc


def _resolve(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.source:
        cfg.source.family = args.source
    if args.quantizer:
        cfg.quantizer.kind = args.quantizer
    if args.code:
        cfg.code.kind = args.code
    if args.seed is not None:
        cfg.sim.seed = args.seed
    if args.levels is not None:
        levels = _parse_int_list(args.levels, "levels")
        if args.command == "sweep":
            cfg.sweep.levels = levels
        elif len(levels) != 1:
            raise ConfigError("--levels: this command takes a single level count")
        else:
            cfg.quantizer.levels = levels[0]
    if getattr(args, "dense_sweep", False):
        cfg.sweep.dense = True
    if getattr(args, "figure", None):
        cfg.sweep.figure = args.figure
    if getattr(args, "updates", None) is not None:
        cfg.sim.updates = args.updates
    if getattr(args, "probs", None):
        cfg.code.probs = _parse_probs(args.probs)
    if getattr(args, "beta", None) is not None:
        cfg.policy.kind, cfg.policy.beta = "threshold", args.beta
    if getattr(args, "threshold_search", False):
        cfg.policy.kind = "threshold_search"
    if getattr(args, "csv", None):
        cfg.output.csv = args.csv
    out_dir = args.out_dir or os.environ.get(OUT_DIR_ENV) or cfg.output.out_dir
    cfg.output.out_dir = out_dir or "."
    _validate(cfg)
    return cfg


def _print_block(title, items, out):
    out.write(f"[{title}]\n")
    for key, value in items:
        if isinstance(value, float):
            value = f"{value:.12g}"
        out.write(f"{key} = {value}\n")


def _policy_from(pc: PolicyConfig):
    if pc.kind == "threshold":
        return SamplingPolicy.threshold(pc.beta)
    return SamplingPolicy.zero_wait()


def cmd_evaluate(cfg, out):
    model = build_source(cfg.source)
    quant = build_quantizer(model, cfg.quantizer)
    probs = quant.active_probs
    code = make_code(cfg.code.kind, probs, tol=cfg.code.tol)
    upper = None
    if cfg.policy.kind == "threshold_search":
        _, report = optimize_threshold(probs, code, tol=cfg.policy.tol)
        upper = report.search_upper
    else:
        report = aoi_analytic(probs, code, _policy_from(cfg.policy))
    zw = zero_wait_condition(code)

    _print_block("source", [("name", model.name), ("h_bits", model.diff_entropy_bits),
                            ("max_density", model.max_density)], out)
    _print_block("quantizer", [("kind", quant.kind), ("levels", quant.levels),
                               ("cell_size", quant.cell_size if quant.cell_size else "n/a"),
                               ("distortion", quant.distortion),
                               ("log2_distortion", _log2(quant.distortion)),
                               ("entropy_bits", quant.entropy_bits),
                               ("converged", quant.converged)], out)
    _print_block("code", [("kind", code.kind), ("kraft_sum", code.kraft_sum),
                          ("mean_len", code.mean_len), ("second_moment", code.second_moment),
                          ("ess_inf", code.ess_inf), ("moment_ratio", code.moment_ratio)], out)
    policy_items = [("kind", report.policy.kind), ("beta", report.policy.beta)]
    if upper is not None:
        policy_items.append(("search_upper", upper))
    _print_block("policy", policy_items, out)
    _print_block("aoi", [("aoi", report.aoi), ("second_moment_term", report.second_moment_term),
                         ("mean_term", report.mean_term), ("lower_bound", report.lower_bound),
                         ("zero_wait_holds", zw.holds), ("zero_wait_margin", zw.margin)], out)

    if cfg.output.csv:
        row = SweepRow(model.name, quant.kind, code.kind, quant.levels, quant.cell_size,
                       quant.distortion, _log2(quant.distortion), quant.entropy_bits,
                       report.aoi, report.lower_bound, zw.margin, code.moment_ratio)
        path = os.path.join(cfg.output.out_dir, cfg.output.csv)
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        emit_csv([row], path, _meta(cfg, model, policy=report.policy.kind,
                                    beta=repr(report.policy.beta)))
        out.write(f"csv = {path}\n")
    return EXIT_OK if quant.converged else EXIT_FAIL


def _log2(x):
    import math
    return math.log2(x)


def _meta(cfg, model, **extra):
    levels = [cfg.quantizer.levels]
    meta = sweep_metadata(model, levels, cfg.quantizer.reps, cfg.code.tol,
                          cfg.quantizer.tol, cfg.quantizer.max_iters, **extra)
    meta["seed"] = cfg.sim.seed
    meta["config"] = json.dumps(cfg.to_dict(), sort_keys=True)
    return meta


def cmd_sweep(cfg, out):
    model = build_source(cfg.source)
    if cfg.sweep.dense:
        levels = list(DENSE_LEVELS)
    elif cfg.sweep.levels is not None:
        levels = list(cfg.sweep.levels)
    else:
        levels = list(DEFAULT_LEVELS)
    if not levels:
        raise ConfigError("sweep: the levels list is empty")
    if min(levels) < 2:
        raise ConfigError("sweep: every level count must be >= 2")
    os.makedirs(cfg.output.out_dir, exist_ok=True)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        if cfg.sweep.figure:
            rows, csv_path, svg_path = reproduce_figure(
                cfg.sweep.figure, model, cfg.output.out_dir, levels, rep_rule=cfg.quantizer.reps,
                metadata={"seed": cfg.sim.seed, "config": json.dumps(cfg.to_dict(), sort_keys=True)})
        else:
            rows = run_sweep(model, levels, rep_rule=cfg.quantizer.reps, code_tol=cfg.code.tol,
                             lloyd_tol=cfg.quantizer.tol, lloyd_max_iters=cfg.quantizer.max_iters)
            stem = cfg.output.csv or f"sweep_{cfg.source.family}"
            stem = stem[:-4] if stem.endswith(".csv") else stem
            csv_path = os.path.join(cfg.output.out_dir, stem + ".csv")
            svg_path = os.path.join(cfg.output.out_dir, stem + ".svg")
            meta = sweep_metadata(model, levels, cfg.quantizer.reps, cfg.code.tol,
                                  cfg.quantizer.tol, cfg.quantizer.max_iters, seed=cfg.sim.seed,
                                  config=json.dumps(cfg.to_dict(), sort_keys=True))
            emit_csv(rows, csv_path, meta)
            emit_plot(rows, svg_path, title=model.name)
    failed = [w for w in caught if issubclass(w.category, ConvergenceWarning)]
    for w in failed:
        out.write(f"warning = {w.message}\n")

    out.write(f"rows = {len(rows)}\ncsv = {csv_path}\nsvg = {svg_path}\n")
    for kind in ("aoi_opt_real", "shannon_real"):
        try:
            rep = fit_asymptotics(rows, model, code_kind=kind)
        except ParameterError:
            continue
        _print_block(f"asymptotics {kind}", [
            ("levels_used", " ".join(map(str, rep.levels_used))),
            ("slope_estimate", rep.slope_estimate),
            ("intercept_gap", rep.intercept_gap),
            ("integer_gap_max", rep.integer_gap_max),
            ("shannon_vs_optimal_gap", rep.shannon_vs_optimal_gap)], out)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_simulate(cfg, out):
    model = build_source(cfg.source)
    quant = build_quantizer(model, cfg.quantizer)
    probs = quant.active_probs
    code = make_code(cfg.code.kind, probs, tol=cfg.code.tol)
    if cfg.policy.kind == "threshold_search":
        beta, _ = optimize_threshold(probs, code, tol=cfg.policy.tol)
        policy = SamplingPolicy.zero_wait() if beta == 0 else SamplingPolicy.threshold(beta)
    else:
        policy = _policy_from(cfg.policy)
    analytic = aoi_analytic(probs, code, policy)
    sim_cfg = SimConfig(num_updates=cfg.sim.updates, seed=cfg.sim.seed, policy=policy,
                        warmup_updates=min(cfg.sim.warmup, max(cfg.sim.updates - 32, 0)))
    res = simulate(model, quant, code, sim_cfg)

    def z(diff, se):
        return diff / se if se > 0 else (0.0 if diff == 0 else float("inf"))

    _print_block("simulation", [("generator", GENERATOR), ("seed", cfg.sim.seed),
                                ("updates_counted", res.updates_counted),
                                ("policy", policy.kind), ("beta", policy.beta)], out)
    _print_block("age", [("analytic", analytic.aoi), ("empirical", res.time_avg_age),
                         ("std_error", res.std_error),
                         ("z", z(res.time_avg_age - analytic.aoi, res.std_error))], out)
    _print_block("mse", [("analytic", quant.distortion), ("empirical", res.empirical_mse),
                         ("std_error", res.mse_std_error),
                         ("z", z(res.empirical_mse - quant.distortion, res.mse_std_error))], out)
    _print_block("cycle", [("empirical_mean", res.mean_cycle), ("std_error", res.cycle_std_error),
                           ("total_time", res.total_time)], out)
    return EXIT_OK if quant.converged else EXIT_FAIL


def cmd_solve_code(cfg, out, oracle=False):
    if cfg.code.probs is not None:
        probs = cfg.code.probs
    else:
        model = build_source(cfg.source)
        probs = build_quantizer(model, cfg.quantizer).active_probs
    try:
        code = make_code("aoi_opt_real", probs, tol=cfg.code.tol)
    except ParameterError as exc:
        raise ConfigError(f"probs: {exc}") from exc
    _print_block("solution", [("lengths", " ".join(f"{v:.12g}" for v in code.lengths)),
                              ("objective", code.objective), ("kraft_sum", code.kraft_sum),
                              ("iterations", code.iterations)], out)
    if oracle:
        if len(code.probs) > 3:
            raise ConfigError("--oracle: the grid oracle handles at most three probabilities")
        lengths, value = brute_force_optimum(code.probs)
        _print_block("oracle", [("lengths", " ".join(f"{v:.6g}" for v in lengths)),
                                ("objective", value), ("gap", value - code.objective)], out)
        if abs(value - code.objective) > 1e-3:
            return EXIT_FAIL
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="agedist", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"agedist {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out-dir", help=f"output directory (env {OUT_DIR_ENV})")
    common.add_argument("--seed", type=int)
    common.add_argument("--levels", help="level count, or comma-separated list for sweep")
    common.add_argument("--source", choices=("exp", "gauss", "uniform"))
    common.add_argument("--quantizer", choices=("uniform", "lloyd_max"))
    common.add_argument("--code", choices=CODE_KINDS)
    common.add_argument("--print-config", action="store_true",
                        help="print the resolved configuration as JSON and exit")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("evaluate", parents=[common], help="age, distortion and entropy of one design")
    p.add_argument("--beta", type=float, help="threshold waiting policy")
    p.add_argument("--threshold-search", action="store_true", help="optimize the threshold")
    p.add_argument("--csv", help="also write a one-row CSV (relative to --out-dir)")

    p = sub.add_parser("sweep", parents=[common], help="sweep N and write CSV + SVG")
    p.add_argument("--figure", choices=sorted(FIGURES), help="reproduce one figure's curves")
    p.add_argument("--dense-sweep", action="store_true", help="every N from 2 to 32")
    p.add_argument("--csv", help="CSV file name for a non-figure sweep")

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo check of age and MSE")
    p.add_argument("--updates", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--threshold-search", action="store_true")

    p = sub.add_parser("solve-code", parents=[common], help="age-optimal real code lengths")
    p.add_argument("--probs", help="comma-separated probabilities")
    p.add_argument("--oracle", action="store_true", help="cross-check with a grid search (N <= 3)")
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        if args.print_config:
            out.write(dump_config(cfg) + "\n")
            return EXIT_OK
        if args.command == "evaluate":
            return cmd_evaluate(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        return cmd_solve_code(cfg, out, oracle=args.oracle)
    except ConfigError as exc:
        sys.stderr.write(f"agedist {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except ParameterError as exc:
        sys.stderr.write(f"agedist {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except (AgedistError, OSError) as exc:
        sys.stderr.write(f"agedist {args.command}: failed: {exc}\n")
        return EXIT_FAIL


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
