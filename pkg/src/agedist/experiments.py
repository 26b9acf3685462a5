"""Sweeps over quantizer resolution, asymptotic fits, and CSV/SVG output."""

import csv
import datetime
import math
import os
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from . import __version__
from .coder import CODE_KINDS, DEFAULT_TOL, make_code
from .errors import AgedistError, ParameterError
from .quantizer import build_lloyd_max, build_uniform
from .sampler import aoi_analytic, zero_wait_condition
from .sources import SourceModel

DEFAULT_LEVELS = (2, 4, 8, 16, 32)
DENSE_LEVELS = tuple(range(2, 33))
SCHEMA = "agedist-sweep/1"

QUANTIZER_KINDS = ("uniform", "lloyd_max")
DEFAULT_PAIRING = {
    "uniform": ("shannon_real", "shannon_int", "aoi_opt_real", "aoi_opt_int"),
    "lloyd_max": ("const_real", "const_int"),
}

# Code kinds and quantizers drawn in each figure of the age/log-distortion study.
FIGURES = {
    "1": (("uniform",), ("shannon_real", "shannon_int", "aoi_opt_real", "aoi_opt_int")),
    "2": (("uniform", "lloyd_max"), ("shannon_real", "aoi_opt_real", "const_real")),
    "3": (("uniform", "lloyd_max"), ("shannon_int", "aoi_opt_int", "const_int")),
}

INTEGER_PAIRS = (("shannon_int", "shannon_real"), ("aoi_opt_int", "aoi_opt_real"))


class SweepError(AgedistError):
    """A sweep combination failed; ``combination`` names it."""

    def __init__(self, message, combination):
        super().__init__(message)
        self.combination = combination


@dataclass(frozen=True)
class SweepRow:
    source_id: str
    quantizer_kind: str
    code_kind: str
    levels: int
    delta: Optional[float]
    distortion: float
    log2_distortion: float
    entropy_bits: float
    aoi: float
    lower_bound: float
    zero_wait_margin: float
    moment_ratio: float


CSV_COLUMNS = tuple(f.name for f in fields(SweepRow))


@dataclass(frozen=True)
class AsymptoticsReport:
    source_id: str
    code_kind: str
    levels_used: tuple
    slope_estimate: float
    intercept_gap: float
    integer_gap_max: float
    shannon_vs_optimal_gap: float


def _build_quantizer(model, kind, levels, rep_rule, lloyd_tol, lloyd_max_iters):
    if kind == "uniform":
        return build_uniform(model, levels, rep_rule=rep_rule)
    if kind == "lloyd_max":
        return build_lloyd_max(model, levels, tol=lloyd_tol, max_iters=lloyd_max_iters)
    raise ParameterError(f"unknown quantizer kind {kind!r}; expected one of {QUANTIZER_KINDS}")


def run_sweep(model: SourceModel, levels_list=DEFAULT_LEVELS, policies=None,
              quantizers=QUANTIZER_KINDS, pair_all=False, rep_rule="centroid",
              code_tol=DEFAULT_TOL, lloyd_tol=1e-12, lloyd_max_iters=10_000,
              source_id=None):
    """Evaluate every (quantizer, code, N) combination under zero-wait sampling.

    By default uniform quantizers pair with Shannon and age-optimal codes and
    Lloyd-Max quantizers with constant-length codes; ``pair_all`` lifts that.
    Rows come out ordered by quantizer, code, then N.
    """
    levels_list = [int(n) for n in levels_list]
    if not levels_list:
        raise ParameterError("levels_list is empty")
    if min(levels_list) < 2:
        raise ParameterError("every level count in a sweep must be >= 2")
    policies = tuple(CODE_KINDS if policies is None else policies)
    for kind in policies:
        if kind not in CODE_KINDS:
            raise ParameterError(f"unknown code kind {kind!r}; expected one of {CODE_KINDS}")
    source_id = source_id or model.name

    rows = []
    for qkind in quantizers:
        codes = [c for c in policies if pair_all or c in DEFAULT_PAIRING.get(qkind, ())]
        if not codes:
            continue
        for levels in levels_list:
            combo = (source_id, qkind, None, levels)
            try:
                quant = _build_quantizer(model, qkind, levels, rep_rule, lloyd_tol, lloyd_max_iters)
            except AgedistError as exc:
                raise SweepError(f"{combo}: {exc}", combo) from exc
            probs = quant.active_probs
            for ckind in codes:
                combo = (source_id, qkind, ckind, levels)
                try:
                    code = make_code(ckind, probs, tol=code_tol)
                    report = aoi_analytic(probs, code)
                    margin = zero_wait_condition(code).margin
                except AgedistError as exc:
                    raise SweepError(f"{combo}: {exc}", combo) from exc
                rows.append(SweepRow(
                    source_id=source_id,
                    quantizer_kind=qkind,
                    code_kind=ckind,
                    levels=levels,
                    delta=quant.cell_size,
                    distortion=quant.distortion,
                    log2_distortion=math.log2(quant.distortion),
                    entropy_bits=quant.entropy_bits,
                    aoi=report.aoi,
                    lower_bound=report.lower_bound,
                    zero_wait_margin=margin,
                    moment_ratio=code.moment_ratio,
                ))
    order = {q: i for i, q in enumerate(quantizers)}
    corder = {c: i for i, c in enumerate(policies)}
    rows.sort(key=lambda r: (order[r.quantizer_kind], corder[r.code_kind], r.levels))
    return rows


def select(rows, quantizer_kind=None, code_kind=None):
    """Rows matching the given kinds, keyed by N."""
    return {
        r.levels: r for r in rows
        if (quantizer_kind is None or r.quantizer_kind == quantizer_kind)
        and (code_kind is None or r.code_kind == code_kind)
    }


def fit_asymptotics(rows, model: SourceModel, code_kind="aoi_opt_real", window=3):
    """Slope and intercept diagnostics for the uniform-quantizer zero-wait family.

    The slope is the least-squares fit of AoI against ``log2 D`` over the
    ``window`` largest N. The intercept gap is
    ``AoI + 1.5 log2(delta) - 1.5 h(X)`` at the largest N.
    """
    sources = {r.source_id for r in rows}
    if len(sources) > 1:
        raise ParameterError(f"rows mix sources {sorted(sources)}")
    family = select(rows, "uniform", code_kind)
    if len(family) < max(3, window):
        raise ParameterError(
            f"need >= {max(3, window)} uniform/{code_kind} rows with distinct N, got {len(family)}"
        )
    used = sorted(family)[-window:]
    x = np.array([family[n].log2_distortion for n in used])
    y = np.array([family[n].aoi for n in used])
    slope = float(np.polyfit(x, y, 1)[0])

    top = family[used[-1]]
    intercept = top.aoi + 1.5 * math.log2(top.delta) - 1.5 * model.diff_entropy_bits

    gaps = []
    for int_kind, real_kind in INTEGER_PAIRS:
        ints, reals = select(rows, "uniform", int_kind), select(rows, "uniform", real_kind)
        gaps += [ints[n].aoi - reals[n].aoi for n in ints if n in reals]
    shannon, optimal = select(rows, "uniform", "shannon_real"), select(rows, "uniform", "aoi_opt_real")
    n_top = used[-1]
    sv_gap = (shannon[n_top].aoi - optimal[n_top].aoi
              if n_top in shannon and n_top in optimal else float("nan"))

    return AsymptoticsReport(
        source_id=top.source_id,
        code_kind=code_kind,
        levels_used=tuple(used),
        slope_estimate=slope,
        intercept_gap=intercept,
        integer_gap_max=max(gaps) if gaps else float("nan"),
        shannon_vs_optimal_gap=sv_gap,
    )


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(rows, path, metadata=None):
    """Write rows as CSV with ``#``-prefixed metadata lines before the header.

    Columns follow :data:`CSV_COLUMNS`. Only the ``generated`` metadata line
    varies between identical runs.
    """
    meta = {"schema": SCHEMA, "tool_version": __version__}
    meta.update(metadata or {})
    meta["generated"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    try:
        with open(path, "w", newline="") as fh:
            for key, value in meta.items():
                fh.write(f"# {key}: {value}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                d = asdict(row)
                writer.writerow([_fmt(d[c]) for c in CSV_COLUMNS])
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV to {os.fspath(path)!r}: {exc}") from exc


def read_csv(path):
    """Parse a CSV written by :func:`emit_csv` into ``(metadata, rows)``."""
    meta, body = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(": ")
                meta[key] = value
            else:
                body.append(line)
    reader = csv.DictReader(body)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ParameterError(f"unexpected CSV columns {reader.fieldnames}")
    rows = []
    for rec in reader:
        rows.append(SweepRow(
            source_id=rec["source_id"],
            quantizer_kind=rec["quantizer_kind"],
            code_kind=rec["code_kind"],
            levels=int(rec["levels"]),
            delta=float(rec["delta"]) if rec["delta"] else None,
            **{c: float(rec[c]) for c in CSV_COLUMNS[5:]},
        ))
    return meta, rows


def _series_label(qkind, ckind):
    q = "Uni" if qkind == "uniform" else "Lloyd-Max"
    return f"{q} {ckind}"


def emit_plot(rows, path, title=None, lower_bound=True):
    """Write an SVG of AoI against log2 D, one line per (quantizer, code) pair.

    With ``lower_bound`` the ``(3/2) H`` curve of the uniform quantizer is
    added as its own series. Returns the number of series drawn.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "agedist"
    pairs = []
    for r in rows:
        key = (r.quantizer_kind, r.code_kind)
        if key not in pairs:
            pairs.append(key)

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    count = 0
    for qkind, ckind in pairs:
        series = sorted((r for r in rows if (r.quantizer_kind, r.code_kind) == (qkind, ckind)),
                        key=lambda r: r.levels)
        (line,) = ax.plot([r.log2_distortion for r in series], [r.aoi for r in series],
                          marker="o", ms=3, label=_series_label(qkind, ckind))
        line.set_gid(f"series-{qkind}-{ckind}")
        count += 1
    uni = sorted({r.levels: r for r in rows if r.quantizer_kind == "uniform"}.values(),
                 key=lambda r: r.levels)
    if lower_bound and uni:
        (line,) = ax.plot([r.log2_distortion for r in uni], [r.lower_bound for r in uni],
                          ls="--", color="k", label="(3/2) H[Q_uni(X)]")
        line.set_gid("series-uniform-lower_bound")
        count += 1
    ax.set_xlabel("log2 D")
    ax.set_ylabel("AoI")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OSError(f"cannot write plot to {os.fspath(path)!r}: {exc}") from exc
    finally:
        plt.close(fig)
    return count


def sweep_metadata(model, levels_list, rep_rule="centroid", code_tol=DEFAULT_TOL,
                   lloyd_tol=1e-12, lloyd_max_iters=10_000, **extra):
    meta = {
        "source": model.name,
        "support": f"[{model.support_lo!r}, {model.support_hi!r}]",
        "diff_entropy_bits": repr(model.diff_entropy_bits),
        "levels": " ".join(str(n) for n in levels_list),
        "uniform_reps": rep_rule,
        "code_tol": repr(code_tol),
        "lloyd_tol": repr(lloyd_tol),
        "lloyd_max_iters": lloyd_max_iters,
        "integration_abs_tol": repr(model.abs_tol),
        "sampling": "zero_wait",
    }
    meta.update(extra)
    return meta


def reproduce_figure(figure, model: SourceModel, out_dir, levels_list=DEFAULT_LEVELS,
                     rep_rule="centroid", stem=None, metadata=None):
    """Sweep and write ``<stem>.csv`` and ``<stem>.svg`` for one figure panel.

    ``figure`` is ``"1"`` (coding policies, uniform quantizer), ``"2"``
    (uniform vs Lloyd-Max, real codes) or ``"3"`` (integer codes).
    Extra ``metadata`` entries are appended to the CSV header.
    Returns ``(rows, csv_path, svg_path)``.
    """
    figure = str(figure)
    if figure not in FIGURES:
        raise ParameterError(f"unknown figure {figure!r}; expected one of {sorted(FIGURES)}")
    quantizers, codes = FIGURES[figure]
    rows = run_sweep(model, levels_list, policies=codes, quantizers=quantizers, rep_rule=rep_rule)
    os.makedirs(out_dir, exist_ok=True)
    stem = stem or f"fig{figure}_{_slug(model.name)}"
    csv_path = os.path.join(out_dir, stem + ".csv")
    svg_path = os.path.join(out_dir, stem + ".svg")
    meta = sweep_metadata(model, levels_list, rep_rule, figure=figure)
    meta.update(metadata or {})
    emit_csv(rows, csv_path, meta)
    emit_plot(rows, svg_path, title=f"Figure {figure}: {model.name}")
    return rows, csv_path, svg_path


def _slug(name):
    text = "".join(ch if ch.isalnum() else "m" if ch == "-" else "_" for ch in name)
    return "_".join(part for part in text.split("_") if part)
