"""Acceptance criteria, one test and one PASS/FAIL line each.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary section
at the end lists every criterion with the numbers behind its verdict.
"""

import math
import time

import numpy as np

from agedist import (
    SimConfig,
    aoi_analytic,
    aoi_optimal_real,
    brute_force_optimum,
    build_uniform,
    make_code,
    optimize_threshold,
    run_sweep,
    shannon_real,
    simulate,
    zero_wait_condition,
)
from agedist.experiments import fit_asymptotics, select

SOURCES = ("exp", "gauss")


def _fmt(parts):
    return "; ".join(parts)


def test_criterion_01_exact_fixture(criterion, unit_source):
    t0 = time.perf_counter()
    q = build_uniform(unit_source, 2)
    code = shannon_real(q.active_probs)
    aoi = aoi_analytic(q.active_probs, code).aoi
    opt = aoi_optimal_real(q.active_probs).objective
    elapsed = time.perf_counter() - t0
    ok = (abs(q.distortion - 1 / 48) <= 1e-9 and abs(q.entropy_bits - 1) <= 1e-9
          and abs(aoi - 1.5) <= 1e-9 and abs(opt - 1.5) <= 1e-9 and elapsed < 1.0)
    criterion("1 exact fixture", ok,
              f"D={q.distortion:.12g} H={q.entropy_bits:.12g} AoI={aoi:.12g} J*={opt:.12g} ({elapsed:.2f}s)")


def test_criterion_02_slope_law(criterion, section_sources):
    parts, ok = [], True
    t0 = time.perf_counter()
    for name in SOURCES:
        model = section_sources[name]
        rows = run_sweep(model, (8, 16, 32), policies=["aoi_opt_real"], quantizers=("uniform",))
        slope = fit_asymptotics(rows, model).slope_estimate
        good = -0.80 <= slope <= -0.70
        ok &= good
        parts.append(f"{name} slope={slope:.4f} {'in' if good else 'outside'} [-0.80,-0.70]")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    criterion("2 slope law", ok, _fmt(parts) + f" ({elapsed:.1f}s)")


def test_criterion_03_intercept_law(criterion, dense_rows, section_sources):
    parts, ok = [], True
    for name in SOURCES:
        h = section_sources[name].diff_entropy_bits
        for kind in ("shannon_real", "aoi_opt_real"):
            fam = select(dense_rows[name], "uniform", kind)

            def gap(n):
                r = fam[n]
                return abs(r.aoi + 1.5 * math.log2(r.delta) - 1.5 * h)

            good = gap(32) < gap(4)
            ok &= good
            parts.append(f"{name}/{kind} |gap| N=32 {gap(32):.4f} vs N=4 {gap(4):.4f}")
    criterion("3 intercept law", ok, _fmt(parts))


def test_criterion_04_sandwich(criterion, dense_rows):
    parts, ok = [], True
    for name in SOURCES:
        s = select(dense_rows[name], "uniform", "shannon_real")
        o = select(dense_rows[name], "uniform", "aoi_opt_real")
        bad = [n for n in s if not (s[n].lower_bound - 1e-9 <= o[n].aoi <= s[n].aoi + 1e-9)]
        g2, g32 = s[2].aoi - s[2].lower_bound, s[32].aoi - s[32].lower_bound
        good = not bad and g32 < g2
        ok &= good
        parts.append(f"{name} sandwich violations={bad or 'none'}, "
                     f"Shannon-bound gap N=32 {g32:.4f} vs N=2 {g2:.4f}")
    criterion("4 sandwich", ok, _fmt(parts))


def test_criterion_05_integer_gap(criterion, dense_rows):
    parts, ok = [], True
    for name in SOURCES:
        for int_kind, real_kind in (("shannon_int", "shannon_real"), ("aoi_opt_int", "aoi_opt_real")):
            ints = select(dense_rows[name], "uniform", int_kind)
            reals = select(dense_rows[name], "uniform", real_kind)
            worst = max(ints[n].aoi - reals[n].aoi for n in ints)
            ok &= worst < 2.5
            parts.append(f"{name}/{int_kind} max gap {worst:.4f}")
    criterion("5 integer gap", ok, _fmt(parts))


def test_criterion_06_zero_wait(criterion, section_sources):
    parts, ok = [], True
    for name in SOURCES:
        p = build_uniform(section_sources[name], 32).active_probs
        for kind in ("shannon_real", "shannon_int"):
            code = make_code(kind, p)
            chk = zero_wait_condition(code)
            zw = aoi_analytic(p, code).aoi
            _, best = optimize_threshold(p, code)
            good = chk.holds and abs(best.aoi - zw) <= 1e-6
            ok &= good
            parts.append(f"{name}/{kind} margin={chk.margin:+.4f} "
                         f"threshold AoI {best.aoi:.6f} vs zero-wait {zw:.6f}")
    criterion("6 zero-wait condition", ok, _fmt(parts))


def test_criterion_07_concentration(criterion, dense_rows):
    parts, ok = [], True
    for name in SOURCES:
        fam = select(dense_rows[name], "uniform", "shannon_real")
        ratios = [fam[n].moment_ratio for n in (4, 8, 16, 32)]
        good = bool(np.all(np.diff(ratios) < 0)) and 1.0 < ratios[-1] < 1.2
        ok &= good
        parts.append(f"{name} ratio N=4,8,16,32: " + ", ".join(f"{r:.4f}" for r in ratios))
    criterion("7 concentration", ok, _fmt(parts))


def test_criterion_08_solver_oracle(criterion):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        size = int(rng.integers(2, 4))
        p = rng.dirichlet(np.ones(size))
        _, oracle = brute_force_optimum(p)
        worst = max(worst, abs(aoi_optimal_real(p).objective - oracle))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-3 and elapsed < 60
    criterion("8 solver oracle", ok, f"max |solver - grid| = {worst:.3g} over 50 vectors ({elapsed:.1f}s)")


def test_criterion_09_simulation_oracle(criterion, section_sources):
    t0 = time.perf_counter()
    worst_age = worst_mse = 0.0
    ok = True
    for name in SOURCES:
        model = section_sources[name]
        for n in (2, 8, 32):
            q = build_uniform(model, n)
            for kind in ("shannon_real", "aoi_opt_real"):
                code = make_code(kind, q.active_probs)
                target = aoi_analytic(q.active_probs, code).aoi
                res = simulate(model, q, code, SimConfig(1_000_000, seed=n))
                for diff, se, tag in ((res.time_avg_age - target, res.std_error, "age"),
                                      (res.empirical_mse - q.distortion, res.mse_std_error, "mse")):
                    z = abs(diff) / se if se > 0 else (0.0 if abs(diff) < 1e-12 else math.inf)
                    ok &= z <= 3
                    if tag == "age":
                        worst_age = max(worst_age, z)
                    else:
                        worst_mse = max(worst_mse, z)
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120
    criterion("9 simulation oracle", ok,
              f"max |z| age {worst_age:.2f}, mse {worst_mse:.2f} over 12 runs ({elapsed:.1f}s)")


def test_criterion_10_lloyd_max(criterion, dense_rows):
    parts, ok = [], True
    for name in SOURCES:
        rows = dense_rows[name]
        u, lm = select(rows, "uniform", "shannon_real"), select(rows, "lloyd_max", "const_real")
        ui, lmi = select(rows, "uniform", "shannon_int"), select(rows, "lloyd_max", "const_int")
        wins = sum(ui[n].aoi < lmi[n].aoi for n in ui)
        good = u[32].aoi < lm[32].aoi and wins > len(ui) / 2
        ok &= good
        parts.append(f"{name} N=32 {u[32].aoi:.4f} < {lm[32].aoi:.4f}, integer wins {wins}/{len(ui)}")
    criterion("10 Lloyd-Max comparison", ok, _fmt(parts))


def test_criterion_11_high_resolution(criterion, section_sources):
    parts, ok = [], True
    for name in SOURCES:
        q = build_uniform(section_sources[name], 32, rep_rule="midpoint")
        ratio = 12 * q.distortion / q.cell_size**2
        ok &= 0.95 <= ratio <= 1.05
        parts.append(f"{name} 12D/delta^2={ratio:.5f}")
    criterion("11 high-resolution quantization", ok, _fmt(parts))
