"""When is it worth waiting before the next sample?

Zero-wait is optimal exactly when the shortest codeword is at least
E[L^2]/(2E[L]). A fine uniform quantizer on a Gaussian source meets this.
On the exponential source the first cell is much likelier than the rest, so
its Shannon codeword is short and a small wait after it lowers the age.
"""

from agedist import (
    aoi_analytic,
    build_uniform,
    make_code,
    make_truncated_exponential,
    make_truncated_gaussian,
    optimize_threshold,
    zero_wait_condition,
)

for source in (make_truncated_gaussian(0, 1, -5, 5), make_truncated_exponential(1, 0, 15)):
    p = build_uniform(source, 32).active_probs
    for kind in ("shannon_real", "shannon_int", "aoi_opt_real"):
        code = make_code(kind, p)
        chk = zero_wait_condition(code)
        beta, best = optimize_threshold(p, code)
        zw = aoi_analytic(p, code).aoi
        print(f"{source.name:<14} {kind:<13} margin {chk.margin:+.4f}  "
              f"zero-wait {zw:.5f}  best beta {beta:.4f} -> {best.aoi:.5f}")
