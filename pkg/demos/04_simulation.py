"""Checking the age formula against a simulated sawtooth.

One million updates are drawn from the source, quantized, and sent with
their codeword lengths as service times. The batch-means standard error
says how far the time average may sit from the formula by chance.
"""

from agedist import (
    SimConfig,
    aoi_analytic,
    build_uniform,
    make_code,
    make_truncated_exponential,
    optimize_threshold,
    simulate,
)

source = make_truncated_exponential(1.0, 0.0, 15.0)
q = build_uniform(source, 32)
code = make_code("shannon_real", q.active_probs)
_, best = optimize_threshold(q.active_probs, code)

for policy in (aoi_analytic(q.active_probs, code).policy, best.policy):
    target = aoi_analytic(q.active_probs, code, policy).aoi
    res = simulate(source, q, code, SimConfig(1_000_000, seed=1, policy=policy))
    print(f"{policy.kind:<9} beta={policy.beta:.4f}  formula {target:.5f}  "
          f"simulated {res.time_avg_age:.5f} +/- {res.std_error:.5f}  "
          f"MSE {res.empirical_mse:.6f} vs D {q.distortion:.6f}")
