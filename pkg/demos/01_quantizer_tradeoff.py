"""How resolution trades distortion against output entropy.

Halving the cell of a uniform quantizer should cut the distortion by about
four (two bits of log2 D) while adding one bit of entropy. The Lloyd-Max
quantizer gets lower distortion at the same N but spends its levels more
evenly, which matters once the codeword lengths drive the age.
"""

import math

from agedist import build_lloyd_max, build_uniform, make_truncated_gaussian

source = make_truncated_gaussian(0.0, 1.0, -5.0, 5.0)
print(f"source {source.name}: h(X) = {source.diff_entropy_bits:.4f} bits")
print(f"{'N':>3} {'log2 D (uni)':>13} {'H (uni)':>8} {'H+log2 d':>9} {'12D/d^2':>8} {'log2 D (LM)':>12} {'H (LM)':>7}")
for n in (2, 4, 8, 16, 32):
    uni = build_uniform(source, n)
    mid = build_uniform(source, n, rep_rule="midpoint")
    lm = build_lloyd_max(source, n)
    print(f"{n:>3} {math.log2(uni.distortion):>13.4f} {uni.entropy_bits:>8.4f} "
          f"{uni.entropy_bits + math.log2(uni.cell_size):>9.4f} "
          f"{12 * mid.distortion / mid.cell_size**2:>8.4f} "
          f"{math.log2(lm.distortion):>12.4f} {lm.entropy_bits:>7.4f}")

# The H + log2(delta) column settles at h(X), and 12 D / delta^2 at one.
