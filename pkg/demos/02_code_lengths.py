"""Codeword lengths that minimize age rather than mean length.

Shannon lengths minimize E[L]. The average age under zero-wait sampling is
E[L^2]/(2E[L]) + E[L], which also penalizes spread, so the optimal lengths
pull long codewords in and push short ones out.
"""

import numpy as np

from agedist import aoi_optimal_integer, aoi_optimal_real, brute_force_optimum, shannon_integer, shannon_real
from agedist._numerics import entropy_bits

for probs in ([0.5, 0.5], [0.7, 0.2, 0.1], [0.9, 0.05, 0.03, 0.02]):
    p = np.asarray(probs)
    print(f"\nprobs {p}  (1.5 H = {1.5 * entropy_bits(p):.4f})")
    for make in (shannon_real, aoi_optimal_real, shannon_integer, aoi_optimal_integer):
        code = make(p)
        lengths = " ".join(f"{v:.3f}" for v in code.lengths)
        print(f"  {code.kind:<13} lengths [{lengths}]  age {code.objective:.5f}  Kraft {code.kraft_sum:.4f}")
    if p.size <= 3:
        _, grid = brute_force_optimum(p)
        print(f"  grid search age {grid:.5f}")
