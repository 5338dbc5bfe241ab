"""Finite-difference check that the standard bubble solves Lap^2 u = 6 e^{4u}.

Halving h should cut the residual by about four.
"""

from qtopo.bubbles import Bubble, bubble_pde_residual

for lam in (1.0, 2.0, 4.0):
    b = Bubble((0.0, 0.0, 0.0, 0.0), lam)
    hs = [0.04 / lam, 0.02 / lam, 0.01 / lam]
    res = [bubble_pde_residual(b, h) for h in hs]
    ratios = [r0 / r1 for r0, r1 in zip(res, res[1:])]
    cells = "  ".join(f"h={h:.4f}: {r:.3e}" for h, r in zip(hs, res))
    print(f"lambda={lam}: {cells}  ratios {[round(x, 2) for x in ratios]}")
