"""
Where the characteristic rates come from
========================================

Weak coupling: a level shared by both subsystems breaks at |sum psi^2 gamma|,
which averages to muT for real eigenvectors and is smaller by about sqrt(N)
for complex ones.  Strong coupling: adjacent levels of H + Gamma and
H - Gamma cross and break at about mu0.
"""

import numpy as np

from ptbreak import (
    EnsembleSpec,
    SpectralNormalization,
    build_coupling,
    child_stream,
    crossing_pairs,
    sample_h,
    scales,
)
from ptbreak.perturbation import quasi_degenerate_mus

M, N = 200, 20
norm = SpectralNormalization.for_dim(M)

# %%
# Weak coupling, T = 0.01.

T = 0.01
s = scales(N, T, norm.delta0)
c = build_coupling(M, N, T, norm.delta0)
for cls in ("orthogonal", "unitary"):
    vals = np.concatenate([
        quasi_degenerate_mus(sample_h(EnsembleSpec(cls, M, N), norm, child_stream(0, r)), c,
                             norm.window_half_width)[1]
        for r in range(10)
    ])
    print(f"{cls:>10}: mean threshold {vals.mean():.2e}  "
          f"(muT {s.muT:.2e}, muT' {s.muTprime:.2e})")

# %%
# Strong coupling, T = 1.

c = build_coupling(M, N, 1.0, norm.delta0)
pairs = [p for r in range(10)
         for p in crossing_pairs(sample_h(EnsembleSpec("orthogonal", M, N), norm,
                                          child_stream(0, r)), c, norm.window_half_width)]
muc = np.median([p.mu_critical for p in pairs])
ov = np.mean([abs(p.overlap) ** 2 for p in pairs])
print(f"median crossing threshold {muc / scales(N, 1.0, norm.delta0).mu0:.2f} mu0, "
      f"mean |overlap|^2 = {ov:.3f} vs 1/N = {1 / N:.3f}")
