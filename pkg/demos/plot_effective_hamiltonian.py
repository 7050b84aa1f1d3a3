"""
Coupled gain/loss subsystems and the scattering check
=====================================================

Build the doubled Hamiltonian for one sample, look at its spectrum on both
sides of the transition, and confirm every eigenvalue by the independent
scattering quantization condition.
"""

import numpy as np

from ptbreak import (
    EnsembleSpec,
    SpectralNormalization,
    build_coupling,
    build_effective,
    child_stream,
    classify,
    effective_spectrum,
    quantization_residual,
    sample_h,
    scales,
)

M, N, T = 60, 8, 0.7
norm = SpectralNormalization.for_dim(M)
h = sample_h(EnsembleSpec("orthogonal", M, N), norm, child_stream(0, 0))
coupling = build_coupling(M, N, T, norm.delta0)
mu0 = scales(N, 1.0, norm.delta0).mu0

# %%
# Weak and strong gain/loss.

for x in (0.0, 0.5, 3.0):
    cs = classify(effective_spectrum(h, coupling, x * mu0), norm.window_half_width,
                  1e-8 * norm.delta0)
    print(f"mu = {x} mu0: {cs.real_levels.size} real levels, "
          f"{cs.conjugate_pairs.size} conjugate pairs in the window")

# %%
# Each eigenvalue makes the quantization matrix singular, a shifted point does not.

mu = 0.5 * mu0
ev = np.linalg.eigvals(build_effective(h, coupling, mu).matrix)
on = max(quantization_residual(E, h, coupling, mu) for E in ev)
off = quantization_residual(ev[0] + 0.3 * norm.delta0, h, coupling, mu)
print(f"largest residual on the spectrum {on:.1e}; one point off it {off:.1e}")
