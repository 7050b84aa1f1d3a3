"""
Sampling the hermitian ensembles
================================

Draw orthogonal and unitary random matrices, check the semicircle density
and the mean level spacing used as the unit for every rate below.
"""

import numpy as np

from ptbreak import EnsembleSpec, SpectralNormalization, child_stream, mean_level_spacing, sample_h

M = 200
norm = SpectralNormalization.for_dim(M)
print(f"radius {norm.radius:.3f}, mean spacing {norm.delta0:.5f}, window +-{norm.window_half_width}")

# %%
# Pool eigenvalues from a few samples of each class.

for cls in ("orthogonal", "unitary"):
    spec = EnsembleSpec(cls, M, 20)
    ev = np.concatenate([np.linalg.eigvalsh(sample_h(spec, norm, child_stream(1, r)))
                         for r in range(20)])
    hist, edges = np.histogram(ev, bins=8, range=(-2, 2), density=True)
    centers = (edges[1:] + edges[:-1]) / 2
    semicircle = np.sqrt(4 - centers**2) / (2 * np.pi)
    print(cls)
    for c, h, s in zip(centers, hist, semicircle):
        print(f"  E={c:+.2f}  sampled {h:.3f}  semicircle {s:.3f}")

# %%
# Spacings near the band centre match pi / M.

ev = np.linalg.eigvalsh(sample_h(EnsembleSpec("orthogonal", M, 20), norm, child_stream(2, 0)))
central = ev[np.abs(ev) <= norm.window_half_width]
print(f"mean central spacing {np.diff(central).mean():.5f} vs {mean_level_spacing(norm, M):.5f}")
