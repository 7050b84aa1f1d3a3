import numpy as np
import pytest
from hypothesis import settings

from ptbreak import EnsembleSpec, SpectralNormalization, build_coupling, child_stream, sample_h

settings.register_profile("ptbreak", deadline=None, max_examples=50)
settings.load_profile("ptbreak")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def small_instance():
    """Factory for ``(H, coupling, normalization)`` at small size."""

    def make(symmetry="orthogonal", M=20, N=4, T=0.5, seed=0):
        norm = SpectralNormalization.for_dim(M)
        h = sample_h(EnsembleSpec(symmetry, M, N, seed), norm, child_stream(seed, 0))
        return h, build_coupling(M, N, T, norm.delta0), norm

    return make


def rel_maxdiff(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)
