"""Spontaneous PT-symmetry breaking in non-hermitian random-matrix ensembles."""

__version__ = "0.1.0"

from .ensembles import (  # noqa: E402
    ChannelCoupling,
    EnsembleSpec,
    SpectralNormalization,
    SymmetryClass,
    build_coupling,
    child_stream,
    mean_level_spacing,
    sample_h,
)
from .errors import IntegrityError, NumericalError, ParameterError, RangeError  # noqa: E402
from .hamiltonian import (  # noqa: E402
    EffectiveHamiltonian,
    SymmetryVariant,
    build_effective,
    parity_form,
    parity_transform,
    quantization_residual,
    real_form,
    scattering_matrix,
)
from .perturbation import crossing_pairs, overlap_perturbative, quasi_degenerate_mu, scales  # noqa: E402
from .spectral import classify, complex_fraction, effective_spectrum, eigenvalues  # noqa: E402
from .experiments import (  # noqa: E402
    SweepConfig,
    collapse_diagnostic,
    extract_mu_half,
    run_sweep,
    trace_levels,
)
