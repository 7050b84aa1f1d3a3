"""Gaussian random-matrix ensembles, spectral normalization and channel coupling.

The hermitian part ``H`` of each subsystem is drawn from the Gaussian
orthogonal ensemble (real symmetric) or the Gaussian unitary ensemble
(complex hermitian).  With off-diagonal standard deviation ``sigma`` the
spectrum fills a semicircle of radius ``2 sigma sqrt(M)``, and the mean level
spacing at the band centre is ``pi sigma / sqrt(M)``.

Random streams are derived with :class:`numpy.random.SeedSequence` spawn keys,
so the stream for realization ``r`` of master seed ``s`` is the same no matter
which process draws it or in what order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

__all__ = [
    "SymmetryClass",
    "EnsembleSpec",
    "SpectralNormalization",
    "ChannelCoupling",
    "child_stream",
    "sample_h",
    "mean_level_spacing",
    "gamma_open",
    "build_coupling",
]

_U64 = 2**64


class SymmetryClass(str, enum.Enum):
    ORTHOGONAL = "orthogonal"
    UNITARY = "unitary"

    @classmethod
    def parse(cls, value) -> "SymmetryClass":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(
                f"unknown symmetry class {value!r}; expected 'orthogonal' or 'unitary'"
            ) from None


@dataclass(frozen=True)
class EnsembleSpec:
    """Symmetry class, matrix size ``M``, open channels ``N`` and seed."""

    symmetry: SymmetryClass
    M: int
    N: int
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "symmetry", SymmetryClass.parse(self.symmetry))
        if int(self.M) != self.M or self.M < 1:
            raise ParameterError(f"M must be a positive integer, got {self.M!r}")
        if int(self.N) != self.N or not 1 <= self.N <= self.M:
            raise ParameterError(f"N must satisfy 1 <= N <= M={self.M}, got {self.N!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < _U64:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class SpectralNormalization:
    """Energy scale of the ensemble.

    ``sigma`` is the off-diagonal standard deviation of ``H``; ``delta0`` the
    mean level spacing at the band centre; ``window_half_width`` the half
    width of the central energy window in which levels are counted.
    """

    sigma: float
    delta0: float
    window_half_width: float

    def __post_init__(self):
        for name in ("sigma", "delta0", "window_half_width"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be positive and finite, got {value!r}")

    @classmethod
    def for_dim(cls, M: int, sigma: float | None = None,
                window_fraction: float = 0.25) -> "SpectralNormalization":
        """Normalization for ``M``-dimensional matrices.

        The default ``sigma = 1/sqrt(M)`` puts the band edge at 2 and the mean
        spacing at ``pi/M``.  The window is ``window_fraction`` times the
        semicircle radius, where the density varies by a few percent at most.
        """
        if M < 1:
            raise ParameterError(f"M must be positive, got {M!r}")
        if sigma is None:
            sigma = 1.0 / math.sqrt(M)
        if not 0 < window_fraction <= 1:
            raise ParameterError(f"window_fraction must lie in (0, 1], got {window_fraction!r}")
        radius = 2.0 * sigma * math.sqrt(M)
        return cls(sigma=sigma, delta0=math.pi * sigma / math.sqrt(M),
                   window_half_width=window_fraction * radius)

    @property
    def radius(self) -> float:
        """Semicircle radius ``2 sigma sqrt(M)`` (recovered from ``delta0``)."""
        return 2.0 * self.sigma**2 / self.delta0 * math.pi


@dataclass(frozen=True)
class ChannelCoupling:
    """Diagonals of ``VV^dagger`` (``v``) and of the barrier coupling ``Gamma``.

    Open channels sit on the first ``N`` basis indices.
    """

    v: np.ndarray
    gamma: np.ndarray
    T: float
    open_channels: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        if v.shape != gamma.shape or v.ndim != 1:
            raise ParameterError("v and gamma must be 1-d arrays of equal length")
        if np.any(v < 0) or np.any(gamma < 0):
            raise ParameterError("coupling entries must be non-negative")
        v.flags.writeable = False
        gamma.flags.writeable = False
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "gamma", gamma)
        if self.open_channels is None:
            idx = np.flatnonzero(v)
            idx.flags.writeable = False
            object.__setattr__(self, "open_channels", idx)

    @property
    def M(self) -> int:
        return self.v.size

    @property
    def N(self) -> int:
        return self.open_channels.size

    @property
    def gamma_open(self) -> float:
        return float(self.gamma[self.open_channels[0]]) if self.N else 0.0


def child_stream(seed: int, realization: int) -> np.random.Generator:
    """Independent generator for ``realization`` under master ``seed``."""
    if not 0 <= seed < _U64:
        raise ParameterError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(realization),))
    return np.random.Generator(np.random.PCG64(ss))


def sample_h(spec: EnsembleSpec, norm: SpectralNormalization,
             stream: np.random.Generator | None = None) -> np.ndarray:
    """Draw one ``M x M`` matrix from the ensemble of ``spec``.

    GOE: off-diagonal variance ``sigma**2``, diagonal ``2 sigma**2``.
    GUE: off-diagonal complex entries with ``E|H_ij|^2 = sigma**2`` (real and
    imaginary parts of variance ``sigma**2/2``), real diagonal of variance
    ``sigma**2``.  When ``stream`` is omitted the generator is derived from
    ``spec.seed``.
    """
    if not isinstance(spec, EnsembleSpec):
        raise ParameterError("spec must be an EnsembleSpec")
    if stream is None:
        stream = child_stream(spec.seed, 0)
    M, s = spec.M, norm.sigma
    if spec.symmetry is SymmetryClass.ORTHOGONAL:
        a = stream.standard_normal((M, M))
        h = (a + a.T) * (s / math.sqrt(2.0))
    else:
        a = stream.standard_normal((M, M)) + 1j * stream.standard_normal((M, M))
        h = (a + a.conj().T) * (s / 2.0)
    return h


def mean_level_spacing(norm: SpectralNormalization | float, M: int) -> float:
    """Mean spacing ``pi sigma / sqrt(M)`` at the centre of the semicircle.

    ``norm`` may be a :class:`SpectralNormalization` or a bare ``sigma``.
    """
    if M < 2:
        raise ParameterError(f"level spacing needs M >= 2, got {M!r}")
    sigma = norm.sigma if isinstance(norm, SpectralNormalization) else float(norm)
    return math.pi * sigma / math.sqrt(M)


def gamma_open(T: float, delta0: float, M: int) -> float:
    """Barrier coupling ``sqrt(T)/(1 + sqrt(1-T)) * delta0 M / pi``."""
    if not 0.0 <= T <= 1.0:
        raise ParameterError(f"transmission T must lie in [0, 1], got {T!r}")
    return math.sqrt(T) / (1.0 + math.sqrt(1.0 - T)) * delta0 * M / math.pi


def build_coupling(M: int, N: int, T: float, delta0: float) -> ChannelCoupling:
    """Lead and barrier coupling for ``N`` ideal channels on indices ``0..N-1``."""
    if not 1 <= N <= M:
        raise ParameterError(f"N must satisfy 1 <= N <= M={M}, got {N!r}")
    if not delta0 > 0:
        raise ParameterError(f"delta0 must be positive, got {delta0!r}")
    g = gamma_open(T, delta0, M)
    v = np.zeros(M)
    v[:N] = delta0 * M / math.pi
    gamma = np.zeros(M)
    gamma[:N] = g
    return ChannelCoupling(v=v, gamma=gamma, T=float(T),
                           open_channels=np.arange(N))
