"""Eigenvalues, real/complex classification and the complex-level fraction."""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .ensembles import ChannelCoupling
from .errors import IntegrityError, NumericalError, ParameterError
from .hamiltonian import SymmetryVariant, build_effective, real_form

__all__ = [
    "Spectrum",
    "ClassifiedSpectrum",
    "FractionEstimate",
    "eigenvalues",
    "effective_spectrum",
    "classify",
    "complex_fraction",
]

log = logging.getLogger(__name__)

#: pairing window in units of the classification tolerance
PAIRING_FACTOR = 10.0


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by (real part, imaginary part)."""

    eigenvalues: np.ndarray
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=complex).ravel()
        order = np.lexsort((ev.imag, ev.real))
        ev = ev[order]
        ev.flags.writeable = False
        object.__setattr__(self, "eigenvalues", ev)

    def __len__(self):
        return self.eigenvalues.size


@dataclass(frozen=True)
class ClassifiedSpectrum:
    real_levels: np.ndarray
    conjugate_pairs: np.ndarray
    window_half_width: float
    tolerance: float

    @property
    def n_complex(self) -> int:
        return 2 * self.conjugate_pairs.size

    @property
    def n_levels(self) -> int:
        return self.real_levels.size + self.n_complex


@dataclass(frozen=True)
class FractionEstimate:
    """Ensemble fraction ``f`` of complex levels with its jackknife error."""

    f: float
    stderr: float
    n_realizations: int
    n_levels_counted: int
    n_skipped: int = 0


def eigenvalues(a: np.ndarray, source: dict | None = None) -> Spectrum:
    """All eigenvalues of a general square matrix (LAPACK ``geev``).

    Real input goes through the real solver, which returns real eigenvalues
    with exactly zero imaginary part and complex ones in exact conjugate
    pairs.
    """
    a = np.asarray(a)
    source = dict(source or {})
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError(f"matrix must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericalError(f"non-finite matrix entries (source: {source})")
    try:
        ev = scipy.linalg.eigvals(a, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver did not converge (source: {source})") from exc
    return Spectrum(ev, source)


def effective_spectrum(h: np.ndarray, coupling: ChannelCoupling, mu: float,
                       variant: SymmetryVariant | str = SymmetryVariant.PT,
                       source: dict | None = None) -> Spectrum:
    """Spectrum of the effective Hamiltonian by the cheapest exact route.

    ``mu = 0`` gives a hermitian matrix (``eigvalsh``).  Otherwise the real
    similar matrix is diagonalized when it exists, and the complex matrix
    when it does not (PTT' with complex ``H``).
    """
    variant = SymmetryVariant.parse(variant)
    source = dict(source or {})
    if mu == 0:
        heff = build_effective(h, coupling, 0.0, variant)
        try:
            ev = scipy.linalg.eigvalsh(heff.matrix, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"eigvalsh did not converge (source: {source})") from exc
        return Spectrum(ev, source)
    r = real_form(h, coupling, mu, variant)
    if r is None:
        return eigenvalues(build_effective(h, coupling, mu, variant).matrix, source)
    return eigenvalues(r, source)


def _in_window(x: np.ndarray, half_width: float) -> np.ndarray:
    return np.abs(x) <= half_width


def classify(spectrum: Spectrum | np.ndarray, window_half_width: float,
             tolerance: float) -> ClassifiedSpectrum:
    """Split a spectrum into real levels and conjugate pairs inside a window.

    Eigenvalues with ``|Im| <= tolerance`` are real.  The rest are paired
    greedily in order of real part: each upper-half-plane value takes the
    nearest unused lower-half-plane value whose conjugate lies within
    ``10 * tolerance`` in both real and imaginary part.  Pairs are counted in
    the window by the real part of their upper member.

    Raises :class:`IntegrityError` when a complex eigenvalue is left without
    a partner.
    """
    if not tolerance > 0:
        raise ParameterError(f"tolerance must be positive, got {tolerance!r}")
    if not window_half_width > 0:
        raise ParameterError(f"window half width must be positive, got {window_half_width!r}")
    if not isinstance(spectrum, Spectrum):
        spectrum = Spectrum(spectrum)
    ev = spectrum.eigenvalues
    is_real = np.abs(ev.imag) <= tolerance
    reals = ev.real[is_real]

    upper = ev[ev.imag > tolerance]
    lower = ev[ev.imag < -tolerance]
    # both arrays inherit the (Re, Im) ordering of the spectrum
    radius = PAIRING_FACTOR * tolerance
    lower_re = lower.real.tolist()
    used = np.zeros(lower.size, dtype=bool)
    pairs = []
    unpaired = []
    for z in upper:
        lo = bisect.bisect_left(lower_re, z.real - radius)
        hi = bisect.bisect_right(lower_re, z.real + radius)
        best, best_d = -1, math.inf
        for j in range(lo, hi):
            if used[j]:
                continue
            w = lower[j]
            if abs(w.imag + z.imag) > radius:
                continue
            d = abs(z - w.conjugate())
            if d < best_d:
                best, best_d = j, d
        if best < 0:
            unpaired.append(z)
        else:
            used[best] = True
            pairs.append(z)
    unpaired.extend(lower[~used])
    if unpaired:
        raise IntegrityError(
            f"{len(unpaired)} complex eigenvalue(s) without conjugate partner "
            f"(source: {spectrum.source})",
            unpaired=unpaired,
        )
    pairs = np.asarray(pairs, dtype=complex)
    reals = reals[_in_window(reals, window_half_width)]
    pairs = pairs[_in_window(pairs.real, window_half_width)]
    return ClassifiedSpectrum(real_levels=np.sort(reals), conjugate_pairs=pairs,
                              window_half_width=float(window_half_width),
                              tolerance=float(tolerance))


def _jackknife(c: np.ndarray, n: np.ndarray) -> float:
    k = c.size
    if k < 2:
        return 0.0
    loo = (c.sum() - c) / (n.sum() - n)
    return float(math.sqrt((k - 1) / k * np.sum((loo - loo.mean()) ** 2)))


def fraction_from_counts(n_complex, n_levels) -> FractionEstimate:
    """Ratio-of-sums fraction from per-realization counts.

    Realizations with an empty window are skipped (and counted as such).
    """
    c = np.asarray(n_complex, dtype=float).ravel()
    n = np.asarray(n_levels, dtype=float).ravel()
    if c.size == 0:
        raise ParameterError("need at least one realization")
    keep = n > 0
    skipped = int(np.count_nonzero(~keep))
    if skipped:
        log.warning("%d realization(s) with an empty window skipped", skipped)
    c, n = c[keep], n[keep]
    if n.size == 0:
        return FractionEstimate(math.nan, math.nan, 0, 0, skipped)
    f = float(c.sum() / n.sum())
    return FractionEstimate(f=f, stderr=_jackknife(c, n), n_realizations=int(n.size),
                            n_levels_counted=int(n.sum()), n_skipped=skipped)


def complex_fraction(instances) -> FractionEstimate:
    """Ensemble-averaged fraction of complex levels over classified spectra."""
    instances = list(instances)
    if not instances:
        raise ParameterError("complex_fraction needs at least one instance")
    widths = {(s.window_half_width, s.tolerance) for s in instances}
    if len(widths) > 1:
        raise ParameterError("instances were classified with different window settings")
    return fraction_from_counts([s.n_complex for s in instances],
                                [s.n_levels for s in instances])
