"""Two-level reductions behind the PT transition and its characteristic scales.

Weak coupling: a level ``eps_k`` of ``H`` is degenerate between the two
subsystems; the 2x2 problem ``[[eps - i mu, c], [c*, eps + i mu]]`` with
``c = sum_m psi_m^2 gamma_m`` turns complex at ``mu = |c|``.

Strong coupling (real ``H`` or PTT'): at ``mu = 0`` the parity basis splits
into ``H + Gamma`` and ``H - Gamma``.  Adjacent levels of the two sequences
are mixed by ``mu`` through their eigenvector overlap ``o``, and
``[[e+, i mu o], [i mu o*, e-]]`` turns complex at
``mu = |e+ - e-| / (2 |o|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import ChannelCoupling
from .errors import ParameterError

__all__ = [
    "CharacteristicScales",
    "CrossingPair",
    "scales",
    "tunnel_coupling",
    "quasi_degenerate_mu",
    "quasi_degenerate_mus",
    "crossing_pairs",
    "overlap_perturbative",
]

_NORM_TOL = 1e-8


@dataclass(frozen=True)
class CharacteristicScales:
    mu0: float
    muT: float
    muTprime: float
    mu0prime: float
    Tc: float


@dataclass(frozen=True)
class CrossingPair:
    eps_plus: float
    eps_minus: float
    overlap: complex
    mu_critical: float
    k: int = -1
    l: int = -1


def scales(N: int, T: float, delta0: float) -> CharacteristicScales:
    """Characteristic absorption rates for ``N`` channels of transmission ``T``.

    ``mu0 = sqrt(N) delta0 / 2 pi`` (strong coupling, orthogonal),
    ``muT = N sqrt(T) delta0 / 2 pi`` (weak coupling, orthogonal),
    ``muTprime = sqrt(T) mu0`` (unitary), ``mu0prime = mu0 / sqrt(1 + 1/NT)``
    (interpolates between ``muT`` and ``mu0``), ``Tc = 1/N``.
    """
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N!r}")
    if not 0.0 <= T <= 1.0:
        raise ParameterError(f"T must lie in [0, 1], got {T!r}")
    mu0 = math.sqrt(N) * delta0 / (2 * math.pi)
    muT = N * math.sqrt(T) * delta0 / (2 * math.pi)
    mu0prime = mu0 / math.sqrt(1.0 + 1.0 / (N * T)) if T > 0 else 0.0
    return CharacteristicScales(mu0=mu0, muT=muT, muTprime=math.sqrt(T) * mu0,
                                mu0prime=mu0prime, Tc=1.0 / N)


def tunnel_coupling(psi: np.ndarray, gamma: np.ndarray) -> complex:
    """``sum_m psi_m**2 gamma_m`` (amplitude squared, not modulus)."""
    psi = np.asarray(psi)
    norm = np.vdot(psi, psi).real
    if abs(norm - 1.0) > _NORM_TOL:
        raise ParameterError(f"eigenvector must be normalized, |psi|^2 = {norm!r}")
    return complex(np.sum(psi**2 * gamma))


def quasi_degenerate_mu(h: np.ndarray, coupling: ChannelCoupling, k: int) -> float:
    """Threshold ``mu`` at which the ``k``-th degenerate doublet turns complex."""
    _, vecs = np.linalg.eigh(h)
    return abs(tunnel_coupling(vecs[:, k], coupling.gamma))


def quasi_degenerate_mus(h: np.ndarray, coupling: ChannelCoupling,
                         window: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Levels of ``H`` and their doublet thresholds, optionally within ``|eps| <= window``."""
    vals, vecs = np.linalg.eigh(h)
    if window is not None:
        keep = np.abs(vals) <= window
        vals, vecs = vals[keep], vecs[:, keep]
    chans = coupling.open_channels
    c = np.sum(vecs[chans, :] ** 2 * coupling.gamma[chans, None], axis=0)
    return vals, np.abs(c)


def _split_sequences(h, coupling):
    g = np.diag(coupling.gamma)
    ep, vp = np.linalg.eigh(h + g)
    em, vm = np.linalg.eigh(h - g)
    return ep, vp, em, vm


def crossing_pairs(h: np.ndarray, coupling: ChannelCoupling, window: float) -> list[CrossingPair]:
    """Adjacent pairs of ``H + Gamma`` and ``H - Gamma`` levels with exact overlaps.

    Every ``+`` level with ``|eps| <= window`` is paired with the nearest
    ``-`` level (ties go to the smaller index).
    """
    h = np.asarray(h)
    ep, vp, em, vm = _split_sequences(h, coupling)
    out = []
    for k in np.flatnonzero(np.abs(ep) <= window):
        l = int(np.argmin(np.abs(em - ep[k])))
        o = complex(np.vdot(vp[:, k], vm[:, l]))
        gap = abs(ep[k] - em[l])
        if gap == 0.0:
            muc = 0.0
        elif o == 0:
            muc = math.inf
        else:
            muc = gap / (2.0 * abs(o))
        out.append(CrossingPair(eps_plus=float(ep[k]), eps_minus=float(em[l]),
                                overlap=o, mu_critical=muc, k=int(k), l=l))
    return out


def overlap_perturbative(h: np.ndarray, coupling: ChannelCoupling, k: int, l: int) -> complex:
    """First-order estimate of the ``+``/``-`` eigenvector overlap.

    ``<k+|2 Gamma|l+> / (-<l+|2 Gamma|l+>)``, where ``|l+>`` is the ``l``-th
    eigenvector of ``H + Gamma`` (the adiabatic partner of ``|l->``).  The
    denominator approximates ``eps_k^+ - eps_l^+`` by the coupling shift.
    Returns ``nan`` when the denominator vanishes.
    """
    g = np.diag(coupling.gamma)
    _, vp = np.linalg.eigh(np.asarray(h) + g)
    a, b = vp[:, k], vp[:, l]
    num = 2.0 * np.vdot(a, coupling.gamma * b)
    den = -2.0 * np.vdot(b, coupling.gamma * b).real
    if den == 0.0:
        return complex(math.nan, math.nan) if num != 0 else 0j
    return complex(num / den)
