"""Effective non-hermitian Hamiltonians of two coupled gain/loss subsystems.

Two variants are built:

* ``PT``: ``[[H - i mu, Gamma], [Gamma, H* + i mu]]``
* ``PTT'``: ``[[H - i mu, Gamma], [Gamma, H + i mu]]``

They coincide for real ``H``.  The module also carries the scattering
description of the same system (subsystem scattering matrices and the tunnel
barrier); the roots of the resulting quantization determinant are the
eigenvalues of the ``PT`` Hamiltonian, which gives an independent oracle for
the eigenvalue route.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .ensembles import ChannelCoupling, SymmetryClass
from .errors import NumericalError, ParameterError

__all__ = [
    "SymmetryVariant",
    "EffectiveHamiltonian",
    "BarrierScattering",
    "Side",
    "build_effective",
    "parity_transform",
    "parity_form",
    "real_form",
    "coupling_matrix",
    "scattering_matrix",
    "quantization_matrix",
    "quantization_residual",
]


class SymmetryVariant(str, enum.Enum):
    PT = "PT"
    PTT_PRIME = "PTTprime"

    @classmethod
    def parse(cls, value) -> "SymmetryVariant":
        if isinstance(value, cls):
            return value
        key = str(value).replace("'", "prime").replace("_", "").lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ParameterError(f"unknown symmetry variant {value!r}; expected 'PT' or 'PTTprime'")


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """The ``2M x 2M`` matrix together with the parameters that produced it."""

    matrix: np.ndarray
    mu: float
    symmetry: SymmetryClass
    variant: SymmetryVariant
    T: float
    M: int
    N: int
    seed: int | None = None
    h: np.ndarray = field(default=None, repr=False, compare=False)
    coupling: ChannelCoupling = field(default=None, repr=False, compare=False)

    @property
    def params(self) -> dict:
        return {
            "class": self.symmetry.value,
            "variant": self.variant.value,
            "T": self.T,
            "mu": self.mu,
            "M": self.M,
            "N": self.N,
            "seed": self.seed,
        }


def _check_inputs(h: np.ndarray, coupling: ChannelCoupling, mu: float) -> None:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ParameterError(f"H must be square, got shape {h.shape}")
    if h.shape[0] != coupling.M:
        raise ParameterError(
            f"dimension mismatch: H is {h.shape[0]}x{h.shape[0]}, coupling has M={coupling.M}"
        )
    if not (math.isfinite(mu) and mu >= 0):
        raise ParameterError(f"mu must be finite and >= 0, got {mu!r}")
    scale = np.max(np.abs(h)) if h.size else 0.0
    if np.max(np.abs(h - h.conj().T)) > 1e-12 * max(scale, 1.0):
        raise ParameterError("H must be hermitian")


def _infer_class(h: np.ndarray) -> SymmetryClass:
    if np.iscomplexobj(h) and np.any(h.imag != 0):
        return SymmetryClass.UNITARY
    return SymmetryClass.ORTHOGONAL


def build_effective(h: np.ndarray, coupling: ChannelCoupling, mu: float,
                    variant: SymmetryVariant | str = SymmetryVariant.PT, *,
                    symmetry: SymmetryClass | str | None = None,
                    seed: int | None = None) -> EffectiveHamiltonian:
    """Assemble the effective Hamiltonian of the coupled system.

    For real ``H`` both variants return identical matrices.
    """
    h = np.asarray(h)
    variant = SymmetryVariant.parse(variant)
    _check_inputs(h, coupling, mu)
    symmetry = _infer_class(h) if symmetry is None else SymmetryClass.parse(symmetry)
    M = h.shape[0]

    if variant is SymmetryVariant.PT and np.iscomplexobj(h):
        lower = h.conj()
    else:
        lower = h
    out = np.zeros((2 * M, 2 * M), dtype=complex)
    out[:M, :M] = h
    out[M:, M:] = lower
    idx = np.arange(M)
    out[idx, idx] -= 1j * mu
    out[idx + M, idx + M] += 1j * mu
    out[idx, idx + M] = coupling.gamma
    out[idx + M, idx] = coupling.gamma
    return EffectiveHamiltonian(matrix=out, mu=float(mu), symmetry=symmetry,
                                variant=variant, T=coupling.T, M=M, N=coupling.N,
                                seed=seed, h=h, coupling=coupling)


def _parity_unitary(M: int) -> np.ndarray:
    eye = np.eye(M)
    return np.block([[eye, eye], [eye, -eye]]) / math.sqrt(2.0)


def parity_transform(heff: EffectiveHamiltonian) -> np.ndarray:
    """Return ``U H_eff U^dagger`` with ``U = [[I, I], [I, -I]] / sqrt(2)``.

    In this basis the two subsystems are replaced by their symmetric and
    antisymmetric combinations, and ``Gamma`` appears on the diagonal blocks.
    """
    u = _parity_unitary(heff.M)
    return u @ heff.matrix @ u.conj().T


def parity_form(h: np.ndarray, coupling: ChannelCoupling, mu: float,
                variant: SymmetryVariant | str = SymmetryVariant.PT) -> np.ndarray:
    """Assemble the parity-basis Hamiltonian block by block.

    PT: ``[[Re H + Gamma, i Im H - i mu], [i Im H - i mu, Re H - Gamma]]``;
    PTT': ``[[H + Gamma, -i mu], [-i mu, H - Gamma]]``.  The sign of ``mu``
    follows from the ``H - i mu`` convention of the upper block; flipping it
    gives an isospectral matrix.
    """
    h = np.asarray(h)
    variant = SymmetryVariant.parse(variant)
    _check_inputs(h, coupling, mu)
    M = h.shape[0]
    g = np.diag(coupling.gamma)
    eye = np.eye(M)
    if variant is SymmetryVariant.PT:
        diag_part = h.real
        off = 1j * h.imag - 1j * mu * eye if np.iscomplexobj(h) else -1j * mu * eye
    else:
        diag_part = h
        off = -1j * mu * eye
    return np.block([[diag_part + g, off], [off, diag_part - g]]).astype(complex)


def real_form(h: np.ndarray, coupling: ChannelCoupling, mu: float,
              variant: SymmetryVariant | str = SymmetryVariant.PT) -> np.ndarray | None:
    """Real matrix similar to the effective Hamiltonian, or ``None``.

    Conjugating the parity form with ``diag(I, iI)`` gives
    ``[[Re H + Gamma, mu - Im H], [Im H - mu, Re H - Gamma]]``, which is real
    whenever the PT operation is an antiunitary involution: always for the
    PT variant, and for PTT' only when ``H`` is real.
    """
    h = np.asarray(h)
    variant = SymmetryVariant.parse(variant)
    _check_inputs(h, coupling, mu)
    complex_h = np.iscomplexobj(h) and np.any(h.imag != 0)
    if variant is SymmetryVariant.PTT_PRIME and complex_h:
        return None
    M = h.shape[0]
    re = np.ascontiguousarray(h.real)
    out = np.empty((2 * M, 2 * M))
    out[:M, :M] = re
    out[M:, M:] = re
    if complex_h:
        out[:M, M:] = -h.imag
        out[M:, :M] = h.imag
    else:
        out[:M, M:] = 0.0
        out[M:, :M] = 0.0
    idx = np.arange(M)
    out[idx, idx] += coupling.gamma
    out[idx + M, idx + M] -= coupling.gamma
    out[idx, idx + M] += mu
    out[idx + M, idx] -= mu
    return out


# -- scattering description -------------------------------------------------


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class BarrierScattering:
    """Tunnel barrier with reflection ``-sqrt(1-T)`` and transmission ``i sqrt(T)``."""

    T: float

    def __post_init__(self):
        if not 0.0 <= self.T <= 1.0:
            raise ParameterError(f"transmission T must lie in [0, 1], got {self.T!r}")

    @property
    def r(self) -> complex:
        return complex(-math.sqrt(1.0 - self.T))

    @property
    def t(self) -> complex:
        return complex(0.0, math.sqrt(self.T))

    def matrix(self, n: int) -> np.ndarray:
        """``[[r, t], [t, r]]`` acting on ``n`` channels at each interface."""
        eye = np.eye(n)
        return np.block([[self.r * eye, self.t * eye], [self.t * eye, self.r * eye]])


def coupling_matrix(coupling: ChannelCoupling) -> np.ndarray:
    """``M x N`` lead coupling ``V`` with ``V[m, c] = delta_{m, c} sqrt(v_m)``."""
    chans = coupling.open_channels
    V = np.zeros((coupling.M, chans.size))
    V[chans, np.arange(chans.size)] = np.sqrt(coupling.v[chans])
    return V


def scattering_matrix(side: Side | str, E: complex, h: np.ndarray, V: np.ndarray,
                      mu: float) -> np.ndarray:
    """Subsystem scattering matrix at (possibly complex) energy ``E``.

    Left: ``1 - 2i V^dag (E - i mu - H + i V V^dag)^-1 V``.
    Right: ``1 - 2i V^dag (E + i mu - H* + i V V^dag)^-1 V``.
    """
    side = Side(side)
    h = np.asarray(h)
    M = h.shape[0]
    if V.shape[0] != M:
        raise ParameterError(f"V has {V.shape[0]} rows, H is {M}x{M}")
    if side is Side.LEFT:
        a = -h + 0j
        shift = E - 1j * mu
    else:
        a = -h.conj() + 0j
        shift = E + 1j * mu
    a[np.diag_indices(M)] += shift
    a += 1j * (V @ V.conj().T)
    try:
        x = np.linalg.solve(a, V)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"singular resolvent at E={E!r} ({side.value}); cond={np.linalg.cond(a):.3e}"
        ) from exc
    if not np.all(np.isfinite(x)):
        raise NumericalError(
            f"non-finite resolvent at E={E!r} ({side.value}); cond={np.linalg.cond(a):.3e}"
        )
    return np.eye(V.shape[1]) - 2j * (V.conj().T @ x)


def quantization_matrix(E: complex, h: np.ndarray, coupling: ChannelCoupling,
                        mu: float) -> np.ndarray:
    """``B diag(S_L, S_R) - 1`` whose determinant vanishes on the spectrum."""
    V = coupling_matrix(coupling)
    n = V.shape[1]
    s = np.zeros((2 * n, 2 * n), dtype=complex)
    s[:n, :n] = scattering_matrix(Side.LEFT, E, h, V, mu)
    s[n:, n:] = scattering_matrix(Side.RIGHT, E, h, V, mu)
    return BarrierScattering(coupling.T).matrix(n) @ s - np.eye(2 * n)


def quantization_residual(E: complex, h: np.ndarray, coupling: ChannelCoupling,
                          mu: float) -> float:
    """Smallest over largest singular value of the quantization matrix at ``E``.

    The ratio is a scale-free zero indicator: it vanishes exactly when ``E``
    is an eigenvalue of the PT effective Hamiltonian built from the same
    ``H``, ``coupling`` and ``mu``.
    """
    sv = np.linalg.svd(quantization_matrix(E, h, coupling, mu), compute_uv=False)
    if sv[0] == 0:
        return 0.0
    return float(sv[-1] / sv[0])
