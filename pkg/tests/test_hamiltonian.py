import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from conftest import rel_maxdiff
from ptbreak import (
    ParameterError,
    SymmetryVariant,
    build_coupling,
    build_effective,
    parity_form,
    parity_transform,
    quantization_residual,
    real_form,
)
from ptbreak.ensembles import ChannelCoupling
from ptbreak.hamiltonian import BarrierScattering, Side, coupling_matrix, scattering_matrix
from ptbreak.perturbation import scales


def one_level(g):
    return ChannelCoupling(v=np.array([1.0]), gamma=np.array([g]), T=1.0,
                           open_channels=np.array([0]))


def sorted_ev(a):
    ev = scipy.linalg.eigvals(a)
    return ev[np.lexsort((ev.imag.round(9), ev.real.round(9)))]


def test_decoupled_single_level():
    ev = np.linalg.eigvals(build_effective(np.zeros((1, 1)), one_level(0.0), 1.0).matrix)
    np.testing.assert_allclose(sorted(ev, key=lambda z: z.imag), [-1j, 1j], atol=1e-15)


def test_single_level_splitting():
    ev = np.linalg.eigvals(build_effective(np.zeros((1, 1)), one_level(0.3), 0.0).matrix)
    np.testing.assert_allclose(np.sort(ev.real), [-0.3, 0.3], atol=1e-15)


@pytest.mark.parametrize("mu", [0.1, 0.25, 0.2999, 0.3001, 0.5, 2.0])
def test_single_level_exceptional_point(mu):
    g = 0.3
    ev = np.linalg.eigvals(build_effective(np.zeros((1, 1)), one_level(g), mu).matrix)
    expected = np.sqrt(complex(g**2 - mu**2)) * np.array([1, -1])
    np.testing.assert_allclose(np.sort_complex(ev.round(12)), np.sort_complex(expected.round(12)),
                               atol=1e-12)
    if mu > g:
        assert np.all(np.abs(ev.real) < 1e-12)
    else:
        assert np.all(np.abs(ev.imag) < 1e-12)


@pytest.mark.parametrize("symmetry", ["orthogonal", "unitary"])
@pytest.mark.parametrize("variant", ["PT", "PTTprime"])
def test_hermitian_at_zero_mu(small_instance, symmetry, variant):
    h, c, _ = small_instance(symmetry)
    m = build_effective(h, c, 0.0, variant).matrix
    assert np.array_equal(m, m.conj().T)


@pytest.mark.parametrize("symmetry", ["orthogonal", "unitary"])
def test_pt_symmetry_of_matrix(small_instance, symmetry):
    # P swaps the subsystems; P H* P = H for the PT variant
    h, c, _ = small_instance(symmetry, M=12)
    m = build_effective(h, c, 0.2, "PT").matrix
    M = 12
    P = np.block([[np.zeros((M, M)), np.eye(M)], [np.eye(M), np.zeros((M, M))]])
    np.testing.assert_array_equal(P @ m.conj() @ P, m)


def test_pttprime_symmetry_of_matrix(small_instance):
    # P H^dagger P = H for the PTT' variant (pseudo-hermiticity)
    h, c, _ = small_instance("unitary", M=12)
    m = build_effective(h, c, 0.2, "PTTprime").matrix
    P = np.roll(np.eye(24), 12, axis=0)
    np.testing.assert_array_equal(P @ m.conj().T @ P, m)
    assert not np.array_equal(P @ m.conj() @ P, m)


def test_variants_agree_for_real_h(small_instance):
    h, c, _ = small_instance("orthogonal")
    a = build_effective(h, c, 0.3, "PT").matrix
    b = build_effective(h, c, 0.3, "PTTprime").matrix
    assert np.array_equal(a, b)


def test_metadata(small_instance):
    h, c, _ = small_instance("unitary", M=10, N=3, T=0.4)
    heff = build_effective(h, c, 0.1, "PTTprime", seed=5)
    assert heff.params == {**heff.params, "M": 10, "N": 3, "T": 0.4, "mu": 0.1, "seed": 5}
    assert heff.symmetry.value == "unitary"
    assert heff.variant is SymmetryVariant.PTT_PRIME
    assert heff.matrix.shape == (20, 20)


@pytest.mark.parametrize("mu", [-0.1, math.nan, math.inf])
def test_rejects_bad_mu(small_instance, mu):
    h, c, _ = small_instance()
    with pytest.raises(ParameterError):
        build_effective(h, c, mu)


def test_rejects_non_hermitian_h(small_instance):
    h, c, _ = small_instance()
    h = h.copy()
    h[0, 1] += 1.0
    with pytest.raises(ParameterError):
        build_effective(h, c, 0.1)


def test_rejects_dimension_mismatch(small_instance):
    h, _, norm = small_instance(M=10)
    with pytest.raises(ParameterError):
        build_effective(h, build_coupling(11, 2, 0.5, norm.delta0), 0.1)


def test_parity_off_diagonal_zero_at_mu_zero(small_instance):
    h, c, _ = small_instance("orthogonal")
    p = parity_transform(build_effective(h, c, 0.0))
    M = h.shape[0]
    assert np.max(np.abs(p[:M, M:])) < 1e-15
    assert np.max(np.abs(p[M:, :M])) < 1e-15


def direct_blocks(h, gamma, mu, variant):
    """Block form written out independently of the library."""
    M = h.shape[0]
    G = np.diag(gamma)
    if variant == "PT":
        a, b = h.real + G, h.real - G
        off = 1j * h.imag - 1j * mu * np.eye(M)
    else:
        a, b = h + G, h - G
        off = -1j * mu * np.eye(M)
    return np.block([[a, off], [off, b]])


@pytest.mark.parametrize("symmetry", ["orthogonal", "unitary"])
@pytest.mark.parametrize("variant", ["PT", "PTTprime"])
def test_parity_identity(small_instance, symmetry, variant):
    for seed in range(10):
        h, c, norm = small_instance(symmetry, M=20, T=0.5, seed=seed)
        mu = 0.3 * norm.delta0
        p = parity_transform(build_effective(h, c, mu, variant))
        assert rel_maxdiff(p, direct_blocks(h, c.gamma, mu, variant)) < 1e-12
        assert rel_maxdiff(parity_form(h, c, mu, variant), p) < 1e-12


@pytest.mark.parametrize("symmetry", ["orthogonal", "unitary"])
def test_mirrored_mu_form_is_isospectral(small_instance, symmetry):
    h, c, norm = small_instance(symmetry, M=16)
    mu = 0.7 * norm.delta0
    M = 16
    G = np.diag(c.gamma)
    off = 1j * h.imag + 1j * mu * np.eye(M)
    mirrored = np.block([[h.real + G, off], [off, h.real - G]])
    a = sorted_ev(mirrored)
    b = sorted_ev(build_effective(h, c, mu).matrix)
    np.testing.assert_allclose(a, b, atol=1e-10)


@pytest.mark.parametrize("symmetry,variant", [("orthogonal", "PT"), ("unitary", "PT"),
                                              ("orthogonal", "PTTprime")])
def test_real_form_is_similar(small_instance, symmetry, variant):
    h, c, norm = small_instance(symmetry, M=18)
    mu = 0.4
    r = real_form(h, c, mu, variant)
    assert r is not None and np.isrealobj(r)
    np.testing.assert_allclose(sorted_ev(r), sorted_ev(build_effective(h, c, mu, variant).matrix),
                               atol=1e-10)


def test_real_form_absent_for_complex_pttprime(small_instance):
    h, c, _ = small_instance("unitary")
    assert real_form(h, c, 0.2, "PTTprime") is None


@pytest.mark.parametrize("symmetry", ["orthogonal", "unitary"])
def test_unitary_scattering_at_zero_mu(small_instance, symmetry):
    h, c, _ = small_instance(symmetry, M=30, N=5)
    V = coupling_matrix(c)
    for E in (-0.4, 0.0, 0.3):
        s = scattering_matrix(Side.LEFT, E, h, V, 0.0)
        assert np.max(np.abs(s.conj().T @ s - np.eye(5))) < 1e-10


def test_right_equals_left_at_zero_mu(small_instance):
    h, c, _ = small_instance("orthogonal", M=30, N=5)
    V = coupling_matrix(c)
    sl = scattering_matrix(Side.LEFT, 0.1, h, V, 0.0)
    sr = scattering_matrix(Side.RIGHT, 0.1, h, V, 0.0)
    np.testing.assert_allclose(sr, sl, atol=1e-12)
    # also the defining relation S_R(E) = [S_L^-1(E*)]*
    np.testing.assert_allclose(sr, np.linalg.inv(sl).conj(), atol=1e-10)


def test_right_equals_left_transpose_for_complex_h(small_instance):
    h, c, _ = small_instance("unitary", M=30, N=5)
    V = coupling_matrix(c)
    sl = scattering_matrix(Side.LEFT, 0.1, h, V, 0.0)
    sr = scattering_matrix(Side.RIGHT, 0.1, h, V, 0.0)
    np.testing.assert_allclose(sr, sl.T, atol=1e-12)


@pytest.mark.parametrize("symmetry", ["orthogonal", "unitary"])
def test_scattering_with_gain_and_loss(small_instance, symmetry):
    h, c, _ = small_instance(symmetry, M=30, N=5, T=0.6)
    V = coupling_matrix(c)
    mu, E = 0.05, 0.12 + 0.03j
    sl = scattering_matrix(Side.LEFT, np.real(E), h, V, mu)
    sr = scattering_matrix(Side.RIGHT, np.real(E), h, V, mu)
    # with E - i mu in the left resolvent, the left side is amplifying
    assert np.linalg.svd(sl, compute_uv=False).min() >= 1 - 1e-12
    assert np.linalg.svd(sr, compute_uv=False).max() <= 1 + 1e-12
    # S_R(E) = [S_L^-1(E*)]* holds for complex E as well
    lhs = scattering_matrix(Side.RIGHT, E, h, V, mu)
    rhs = np.linalg.inv(scattering_matrix(Side.LEFT, np.conj(E), h, V, mu)).conj()
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_barrier_is_unitary():
    for T in (0.0, 0.3, 1.0):
        b = BarrierScattering(T).matrix(4)
        np.testing.assert_allclose(b.conj().T @ b, np.eye(8), atol=1e-15)
    assert BarrierScattering(0.0).r == -1


@pytest.mark.parametrize("symmetry", ["orthogonal", "unitary"])
def test_quantization_residual_on_spectrum(small_instance, symmetry):
    h, c, norm = small_instance(symmetry, M=60, N=8, T=0.7, seed=3)
    mu = 0.5 * scales(8, 0.7, norm.delta0).mu0
    ev = np.linalg.eigvals(build_effective(h, c, mu).matrix)
    res = [quantization_residual(E, h, c, mu) for E in ev]
    assert max(res) < 1e-8


@pytest.mark.parametrize("symmetry", ["orthogonal", "unitary"])
def test_quantization_residual_off_spectrum(small_instance, symmetry):
    h, c, norm = small_instance(symmetry, M=60, N=8, T=0.7, seed=3)
    mu = 0.5 * scales(8, 0.7, norm.delta0).mu0
    ev = np.linalg.eigvals(build_effective(h, c, mu).matrix)
    pts = ev + 0.3 * norm.delta0
    d = np.min(np.abs(pts[:, None] - ev[None, :]), axis=1)
    generic = pts[d >= 0.1 * norm.delta0]
    assert generic.size > 0.6 * pts.size
    assert min(quantization_residual(E, h, c, mu) for E in generic) > 1e-3


def test_quantization_decoupled_limit(small_instance):
    h, c, _ = small_instance("orthogonal", M=20, N=4, T=0.0)
    mu = 0.05
    eps = np.linalg.eigvalsh(h)
    for e in eps[:5]:
        assert quantization_residual(e + 1j * mu, h, c, mu) < 1e-8
        assert quantization_residual(e - 1j * mu, h, c, mu) < 1e-8
    assert np.allclose(BarrierScattering(0.0).matrix(4), -np.eye(8))


def test_quantization_detects_corrupted_coupling(small_instance):
    h, c, _ = small_instance("orthogonal", M=30, N=5, T=0.7)
    bad = ChannelCoupling(v=c.v, gamma=2.0 * c.gamma, T=c.T, open_channels=c.open_channels)
    ev = np.linalg.eigvals(build_effective(h, bad, 0.05).matrix)
    assert max(quantization_residual(E, h, c, 0.05) for E in ev) > 1e-3


@given(st.floats(0.0, 1.0), st.floats(0.0, 0.5), st.integers(0, 10**6))
def test_spectrum_closed_under_conjugation(T, mu, seed):
    rng = np.random.default_rng(seed)
    M = 8
    a = rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
    h = (a + a.conj().T) / (2 * math.sqrt(M))
    c = build_coupling(M, 3, T, math.pi / M)
    for variant in ("PT", "PTTprime"):
        ev = sorted_ev(build_effective(h, c, mu, variant).matrix)
        conj = np.sort_complex(ev.conj())
        np.testing.assert_allclose(np.sort_complex(ev.round(8)), np.sort_complex(conj.round(8)),
                                   atol=1e-7)
