import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptbreak import (
    EnsembleSpec,
    IntegrityError,
    NumericalError,
    ParameterError,
    SweepConfig,
    build_coupling,
    build_effective,
    classify,
    complex_fraction,
    effective_spectrum,
    eigenvalues,
    run_sweep,
)
from ptbreak.spectral import Spectrum, fraction_from_counts

ANCHOR_F = 0.41365265558813946  # orthogonal, T=1, mu=mu0, M=200, N=20, 100 realizations, seed 0


def test_diagonal_eigenvalues():
    np.testing.assert_allclose(eigenvalues(np.array([[2.0, 0], [0, 3.0]])).eigenvalues, [2, 3])


def test_rotation_generator():
    ev = eigenvalues(np.array([[0.0, 1.0], [-1.0, 0.0]])).eigenvalues
    np.testing.assert_allclose(ev, [-1j, 1j], atol=1e-15)


def test_trace_and_determinant():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(50, 50)) + 1j * rng.normal(size=(50, 50))
    ev = eigenvalues(a).eigenvalues
    assert abs(ev.sum() - np.trace(a)) <= 1e-9 * abs(np.trace(a))
    sign, logdet = np.linalg.slogdet(a)
    assert np.sum(np.log(np.abs(ev))) == pytest.approx(logdet, rel=1e-8)
    phase = np.prod(ev / np.abs(ev))
    assert abs(phase - sign) < 1e-8


def test_non_finite_input():
    a = np.eye(3)
    a[1, 1] = np.nan
    with pytest.raises(NumericalError) as info:
        eigenvalues(a, {"realization": 7})
    assert "realization" in str(info.value)


def test_spectrum_sorted():
    s = Spectrum([2 + 1j, -1, 2 - 1j, 0.5])
    np.testing.assert_array_equal(s.eigenvalues, [-1, 0.5, 2 - 1j, 2 + 1j])


def test_classify_small_example():
    cs = classify(np.array([1.0, 2 + 3j, 2 - 3j]), window_half_width=10, tolerance=1e-8)
    assert cs.real_levels.size == 1
    assert cs.conjugate_pairs.size == 1
    assert cs.n_complex == 2 and cs.n_levels == 3


def test_classify_window_by_real_part():
    cs = classify(np.array([0.1, 0.9, 0.3 + 5j, 0.3 - 5j, 2 + 1j, 2 - 1j]), 0.5, 1e-8)
    assert cs.n_levels == 3 and cs.n_complex == 2


def test_classify_unpaired_raises():
    with pytest.raises(IntegrityError) as info:
        classify(np.array([0.0, 0.1 + 1e-3j]), 1.0, 1e-8)
    assert len(info.value.unpaired) == 1


def test_classify_partner_too_far():
    with pytest.raises(IntegrityError):
        classify(np.array([0.1 + 1e-3j, 0.1 + 1e-6 - 1e-3j]), 1.0, 1e-8)


@pytest.mark.parametrize("symmetry", ["orthogonal", "unitary"])
def test_hermitian_limit_all_real(small_instance, symmetry):
    h, c, norm = small_instance(symmetry, M=60, N=6)
    cs = classify(effective_spectrum(h, c, 0.0), norm.window_half_width, 1e-8 * norm.delta0)
    assert cs.n_complex == 0 and cs.n_levels > 0


def test_decoupled_pairs(small_instance):
    h, c, norm = small_instance("orthogonal", M=100, N=10, T=0.0)
    mu = 0.5 * norm.delta0
    cs = classify(effective_spectrum(h, c, mu), norm.window_half_width, 1e-8 * norm.delta0)
    assert cs.real_levels.size == 0
    eps = np.linalg.eigvalsh(h)
    eps = eps[np.abs(eps) <= norm.window_half_width]
    np.testing.assert_allclose(np.sort(cs.conjugate_pairs.real), eps, atol=1e-12)
    np.testing.assert_allclose(cs.conjugate_pairs.imag, mu, atol=1e-12)


@pytest.mark.parametrize("symmetry,variant", [("orthogonal", "PT"), ("unitary", "PT"),
                                              ("unitary", "PTTprime")])
def test_effective_spectrum_routes_agree(small_instance, symmetry, variant):
    h, c, norm = small_instance(symmetry, M=40, N=6)
    mu = 0.05
    fast = effective_spectrum(h, c, mu, variant).eigenvalues
    direct = eigenvalues(build_effective(h, c, mu, variant).matrix).eigenvalues
    np.testing.assert_allclose(np.sort_complex(fast.round(9)), np.sort_complex(direct.round(9)),
                               atol=1e-9)


def random_conjugate_closed(seed, n_real, n_pairs):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1, 1, n_pairs) + 1j * rng.uniform(1e-3, 1, n_pairs)
    return np.concatenate([rng.uniform(-1, 1, n_real), z, z.conj()])


@given(st.integers(0, 10**6), st.integers(0, 20), st.integers(0, 20))
def test_classify_order_independent(seed, n_real, n_pairs):
    ev = random_conjugate_closed(seed, n_real, n_pairs)
    perm = np.random.default_rng(seed + 1).permutation(ev.size)
    a = classify(ev, 0.6, 1e-8)
    b = classify(ev[perm], 0.6, 1e-8)
    np.testing.assert_array_equal(a.real_levels, b.real_levels)
    np.testing.assert_array_equal(np.sort_complex(a.conjugate_pairs), np.sort_complex(b.conjugate_pairs))


@given(st.integers(0, 10**6), st.integers(0, 20), st.integers(0, 20))
def test_classify_idempotent(seed, n_real, n_pairs):
    ev = random_conjugate_closed(seed, n_real, n_pairs)
    a = classify(ev, 0.6, 1e-8)
    again = np.concatenate([a.real_levels, a.conjugate_pairs, a.conjugate_pairs.conj()])
    b = classify(again, 0.6, 1e-8)
    np.testing.assert_array_equal(a.real_levels, b.real_levels)
    np.testing.assert_array_equal(np.sort_complex(a.conjugate_pairs), np.sort_complex(b.conjugate_pairs))
    assert a.n_complex % 2 == 0


@given(st.floats(1e-3, 1.0), st.floats(0.0, 2.0), st.integers(0, 10**6))
def test_classification_closure_on_random_instances(T, mu, seed):
    rng = np.random.default_rng(seed)
    M = 10
    a = rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
    h = (a + a.conj().T) / (2 * math.sqrt(M))
    c = build_coupling(M, 3, T, math.pi / M)
    for variant in ("PT", "PTTprime"):
        cs = classify(effective_spectrum(h, c, mu * 0.5, variant), 10.0, 1e-8 * math.pi / M)
        assert cs.n_levels == 2 * M


def test_tolerance_robustness(small_instance):
    counts = []
    for seed in range(10):
        h, c, norm = small_instance("orthogonal", M=100, N=10, T=1.0, seed=seed)
        s = effective_spectrum(h, c, 0.05)
        counts.append([classify(s, 0.5, k * norm.delta0).n_complex for k in (1e-10, 1e-8, 1e-6)])
    counts = np.array(counts)
    assert np.array_equal(counts[:, 0], counts[:, 1])
    assert np.array_equal(counts[:, 1], counts[:, 2])


def test_fraction_all_real():
    cs = [classify(np.array([0.1, 0.2]), 1.0, 1e-8) for _ in range(5)]
    fe = complex_fraction(cs)
    assert fe.f == 0 and fe.stderr == 0 and fe.n_realizations == 5


def test_fraction_all_paired():
    cs = [classify(np.array([0.1 + 1j, 0.1 - 1j]), 1.0, 1e-8) for _ in range(3)]
    assert complex_fraction(cs).f == 1


def test_fraction_is_ratio_of_sums():
    fe = fraction_from_counts([2, 0, 4], [4, 2, 4])
    assert fe.f == pytest.approx(6 / 10)
    # jackknife by hand
    loo = np.array([4 / 6, 6 / 8, 2 / 6])
    assert fe.stderr == pytest.approx(math.sqrt(2 / 3 * np.sum((loo - loo.mean()) ** 2)))


def test_fraction_skips_empty_windows(caplog):
    fe = fraction_from_counts([2, 0], [4, 0])
    assert fe.f == 0.5 and fe.n_skipped == 1 and fe.n_realizations == 1
    assert "empty window" in caplog.text


def test_fraction_rejects_mixed_settings():
    a = classify(np.array([0.1]), 1.0, 1e-8)
    b = classify(np.array([0.1]), 0.5, 1e-8)
    with pytest.raises(ParameterError):
        complex_fraction([a, b])
    with pytest.raises(ParameterError):
        complex_fraction([])


def test_regression_anchor():
    r = run_sweep(SweepConfig(EnsembleSpec("orthogonal", 200, 20, 0), mu_grid=[1.0],
                              t_grid=[1.0], realizations=100))
    f = r.f[0, 0]
    assert 0.05 < f < 0.95
    assert f == pytest.approx(ANCHOR_F, abs=1e-12)


def test_fraction_monotone_in_mu():
    mu = [0.25, 0.5, 1.0, 2.0, 4.0]
    r = run_sweep(SweepConfig(EnsembleSpec("orthogonal", 40, 6, 0), mu_grid=mu, t_grid=[1.0],
                              realizations=200))
    f, se = r.f[0], r.stderr[0]
    assert np.all(np.diff(f) > -2 * np.hypot(se[1:], se[:-1]))
    assert f[-1] > f[0]
