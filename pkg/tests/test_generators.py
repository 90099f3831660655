import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locscape import (
    PotentialSpec,
    TheoremSpec,
    random_band_matrix,
    random_potential,
    schrodinger_operator,
    theorem_test_matrix,
)
from locscape.errors import DegeneratePotentialWarning, DimensionError
from locscape.operators import fourier_modes


def test_bandwidth_zero_is_diagonal():
    A = random_band_matrix(10, 0, 4).to_dense()
    assert np.array_equal(A, np.diag(np.diag(A)))
    assert np.array_equal(np.diag(A), 2 * np.random.default_rng(4).uniform(-1.0, 1.0, 10))
    assert np.all(np.abs(np.diag(A)) <= 2.0)


def test_band_structure():
    A = random_band_matrix(300, 2, 7)
    M = A.to_dense()
    assert np.array_equal(M, M.T)
    i, j = np.nonzero(M)
    assert np.abs(i - j).max() == 2
    assert np.abs(M).max() <= 2.0
    # off-band entries are exactly zero; every band entry is drawn
    assert np.count_nonzero(M) == 300 + 2 * 299 + 2 * 298


def test_band_determinism():
    a = random_band_matrix(50, 3, 12).diagonals
    b = random_band_matrix(50, 3, 12).diagonals
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, random_band_matrix(50, 3, 13).diagonals)


def test_band_validation():
    with pytest.raises(ValueError):
        random_band_matrix(10, -1, 0)
    with pytest.raises(DimensionError):
        random_band_matrix(4, 2, 0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5))
def test_band_entry_bound(seed, b):
    A = random_band_matrix(40, b, seed).to_dense()
    assert np.abs(A).max() <= 2.0
    assert np.array_equal(A, A.T)


def test_potential_range_and_determinism():
    V = random_potential(PotentialSpec(seed=3))
    assert V.shape == (48, 48)
    assert V.min() == 0.0 and V.max() == pytest.approx(1e4, rel=1e-14)
    assert np.array_equal(V, random_potential(PotentialSpec(seed=3)))


def test_potential_band_limited():
    spec = PotentialSpec(grid_side=32, cutoff=4, seed=1)
    V = random_potential(spec)
    F = np.fft.fft2(V)
    k = fourier_modes(32)
    outside = (np.abs(k)[:, None] > 4) | (np.abs(k)[None, :] > 4)
    assert np.abs(F[outside]).max() <= 1e-9 * np.abs(F).max()


def test_potential_is_real_by_conjugate_symmetry():
    # Hermitian spectrum: F(-k) = conj(F(k))
    V = random_potential(PotentialSpec(grid_side=16, cutoff=3, seed=5))
    F = np.fft.fft2(V)
    Fneg = np.roll(F[::-1, ::-1], 1, axis=(0, 1))
    np.testing.assert_allclose(Fneg, np.conj(F), atol=1e-8 * np.abs(F).max())


def test_potential_cutoff_zero_degenerates():
    with pytest.warns(DegeneratePotentialWarning):
        V = random_potential(PotentialSpec(grid_side=8, cutoff=0))
    assert np.array_equal(V, np.zeros((8, 8)))


def test_potential_aliasing_rejected():
    with pytest.raises(ValueError):
        random_potential(PotentialSpec(grid_side=16, cutoff=8))


def test_free_laplacian_spectrum():
    A = schrodinger_operator(np.zeros((8, 8)))
    lam = np.sort(np.linalg.eigvalsh(0.5 * (A.to_dense() + A.to_dense().T)))
    k = fourier_modes(8)
    expected = np.sort(((2 * np.pi) ** 2 * (k[:, None] ** 2 + k[None, :] ** 2)).ravel())
    np.testing.assert_allclose(lam, expected, atol=1e-8 * expected.max())


def test_fractional_exponent_recorded():
    A = schrodinger_operator(np.zeros((8, 8)), s_exponent=0.75)
    assert A.exponent == 0.75 and A.dim == 64


def test_theorem_matrix_spike():
    spec = TheoremSpec(blocks=[(5, 4.0), (7, -3.0)], seed=1)
    M = theorem_test_matrix(spec).matrix
    assert np.array_equal(M, M.T)
    lam = np.linalg.eigvalsh(M)
    assert np.max(np.abs(lam)) == pytest.approx(4.0)
    assert M[2, 2] == 4.0 and M[5 + 3, 5 + 3] == -3.0
    assert np.all(M[2, np.arange(12) != 2] == 0.0)


def test_theorem_matrix_decay_profile():
    spec = TheoremSpec(blocks=[(21, 5.0)], seed=0, decay=0.5)
    M = theorem_test_matrix(spec).matrix
    lam, V = np.linalg.eigh(M)
    v = V[:, np.argmax(np.abs(lam))]
    target = np.exp(-0.5 * np.abs(np.arange(21) - 10))
    target /= np.linalg.norm(target)
    assert abs(abs(v @ target) - 1.0) <= 1e-12


def test_theorem_matrix_coupling_and_degeneracy():
    base = TheoremSpec(blocks=[(6, 3.0), (6, 2.0)], seed=4)
    coupled = TheoremSpec(blocks=[(6, 3.0), (6, 2.0)], seed=4, coupling=0.01)
    off = theorem_test_matrix(coupled).matrix[:6, 6:]
    assert np.array_equal(theorem_test_matrix(base).matrix[:6, 6:], np.zeros((6, 6)))
    assert np.count_nonzero(off) == 36
    with pytest.raises(ValueError):
        theorem_test_matrix(TheoremSpec(blocks=[(3, 2.0), (3, -2.0)]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        theorem_test_matrix(TheoremSpec(blocks=[(3, 2.0), (3, -2.0)], allow_degenerate=True))
    with pytest.raises(ValueError):
        theorem_test_matrix(TheoremSpec(blocks=[(3, 2.0)], coupling=-1.0))
