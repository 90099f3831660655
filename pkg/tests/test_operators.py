import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locscape import (
    BandedOperator,
    DenseOperator,
    SpectralComposite,
    estimate_norm,
    flip_spectrum,
    random_band_matrix,
    random_potential,
    schrodinger_operator,
    PotentialSpec,
)
from locscape.errors import (
    DimensionError,
    ImaginaryResidueError,
    NonFiniteError,
    NormFallbackWarning,
    NotSymmetricError,
)
from locscape.operators import diagonal, fourier_modes, identity


def dense_spectral(side, exponent, V):
    """Independent dense assembly: DFT matrices times the symbol."""
    k = fourier_modes(side)
    F = np.exp(-2j * np.pi * np.outer(np.arange(side), k) / side)  # x_j -> mode k
    E = np.kron(F, F)  # flat row-major grid
    sym = ((2 * np.pi) ** 2 * (k[:, None] ** 2 + k[None, :] ** 2)) ** exponent
    M = (E * sym.ravel()) @ E.conj().T / side**2
    return M.real + np.diag(V.ravel())


def test_identity_and_diagonal():
    assert np.array_equal(identity(5).apply([1, 2, 3, 4, 5]), [1, 2, 3, 4, 5])
    assert np.array_equal(diagonal([2, -3]).apply([1, 1]), [2, -3])


def test_apply_errors():
    A = identity(3)
    with pytest.raises(DimensionError):
        A.apply(np.ones(4))
    with pytest.raises(NonFiniteError):
        A.apply([1.0, np.nan, 0.0])
    with pytest.raises(DimensionError):
        A.apply_block(np.ones((4, 2)))


@pytest.mark.parametrize("exponent, symbol", [(1.0, (2 * np.pi) ** 2), (0.75, (2 * np.pi) ** 1.5)])
def test_plane_wave_scales_by_symbol(exponent, symbol):
    side = 48
    A = schrodinger_operator(np.zeros((side, side)), exponent)
    x = np.arange(side) / side
    pw = (np.cos(2 * np.pi * x)[:, None] * np.ones(side)[None, :]).ravel()
    np.testing.assert_allclose(A.apply(pw), symbol * pw, atol=1e-10 * symbol)


def test_schrodinger_validation():
    with pytest.raises(DimensionError):
        schrodinger_operator(np.zeros((4, 5)))
    with pytest.raises(ValueError):
        schrodinger_operator(np.zeros((4, 4)), 0.0)


@pytest.mark.parametrize("exponent", [1.0, 0.75])
def test_spectral_matches_dense_assembly(exponent):
    side = 8
    V = random_potential(PotentialSpec(grid_side=side, cutoff=2, amplitude=50.0, seed=3))
    A = SpectralComposite.fractional_laplacian(V, exponent)
    np.testing.assert_allclose(A.to_dense(), dense_spectral(side, exponent, V), atol=1e-10 * 4000)


def test_broken_multiplier_symmetry_is_detected():
    mult = np.zeros((4, 4))
    mult[0, 1] = 1.0  # mode (0, 1) without its partner (0, -1)
    A = SpectralComposite(mult, np.zeros((4, 4)))
    with pytest.raises(ImaginaryResidueError):
        A.apply(np.random.default_rng(0).standard_normal(16))


def test_apply_block_identity_gives_dense():
    A = random_band_matrix(12, 2, 0)
    B = A.apply_block(np.eye(12))
    assert np.array_equal(B, A.to_dense())


def test_apply_block_single_column():
    A = random_band_matrix(12, 2, 0)
    v = np.random.default_rng(1).standard_normal(12)
    assert np.array_equal(A.apply_block(v[:, None])[:, 0], A.apply(v))


@pytest.mark.parametrize(
    "make",
    [
        lambda: random_band_matrix(20, 2, 4),
        lambda: DenseOperator(random_band_matrix(20, 2, 4).to_dense()),
        lambda: schrodinger_operator(np.arange(16.0).reshape(4, 4) ** 0.5, 0.75),
        lambda: flip_spectrum(random_band_matrix(20, 2, 4), 10.0),
    ],
)
def test_apply_block_bitwise_columnwise(make):
    A = make()
    B = np.random.default_rng(2).standard_normal((A.dim, 3))
    cols = np.column_stack([A.apply(B[:, j]) for j in range(3)])
    assert np.array_equal(A.apply_block(B), cols)
    threaded = A.apply_block(B, threads=3)
    np.testing.assert_allclose(threaded, cols, rtol=1e-12, atol=1e-12 * np.abs(cols).max())


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), a=st.floats(-10, 10), b=st.floats(-10, 10))
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    for A in (random_band_matrix(15, 2, seed % 100), schrodinger_operator(rng.uniform(0, 5, (4, 4)))):
        u, v = rng.standard_normal((2, A.dim))
        lhs = A.apply(a * u + b * v)
        rhs = a * A.apply(u) + b * A.apply(v)
        scale = max(1.0, np.abs(A.apply(u)).max() * abs(a) + np.abs(A.apply(v)).max() * abs(b))
        assert np.abs(lhs - rhs).max() <= 1e-12 * scale


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_symmetry_of_bilinear_form(seed):
    rng = np.random.default_rng(seed)
    for A in (random_band_matrix(15, 3, seed % 50), schrodinger_operator(rng.uniform(0, 5, (6, 6)), 0.75)):
        u, v = rng.standard_normal((2, A.dim))
        lhs, rhs = A.apply(u) @ v, u @ A.apply(v)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_banded_invariants():
    A = random_band_matrix(25, 3, 9)
    M = A.to_dense()
    i, j = np.indices(M.shape)
    assert np.all(M[np.abs(i - j) > 3] == 0)
    assert np.array_equal(M, M.T)
    assert np.array_equal(BandedOperator.from_dense(M).to_dense(), M)


def test_symmetric_flag_is_checked():
    M = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(NotSymmetricError):
        DenseOperator(M, symmetric=True)
    assert not DenseOperator(M).symmetric
    with pytest.raises(NotSymmetricError):
        estimate_norm(DenseOperator(M))


def test_estimate_norm_diagonal_and_identity():
    assert abs(estimate_norm(diagonal([1.0, 2.0, 5.0]), tol=1e-6) - 5) <= 5e-6
    assert abs(estimate_norm(identity(10)) - 1) <= 1e-12


def test_estimate_norm_matches_oracle():
    A = random_band_matrix(30, 2, 11)
    ref = np.abs(np.linalg.eigvalsh(A.to_dense())).max()
    assert abs(estimate_norm(A) - ref) <= 1e-6 * ref


def test_estimate_norm_fallback_flags_gershgorin():
    A = random_band_matrix(30, 2, 11)
    with pytest.warns(NormFallbackWarning):
        rho = estimate_norm(A, max_iter=2)
    assert rho >= np.abs(np.linalg.eigvalsh(A.to_dense())).max()


def test_flip_spectrum_small_cases():
    c = 3.5
    F = flip_spectrum(DenseOperator(c * np.eye(4)), c)
    assert np.array_equal(F.to_dense(), np.zeros((4, 4)))
    F = flip_spectrum(diagonal([0.0, 1.0]), 1.0)
    assert np.array_equal(F.to_dense(), np.diag([1.0, 0.0]))
    with pytest.raises(ValueError):
        flip_spectrum(identity(2), 0.0)


def test_flip_preserves_eigenvectors():
    rng = np.random.default_rng(5)
    M = rng.standard_normal((40, 40))
    M = M @ M.T
    A = DenseOperator(0.5 * (M + M.T))
    norm = estimate_norm(A)
    F = flip_spectrum(A, norm)
    lam, phi = np.linalg.eigh(A.to_dense())
    mu, psi = np.linalg.eigh(F.to_dense())
    # ascending lam <-> descending mu
    np.testing.assert_allclose(mu[::-1], 1 - lam / norm, atol=1e-8)
    overlap = np.abs(np.sum(phi * psi[:, ::-1], axis=0))
    np.testing.assert_allclose(overlap, 1.0, atol=1e-8)


def test_flip_on_schrodinger_grid():
    side = 48
    V = random_potential(PotentialSpec(seed=0))
    A = schrodinger_operator(V, 1.0)
    F = flip_spectrum(A)
    lam, phi = np.linalg.eigh(0.5 * (A.to_dense() + A.to_dense().T))
    Fd = F.to_dense()
    mu, psi = np.linalg.eigh(0.5 * (Fd + Fd.T))
    np.testing.assert_allclose(mu[::-1][:5], 1 - lam[:5] / F.norm, atol=1e-8)
    overlap = np.abs(np.sum(phi[:, :5] * psi[:, ::-1][:, :5], axis=0))
    np.testing.assert_allclose(overlap, 1.0, atol=1e-8)
    assert F.dim == side * side


def test_constant_in_kernel_of_laplacian():
    A = schrodinger_operator(np.zeros((8, 8)), 1.0)
    assert np.abs(A.apply(np.ones(64))).max() <= 1e-12
