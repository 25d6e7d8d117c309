import numpy as np
import pytest

from tls_scope.errors import NonHermitianInput
from tls_scope.linalg import eigensolve_hermitian


def random_symmetric(rng, n):
    m = rng.normal(size=(n, n))
    return (m + m.T) / 2


def char_poly_roots(h):
    """Independent oracle: eigenvalues as characteristic-polynomial roots."""
    coeffs = np.poly(h)
    roots = np.roots(coeffs)
    return np.sort(roots.real)


def test_diagonal_matrix():
    s = eigensolve_hermitian(np.diag([1.0, 2.0, 3.0, 4.0]))
    assert np.allclose(s.eigenvalues, [1, 2, 3, 4])
    assert np.allclose(np.abs(s.eigenvectors), np.eye(4))


def test_sigma_x_tensor_identity():
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    s = eigensolve_hermitian(np.kron(sx, np.eye(2)))
    assert np.allclose(s.eigenvalues, [-1, -1, 1, 1])


def test_matches_characteristic_polynomial_oracle():
    rng = np.random.default_rng(11)
    for _ in range(50):
        h = random_symmetric(rng, 4)
        s = eigensolve_hermitian(h)
        assert np.allclose(s.eigenvalues, char_poly_roots(h), atol=1e-9)


def test_eigenvalues_ascending_and_residual():
    rng = np.random.default_rng(12)
    for _ in range(200):
        h = random_symmetric(rng, 4) * rng.uniform(0.1, 100)
        s = eigensolve_hermitian(h)
        assert np.all(np.diff(s.eigenvalues) >= -1e-12)
        resid = h @ s.eigenvectors - s.eigenvectors @ np.diag(s.eigenvalues)
        assert np.abs(resid).max() <= 1e-10 * max(np.abs(h).max(), 1.0)


def test_eigenvectors_orthonormal():
    rng = np.random.default_rng(13)
    for _ in range(100):
        s = eigensolve_hermitian(random_symmetric(rng, 4))
        gram = s.eigenvectors.T @ s.eigenvectors
        assert np.abs(gram - np.eye(4)).max() < 1e-10


def test_complex_hermitian():
    rng = np.random.default_rng(14)
    for _ in range(50):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = (m + m.conj().T) / 2
        s = eigensolve_hermitian(h)
        assert np.allclose(s.eigenvalues, np.linalg.eigvalsh(h), atol=1e-9)
        resid = h @ s.eigenvectors - s.eigenvectors @ np.diag(s.eigenvalues)
        assert np.abs(resid).max() < 1e-9
        gram = s.eigenvectors.conj().T @ s.eigenvectors
        assert np.abs(gram - np.eye(4)).max() < 1e-9


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitianInput):
        eigensolve_hermitian(np.array([[1.0, 2.0], [0.5, 1.0]]))
    with pytest.raises(NonHermitianInput):
        eigensolve_hermitian(np.array([[1.0, 1j], [1j, 1.0]]))


def test_non_square_rejected():
    with pytest.raises(NonHermitianInput):
        eigensolve_hermitian(np.ones((2, 3)))


def test_transitions_from_spectrum():
    s = eigensolve_hermitian(np.diag([-3.0, -1.0, 1.0, 3.0]))
    assert s.transition_01 == pytest.approx(2.0)
    assert s.transition_02 == pytest.approx(4.0)
