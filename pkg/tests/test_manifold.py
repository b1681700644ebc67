import numpy as np
import pytest

from minact import ProductManifold, UnitSphere, project_tangent
from minact.errors import RetractionError
from minact.manifold import ConstraintSet


def test_sphere_residual():
    s = UnitSphere(3)
    np.testing.assert_allclose(s.residual([1.0, 0.0, 0.0]), [0.0])
    np.testing.assert_allclose(s.residual([2.0, 0.0, 0.0]), [3.0])


def test_product_residual():
    m = ProductManifold([UnitSphere(3), UnitSphere(3)])
    x = np.array([1.0, 0, 0, -1.0, 0, 0])
    np.testing.assert_allclose(m.residual(x), [0.0, 0.0])
    assert m.ambient_dim == 6 and m.dim == 4


def test_sphere_retract_normalizes():
    s = UnitSphere(3)
    np.testing.assert_allclose(s.retract([2.0, 0.0, 0.0]), [1.0, 0.0, 0.0])
    x = 1.001 * np.array([0.6, 0.8, 0.0])
    np.testing.assert_allclose(s.retract(x), [0.6, 0.8, 0.0], atol=1e-12)
    with pytest.raises(RetractionError):
        s.retract(np.zeros(3))


def test_product_retract_factorwise():
    m = ProductManifold([UnitSphere(3), UnitSphere(3)])
    x = np.concatenate([1.1 * np.array([1.0, 0, 0]), 0.9 * np.array([0.0, 1, 0])])
    out = m.retract(x)
    np.testing.assert_allclose(out, [1, 0, 0, 0, 1, 0], atol=1e-15)


def test_retract_idempotent_on_feasible(rng):
    s = UnitSphere(4)
    x = s.retract(rng.normal(size=4))
    np.testing.assert_allclose(s.retract(x), x, atol=1e-15)


def test_projected_vector_in_constraint_nullspace(rng):
    m = ProductManifold([UnitSphere(3), UnitSphere(3)])
    x = m.retract(rng.normal(size=6))
    v = rng.normal(size=6)
    p = project_tangent(v, m.constraint_gradients(x))
    assert np.max(np.abs(m.constraint_gradients(x) @ p)) <= 1e-10 * np.linalg.norm(v)


class Ellipsoid(ConstraintSet):
    """x^T D x = 1 with diagonal D; exercises the generic Newton retraction."""

    def __init__(self, diag):
        self.diag = np.asarray(diag, dtype=float)
        self.ambient_dim = self.diag.size
        self.dim = self.ambient_dim - 1

    def residual(self, x):
        x = np.asarray(x, dtype=float)
        return np.array([x @ (self.diag * x) - 1.0])

    def constraint_gradients(self, x):
        return (2.0 * self.diag * np.asarray(x, dtype=float))[None, :]


def test_newton_retraction_on_ellipsoid(rng):
    e = Ellipsoid([1.0, 4.0, 9.0])
    x = np.array([1.0, 0.3, 0.1])
    y = e.retract(x * 1.02)
    assert abs(e.residual(y)[0]) <= 1e-12
    # correction happens along the entry gradient direction
    g = e.constraint_gradients(x * 1.02)[0]
    dev = (y - x * 1.02) - ((y - x * 1.02) @ g) * g / (g @ g)
    assert np.linalg.norm(dev) < 1e-12


def test_newton_retraction_fails_far_away():
    e = Ellipsoid([1.0, 4.0, 9.0])
    with pytest.raises(RetractionError):
        e.retract(np.array([50.0, 50.0, 50.0]), max_iter=3)


def test_tangent_basis_orthonormal_and_tangent(rng):
    m = ProductManifold([UnitSphere(3), UnitSphere(3)])
    x = m.retract(rng.normal(size=6))
    Q = m.tangent_basis(x)
    assert Q.shape == (6, 4)
    np.testing.assert_allclose(Q.T @ Q, np.eye(4), atol=1e-12)
    assert np.max(np.abs(m.constraint_gradients(x) @ Q)) < 1e-12
