import numpy as np
import pytest

from minact import Curve, reparametrize


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_spd(rng, n, spread=2.0):
    """Random symmetric positive-definite matrix with eigenvalues in [1/spread, spread]."""
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    eig = np.exp(rng.uniform(-np.log(spread), np.log(spread), size=n))
    return Q @ np.diag(eig) @ Q.T


def random_kernel_basis(rng, n, k):
    """k well-conditioned rows spanning a random kernel."""
    while True:
        xi = rng.normal(size=(k, n))
        s = np.linalg.svd(xi, compute_uv=False)
        if s[-1] > 0.2:
            return xi


def random_feasible_curve(rng, manifold, n_images, wobble=0.1):
    """Random feasible curve between two random endpoints, arc-length spaced."""
    a = manifold.retract(rng.normal(size=manifold.ambient_dim))
    b = manifold.retract(rng.normal(size=manifold.ambient_dim))
    X = np.linspace(0, 1, n_images + 1)[:, None] * (b - a)[None, :] + a[None, :]
    X[1:-1] += wobble * rng.normal(size=X[1:-1].shape)
    for i in range(X.shape[0]):
        X[i] = manifold.retract(X[i])
    return reparametrize(Curve(X), manifold)
