import numpy as np
import pytest

from minact import SingleRod, TwoRod, project_tangent


def proj_drift(model, manifold, x):
    return project_tangent(model.drift(x), manifold.constraint_gradients(x))


def test_single_rod_axis_is_fixed_point():
    model = SingleRod()
    man = model.manifold()
    e1 = np.array([1.0, 0.0, 0.0])
    np.testing.assert_allclose(model.drift(e1), -e1)
    np.testing.assert_allclose(proj_drift(model, man, e1), 0.0, atol=1e-15)


def test_single_rod_sheared_saddle_is_fixed_point():
    model = SingleRod(shear_12=1.0)
    man = model.manifold()
    n2 = np.array([-1.0, 1.0, 0.0]) / np.sqrt(2.0)
    np.testing.assert_allclose(proj_drift(model, man, n2), 0.0, atol=1e-14)
    np.testing.assert_allclose(model.fixed_point("sa+"), n2)


def test_single_rod_parameter_validation():
    with pytest.raises(ValueError):
        SingleRod(mu=(2.0, 1.0, 3.0))
    with pytest.raises(ValueError):
        SingleRod(mu=(0.0, 1.0, 2.0))
    with pytest.raises(ValueError):
        SingleRod(sigma=0.0)


def test_single_rod_mixed_shear_has_no_closed_forms():
    model = SingleRod(shear_12=0.5, shear_13=0.5)
    with pytest.raises(ValueError):
        model.fixed_point("sa+")
    assert len(model.census_seeds()) == 6  # axis fallbacks remain


def test_two_rod_sink_is_fixed_point():
    model = TwoRod()
    man = model.manifold()
    x = model.fixed_point("si2")
    np.testing.assert_allclose(proj_drift(model, man, x), 0.0, atol=1e-15)


def test_interaction_energy_values():
    model = TwoRod(coupling=0.4)
    e1 = np.array([1.0, 0, 0])
    e2 = np.array([0.0, 1, 0])
    assert model.interaction_energy(e1, e1) == 0.0
    assert model.interaction_energy(e1, e2) == pytest.approx(0.4)
    assert model.interaction_energy(e1, -e1) == 0.0


def test_interaction_symmetric_under_antipode(rng):
    model = TwoRod()
    for _ in range(10):
        x1 = rng.normal(size=3)
        x1 /= np.linalg.norm(x1)
        x2 = rng.normal(size=3)
        x2 /= np.linalg.norm(x2)
        assert model.interaction_energy(x1, x2) == pytest.approx(model.interaction_energy(-x1, x2), rel=1e-12)


def test_two_rod_drift_is_negative_energy_gradient(rng):
    model = TwoRod(mu=(1.0, 3.0, 5.0), coupling=0.4)
    h = 1e-5
    for _ in range(10):
        x = rng.normal(size=6)
        b = model.drift(x)
        for j in range(6):
            xp = x.copy()
            xm = x.copy()
            xp[j] += h
            xm[j] -= h
            fd = (model.potential(xp) - model.potential(xm)) / (2.0 * h)
            assert b[j] == pytest.approx(-fd, abs=1e-6)


def test_single_rod_gradient_case_matches_riemannian_gradient(rng):
    model = SingleRod()
    man = model.manifold()
    h = 1e-6
    for _ in range(10):
        x = man.retract(rng.normal(size=3))
        pb = proj_drift(model, man, x)
        Q = man.tangent_basis(x)
        for j in range(2):
            u = Q[:, j]
            fd = (model.potential(man.retract(x + h * u)) - model.potential(man.retract(x - h * u))) / (2.0 * h)
            assert pb @ u == pytest.approx(-fd, abs=1e-6)


@pytest.mark.parametrize("model", [SingleRod(shear_12=0.7), TwoRod(sigma2=1.3)])
def test_drift_jacobian_matches_finite_differences(model, rng):
    n = model.dim
    h = 1e-6
    x = rng.normal(size=n)
    J = model.drift_jacobian(x)
    for j in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        fd = (model.drift(xp) - model.drift(xm)) / (2.0 * h)
        np.testing.assert_allclose(J[:, j], fd, atol=1e-8)


@pytest.mark.parametrize("model", [SingleRod(shear_13=1.1), TwoRod(coupling=0.3)])
def test_drift_batch_consistency(model, rng):
    X = rng.normal(size=(7, model.dim))
    batch = model.drift(X)
    for i in range(7):
        np.testing.assert_allclose(batch[i], model.drift(X[i]), atol=1e-15)
    Jb = model.drift_jacobian(X)
    np.testing.assert_allclose(Jb[3], model.drift_jacobian(X[3]), atol=1e-15)


def test_two_rod_metric_blocks():
    model = TwoRod(sigma1=1.0, sigma2=2.0)
    np.testing.assert_allclose(model.metric.matrix().diagonal(), [1, 1, 1, 4, 4, 4])


def test_two_rod_table_positions():
    model = TwoRod()
    np.testing.assert_allclose(model.fixed_point("sa5"), [0, 1, 0, 0, 1, 0])
    np.testing.assert_allclose(model.fixed_point("si3"), [-1, 0, 0, 1, 0, 0])
    np.testing.assert_allclose(model.fixed_point("sa1"), [0, 1, 0, 1, 0, 0])
    with pytest.raises(KeyError):
        model.fixed_point("nope")
