"""Geometry of the weighted generalized inverse on the sphere.

The tangent projection at a point of the unit sphere is Euclidean-orthogonal,
but the noise metric a = sigma sigma^T measures vectors differently.  The
generalized inverse of the projection maps a tangent vector v to the cheapest
ambient noise u (in the a-weighted norm) whose projection realizes v.  This
script shows the three structural facts the path functionals rely on:

* u is a-orthogonal to the constraint gradient,
* the weighted norm of v splits Pythagorean-style into ||u|| and ||v - u||,
* with an isotropic metric, u is simply v itself.
"""

import numpy as np

from minact import UnitSphere, metric_inner, metric_norm, min_norm_preimage, project_tangent

sphere = UnitSphere(3)
x = np.array([1.0, 0.0, 0.0])          # point on the sphere
xi = sphere.constraint_gradients(x)     # kernel of the tangent projection
v = np.array([0.0, 1.0, 0.0])           # a tangent vector at x

aniso = np.array([[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 1.0]])

for name, a in [("isotropic", np.eye(3)), ("anisotropic", aniso)]:
    u = min_norm_preimage(v, xi, a)
    print(f"{name} metric:")
    print(f"  cheapest noise realizing v: u = {u}")
    print(f"  <u, grad c>_a  = {metric_inner(u, xi[0], a):+.3e}   (a-orthogonal)")
    lhs = metric_norm(v, a) ** 2
    rhs = metric_norm(u, a) ** 2 + metric_norm(v - u, a) ** 2
    print(f"  ||v||_a^2 = {lhs:.6f} = ||u||_a^2 + ||v-u||_a^2 = {rhs:.6f}")
    print(f"  projection recovers v: {project_tangent(u, xi)}")
    print()

print("With the anisotropic metric the cheapest noise leans out of the tangent")
print("plane: paying a small normal component is cheaper than a purely")
print("tangential kick.  The on-manifold action accounts for exactly this.")
