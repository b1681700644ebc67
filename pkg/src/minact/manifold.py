"""Constraint manifolds M = {x : c_k(x) = 0} embedded in R^n.

A ConstraintSet evaluates the residuals c_k, their gradients (which span the
kernel of the tangent projection), and a retraction that returns perturbed
points to the manifold.  Unit spheres get closed-form normalization; products
act factor-wise on disjoint coordinate blocks.
"""

from __future__ import annotations

import numpy as np

from .errors import RetractionError
from .wlinalg import project_tangent

__all__ = ["ConstraintSet", "UnitSphere", "ProductManifold", "FEASIBILITY_TOL"]

# Absolute residual tolerance below which a point counts as on-manifold.
# Constraints here are cheap polynomials, so machine-level accuracy is free.
FEASIBILITY_TOL = 1e-12


class ConstraintSet:
    """Base class: algebraic constraints with non-degenerate gradients.

    Subclasses provide `residual` and `constraint_gradients`; the default
    `retract` runs a Newton correction along the normal bundle.
    """

    ambient_dim: int
    dim: int  # manifold dimension d = n - K

    @property
    def n_constraints(self) -> int:
        return self.ambient_dim - self.dim

    def residual(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def constraint_gradients(self, x: np.ndarray) -> np.ndarray:
        """Stack of gradients, shape (K, n)."""
        raise NotImplementedError

    def retract(self, x: np.ndarray, max_iter: int = 20, tol: float = FEASIBILITY_TOL) -> np.ndarray:
        """Newton iteration on c along span of the gradients at the input point."""
        x = np.asarray(x, dtype=float)
        xi0 = self.constraint_gradients(x)
        y = x.copy()
        for _ in range(max_iter):
            c = self.residual(y)
            if np.max(np.abs(c)) <= tol:
                return y
            J = self.constraint_gradients(y) @ xi0.T
            try:
                lam = np.linalg.solve(J, -c)
            except np.linalg.LinAlgError as exc:
                raise RetractionError("normal-bundle Newton system is singular") from exc
            y = y + xi0.T @ lam
        raise RetractionError(
            f"retraction did not converge in {max_iter} iterations "
            f"(residual {np.max(np.abs(self.residual(y))):.3e}); the step was likely too large"
        )

    def is_feasible(self, x: np.ndarray, tol: float = 1e-8) -> bool:
        return bool(np.max(np.abs(self.residual(x))) <= tol)

    def project_to_tangent(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        return project_tangent(v, self.constraint_gradients(x))

    def tangent_basis(self, x: np.ndarray) -> np.ndarray:
        """Orthonormal tangent basis (n, d) by QR completion of the gradients.

        Column signs are fixed deterministically so downstream eigen-analyses
        are reproducible.
        """
        xi = self.constraint_gradients(np.asarray(x, dtype=float))
        n = self.ambient_dim
        Q, _ = np.linalg.qr(xi.T, mode="complete")
        basis = Q[:, self.n_constraints:]
        for j in range(basis.shape[1]):
            col = basis[:, j]
            lead = col[np.argmax(np.abs(col))]
            if lead < 0:
                basis[:, j] = -col
        return basis


class UnitSphere(ConstraintSet):
    """Unit sphere ||x|| = 1 in R^n, written as c(x) = ||x||^2 - 1."""

    def __init__(self, ambient_dim: int = 3):
        if ambient_dim < 2:
            raise ValueError("sphere needs ambient dimension >= 2")
        self.ambient_dim = int(ambient_dim)
        self.dim = self.ambient_dim - 1

    def residual(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([x @ x - 1.0])

    def constraint_gradients(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * np.asarray(x, dtype=float)[None, :]

    def retract(self, x: np.ndarray, max_iter: int = 20, tol: float = FEASIBILITY_TOL) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        nrm = np.linalg.norm(x)
        if nrm < 1e-12:
            raise RetractionError("cannot normalize a vector at the origin")
        return x / nrm

    def __repr__(self):
        return f"UnitSphere({self.ambient_dim})"


class ProductManifold(ConstraintSet):
    """Cartesian product of constraint sets on disjoint coordinate blocks."""

    def __init__(self, factors):
        self.factors = tuple(factors)
        if not self.factors:
            raise ValueError("product needs at least one factor")
        self.ambient_dim = sum(f.ambient_dim for f in self.factors)
        self.dim = sum(f.dim for f in self.factors)
        offsets = np.cumsum([0] + [f.ambient_dim for f in self.factors])
        self.blocks = tuple(slice(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:]))

    def residual(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.concatenate([f.residual(x[s]) for f, s in zip(self.factors, self.blocks)])

    def constraint_gradients(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros((self.n_constraints, self.ambient_dim))
        row = 0
        for f, s in zip(self.factors, self.blocks):
            g = f.constraint_gradients(x[s])
            out[row:row + g.shape[0], s] = g
            row += g.shape[0]
        return out

    def retract(self, x: np.ndarray, max_iter: int = 20, tol: float = FEASIBILITY_TOL) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        for f, s in zip(self.factors, self.blocks):
            out[s] = f.retract(x[s], max_iter=max_iter, tol=tol)
        return out

    def __repr__(self):
        return f"ProductManifold({list(self.factors)})"
