"""Concrete drift fields and diffusion metrics for the rigid-rod systems.

Both models expose the same small surface: `drift` (ambient vector field,
batched over images), `drift_jacobian`, a `metric`, a `manifold()` factory,
and closed-form `fixed_point(label)` lookups used to build route waypoints.
Drifts are returned unprojected; callers project to the tangent space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .manifold import ProductManifold, UnitSphere
from .wlinalg import BlockIsotropicMetric

__all__ = ["SingleRod", "TwoRod"]


def _as_batch(x: np.ndarray, n: int):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        if x.shape[0] != n:
            raise ValueError(f"expected point of dimension {n}")
        return x[None, :], True
    if x.ndim != 2 or x.shape[1] != n:
        raise ValueError(f"expected (m, {n}) batch of points")
    return x, False


@dataclass(frozen=True)
class SingleRod:
    """One rigid rod on the unit sphere: quadratic aligning potential plus an
    optional linear shear.

    The drift is b(x) = (-diag(mu) + K0) x with K0 the shear-rate matrix; the
    entry `shear_12` tilts the saddle pair, `shear_13` tilts the source pair.
    Noise is isotropic with amplitude `sigma`.
    """

    mu: tuple = (1.0, 2.0, 3.0)
    shear_12: float = 0.0
    shear_13: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        mu = tuple(float(m) for m in self.mu)
        object.__setattr__(self, "mu", mu)
        if len(mu) != 3 or not (0.0 < mu[0] < mu[1] < mu[2]):
            raise ValueError("potential coefficients must satisfy 0 < mu1 < mu2 < mu3")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @property
    def dim(self) -> int:
        return 3

    @property
    def drift_matrix(self) -> np.ndarray:
        A = -np.diag(self.mu)
        A[0, 1] += self.shear_12
        A[0, 2] += self.shear_13
        return A

    def drift(self, x: np.ndarray) -> np.ndarray:
        xb, single = _as_batch(x, 3)
        b = xb @ self.drift_matrix.T
        return b[0] if single else b

    def drift_jacobian(self, x: np.ndarray) -> np.ndarray:
        xb, single = _as_batch(x, 3)
        J = np.broadcast_to(self.drift_matrix, (xb.shape[0], 3, 3))
        return J[0] if single else np.array(J)

    def potential(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return 0.5 * float(np.dot(self.mu, x * x))

    def manifold(self) -> UnitSphere:
        return UnitSphere(3)

    @property
    def metric(self) -> BlockIsotropicMetric:
        return BlockIsotropicMetric((self.sigma,), (3,))

    def fixed_point(self, label: str) -> np.ndarray:
        """Closed-form equilibrium for labels si+/-, sa+/-, so+/-.

        Available when at most one shear entry is active; with both shears on
        the equilibria have no closed form and must be located numerically.
        """
        mu1, mu2, mu3 = self.mu
        if self.shear_12 != 0.0 and self.shear_13 != 0.0:
            raise ValueError("no closed-form fixed points with both shear entries active")
        n1 = np.array([1.0, 0.0, 0.0])
        n2 = np.array([-self.shear_12, mu2 - mu1, 0.0])
        n2 /= np.linalg.norm(n2)
        n3 = np.array([-self.shear_13, 0.0, mu3 - mu1])
        n3 /= np.linalg.norm(n3)
        table = {
            "si+": n1, "si-": -n1,
            "sa+": n2, "sa-": -n2,
            "so+": n3, "so-": -n3,
        }
        try:
            return table[label].copy()
        except KeyError:
            raise KeyError(f"unknown fixed-point label {label!r}; expected one of {sorted(table)}")

    def fixed_point_labels(self):
        return ("si+", "si-", "sa+", "sa-", "so+", "so-")

    def census_seeds(self):
        """Starting points for an equilibrium census: the labeled closed forms
        when available, plus the coordinate axes."""
        seeds = []
        try:
            seeds.extend(self.fixed_point(lab) for lab in self.fixed_point_labels())
        except ValueError:
            pass
        for j in range(3):
            for s in (1.0, -1.0):
                v = np.zeros(3)
                v[j] = s
                seeds.append(v)
        return seeds


# Quadrant fixed points of the two-rod system, as (factor-1 axis, sign, factor-2
# axis, sign) with axes e1, e2 of the shared potential.
_TWO_ROD_TABLE = {
    "si1": (0, +1, 0, +1),
    "si2": (0, +1, 0, -1),
    "si3": (0, -1, 0, +1),
    "si4": (0, -1, 0, -1),
    "sa1": (1, +1, 0, +1),
    "sa2": (0, +1, 1, +1),
    "sa3": (1, +1, 0, -1),
    "sa4": (0, -1, 1, +1),
    "sa5": (1, +1, 1, +1),
    "so1": (2, +1, 2, +1),
    "so2": (2, +1, 2, -1),
    "so3": (2, -1, 2, +1),
    "so4": (2, -1, 2, -1),
}


@dataclass(frozen=True)
class TwoRod:
    """Two interacting rods on the product of two unit spheres.

    Each rod feels the shared quadratic potential with coefficients `mu` plus
    an alignment interaction of strength `coupling`; evaluated on unit vectors
    the interaction is coupling * (1 - <x1, x2>^2), i.e. a sin^2 penalty on the
    angle between the rods.  Noise amplitudes `sigma1`, `sigma2` may differ.
    """

    mu: tuple = (1.0, 3.0, 5.0)
    coupling: float = 0.4
    sigma1: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        if len(self.mu) != 3:
            raise ValueError("mu must have three entries")
        if self.coupling < 0:
            raise ValueError("coupling must be nonnegative")
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError("noise amplitudes must be positive")

    @property
    def dim(self) -> int:
        return 6

    def drift(self, x: np.ndarray) -> np.ndarray:
        xb, single = _as_batch(x, 6)
        x1, x2 = xb[:, :3], xb[:, 3:]
        K = np.asarray(self.mu)
        s = np.sum(x1 * x2, axis=1, keepdims=True)
        b1 = -x1 * K + 2.0 * self.coupling * s * x2
        b2 = -x2 * K + 2.0 * self.coupling * s * x1
        b = np.concatenate([b1, b2], axis=1)
        return b[0] if single else b

    def drift_jacobian(self, x: np.ndarray) -> np.ndarray:
        xb, single = _as_batch(x, 6)
        m = xb.shape[0]
        x1, x2 = xb[:, :3], xb[:, 3:]
        A2 = 2.0 * self.coupling
        s = np.sum(x1 * x2, axis=1)
        K = np.diag(self.mu)
        eye = np.eye(3)
        J = np.empty((m, 6, 6))
        J[:, :3, :3] = -K + A2 * np.einsum("mi,mj->mij", x2, x2)
        J[:, 3:, 3:] = -K + A2 * np.einsum("mi,mj->mij", x1, x1)
        J[:, :3, 3:] = A2 * (s[:, None, None] * eye + np.einsum("mi,mj->mij", x2, x1))
        J[:, 3:, :3] = A2 * (s[:, None, None] * eye + np.einsum("mi,mj->mij", x1, x2))
        return J[0] if single else J

    def interaction_energy(self, x1: np.ndarray, x2: np.ndarray) -> float:
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        return self.coupling * (1.0 - float(np.dot(x1, x2)) ** 2)

    def potential(self, x: np.ndarray) -> float:
        """Total energy V(x1) + V(x2) + U(x1, x2)."""
        x = np.asarray(x, dtype=float)
        x1, x2 = x[:3], x[3:]
        K = np.asarray(self.mu)
        return 0.5 * float(K @ (x1 * x1) + K @ (x2 * x2)) + self.interaction_energy(x1, x2)

    def manifold(self) -> ProductManifold:
        return ProductManifold([UnitSphere(3), UnitSphere(3)])

    @property
    def metric(self) -> BlockIsotropicMetric:
        return BlockIsotropicMetric((self.sigma1, self.sigma2), (3, 3))

    def fixed_point(self, label: str) -> np.ndarray:
        """Equilibrium (+-e_i, +-e_j) for the quadrant labels si1..si4, sa1..sa5
        and the source labels so1..so4."""
        try:
            ax1, s1, ax2, s2 = _TWO_ROD_TABLE[label]
        except KeyError:
            raise KeyError(f"unknown fixed-point label {label!r}; expected one of {sorted(_TWO_ROD_TABLE)}")
        out = np.zeros(6)
        out[ax1] = s1
        out[3 + ax2] = s2
        return out

    def fixed_point_labels(self):
        return tuple(sorted(_TWO_ROD_TABLE))

    def census_seeds(self):
        """All sign-axis pairs (+-e_i, +-e_j), the complete equilibrium set for
        weak coupling."""
        seeds = []
        for i in range(3):
            for si in (1.0, -1.0):
                for j in range(3):
                    for sj in (1.0, -1.0):
                        v = np.zeros(6)
                        v[i] = si
                        v[3 + j] = sj
                        seeds.append(v)
        return seeds
