"""Weighted inner products and the metric-weighted generalized inverse of the
tangent projection.

The diffusion tensor a(x) = sigma(x) sigma(x)^T of a stochastic system induces
the weighted inner product  <u, v>_a = u^T a^{-1} v  and norm ||u||_a.  For a
constraint manifold with Euclidean-orthogonal tangent projection P whose kernel
is spanned by the constraint gradients {xi_k}, the generalized inverse maps a
tangent vector v to the minimal-||.||_a-norm vector u with P u = v.  Everything
here is a pure function of explicit array arguments; no global state.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateConstraintsError, MetricDegenerateError, TangentDomainError

__all__ = [
    "BlockIsotropicMetric",
    "ConstantMetric",
    "CallableMetric",
    "cholesky_spd",
    "metric_inner",
    "metric_norm",
    "project_tangent",
    "min_norm_preimage",
]

# Relative tolerance for the membership test v in Img(P).  Chosen to separate
# finite-difference discretization defects from genuine domain violations.
TANGENT_MEMBERSHIP_RTOL = 1e-8


def cholesky_spd(a: np.ndarray, what: str = "metric") -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive-definite matrix.

    Raises MetricDegenerateError when the factorization fails, which is the
    shared failure mode for non-SPD diffusion tensors and singular Gram
    matrices built from them.
    """
    a = np.asarray(a, dtype=float)
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise MetricDegenerateError(f"{what} is not symmetric positive definite") from exc


def _chol_solve(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    y = np.linalg.solve(L, b)
    return np.linalg.solve(L.T, y)


def metric_inner(u: np.ndarray, v: np.ndarray, a: np.ndarray) -> float:
    """Weighted inner product u^T a^{-1} v for SPD matrix a."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    L = cholesky_spd(a)
    return float(np.linalg.solve(L, u) @ np.linalg.solve(L, v))


def metric_norm(u: np.ndarray, a: np.ndarray) -> float:
    """Weighted norm sqrt(u^T a^{-1} u)."""
    u = np.asarray(u, dtype=float)
    L = cholesky_spd(a)
    return float(np.linalg.norm(np.linalg.solve(L, u)))


def project_tangent(v: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Euclidean-orthogonal projection of v onto the complement of span{xi_k}.

    Parameters
    ----------
    v : (n,) vector.
    xi : (K, n) stack of kernel basis vectors (constraint gradients).

    Returns P v = v - Xi^T (Xi Xi^T)^{-1} Xi v.  The result is orthogonal to
    every row of xi and the map is idempotent.
    """
    v = np.asarray(v, dtype=float)
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    gram = xi @ xi.T
    try:
        L = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise DegenerateConstraintsError("constraint gradients are linearly dependent") from exc
    coeff = _chol_solve(L, xi @ v)
    return v - xi.T @ coeff


def min_norm_preimage(v: np.ndarray, xi: np.ndarray, a: np.ndarray, *, check_membership: bool = True) -> np.ndarray:
    """Minimal a-weighted-norm vector u with P u = v, for tangent v.

    Solves M lam = vhat with M_ij = <xi_i, xi_j>_a and vhat_k = <v, xi_k>_a,
    and returns u = v - sum_k lam_k xi_k.  The result is a-orthogonal to every
    xi_k and satisfies ||v||_a^2 = ||u||_a^2 + ||v - u||_a^2.

    The kernel basis does not need to be normalized; the solve is invariant
    under rescaling of the xi_k.
    """
    v = np.asarray(v, dtype=float)
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if check_membership:
        defect = np.linalg.norm(v - project_tangent(v, xi))
        if defect > TANGENT_MEMBERSHIP_RTOL * (1.0 + np.linalg.norm(v)):
            raise TangentDomainError(
                f"vector is not in the tangent space (defect {defect:.3e})"
            )
    La = cholesky_spd(a)
    # Whitened rows: M = X X^T and vhat = X w with X = L^{-1} xi^T stacked.
    X = np.linalg.solve(La, xi.T)
    w = np.linalg.solve(La, v)
    M = X.T @ X
    vhat = X.T @ w
    try:
        Lm = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise MetricDegenerateError("weighted Gram matrix of the kernel basis is singular") from exc
    lam = _chol_solve(Lm, vhat)
    return v - xi.T @ lam


class BlockIsotropicMetric:
    """Constant block-diagonal metric sigma_k^2 * I on consecutive coordinate blocks.

    Covers isotropic noise (one block) and per-factor noise amplitudes on
    product manifolds.  `sigmas` and `dims` pair each block with its noise
    amplitude.
    """

    def __init__(self, sigmas, dims):
        sigmas = tuple(float(s) for s in np.atleast_1d(sigmas))
        dims = tuple(int(d) for d in np.atleast_1d(dims))
        if len(sigmas) != len(dims):
            raise ValueError("sigmas and dims must have equal length")
        if any(s <= 0 for s in sigmas):
            raise MetricDegenerateError("noise amplitudes must be positive")
        if any(d <= 0 for d in dims):
            raise ValueError("block dimensions must be positive")
        self.sigmas = sigmas
        self.dims = dims
        self.dim = sum(dims)
        self._diag = np.concatenate([np.full(d, s * s) for s, d in zip(sigmas, dims)])

    def matrix(self, x=None) -> np.ndarray:
        return np.diag(self._diag)

    @property
    def inverse_diagonal(self) -> np.ndarray:
        return 1.0 / self._diag

    def __repr__(self):
        return f"BlockIsotropicMetric(sigmas={self.sigmas}, dims={self.dims})"


class ConstantMetric:
    """Position-independent SPD metric given by an explicit matrix."""

    def __init__(self, a):
        a = np.asarray(a, dtype=float)
        cholesky_spd(a)
        self._a = a.copy()
        self.dim = a.shape[0]

    def matrix(self, x=None) -> np.ndarray:
        return self._a

    def __repr__(self):
        return f"ConstantMetric(dim={self.dim})"


class CallableMetric:
    """Position-dependent metric wrapping a function x -> SPD matrix."""

    def __init__(self, fn, dim: int):
        self._fn = fn
        self.dim = int(dim)

    def matrix(self, x) -> np.ndarray:
        return np.asarray(self._fn(x), dtype=float)

    def __repr__(self):
        return f"CallableMetric(dim={self.dim})"
