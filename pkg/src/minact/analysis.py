"""Fixed points of the projected drift, their tangent-space stability, and
parameter scans locating where the globally cheapest route changes."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import MarginalStabilityError, MinactError
from .mam import Route, SolveOptions, multistart
from .wlinalg import project_tangent

logger = logging.getLogger(__name__)

__all__ = [
    "FixedPointRecord",
    "RouteTemplate",
    "ScanRow",
    "ScanResult",
    "ScanAbortedError",
    "find_fixed_points",
    "classify_fixed_point",
    "bifurcation_scan",
]

# Eigenvalue real parts inside this band refuse classification.
STABILITY_BAND = 1e-6


@dataclass
class FixedPointRecord:
    location: np.ndarray
    eigenvalues: np.ndarray
    kind: str          # "sink", "source", "saddle", or "marginal"
    index: int         # count of eigenvalues with positive real part
    label: str = ""


class ScanAbortedError(MinactError):
    """A scan grid point lost every route; carries the rows finished so far."""

    def __init__(self, message, partial_rows):
        super().__init__(message)
        self.partial_rows = partial_rows


def _projected_drift(model, manifold, x):
    return project_tangent(model.drift(x), manifold.constraint_gradients(x))


def tangent_jacobian(model, manifold, x, step: float = 1e-6) -> np.ndarray:
    """Jacobian of the projected drift restricted to an orthonormal tangent
    basis, by central finite differences along retracted tangent moves."""
    x = np.asarray(x, dtype=float)
    Q = manifold.tangent_basis(x)
    d = Q.shape[1]
    J = np.empty((d, d))
    for j in range(d):
        xp = manifold.retract(x + step * Q[:, j])
        xm = manifold.retract(x - step * Q[:, j])
        fp = Q.T @ _projected_drift(model, manifold, xp)
        fm = Q.T @ _projected_drift(model, manifold, xm)
        J[:, j] = (fp - fm) / (2.0 * step)
    return J


def classify_fixed_point(model, manifold, x, label: str = "") -> FixedPointRecord:
    """Tangent-space linear stability of an equilibrium of the projected drift.

    Raises MarginalStabilityError when any eigenvalue real part falls inside
    the dead band around zero, rather than guessing a type.
    """
    x = np.asarray(x, dtype=float)
    pb = _projected_drift(model, manifold, x)
    if np.linalg.norm(pb) > 1e-8:
        raise ValueError(f"not a fixed point: ||projected drift|| = {np.linalg.norm(pb):.3e}")
    eig = np.linalg.eigvals(tangent_jacobian(model, manifold, x))
    order = np.lexsort((eig.imag, eig.real))
    eig = eig[order]
    if np.any(np.abs(eig.real) < STABILITY_BAND):
        raise MarginalStabilityError(
            f"eigenvalue real part within {STABILITY_BAND:g} of zero; classification refused"
        )
    index = int(np.sum(eig.real > 0.0))
    d = eig.size
    kind = "sink" if index == 0 else ("source" if index == d else "saddle")
    return FixedPointRecord(location=x.copy(), eigenvalues=eig, kind=kind, index=index, label=label)


def _newton_polish(model, manifold, seed, tol=1e-13, max_iter=50):
    x = manifold.retract(np.asarray(seed, dtype=float))
    for _ in range(max_iter):
        pb = _projected_drift(model, manifold, x)
        res = np.linalg.norm(pb)
        if res <= tol:
            return x
        Q = manifold.tangent_basis(x)
        J = tangent_jacobian(model, manifold, x)
        try:
            dz = np.linalg.solve(J, -(Q.T @ pb))
        except np.linalg.LinAlgError:
            return None
        step = 1.0
        for _ in range(10):
            xn = manifold.retract(x + Q @ (step * dz))
            if np.linalg.norm(_projected_drift(model, manifold, xn)) < res:
                x = xn
                break
            step *= 0.5
        else:
            return None
    return None


def find_fixed_points(model, manifold, seeds, *, dedup_tol: float = 1e-6) -> list:
    """Newton-polish each seed onto an equilibrium, deduplicate, classify.

    Seeds that fail to converge are skipped and logged.  Points whose
    classification is refused as marginal are kept with kind "marginal".
    """
    records = []
    locations = []
    skipped = 0
    for seed in seeds:
        x = _newton_polish(model, manifold, seed)
        if x is None:
            skipped += 1
            continue
        if any(np.linalg.norm(x - y) < dedup_tol for y in locations):
            continue
        locations.append(x)
        try:
            records.append(classify_fixed_point(model, manifold, x))
        except MarginalStabilityError:
            eig = np.linalg.eigvals(tangent_jacobian(model, manifold, x))
            order = np.lexsort((eig.imag, eig.real))
            records.append(
                FixedPointRecord(location=x, eigenvalues=eig[order], kind="marginal", index=-1)
            )
    if skipped:
        logger.info("find_fixed_points: %d seed(s) did not converge and were skipped", skipped)
    return records


@dataclass(frozen=True)
class RouteTemplate:
    """A route given by fixed-point labels, resolved against each model instance."""

    name: str
    labels: tuple

    def resolve(self, model) -> Route:
        return Route(self.name, tuple(model.fixed_point(lab) for lab in self.labels))


@dataclass
class ScanRow:
    parameter: float
    actions: dict
    converged: dict
    iterations: dict
    global_label: str
    curves: dict = field(repr=False, default_factory=dict)


@dataclass
class ScanResult:
    rows: list
    crossings: list
    mode: str

    @property
    def crossing(self):
        return self.crossings[0] if self.crossings else None


def _scan_point(family, value, templates, options, warm):
    model = family(value)
    manifold = model.manifold()
    routes = [t.resolve(model) for t in templates]
    result = multistart(routes, model, manifold, options, initial_curves=warm)
    actions, conv, iters, curves = {}, {}, {}, {}
    for rep in result.reports:
        actions[rep.label] = rep.action
        conv[rep.label] = rep.converged
        iters[rep.label] = rep.iterations
        curves[rep.label] = rep.curve
    for name, msg in result.failures:
        logger.warning("route %s failed at parameter %.6g: %s", name, value, msg)
    return ScanRow(
        parameter=float(value),
        actions=actions,
        converged=conv,
        iterations=iters,
        global_label=result.best.label,
        curves=curves,
    )


def bifurcation_scan(
    family,
    grid,
    templates,
    options: SolveOptions | None = None,
    *,
    warm_start: bool = True,
    workers: int = 1,
    refine_fraction: int = 32,
) -> ScanResult:
    """Sweep a model family over a parameter grid and locate route changeovers.

    `family` maps a parameter value to a model.  At each grid value every
    route template is solved (warm-started from the previous grid point when
    `warm_start` is on) and the route with the least action is recorded.
    Wherever the winning route label changes between consecutive grid values,
    the crossing parameter is refined by bisection on the winning-label change
    until the bracket shrinks below grid-step / `refine_fraction`.

    Grid points run sequentially when warm-starting (each start feeds the
    next) and may run in parallel processes otherwise; the result records
    which mode ran.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("parameter grid must be nonempty")
    if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise ValueError("parameter grid must be strictly increasing")
    opts = options or SolveOptions()
    templates = list(templates)

    rows = []
    if warm_start or workers <= 1 or len(grid) == 1:
        mode = "sequential-warm" if warm_start else "sequential"
        warm = None
        for value in grid:
            try:
                row = _scan_point(family, value, templates, opts, warm if warm_start else None)
            except MinactError as exc:
                raise ScanAbortedError(
                    f"all routes failed at parameter {value:.6g}: {exc}", rows
                ) from exc
            rows.append(row)
            warm = row.curves
    else:
        mode = f"parallel-cold[{workers}]"
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_scan_point, family, v, templates, opts, None) for v in grid]
            for v, fut in zip(grid, futures):
                try:
                    rows.append(fut.result())
                except MinactError as exc:
                    raise ScanAbortedError(
                        f"all routes failed at parameter {v:.6g}: {exc}", rows
                    ) from exc

    crossings = []
    for left, right in zip(rows[:-1], rows[1:]):
        if left.global_label == right.global_label:
            continue
        lo, hi = left.parameter, right.parameter
        lo_label = left.global_label
        target = (hi - lo) / refine_fraction
        warm = left.curves
        while hi - lo > target:
            mid = 0.5 * (lo + hi)
            row = _scan_point(family, mid, templates, opts, warm if warm_start else None)
            if row.global_label == lo_label:
                lo = mid
            else:
                hi = mid
            warm = row.curves
        crossings.append(0.5 * (lo + hi))
    return ScanResult(rows=rows, crossings=crossings, mode=mode)
