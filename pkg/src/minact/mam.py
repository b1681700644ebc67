"""Minimization of the geometric action over discrete curves with fixed endpoints.

The solver works on products of unit spheres with per-factor isotropic noise,
which is the setting the closed-form retraction assumes: iterates stay exactly
feasible by normalizing each factor block after every step.  The objective and
its analytic gradient are evaluated vectorized over all images; descent
directions come from a limited-memory quasi-Newton recursion on the projected
gradient, with the curve redistributed to equal Euclidean arc length every few
iterations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .action import Curve, check_feasible, geometric_action
from .errors import AmbiguousGeodesicError, MinactError, MultistartError
from .manifold import ProductManifold, UnitSphere
from .wlinalg import BlockIsotropicMetric

__all__ = [
    "Route",
    "SolveOptions",
    "SolveReport",
    "MultistartResult",
    "action_gradient",
    "initial_guess",
    "reparametrize",
    "minimize_action",
    "multistart",
]


@dataclass(frozen=True)
class Route:
    """Ordered waypoints on the manifold used to seed one local minimization."""

    name: str
    waypoints: tuple

    def __post_init__(self):
        pts = tuple(np.asarray(w, dtype=float) for w in self.waypoints)
        if len(pts) < 2:
            raise ValueError("a route needs at least two waypoints")
        for a, b in zip(pts[:-1], pts[1:]):
            if np.linalg.norm(a - b) < 1e-12:
                raise ValueError("consecutive route waypoints must be distinct")
        object.__setattr__(self, "waypoints", pts)

    @classmethod
    def from_labels(cls, model, labels, name: str | None = None) -> "Route":
        pts = tuple(model.fixed_point(lab) for lab in labels)
        return cls(name or "-".join(labels), pts)


@dataclass
class SolveOptions:
    n_images: int = 200            # curve intervals; the curve carries n_images + 1 points
    gtol: float = 1e-8             # exit threshold on the projected-gradient max norm
    max_iterations: int = 10000
    reparam_stride: int = 5        # redistribute arc length every this many iterations
    memory: int = 10               # quasi-Newton history length
    stagnation_window: int = 50    # iterations without improvement before giving up
    armijo: float = 1e-4
    max_backtracks: int = 30


@dataclass
class SolveReport:
    curve: Curve
    action: float
    iterations: int
    grad_norm: float
    max_residual: float
    label: str
    converged: bool
    reason: str
    action_history: np.ndarray = field(repr=False, default=None)
    history_events: tuple = field(repr=False, default=())


@dataclass
class MultistartResult:
    reports: tuple
    failures: tuple
    best_index: int

    @property
    def best(self) -> SolveReport:
        return self.reports[self.best_index]


# ---------------------------------------------------------------------------
# Geometry helpers


def _sphere_blocks(manifold):
    if isinstance(manifold, UnitSphere):
        return (slice(0, manifold.ambient_dim),)
    if isinstance(manifold, ProductManifold) and all(
        isinstance(f, UnitSphere) for f in manifold.factors
    ):
        return manifold.blocks
    raise MinactError(
        "curve optimization supports unit spheres and their products; "
        f"got {manifold!r}"
    )


def _metric_weights(manifold, metric, blocks):
    if not isinstance(metric, BlockIsotropicMetric):
        raise MinactError("curve optimization needs a block-isotropic metric")
    dims = tuple(s.stop - s.start for s in blocks)
    if metric.dims != dims:
        raise MinactError(
            f"metric blocks {metric.dims} do not match manifold factors {dims}"
        )
    return np.concatenate(
        [np.full(d, 1.0 / (s * s)) for s, d in zip(metric.sigmas, dims)]
    )


def _slerp(p: np.ndarray, q: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Great-circle interpolation between unit vectors at parameters ts."""
    dot = float(np.clip(p @ q, -1.0, 1.0))
    omega = np.arccos(dot)
    if omega < 1e-12:
        return np.tile(p, (len(ts), 1))
    if np.pi - omega < 1e-9:
        raise AmbiguousGeodesicError(
            "antipodal waypoints on a sphere factor; insert an intermediate waypoint"
        )
    sin_om = np.sin(omega)
    return (
        np.sin((1.0 - ts)[:, None] * omega) * p[None, :]
        + np.sin(ts[:, None] * omega) * q[None, :]
    ) / sin_om


def _segment_points(a: np.ndarray, b: np.ndarray, blocks, count: int) -> np.ndarray:
    ts = np.linspace(0.0, 1.0, count + 1)
    out = np.empty((count + 1, a.shape[0]))
    for s in blocks:
        out[:, s] = _slerp(a[s], b[s], ts)
    return out


def initial_guess(route: Route, n_images: int, manifold) -> Curve:
    """Piecewise great-circle curve through the route waypoints.

    Images are allocated to segments proportionally to their Euclidean length
    and then redistributed to exactly equal spacing.
    """
    blocks = _sphere_blocks(manifold)
    n_segments = len(route.waypoints) - 1
    if n_images < 2 * n_segments:
        raise ValueError(f"need at least {2 * n_segments} images for {n_segments} segments")
    for w in route.waypoints:
        if np.max(np.abs(manifold.residual(w))) > 1e-8:
            raise ValueError("route waypoints must lie on the manifold")

    lengths = []
    for a, b in zip(route.waypoints[:-1], route.waypoints[1:]):
        dense = _segment_points(a, b, blocks, 32)
        lengths.append(float(np.sum(np.linalg.norm(np.diff(dense, axis=0), axis=1))))
    lengths = np.asarray(lengths)
    raw = n_images * lengths / lengths.sum()
    counts = np.maximum(1, np.floor(raw).astype(int))
    while counts.sum() < n_images:
        counts[np.argmax(raw - counts)] += 1
    while counts.sum() > n_images:
        idx = np.argmin(raw - counts + np.where(counts <= 1, np.inf, 0.0))
        counts[idx] -= 1

    pieces = []
    for k, (a, b) in enumerate(zip(route.waypoints[:-1], route.waypoints[1:])):
        seg = _segment_points(a, b, blocks, int(counts[k]))
        pieces.append(seg if k == 0 else seg[1:])
    return reparametrize(Curve(np.vstack(pieces)), manifold)


def reparametrize(curve: Curve, manifold, tol: float = 1e-9, max_rounds: int = 30) -> Curve:
    """Redistribute images to equal Euclidean chord length along the polyline.

    Coordinates are interpolated with a monotone cubic over cumulative chord
    length, evaluated at equal-length targets, and retracted; the placement is
    iterated until consecutive gaps agree to `tol` relative.  A curve that is
    already equispaced is returned unchanged.
    """
    X = np.array(curve.images)
    m = X.shape[0]
    if m < 3:
        return curve
    try:
        blocks = _sphere_blocks(manifold)
    except MinactError:
        blocks = None
    for _ in range(max_rounds):
        seg = np.linalg.norm(np.diff(X, axis=0), axis=1)
        total = float(seg.sum())
        if total <= 0:
            raise ValueError("cannot reparametrize a collapsed curve")
        mean = total / (m - 1)
        if float(np.max(np.abs(seg - mean))) <= tol * mean:
            break
        s = np.concatenate([[0.0], np.cumsum(seg)])
        keep = np.concatenate([[True], seg > 1e-15])
        spline = PchipInterpolator(s[keep], X[keep], axis=0)
        Xn = spline(np.linspace(0.0, s[keep][-1], m))
        if blocks is not None:
            Xn = _retract_blocks(Xn, blocks)
        else:
            for i in range(1, m - 1):
                Xn[i] = manifold.retract(Xn[i])
        Xn[0] = curve.images[0]
        Xn[-1] = curve.images[-1]
        X = Xn
    else:
        return Curve(X)
    if X is curve.images or np.array_equal(X, curve.images):
        return curve
    return Curve(X)


# ---------------------------------------------------------------------------
# Objective and gradient


def _project_blocks(F: np.ndarray, X: np.ndarray, blocks) -> np.ndarray:
    """Blockwise tangent projection of row vectors F at unit block points X."""
    out = np.empty_like(F)
    for s in blocks:
        xk = X[:, s]
        out[:, s] = F[:, s] - np.sum(F[:, s] * xk, axis=1, keepdims=True) * xk
    return out


def _cell_fields(X: np.ndarray, blocks, dalpha: float):
    """Normalized cell midpoints, inverse midpoint norms, and cell velocities."""
    mid = 0.5 * (X[:-1] + X[1:])
    xhat = np.empty_like(mid)
    rinv = np.empty_like(mid)
    for s in blocks:
        nrm = np.linalg.norm(mid[:, s], axis=1, keepdims=True)
        xhat[:, s] = mid[:, s] / nrm
        rinv[:, s] = 1.0 / nrm
    vel = (X[1:] - X[:-1]) / dalpha
    return xhat, rinv, vel


def _objective(X: np.ndarray, model, blocks, uvec) -> float:
    m = X.shape[0]
    dalpha = 1.0 / (m - 1)
    xhat, _, vel = _cell_fields(X, blocks, dalpha)
    V = _project_blocks(vel, xhat, blocks)
    B = _project_blocks(model.drift(xhat), xhat, blocks)
    q = np.sum(B * B * uvec, axis=1)
    p = np.sum(V * V * uvec, axis=1)
    c = np.sum(B * V * uvec, axis=1)
    return dalpha * float(np.sum(np.sqrt(q * p) - c))


def _objective_gradient(X: np.ndarray, model, blocks, uvec):
    """Action value and its Euclidean gradient with respect to every image.

    Each grid cell couples to its two bounding images: through the chord
    velocity directly and through the normalized midpoint at which the
    projectors and the drift are evaluated.
    """
    m, n = X.shape
    dalpha = 1.0 / (m - 1)
    xhat, rinv, vel = _cell_fields(X, blocks, dalpha)
    b = model.drift(xhat)
    V = _project_blocks(vel, xhat, blocks)
    B = _project_blocks(b, xhat, blocks)
    q = np.sum(B * B * uvec, axis=1)
    p = np.sum(V * V * uvec, axis=1)
    c = np.sum(B * V * uvec, axis=1)
    sq = np.sqrt(q)
    sp = np.sqrt(p)
    S = dalpha * float(np.sum(sq * sp - c))

    # d f / d V and d f / d B, with subgradient 0 chosen for the norm ratios
    # at exact equilibria or coincident images.
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_v = np.where(p > 1e-28, sq / sp, 0.0)
        ratio_b = np.where(q > 1e-28, sp / sq, 0.0)
    gV = ratio_v[:, None] * (uvec * V) - uvec * B
    gB = ratio_b[:, None] * (uvec * B) - uvec * V

    hV = _project_blocks(gV, xhat, blocks)
    PgB = _project_blocks(gB, xhat, blocks)
    T = np.einsum("mij,mi->mj", model.drift_jacobian(xhat), PgB)
    # Projector derivatives at the midpoint.
    for s in blocks:
        xk, wk, bk = xhat[:, s], vel[:, s], b[:, s]
        gv, gb = gV[:, s], gB[:, s]
        T[:, s] -= wk * np.sum(xk * gv, axis=1, keepdims=True)
        T[:, s] -= gv * np.sum(wk * xk, axis=1, keepdims=True)
        T[:, s] -= bk * np.sum(xk * gb, axis=1, keepdims=True)
        T[:, s] -= gb * np.sum(bk * xk, axis=1, keepdims=True)
    # Chain through the midpoint normalization: each bounding image receives
    # half of the tangent-projected point term scaled by 1/||midpoint||.
    PT = _project_blocks(T, xhat, blocks) * rinv

    G = np.zeros_like(X)
    G[:-1] += 0.5 * dalpha * PT - hV
    G[1:] += 0.5 * dalpha * PT + hV
    return S, G


def action_gradient(curve: Curve, model, manifold, metric=None):
    """Value and tangent-projected gradient of the discrete geometric action.

    Gradient rows for the endpoints are zeroed: endpoints are fixed data.
    """
    blocks = _sphere_blocks(manifold)
    metric = model.metric if metric is None else metric
    uvec = _metric_weights(manifold, metric, blocks)
    X = np.array(curve.images)
    S, G = _objective_gradient(X, model, blocks, uvec)
    PG = _project_blocks(G, X, blocks)
    PG[0] = 0.0
    PG[-1] = 0.0
    return S, PG


# ---------------------------------------------------------------------------
# Limited-memory quasi-Newton descent with retraction


def _retract_blocks(X: np.ndarray, blocks) -> np.ndarray:
    out = np.array(X)
    for s in blocks:
        nrm = np.linalg.norm(out[:, s], axis=1, keepdims=True)
        if np.any(nrm < 1e-12):
            raise MinactError("step collapsed a sphere factor to the origin")
        out[:, s] /= nrm
    return out


def _two_loop(g: np.ndarray, mem) -> np.ndarray:
    qv = g.copy()
    alphas = []
    for s_vec, y_vec, rho in reversed(mem):
        a = rho * float(s_vec @ qv)
        alphas.append(a)
        qv -= a * y_vec
    if mem:
        s_vec, y_vec, _ = mem[-1]
        qv *= float(s_vec @ y_vec) / float(y_vec @ y_vec)
    for (s_vec, y_vec, rho), a in zip(mem, reversed(alphas)):
        beta = rho * float(y_vec @ qv)
        qv += (a - beta) * s_vec
    return -qv


def minimize_action(curve: Curve, model, manifold, options: SolveOptions | None = None, label: str = "") -> SolveReport:
    """Descend the geometric action over the interior images of a feasible curve.

    Every accepted line-search step decreases the action; each iterate is
    retracted onto the manifold, and the curve is redistributed to equal arc
    length every `reparam_stride` iterations (which may move the value by a
    discretization-level amount).  Exits when the projected-gradient max norm
    drops below `gtol`, when the action stops improving for a full stagnation
    window, or at the iteration cap.
    """
    opts = options or SolveOptions()
    blocks = _sphere_blocks(manifold)
    uvec = _metric_weights(manifold, model.metric, blocks)
    check_feasible(curve.images, manifold)

    X = np.array(curve.images)
    m, n = X.shape

    def evaluate(Xc):
        S, G = _objective_gradient(Xc, model, blocks, uvec)
        PG = _project_blocks(G, Xc, blocks)
        return S, PG[1:-1]

    S, PG = evaluate(X)
    history = [S]
    events = ["init"]
    best = S
    best_trace = [best]
    since_improve = 0
    mem = []
    iterations = 0
    converged = False
    reason = "max_iterations"

    for it in range(1, opts.max_iterations + 1):
        iterations = it
        if opts.reparam_stride > 0 and it % opts.reparam_stride == 0:
            # A few redistribution rounds suffice mid-flight; the final curve
            # gets a tight pass below.
            Xr = np.array(reparametrize(Curve(X), manifold, tol=1e-8, max_rounds=3).images)
            if not np.array_equal(Xr, X):
                X = Xr
                S, PG = evaluate(X)
                mem.clear()
                history.append(S)
                events.append("reparam")

        gnorm = float(np.max(np.abs(PG))) if PG.size else 0.0
        if gnorm <= opts.gtol:
            converged = True
            reason = "gtol"
            break

        flat_g = PG.ravel()
        direction = _two_loop(flat_g, mem)
        if float(direction @ flat_g) >= 0.0:
            mem.clear()
            direction = -flat_g
        slope = float(direction @ flat_g)

        step = 1.0
        accepted = None
        for _ in range(opts.max_backtracks):
            Xt = X.copy()
            Xt[1:-1] += step * direction.reshape(m - 2, n)
            try:
                Xt = _retract_blocks(Xt, blocks)
            except MinactError:
                step *= 0.5
                continue
            St = _objective(Xt, model, blocks, uvec)
            if St <= S + opts.armijo * step * slope:
                accepted = (Xt, St)
                break
            step *= 0.5
        if accepted is None:
            if mem:
                mem.clear()
                continue
            reason = "line_search_stalled"
            break

        X_new, S_new = accepted
        S_new, PG_new = evaluate(X_new)
        s_vec = (X_new[1:-1] - X[1:-1]).ravel()
        y_vec = (PG_new - PG).ravel()
        sy = float(s_vec @ y_vec)
        if sy > 1e-12 * float(np.linalg.norm(s_vec)) * float(np.linalg.norm(y_vec)):
            mem.append((s_vec, y_vec, 1.0 / sy))
            if len(mem) > opts.memory:
                mem.pop(0)
        X, S, PG = X_new, S_new, PG_new
        history.append(S)
        events.append("step")

        if S < best - 1e-13 * (1.0 + abs(best)):
            best = S
            since_improve = 0
        else:
            since_improve += 1
            if since_improve >= opts.stagnation_window:
                reason = "stagnation"
                break
        # Guard against asymptotic grinds: a full window of steps that jointly
        # gain less than the arithmetic noise floor counts as stagnation too.
        best_trace.append(best)
        if (
            len(best_trace) > opts.stagnation_window
            and best_trace[-opts.stagnation_window - 1] - best <= 1e-11 * (1.0 + abs(best))
        ):
            reason = "stagnation"
            break

    if opts.reparam_stride > 0:
        Xr = np.array(reparametrize(Curve(X), manifold).images)
        if not np.array_equal(Xr, X):
            X = Xr
            S, PG = evaluate(X)
            history.append(S)
            events.append("reparam")
    final = Curve(X)
    resid = 0.0
    for x in X:
        resid = max(resid, float(np.max(np.abs(manifold.residual(x)))))
    gnorm = float(np.max(np.abs(PG))) if PG.size else 0.0
    return SolveReport(
        curve=final,
        action=geometric_action(final, model, manifold),
        iterations=iterations,
        grad_norm=gnorm,
        max_residual=resid,
        label=label,
        converged=converged or gnorm <= opts.gtol,
        reason=reason,
        action_history=np.asarray(history),
        history_events=tuple(events),
    )


def multistart(routes, model, manifold, options: SolveOptions | None = None, initial_curves: dict | None = None) -> MultistartResult:
    """Solve one local minimization per route and pick the least action.

    Individual route failures are recorded rather than raised; only when every
    route fails is an aggregate error thrown.  Ties on the final action break
    toward the earliest route in the list.
    """
    opts = options or SolveOptions()
    reports = []
    failures = []
    for route in routes:
        try:
            if initial_curves and route.name in initial_curves:
                start = initial_curves[route.name]
            else:
                start = initial_guess(route, opts.n_images, manifold)
            reports.append(minimize_action(start, model, manifold, opts, label=route.name))
        except MinactError as exc:
            failures.append((route.name, f"{type(exc).__name__}: {exc}"))
        except ValueError as exc:
            failures.append((route.name, f"ValueError: {exc}"))
    if not reports:
        raise MultistartError(f"all routes failed: {failures}")
    best = 0
    for i, rep in enumerate(reports):
        if rep.action < reports[best].action:
            best = i
    return MultistartResult(tuple(reports), tuple(failures), best)
