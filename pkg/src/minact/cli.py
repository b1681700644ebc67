"""Scenario-driven command line front end.

A scenario is a TOML file naming a model, routes (by fixed-point label or
explicit coordinates), solver options, and optionally a parameter sweep.  The
commands write machine-readable artifacts into the output directory:

* ``paths/<route>.csv``         one row per image: alpha, coordinates, the
                                pointwise time-change rate and integrand (and
                                theta angles for in-plane two-rod paths);
* ``actions.csv``               one row per (sweep value, route);
* ``summary.json``              global picks, sweep crossing if any, and the
                                labeled fixed-point table;
* ``fixed_points.csv``          the classified equilibrium census.

Numbers are printed with 17 significant digits so reruns of an identical
scenario reproduce byte-identical files.
"""

from __future__ import annotations

import argparse
import functools
import json
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import analysis as ana
from .action import geometric_integrand, time_change_rates
from .errors import ConfigError, MinactError
from .mam import Route, SolveOptions, multistart
from .models import SingleRod, TwoRod

_ROUTE_NAME_OK = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_+-.")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


# ---------------------------------------------------------------------------
# Scenario loading


class Scenario:
    """Validated contents of a scenario file."""

    def __init__(self, raw: dict, path: str):
        self.path = path
        if "model" not in raw:
            raise ConfigError(f"{path}: missing [model] table")
        self.model_cfg = dict(raw["model"])
        self.kind = self.model_cfg.pop("kind", None)
        if self.kind not in ("single_rod", "two_rod"):
            raise ConfigError(f"{path}: model.kind must be 'single_rod' or 'two_rod'")

        manifold_cfg = raw.get("manifold")
        if manifold_cfg is not None:
            want = "sphere" if self.kind == "single_rod" else "sphere_product"
            got = manifold_cfg.get("kind")
            if got != want:
                raise ConfigError(f"{path}: manifold.kind {got!r} does not match model {self.kind!r} (expected {want!r})")

        self.routes_cfg = raw.get("route", [])
        if not isinstance(self.routes_cfg, list) or not self.routes_cfg:
            raise ConfigError(f"{path}: at least one [[route]] table is required")
        for i, rc in enumerate(self.routes_cfg):
            name = rc.get("name", f"route{i}")
            if not name or not set(name) <= _ROUTE_NAME_OK:
                raise ConfigError(f"{path}: route name {name!r} may only use letters, digits, '_+-.'")
            if "waypoints" not in rc or len(rc["waypoints"]) < 2:
                raise ConfigError(f"{path}: route {name!r} needs at least two waypoints")

        solver = raw.get("solver", {})
        self.images = int(solver.get("images", 200))
        self.gtol = float(solver.get("gtol", 1e-8))
        self.max_iterations = int(solver.get("max_iterations", 10000))
        self.reparam_stride = int(solver.get("reparam_stride", 5))

        self.sweep = raw.get("sweep")
        if self.sweep is not None:
            if "parameter" not in self.sweep:
                raise ConfigError(f"{path}: sweep.parameter is required")
            if "values" in self.sweep:
                values = [float(v) for v in self.sweep["values"]]
            else:
                try:
                    count = int(self.sweep["count"])
                    values = list(np.linspace(float(self.sweep["start"]), float(self.sweep["stop"]), count))
                except KeyError as exc:
                    raise ConfigError(f"{path}: sweep needs either values or start/stop/count") from exc
            if not values:
                raise ConfigError(f"{path}: sweep grid is empty")
            if any(b <= a for a, b in zip(values[:-1], values[1:])):
                raise ConfigError(f"{path}: sweep grid must be strictly increasing")
            self.sweep_values = values
            self.sweep_parameter = str(self.sweep["parameter"])
            self.warm_start = bool(self.sweep.get("warm_start", True))
            self.workers = int(self.sweep.get("workers", 1))

        analysis_cfg = raw.get("analysis", {})
        self.random_seeds = int(analysis_cfg.get("random_seeds", 0))
        self.seed = int(raw.get("run", {}).get("seed", 0))
        self.out_dir = raw.get("output", {}).get("directory", "out")

    # -- model construction -------------------------------------------------

    def build_model(self, **overrides):
        cfg = dict(self.model_cfg)
        cfg.update(overrides)
        if self.kind == "single_rod":
            allowed = {"mu", "shear_12", "shear_13", "sigma"}
            cls = SingleRod
        else:
            allowed = {"mu", "coupling", "sigma1", "sigma2"}
            cls = TwoRod
        unknown = set(cfg) - allowed
        if unknown:
            raise ConfigError(f"{self.path}: unknown model parameter(s) {sorted(unknown)}")
        if "mu" in cfg:
            cfg["mu"] = tuple(float(v) for v in cfg["mu"])
        try:
            return cls(**cfg)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{self.path}: bad model parameters: {exc}") from exc

    def model_family(self):
        """Parameter value -> model, for the configured sweep parameter.

        Returned as a picklable partial so parallel sweeps can ship it to
        worker processes.
        """
        param = self.sweep_parameter
        if param == "sigma2_squared":
            if self.kind != "two_rod":
                raise ConfigError(f"{self.path}: sigma2_squared sweeps need the two-rod model")
        else:
            probe = self.build_model()
            if not hasattr(probe, param):
                raise ConfigError(f"{self.path}: unknown sweep parameter {param!r}")
        return functools.partial(_family_member, self.kind, dict(self.model_cfg), param)

    def resolve_route(self, rc, model, index: int) -> Route:
        name = rc.get("name", f"route{index}")
        pts = []
        for w in rc["waypoints"]:
            if isinstance(w, str):
                try:
                    pts.append(model.fixed_point(w))
                except (KeyError, ValueError) as exc:
                    raise ConfigError(f"{self.path}: route {name!r}: {exc}") from exc
            else:
                pts.append(np.asarray(w, dtype=float))
        try:
            return Route(name, tuple(pts))
        except ValueError as exc:
            raise ConfigError(f"{self.path}: route {name!r}: {exc}") from exc

    def route_templates(self):
        """Label-only routes as templates for sweeps (coordinates not allowed there)."""
        templates = []
        for i, rc in enumerate(self.routes_cfg):
            if not all(isinstance(w, str) for w in rc["waypoints"]):
                raise ConfigError(f"{self.path}: sweep routes must use fixed-point labels")
            templates.append(ana.RouteTemplate(rc.get("name", f"route{i}"), tuple(rc["waypoints"])))
        return templates

    def solve_options(self) -> SolveOptions:
        return SolveOptions(
            n_images=self.images,
            gtol=self.gtol,
            max_iterations=self.max_iterations,
            reparam_stride=self.reparam_stride,
        )


def _family_member(kind, model_cfg, param, value):
    """Module-level model builder, picklable for parallel sweeps."""
    cfg = dict(model_cfg)
    if param == "sigma2_squared":
        cfg["sigma2"] = float(np.sqrt(value))
    else:
        cfg[param] = value
    if "mu" in cfg:
        cfg["mu"] = tuple(float(v) for v in cfg["mu"])
    cls = SingleRod if kind == "single_rod" else TwoRod
    return cls(**cfg)


def load_scenario(path: str) -> Scenario:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{path}: no such file")
    try:
        raw = tomllib.loads(p.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return Scenario(raw, path)


# ---------------------------------------------------------------------------
# Artifact writers


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _planar_thetas(images):
    """Angle coordinates for two-rod paths lying in the first coordinate plane."""
    if images.shape[1] != 6 or np.max(np.abs(images[:, [2, 5]])) > 1e-6:
        return None
    th1 = np.mod(np.arctan2(images[:, 1], images[:, 0]), 2.0 * np.pi)
    th2 = np.mod(np.arctan2(images[:, 4], images[:, 3]), 2.0 * np.pi)
    return th1, th2


def _write_path_csv(path: Path, report, model, manifold):
    images = report.curve.images
    m, n = images.shape
    rates = time_change_rates(report.curve, model, manifold)
    integ = geometric_integrand(report.curve, model, manifold)
    header = ["alpha"] + [f"x{j+1}" for j in range(n)] + ["lambda", "integrand"]
    thetas = _planar_thetas(images)
    if thetas is not None:
        header += ["theta1", "theta2"]
    alphas = np.linspace(0.0, 1.0, m)
    rows = []
    for i in range(m):
        row = [alphas[i], *images[i], rates[i], integ[i]]
        if thetas is not None:
            row += [thetas[0][i], thetas[1][i]]
        rows.append(row)
    _write_csv(path, header, rows)


def _fixed_point_rows(model, manifold, n_random: int, seed: int):
    labels = {}
    try:
        labels = {lab: model.fixed_point(lab) for lab in model.fixed_point_labels()}
    except ValueError:
        pass
    seeds = list(model.census_seeds())
    if n_random:
        rng = np.random.default_rng(seed)
        for _ in range(n_random):
            seeds.append(manifold.retract(rng.normal(size=manifold.ambient_dim)))
    records = ana.find_fixed_points(model, manifold, seeds)
    for rec in records:
        for lab, pt in labels.items():
            if np.linalg.norm(rec.location - pt) < 1e-6:
                rec.label = lab
                break
    records.sort(key=lambda r: tuple(np.round(r.location, 9)))
    return records


def _fixed_point_table(records, n):
    header = [f"x{j+1}" for j in range(n)] + ["label", "kind", "index"]
    d = max(r.eigenvalues.size for r in records)
    header += [f"eig_re{k+1}" for k in range(d)] + [f"eig_im{k+1}" for k in range(d)]
    rows = []
    for r in records:
        row = [*r.location, r.label, r.kind, r.index]
        row += [*r.eigenvalues.real, *r.eigenvalues.imag]
        rows.append(row)
    return header, rows


def _summary_fixed_points(records):
    return [
        {
            "location": [float(v) for v in r.location],
            "label": r.label,
            "kind": r.kind,
            "index": int(r.index),
            "eigenvalues_re": [float(v) for v in r.eigenvalues.real],
            "eigenvalues_im": [float(v) for v in r.eigenvalues.imag],
        }
        for r in records
    ]


# ---------------------------------------------------------------------------
# Commands


def run_solve(scenario: Scenario) -> int:
    model = scenario.build_model()
    manifold = model.manifold()
    routes = [scenario.resolve_route(rc, model, i) for i, rc in enumerate(scenario.routes_cfg)]
    result = multistart(routes, model, manifold, scenario.solve_options())

    out = Path(scenario.out_dir)
    (out / "paths").mkdir(parents=True, exist_ok=True)
    for rep in result.reports:
        _write_path_csv(out / "paths" / f"{rep.label}.csv", rep, model, manifold)
    rows = [["", rep.label, rep.action, rep.converged, rep.iterations] for rep in result.reports]
    for name, msg in result.failures:
        rows.append(["", name, "nan", False, 0])
    _write_csv(out / "actions.csv", ["sweep_value", "route", "action", "converged", "iterations"], rows)

    records = _fixed_point_rows(model, manifold, scenario.random_seeds, scenario.seed)
    summary = {
        "command": "solve",
        "model": {"kind": scenario.kind, **scenario.model_cfg},
        "global": [
            {
                "sweep_value": None,
                "route": result.best.label,
                "action": float(result.best.action),
                "converged": bool(result.best.converged),
                "path_file": f"paths/{result.best.label}.csv",
            }
        ],
        "bifurcation_crossing": None,
        "route_failures": [{"route": n, "error": m} for n, m in result.failures],
        "fixed_points": _summary_fixed_points(records),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(f"global route: {result.best.label}  action: {_fmt(result.best.action)}")
    return 0


def run_sweep(scenario: Scenario) -> int:
    if scenario.sweep is None:
        raise ConfigError(f"{scenario.path}: sweep command needs a [sweep] table")
    family = scenario.model_family()
    templates = scenario.route_templates()
    opts = scenario.solve_options()
    try:
        scan = ana.bifurcation_scan(
            family,
            scenario.sweep_values,
            templates,
            opts,
            warm_start=scenario.warm_start,
            workers=scenario.workers,
        )
    except ana.ScanAbortedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    out = Path(scenario.out_dir)
    (out / "paths").mkdir(parents=True, exist_ok=True)
    rows = []
    global_rows = []
    for k, row in enumerate(scan.rows):
        for tmpl in templates:
            name = tmpl.name
            if name not in row.actions:
                rows.append([row.parameter, name, "nan", False, 0])
                continue
            rows.append([row.parameter, name, row.actions[name], row.converged[name], row.iterations[name]])
            model_k = family(row.parameter)
            manifold_k = model_k.manifold()
            rep_like = _ReportView(row.curves[name], row.actions[name], name)
            _write_path_csv(out / "paths" / f"{name}__{k}.csv", rep_like, model_k, manifold_k)
        global_rows.append(
            {
                "sweep_value": row.parameter,
                "route": row.global_label,
                "action": float(row.actions[row.global_label]),
                "converged": bool(row.converged[row.global_label]),
                "path_file": f"paths/{row.global_label}__{k}.csv",
            }
        )
    _write_csv(out / "actions.csv", ["sweep_value", "route", "action", "converged", "iterations"], rows)

    base_model = scenario.build_model()
    records = _fixed_point_rows(base_model, base_model.manifold(), scenario.random_seeds, scenario.seed)
    summary = {
        "command": "sweep",
        "model": {"kind": scenario.kind, **scenario.model_cfg},
        "sweep": {"parameter": scenario.sweep_parameter, "values": [float(v) for v in scenario.sweep_values], "mode": scan.mode},
        "global": global_rows,
        "bifurcation_crossing": None if scan.crossing is None else float(scan.crossing),
        "bifurcation_crossings": [float(c) for c in scan.crossings],
        "fixed_points": _summary_fixed_points(records),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    if scan.crossing is not None:
        print(f"global-route crossing at {scenario.sweep_parameter} = {_fmt(scan.crossing)}")
    else:
        print("no global-route crossing in the grid")
    return 0


class _ReportView:
    """Minimal stand-in exposing what the path writer needs."""

    def __init__(self, curve, action, label):
        self.curve = curve
        self.action = action
        self.label = label


def run_fixed_points(scenario: Scenario) -> int:
    model = scenario.build_model()
    manifold = model.manifold()
    records = _fixed_point_rows(model, manifold, scenario.random_seeds, scenario.seed)
    out = Path(scenario.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header, rows = _fixed_point_table(records, manifold.ambient_dim)
    _write_csv(out / "fixed_points.csv", header, rows)

    print(f"{'location':<44} {'label':<6} {'kind':<9} index  eigenvalues")
    for r in records:
        loc = "(" + ", ".join(f"{v:+.4f}" for v in r.location) + ")"
        eigs = ", ".join(
            f"{re:+.4f}" + (f"{im:+.4f}j" if abs(im) > 0 else "")
            for re, im in zip(r.eigenvalues.real, r.eigenvalues.imag)
        )
        print(f"{loc:<44} {r.label:<6} {r.kind:<9} {r.index:>5}  {eigs}")
    counts = {}
    for r in records:
        counts[r.kind] = counts.get(r.kind, 0) + 1
    print(f"total: {len(records)}  " + "  ".join(f"{k}: {v}" for k, v in sorted(counts.items())))
    return 0


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minact",
        description="Minimum action transition paths on constraint manifolds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("solve", "run the route multistart for one scenario"),
        ("sweep", "sweep a model parameter and locate global-route crossings"),
        ("fixed-points", "locate and classify the equilibria of a scenario model"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="scenario TOML file")
        p.add_argument("--images", type=int, help="override solver.images")
        p.add_argument("--gtol", type=float, help="override solver.gtol")
        p.add_argument("--workers", type=int, help="override sweep.workers")
        p.add_argument("--out", help="override output.directory")
        p.add_argument("--seed", type=int, help="override run.seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.config)
        if args.images is not None:
            scenario.images = args.images
        if args.gtol is not None:
            scenario.gtol = args.gtol
        if args.workers is not None and scenario.sweep is not None:
            scenario.workers = args.workers
        if args.out is not None:
            scenario.out_dir = args.out
        if args.seed is not None:
            scenario.seed = args.seed
        if args.command == "solve":
            return run_solve(scenario)
        if args.command == "sweep":
            return run_sweep(scenario)
        return run_fixed_points(scenario)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MinactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
