"""Command-line driver: plan, compare, padding-report, contingency, mesh-dump, scenario, validate.

Settings resolve as command-line flags over a JSON config file (``--config``)
over built-in defaults. Exit codes: 0 success, 2 bad input, 3 no feasible plan.
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .baseline import GridAStarPlanner
from .contingency import simulate_contingency
from .env import load_environment, save_environment
from .exceptions import AssumptionViolated, InfeasiblePlan, InvalidEnvironment, InvalidQuery
from .geometry import polyline_point_at
from .homotopy import EnumerationStats, enumerate_channels
from .mesh import build_dual, build_navmesh
from .padding import apply_padding, is_bounds_edge, merge_edge_offsets
from .planner import PlanConfig, RenewPlanner, pad_channel
from .scenarios import generate, scenario_names
from .schemas import SCHEMAS, SchemaError, validate_csv, write_csv
from .svg import Figure, draw_channel, draw_endpoints, draw_environment, draw_mesh, write_svg

logger = logging.getLogger("renew")

EXIT_OK, EXIT_BAD_INPUT, EXIT_INFEASIBLE = 0, 2, 3

DEFAULTS = {
    "env": None,
    "start": None,
    "goal": None,
    "k": "16",
    "samples": 500,
    "sigma": 0.95,
    "alpha": 1.0,
    "drag_exp": 2.0,
    "region_radius": None,
    "padding": "adaptive",
    "padding_samples": 500,
    "pad_bounds": True,
    "resolution": 2.0,
    "motion": "dubins",
    "baseline_padding": "none",
    "smooth_iterations": 200,
    "spacing": 1.0,
    "noise": True,
    "result": None,
    "planner": "renew",
    "seed": 0,
    "out": "renew-out",
    "svg": True,
    "svg_timestamp": False,
}

PLANNER_NAMES = ("renew", "grid-astar-o", "grid-astar-s")
CHANNEL_OK = "#7aa6d6"
CHANNEL_BLOCKED = "#e74c3c"


class BadInput(Exception):
    pass


# --- configuration -------------------------------------------------------

def load_config_file(path):
    p = Path(path)
    if not p.exists():
        raise BadInput(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise BadInput(f"{p}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise BadInput(f"{p}: config must be a JSON object")
    out = {}
    for key, val in doc.items():
        k = key.replace("-", "_")
        if k not in DEFAULTS:
            raise BadInput(f"{p}: unknown config key {key!r}")
        out[k] = val
    return out


def resolve_config(args):
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    flags = {k: v for k, v in vars(args).items() if k in DEFAULTS}
    if getattr(args, "config", None):
        cfg.update(load_config_file(args.config))
    cfg.update(flags)
    return cfg


def parse_k_list(value):
    if isinstance(value, int):
        vals = [value]
    else:
        try:
            vals = [int(v) for v in str(value).split(",") if v.strip()]
        except ValueError:
            raise BadInput(f"--k expects integers, got {value!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise BadInput(f"--k values must be >= 1, got {value!r}")
    return vals


def parse_point(value, name):
    if value is None:
        return None
    if isinstance(value, str):
        parts = value.split(",")
    else:
        parts = list(value)
    try:
        pt = tuple(float(v) for v in parts)
    except ValueError:
        raise BadInput(f"--{name} expects 'x,y', got {value!r}") from None
    if len(pt) != 2:
        raise BadInput(f"--{name} expects 'x,y', got {value!r}")
    return pt


def resolve_environment(cfg):
    ref = cfg["env"]
    if ref is None:
        raise BadInput("--env is required (environment file or built-in scenario name)")
    p = Path(str(ref))
    if p.exists():
        env = load_environment(p)
    elif str(ref) in scenario_names():
        env = generate(str(ref))
    else:
        raise FileNotFoundError(f"environment file not found: {p}")
    start = parse_point(cfg["start"], "start") or env.start
    goal = parse_point(cfg["goal"], "goal") or env.goal
    if start is None or goal is None:
        raise BadInput("start and goal are required (in the environment file or via --start/--goal)")
    return env, start, goal


def plan_config(cfg, k):
    return PlanConfig(k=k, n_samples=int(cfg["samples"]), sigma=float(cfg["sigma"]), alpha=float(cfg["alpha"]),
                      k_exp=float(cfg["drag_exp"]),
                      region_radius=None if cfg["region_radius"] is None else float(cfg["region_radius"]),
                      padding=str(cfg["padding"]), padding_samples=int(cfg["padding_samples"]),
                      pad_bounds=bool(cfg["pad_bounds"]), seed=int(cfg["seed"])).validated()


def renew_estimator(cfg, k):
    c = plan_config(cfg, k)
    return RenewPlanner(k=c.k, n_samples=c.n_samples, sigma=c.sigma, alpha=c.alpha, drag_exp=c.k_exp,
                        region_radius=c.region_radius, padding=c.padding, padding_samples=c.padding_samples,
                        pad_bounds=c.pad_bounds, seed=c.seed)


def out_dir(cfg):
    d = Path(cfg["out"])
    d.mkdir(parents=True, exist_ok=True)
    return d


# --- serialization helpers -----------------------------------------------

def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, doc):
    Path(path).write_text(json.dumps(jsonable(doc), indent=1, sort_keys=True) + "\n")


def metrics_row(scenario, planner, k, status, metrics=None):
    m = metrics or {}
    return {"scenario": scenario, "planner": planner, "k": k, "status": status,
            "Fuel": m.get("fuel"), "Safety": m.get("safety"), "Length": m.get("length"),
            "F/D": m.get("fd"), "States": m.get("states")}


def config_record(cfg):
    return {k: cfg[k] for k in sorted(cfg) if k not in ("svg", "svg_timestamp", "out")}


def grid_result_doc(name, env, points, metrics, gp, estimator):
    return {"planner": name, "environment": env.name, "waypoints": np.asarray(points).tolist(),
            "metrics": dict(metrics),
            "diagnostics": {"explored_states": gp.explored, "expanded_states": gp.expanded,
                            "resolution": estimator.resolution, "motion": estimator.motion,
                            "padding": estimator.padding}}


def _plan_figure(env, result, title):
    fig = Figure(env.bounds, title=title)
    offsets = result.padded[result.chosen_channel.channel_id].report.per_edge
    draw_environment(fig, env, offsets, result.mesh)
    for ch in result.channels:
        if ch.channel_id != result.chosen_channel.channel_id:
            draw_channel(fig, ch, result.mesh, stroke="#c9d9ea")
    draw_channel(fig, result.chosen_channel, result.mesh)
    fig.polyline(result.chosen_path.waypoints, "#c0392b", width=2.2)
    draw_endpoints(fig, result.chosen_path.waypoints[0], result.chosen_path.waypoints[-1])
    return fig


# --- commands ------------------------------------------------------------

def cmd_plan(cfg):
    env, start, goal = resolve_environment(cfg)
    ks = parse_k_list(cfg["k"])
    out = out_dir(cfg)
    est = renew_estimator(cfg, ks[0]).fit(env)
    rows, feasible = [], 0
    for k in ks:
        est.set_params(k=k)
        suffix = "" if len(ks) == 1 else f"_k{k}"
        try:
            res = est.plan(start, goal)
        except InfeasiblePlan as exc:
            logger.warning("k=%d: %s", k, exc)
            rows.append(metrics_row(env.name, "renew", k, "infeasible"))
            continue
        feasible += 1
        rows.append(metrics_row(env.name, "renew", k, "ok", res.metrics))
        doc = res.to_dict()
        doc.update(environment=env.name, config=config_record(dict(cfg, k=k)))
        write_json(out / f"result{suffix}.json", doc)
        if cfg["svg"]:
            write_svg(out / f"plan{suffix}.svg", _plan_figure(env, res, f"{env.name} k={k}"), cfg["svg_timestamp"])
        print(f"k={k}: fuel={res.metrics['fuel']:.3f} F/D={res.metrics['fd']:.4f} "
              f"states={res.metrics['states']} channel={res.chosen_channel.channel_id}")
    write_csv(out / "metrics.csv", "metrics", rows)
    if not feasible:
        raise InfeasiblePlan("no feasible plan for any requested k")
    return EXIT_OK


def cmd_compare(cfg):
    env, start, goal = resolve_environment(cfg)
    k = parse_k_list(cfg["k"])[0]
    out = out_dir(cfg)
    rows, paths = [], {}
    renew_res = None
    try:
        renew_res = renew_estimator(cfg, k).fit(env).plan(start, goal)
        rows.append(metrics_row(env.name, "renew", k, "ok", renew_res.metrics))
        doc = renew_res.to_dict()
        doc.update(environment=env.name, config=config_record(cfg))
        write_json(out / "result_renew.json", doc)
        paths["renew"] = renew_res.chosen_path.waypoints
    except (InfeasiblePlan, AssumptionViolated, InvalidQuery) as exc:
        rows.append(metrics_row(env.name, "renew", k, f"error: {exc}"))

    scheme = str(cfg["baseline_padding"])
    if scheme == "same":
        scheme = str(cfg["padding"])
    offsets, mesh = None, None
    status = None
    if scheme == "adaptive":
        if renew_res is None:
            status = "error: adaptive baseline padding needs a RENEW plan"
        else:
            offsets = merge_edge_offsets(pc.report for pc in renew_res.padded.values())
            mesh = renew_res.mesh
    gp_res = None
    if status is None:
        try:
            base = GridAStarPlanner(resolution=float(cfg["resolution"]), motion=str(cfg["motion"]),
                                    padding=scheme, smooth_iterations=int(cfg["smooth_iterations"]),
                                    alpha=float(cfg["alpha"]), drag_exp=float(cfg["drag_exp"]),
                                    seed=int(cfg["seed"]))
            base.fit(env, edge_offsets=offsets, mesh=mesh)
            gp_res = base.plan(start, goal)
            if gp_res is None:
                status = "infeasible"
        except (InvalidQuery, AssumptionViolated) as exc:
            status = f"error: {exc}"
    if gp_res is None:
        rows.append(metrics_row(env.name, "grid-astar-o", None, status))
        rows.append(metrics_row(env.name, "grid-astar-s", None, status))
    else:
        for name, pts, m in (("grid-astar-o", gp_res.original.points, gp_res.metrics_original),
                             ("grid-astar-s", gp_res.smoothed, gp_res.metrics_smoothed)):
            rows.append(metrics_row(env.name, name, None, "ok", m))
            write_json(out / f"result_{name}.json", grid_result_doc(name, env, pts, m, gp_res.original, base))
            paths[name] = pts
    write_csv(out / "compare.csv", "metrics", rows)
    if cfg["svg"]:
        fig = Figure(env.bounds, title=f"{env.name} comparison")
        draw_environment(fig, env)
        for color, name in zip(("#c0392b", "#27ae60", "#8e44ad"), PLANNER_NAMES):
            if name in paths:
                fig.polyline(paths[name], color, width=2.0 if name == "renew" else 1.4)
        draw_endpoints(fig, start, goal)
        write_svg(out / "compare.svg", fig, cfg["svg_timestamp"])
    for r in rows:
        print(f"{r['planner']}: {r['status']} fuel={r['Fuel']} F/D={r['F/D']} states={r['States']}")
    return EXIT_OK


def cmd_padding_report(cfg):
    env, start, goal = resolve_environment(cfg)
    k = parse_k_list(cfg["k"])[0]
    config = plan_config(cfg, k)
    out = out_dir(cfg)
    mesh = build_navmesh(env)
    dual = build_dual(mesh)
    channels = enumerate_channels(dual, mesh, start, goal, k, env.obstacles, stats=EnumerationStats())
    if not channels:
        raise InfeasiblePlan("no feasible plan: start and goal are not connected")
    pad_rows, ch_rows, padded = [], [], []
    cache = {}
    for ch in channels:
        report = pad_channel(ch, mesh, env, config, env.vehicle, cache)
        pc = apply_padding(ch, report, mesh, env.vehicle.length)
        padded.append(pc)
        pad_rows.extend(report.to_rows(mesh))
        ch_rows.append({"channel": ch.channel_id, "signature": str(ch.signature), "n_triangles": len(ch.triangle_seq),
                        "feasible": pc.feasible,
                        "min_usable_length": min(pc.usable_lengths) if pc.usable_lengths else math.inf,
                        "clamped_edges": len(report.clamped_edges)})
    write_csv(out / "padding.csv", "padding", pad_rows)
    write_csv(out / "channels.csv", "channels", ch_rows)
    if cfg["svg"]:
        fig = Figure(env.bounds, title=f"{env.name} padding")
        draw_environment(fig, env, merge_edge_offsets(pc.report for pc in padded), mesh)
        for pc in padded:
            draw_channel(fig, pc.channel, mesh, stroke=CHANNEL_OK if pc.feasible else CHANNEL_BLOCKED)
            for a, b in pc.trimmed_edges:
                fig.polyline([a, b], "#1f618d", width=2.0)
        draw_endpoints(fig, start, goal)
        write_svg(out / "padding.svg", fig, cfg["svg_timestamp"])
    n_blocked = sum(not pc.feasible for pc in padded)
    print(f"{len(channels)} channels, {n_blocked} blocked by padding, {len(pad_rows)} edge offsets")
    return EXIT_OK


def _path_for_contingency(cfg, env, start, goal):
    if cfg["result"]:
        p = Path(cfg["result"])
        if not p.exists():
            raise FileNotFoundError(f"result file not found: {p}")
        try:
            doc = json.loads(p.read_text())
            pts = np.asarray(doc["waypoints"], dtype=float)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise BadInput(f"{p}: not a result file ({exc})") from None
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise BadInput(f"{p}: waypoints must be a list of at least two (x, y) points")
        return pts, doc.get("planner", "renew")
    planner = str(cfg["planner"])
    if planner == "renew":
        res = renew_estimator(cfg, parse_k_list(cfg["k"])[0]).fit(env).plan(start, goal)
        return res.chosen_path.waypoints, planner
    if planner in ("grid-astar-o", "grid-astar-s"):
        base = GridAStarPlanner(resolution=float(cfg["resolution"]), motion=str(cfg["motion"]),
                                padding=str(cfg["baseline_padding"]),
                                smooth_iterations=int(cfg["smooth_iterations"]), seed=int(cfg["seed"]))
        gp = base.fit(env).plan(start, goal)
        if gp is None:
            raise InfeasiblePlan("no feasible plan: grid A* found no path")
        return (gp.original.points if planner == "grid-astar-o" else gp.smoothed), planner
    raise BadInput(f"unknown planner {planner!r}; choose from {PLANNER_NAMES}")


def cmd_contingency(cfg):
    env, start, goal = resolve_environment(cfg)
    out = out_dir(cfg)
    spacing = float(cfg["spacing"])
    if not spacing > 0:
        raise BadInput("--spacing must be positive")
    path, planner = _path_for_contingency(cfg, env, start, goal)
    rep = simulate_contingency(path, env, spacing=spacing, seed=int(cfg["seed"]), noise=bool(cfg["noise"]))
    rows = []
    best = []
    for k, s, turn, clear, collided in rep.rows:
        rows.append({"kind": "trial", "station": k, "s": s, "turn": turn, "clearance": clear,
                     "collided": collided})
    for k in range(rep.trials):
        best.append(max(rep.rows[2 * k][3], rep.rows[2 * k + 1][3]))
    rows.append({"kind": "summary", "turn": "best", "clearance": min(best) if best else math.inf,
                 "trials": rep.trials, "collisions": rep.collisions})
    write_csv(out / "contingency.csv", "contingency", rows)
    if cfg["svg"]:
        fig = Figure(env.bounds, title=f"{env.name} contingency ({planner})")
        draw_environment(fig, env)
        fig.polyline(path, "#c0392b", width=2.0)
        for site in rep.collision_sites:
            p, _ = polyline_point_at(path, site.s)
            fig.circle(p, 4, "#e74c3c", stroke="#111")
        draw_endpoints(fig, path[0], path[-1])
        write_svg(out / "contingency.svg", fig, cfg["svg_timestamp"])
    print(f"{planner}: {rep.collisions} collisions in {rep.trials} trials (spacing {spacing:g} m)")
    return EXIT_OK


def cmd_mesh_dump(cfg):
    env, start, goal = resolve_environment(cfg)
    out = out_dir(cfg)
    mesh = build_navmesh(env)
    write_csv(out / "mesh_vertices.csv", "mesh_vertices",
              [{"vertex": i, "x": float(x), "y": float(y)} for i, (x, y) in enumerate(mesh.vertices)])
    write_csv(out / "mesh_triangles.csv", "mesh_triangles",
              [{"triangle": t, "v0": int(a), "v1": int(b), "v2": int(c),
                "label": "free" if mesh.triangle_labels[t] else "hole"}
               for t, (a, b, c) in enumerate(mesh.triangles)])
    write_csv(out / "mesh_edges.csv", "mesh_edges",
              [{"edge_id": eid, "v0": int(e[0]), "v1": int(e[1]),
                "kind": "bounds" if is_bounds_edge(mesh, env, e) else "obstacle"}
               for e, eid in sorted(mesh.constrained_edge_ids.items(), key=lambda kv: kv[1])])
    if cfg["svg"]:
        fig = Figure(env.bounds, title=f"{env.name} mesh")
        draw_mesh(fig, mesh)
        draw_endpoints(fig, start, goal)
        write_svg(out / "mesh.svg", fig, cfg["svg_timestamp"])
    print(f"{len(mesh.vertices)} vertices, {len(mesh.triangles)} triangles "
          f"({len(mesh.free_ids)} free), {len(mesh.constrained_edges)} constrained edges")
    return EXIT_OK


def _parse_params(items):
    params = {}
    for item in items or ():
        if "=" not in item:
            raise BadInput(f"--param expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        try:
            params[key.replace("-", "_")] = json.loads(val)
        except json.JSONDecodeError:
            params[key.replace("-", "_")] = val
    return params


def cmd_scenario(args):
    if args.action == "list":
        for n in scenario_names():
            print(n)
        return EXIT_OK
    if not args.name:
        raise BadInput("scenario export needs a scenario name")
    try:
        env = generate(args.name, **_parse_params(args.param))
    except TypeError as exc:
        raise BadInput(f"bad scenario parameter: {exc}") from None
    target = Path(args.out) if args.out else Path(f"{args.name}.json")
    if target.suffix.lower() != ".json":
        target.mkdir(parents=True, exist_ok=True)
        target = target / f"{args.name}.json"
    else:
        target.parent.mkdir(parents=True, exist_ok=True)
    save_environment(env, target)
    print(f"wrote {target}")
    return EXIT_OK


def cmd_validate(args):
    for f in args.files:
        name, rows = validate_csv(f, args.schema)
        print(f"{f}: ok ({name}, {len(rows)} rows)")
    return EXIT_OK


# --- argument parsing ----------------------------------------------------

def _add_common(p, extra=()):
    S = argparse.SUPPRESS
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--env", default=S, help="environment file or built-in scenario name")
    p.add_argument("--start", default=S, help="start as 'x,y' (overrides the environment)")
    p.add_argument("--goal", default=S, help="goal as 'x,y' (overrides the environment)")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--out", default=S, help="output directory")
    p.add_argument("--no-svg", dest="svg", action="store_false", default=S)
    p.add_argument("--svg-timestamp", dest="svg_timestamp", action="store_true", default=S,
                   help="embed a generation timestamp comment in SVG output")
    if "plan" in extra:
        p.add_argument("--k", default=S, help="homotopy budget; comma list for several runs")
        p.add_argument("--samples", type=int, default=S, help="candidate paths per channel")
        p.add_argument("--sigma", type=float, default=S, help="probabilistic collision bound")
        p.add_argument("--alpha", type=float, default=S, help="fuel efficiency constant")
        p.add_argument("--drag-exp", dest="drag_exp", type=float, default=S, help="drag exponent")
        p.add_argument("--region-radius", dest="region_radius", type=float, default=S)
        p.add_argument("--padding", default=S, help="adaptive, none, or fixed:<d>")
        p.add_argument("--padding-samples", dest="padding_samples", type=int, default=S)
        p.add_argument("--no-pad-bounds", dest="pad_bounds", action="store_false", default=S,
                       help="pad obstacle edges only")
    if "baseline" in extra:
        p.add_argument("--resolution", type=float, default=S, help="grid cell size (m)")
        p.add_argument("--motion", choices=("8", "dubins"), default=S)
        p.add_argument("--baseline-padding", dest="baseline_padding", default=S,
                       help="none, fixed:<d>, adaptive, or same (use --padding)")
        p.add_argument("--smooth-iterations", dest="smooth_iterations", type=int, default=S)
    if "contingency" in extra:
        p.add_argument("--spacing", type=float, default=S, help="station spacing along the path (m)")
        p.add_argument("--result", default=S, help="result file whose waypoints are tested")
        p.add_argument("--planner", choices=PLANNER_NAMES, default=S, help="planner for a fresh path")
        p.add_argument("--no-noise", dest="noise", action="store_false", default=S)


def build_parser():
    ap = argparse.ArgumentParser(prog="renew", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("plan", help="plan a path"), ("plan",))
    _add_common(sub.add_parser("compare", help="RENEW vs grid A* (original and smoothed)"), ("plan", "baseline"))
    _add_common(sub.add_parser("padding-report", help="per-channel adaptive padding offsets"), ("plan",))
    _add_common(sub.add_parser("contingency", help="abort-maneuver trials along a path"),
                ("plan", "baseline", "contingency"))
    _add_common(sub.add_parser("mesh-dump", help="triangulation as CSV and SVG"))
    sp = sub.add_parser("scenario", help="list or export built-in scenarios")
    sp.add_argument("action", choices=("export", "list"))
    sp.add_argument("name", nargs="?")
    sp.add_argument("--out", help="output file (.json) or directory")
    sp.add_argument("--param", action="append", help="generator parameter key=value (repeatable)")
    vp = sub.add_parser("validate", help="check CSV files against the shipped schemas")
    vp.add_argument("files", nargs="+")
    vp.add_argument("--schema", choices=sorted(SCHEMAS))
    return ap


COMMANDS = {
    "plan": cmd_plan,
    "compare": cmd_compare,
    "padding-report": cmd_padding_report,
    "contingency": cmd_contingency,
    "mesh-dump": cmd_mesh_dump,
}


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.command == "scenario":
            return cmd_scenario(args)
        if args.command == "validate":
            return cmd_validate(args)
        return COMMANDS[args.command](resolve_config(args))
    except InfeasiblePlan as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (BadInput, InvalidEnvironment, InvalidQuery, AssumptionViolated, SchemaError, FileNotFoundError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
