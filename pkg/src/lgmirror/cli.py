"""Command-line front end turning presets and model files into reports.

Each subcommand drives one pipeline end to end and drops a JSON report,
CSV matrices where the result is a matrix, and optional SVG plots into
the output directory.  Reports are deterministic: identical inputs and
seed produce byte-identical files, so runs can be diffed.  The process
exits with 0 after a clean run, with 2 when the report carries
diagnostics worth reading (count discrepancies, ambiguous clustering,
exhausted search budgets), and with 1 when the run failed outright.

The output directory is taken from ``--out`` when given, then from the
``LGMIRROR_OUT`` environment variable, and otherwise defaults to
``lgmirror-reports`` under the working directory.
"""

from __future__ import annotations

import argparse
import cmath
import json
import os
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .critical import (
    AmbiguousClustering,
    CriticalError,
    SearchConfig,
    critical_values,
    stationary_points,
)
from .cycles import (
    ArcSpec,
    CycleError,
    FiberSpec,
    StepConfig,
    arc_kind_for,
    vanishing_cycle_set,
)
from .dsing import (
    DsingError,
    SheafOnNC,
    dsing_hom_rank,
    exceptional_twist,
    floer_match_table,
    standard_config,
    structure_sheaf,
)
from .laurent import ParseError
from .mirror import (
    MirrorError,
    builtin_model,
    eliminate_with_steps,
    preset_names,
    read_model_file,
    write_model_file,
)
from .su2 import (
    GENERATORS,
    BudgetExhaustedAmbiguous,
    HolonomyError,
    HolonomyProblem,
    SU2Element,
    solve_relation,
    surface_loop_intersections,
)

OUT_ENV_VAR = "LGMIRROR_OUT"
DEFAULT_OUT = "lgmirror-reports"

_TOL_DEFAULTS = {
    "values": 1e-8,  # relative width of critical-value clusters
    "residual": 1e-8,  # acceptance residual for stationary points
    "match": 1e-8,  # agreement tolerance for claim comparisons
}

_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
)


class CLIError(Exception):
    """Raised for malformed flags or inconsistent flag combinations."""


# ---------------------------------------------------------------------------
# deterministic report plumbing


def _jsonable(value):
    """Rewrite a result tree into JSON-safe types, complex as [re, im]."""
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (np.complexfloating,)):
        z = complex(value)
        return [z.real, z.imag]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    return value


@dataclass
class RunReport:
    """One command's canonical record: inputs, results, and warnings."""

    command: str
    inputs: dict
    results: dict
    diagnostics: list = field(default_factory=list)
    seed: int = 0
    versions: str = __version__
    stem: str = ""  # file name stem; not part of the payload

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "inputs": _jsonable(self.inputs),
            "results": _jsonable(self.results),
            "diagnostics": [str(d) for d in self.diagnostics],
            "seed": int(self.seed),
            "versions": self.versions,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _write_text(out_dir: str, name: str, text: str) -> str:
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    print(f"wrote {path}")
    return name


def _int_csv(matrix) -> str:
    return "\n".join(",".join(str(int(v)) for v in row) for row in matrix) + "\n"


# ---------------------------------------------------------------------------
# flag parsing helpers


def _parse_assignments(chunks, flag: str) -> dict:
    out = {}
    for chunk in chunks:
        for item in chunk.split(","):
            item = item.strip()
            if not item:
                continue
            name, sep, text = item.partition("=")
            if not sep or not name.strip():
                raise CLIError(f"{flag} expects name=value entries, got {item!r}")
            out[name.strip()] = text.strip()
    return out


def _parse_params(chunks) -> dict:
    params = {}
    for name, text in _parse_assignments(chunks, "--param").items():
        try:
            params[name] = complex(text)
        except ValueError as exc:
            raise CLIError(f"cannot read parameter {name}={text!r}") from exc
    return params


def _parse_tols(chunks) -> dict:
    tols = dict(_TOL_DEFAULTS)
    for name, text in _parse_assignments(chunks, "--tol").items():
        try:
            tols[name] = float(text)
        except ValueError as exc:
            raise CLIError(f"cannot read tolerance {name}={text!r}") from exc
    return tols


def _resolve_out(args) -> str:
    out = args.out or os.environ.get(OUT_ENV_VAR) or DEFAULT_OUT
    os.makedirs(out, exist_ok=True)
    return out


def _load_model(args):
    if bool(args.preset) == bool(args.model):
        raise CLIError("give exactly one of --preset or --model")
    if args.preset:
        return builtin_model(args.preset, _parse_params(args.param))
    if args.param:
        raise CLIError("--param seasons presets; model files carry "
                       "their parameters inside")
    return read_model_file(args.model)


def _model_inputs(args, model) -> dict:
    return {
        "source": args.preset or os.path.basename(args.model),
        "name": model.name,
        "parameters": {k: complex(v) for k, v in sorted(model.parameters.items())},
        "tolerances": _parse_tols(args.tol),
    }


# ---------------------------------------------------------------------------
# SVG emission


def _svg_frame(points, width=640, height=480, margin=48.0):
    xs = [z.real for z in points] or [0.0]
    ys = [z.imag for z in points] or [0.0]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = min(ys), max(ys)
    pad_x = 0.08 * (xmax - xmin) or 1.0
    pad_y = 0.08 * (ymax - ymin) or 1.0
    xmin -= pad_x
    xmax += pad_x
    ymin -= pad_y
    ymax += pad_y
    sx = (width - 2.0 * margin) / (xmax - xmin)
    sy = (height - 2.0 * margin) / (ymax - ymin)

    def to_px(z: complex):
        return (margin + (z.real - xmin) * sx,
                height - margin - (z.imag - ymin) * sy)

    return to_px, (xmin, xmax, ymin, ymax), (width, height)


def _svg_open(size) -> list:
    width, height = size
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'  <rect width="{width}" height="{height}" fill="white"/>',
    ]


def _svg_axes(lines, to_px, bounds) -> None:
    xmin, xmax, ymin, ymax = bounds
    if xmin < 0.0 < xmax:
        x0, _ = to_px(complex(0.0, ymin))
        _, top = to_px(complex(0.0, ymax))
        _, bottom = to_px(complex(0.0, ymin))
        lines.append(f'  <line x1="{x0:.2f}" y1="{top:.2f}" x2="{x0:.2f}" '
                     f'y2="{bottom:.2f}" stroke="#cccccc"/>')
    if ymin < 0.0 < ymax:
        left, y0 = to_px(complex(xmin, 0.0))
        right, _ = to_px(complex(xmax, 0.0))
        lines.append(f'  <line x1="{left:.2f}" y1="{y0:.2f}" x2="{right:.2f}" '
                     f'y2="{y0:.2f}" stroke="#cccccc"/>')


def _svg_value_scatter(values, labels) -> str:
    """Scatter plot of complex numbers with a small label at each point."""
    to_px, bounds, size = _svg_frame(values)
    lines = _svg_open(size)
    _svg_axes(lines, to_px, bounds)
    for value, label in zip(values, labels):
        x, y = to_px(value)
        lines.append(f'  <circle cx="{x:.2f}" cy="{y:.2f}" r="4" '
                     f'fill="{_PALETTE[0]}"/>')
        lines.append(f'  <text x="{x + 6.0:.2f}" y="{y - 6.0:.2f}" '
                     f'font-family="sans-serif" font-size="12">{label}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _svg_branch_tracks(system) -> str:
    """Branch-point trajectories, punctures and connecting arcs in one plot."""
    everything = list(system.branch_points) + list(system.punctures)
    for _, braid in system.braids:
        for _, _, positions in braid.samples[:: max(1, len(braid.samples) // 400)]:
            everything.extend(positions)
    for cycle in system.cycles:
        everything.extend(cycle.connecting_arc)
    to_px, bounds, size = _svg_frame(everything)
    lines = _svg_open(size)
    _svg_axes(lines, to_px, bounds)
    for _, braid in system.braids:
        samples = braid.samples[:: max(1, len(braid.samples) // 400)]
        count = len(braid.samples[0][2])
        for idx in range(count):
            pts = " ".join("{:.2f},{:.2f}".format(*to_px(row[2][idx]))
                           for row in samples)
            lines.append(f'  <polyline points="{pts}" fill="none" '
                         f'stroke="#bbbbbb" stroke-width="0.8"/>')
    for k, cycle in enumerate(system.cycles):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join("{:.2f},{:.2f}".format(*to_px(z))
                       for z in cycle.connecting_arc)
        lines.append(f'  <polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1.6"/>')
        mid = cycle.connecting_arc[len(cycle.connecting_arc) // 2]
        mx, my = to_px(mid)
        lines.append(f'  <text x="{mx + 4.0:.2f}" y="{my - 4.0:.2f}" '
                     f'font-family="sans-serif" font-size="11" '
                     f'fill="{color}">{cycle.label}</text>')
    for z in system.branch_points:
        x, y = to_px(z)
        lines.append(f'  <circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="black"/>')
    for z in system.punctures:
        x, y = to_px(z)
        lines.append(f'  <path d="M {x - 4:.2f} {y - 4:.2f} L {x + 4:.2f} '
                     f'{y + 4:.2f} M {x - 4:.2f} {y + 4:.2f} L {x + 4:.2f} '
                     f'{y - 4:.2f}" stroke="#d62728" stroke-width="1.5"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# shared pipeline stages


def _reduce(model):
    steps = eliminate_with_steps(model)
    if steps.leftover:
        raise MirrorError("the default picks leave relations unsolved; "
                          "this model cannot be reduced automatically")
    return steps


def _point_payload(point) -> dict:
    return {
        "location": list(point.location),
        "value": point.value,
        "hessian_det": point.hessian_det,
        "nondegenerate": point.nondegenerate,
        "residual": point.residual,
    }


def _run_critical(model, seed: int, tols: dict):
    steps = _reduce(model)
    config = SearchConfig(seed=seed, residual_tol=tols["residual"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AmbiguousClustering)
        result = stationary_points(steps.potential, config)
        clusters = critical_values(result.points, rel_tol=tols["values"])
    notes = [str(w.message) for w in caught
             if issubclass(w.category, AmbiguousClustering)]
    notes.extend(result.flags)
    return steps, result, clusters, notes


def _claims_payload(model, points, clusters, tols: dict):
    """Compare observed counts with the claimed ones for curve presets.

    The claimed value count includes the value 0, which belongs to the
    compactified fibration and never shows up on the affine torus, so
    the like-for-like comparison drops it from the claimed side.
    """
    if model.name not in ("genus2", "hyperelliptic"):
        return None, []
    k = int(model.parameters.get("k", 3).real)
    a1 = complex(model.parameters["a1"])
    a2 = complex(model.parameters["a2"])
    claimed_points = k - 1
    claimed_values = k
    claimed_affine_values = k - 1
    observed_points = len(points)
    observed_values = len(clusters)
    diagnostics = []
    if observed_points != claimed_points:
        diagnostics.append(
            f"{model.name}: observed {observed_points} isolated stationary "
            f"points, claimed {claimed_points} (difference "
            f"{observed_points - claimed_points:+d})")
    if observed_values != claimed_affine_values:
        diagnostics.append(
            f"{model.name}: observed {observed_values} distinct critical "
            f"values on the torus, claimed {claimed_affine_values} away "
            f"from zero (difference "
            f"{observed_values - claimed_affine_values:+d})")
    if any(abs(c.value) <= tols["match"] for c in clusters):
        diagnostics.append(
            f"{model.name}: a critical value at zero appeared on the "
            "torus; the claimed zero belongs to the compactification")
    relation_residual = 0.0
    for point in points:
        x1, x3, x4 = point.location
        relation_residual = max(
            relation_residual,
            abs(x1 * x1 - a1 * x3**k),
            abs(x4 * x4 - a2 * x3 * x3),
        )
    if relation_residual > tols["match"]:
        diagnostics.append(
            f"{model.name}: first-order relation residual "
            f"{relation_residual:.3e} exceeds {tols['match']:.1e}")
    roots = sorted(np.roots([1.0, 1.0, a2]),
                   key=lambda z: (abs(z), z.real, z.imag))
    payload = {
        "claimed": {"isolated_points": claimed_points,
                    "critical_values": claimed_values,
                    "critical_values_on_torus": claimed_affine_values},
        "observed": {"isolated_points": observed_points,
                     "critical_values": observed_values},
        "agreement": not diagnostics,
        "first_order_relation_residual": relation_residual,
        "cross_ratio_modulus": complex(roots[0] / roots[1]),
    }
    if k == 3:
        payload["value_labeling"] = _genus2_labeling(a1, a2, clusters,
                                                     tols["match"])
        if payload["value_labeling"]["chosen"] is None:
            diagnostics.append(f"{model.name}: no consistent labeling of the "
                               "deformation parameters matches the values")
    return payload, diagnostics


def _genus2_labeling(a1, a2, clusters, tol: float) -> dict:
    """Try both parameter orderings against the closed-form values."""
    observed = sorted((c.value for c in clusters),
                      key=lambda z: (z.real, z.imag))
    consistent = []
    for tag, (r, s) in (("r=a1,s=a2", (a1, a2)), ("r=a2,s=a1", (a2, a1))):
        root = cmath.sqrt(s)
        predicted = sorted(
            ((1.0 + 2.0 * root) ** 3 / (27.0 * r),
             (1.0 - 2.0 * root) ** 3 / (27.0 * r)),
            key=lambda z: (z.real, z.imag))
        if len(predicted) == len(observed) and all(
                abs(p - o) <= tol * max(1.0, abs(p))
                for p, o in zip(predicted, observed)):
            consistent.append(tag)
    return {
        "consistent": consistent,
        "chosen": consistent[0] if consistent else None,
    }


def _value_centers(values) -> list:
    """Cluster representatives in the order the tracking pipeline uses."""
    centers = []
    for v in sorted(values, key=lambda z: (abs(z), z.real, z.imag)):
        if not any(abs(v - c) < 1e-7 * (1.0 + abs(c)) for c in centers):
            centers.append(v)
    return centers


_PINNED_ARC_KINDS = {
    "delpezzo4_deformed": ("straight", "straight",
                           "arc_below_real", "arc_below_real"),
}


def _run_cycles(model, args, tols: dict):
    steps = _reduce(model)
    if len(steps.free_variables) != 2:
        raise CycleError(
            f"branch tracking needs a two-variable potential; "
            f"{model.name} reduces to {len(steps.free_variables)} variables")
    base_var, cover_var = steps.free_variables
    spec = FiberSpec(steps.potential, cover_variable=cover_var,
                     base_variable=base_var)
    config = SearchConfig(seed=args.seed, residual_tol=tols["residual"])
    found = stationary_points(steps.potential, config)
    if not found.points:
        raise CycleError("no stationary points were found to track")
    centers = _value_centers([p.value for p in found.points])
    top = max(abs(c) for c in centers)
    nonzero = [abs(c) for c in centers if abs(c) > 1e-9 * (1.0 + top)]
    if not nonzero:
        raise CycleError("all critical values coincide with zero; "
                         "there is no room for a reference fiber")
    base_point = 0.5 * min(nonzero)
    step = StepConfig(
        initial_step=tols.get("initial_step", StepConfig.initial_step),
        max_step=tols.get("max_step", StepConfig.max_step),
    )
    depth = tols.get("depth", 0.35)
    diagnostics = []
    if args.arcs == "paper":
        if model.name not in _PINNED_ARC_KINDS:
            raise CycleError("a pinned arc choice is only recorded for: "
                             + ", ".join(sorted(_PINNED_ARC_KINDS)))
        kinds = _PINNED_ARC_KINDS[model.name]
        if len(kinds) != len(centers):
            raise CycleError(f"{len(centers)} critical values but "
                             f"{len(kinds)} pinned arcs")
        arcs = [ArcSpec(kind, base_point, center, depth)
                for kind, center in zip(kinds, centers)]
        for kind, center in zip(kinds, centers):
            auto = arc_kind_for(center, base_point,
                                [w for w in centers if w is not center])
            if auto != kind:
                diagnostics.append(
                    f"automatic arc choice {auto!r} for value {center:.6g} "
                    f"differs from the pinned {kind!r}")
        system = vanishing_cycle_set(spec, found.points, base_point,
                                     arcs=arcs, step=step, depth=depth)
    else:
        system = vanishing_cycle_set(spec, found.points, base_point,
                                     arcs="auto", step=step, depth=depth)
    return steps, found, system, diagnostics


def _cycles_payload(system) -> dict:
    return {
        "base_point": complex(system.base_point),
        "branch_points": list(system.branch_points),
        "punctures": list(system.punctures),
        "cycles": [
            {
                "label": c.label,
                "matched_pair": list(c.matched_pair),
                "critical_value": complex(c.source_critical_value),
                "critical_point": (None if c.critical_point is None
                                   else list(c.critical_point)),
                "arc_vertices": len(c.connecting_arc),
            }
            for c in system.cycles
        ],
        "arcs": [
            {"kind": braid.arc.kind, "start": complex(braid.arc.start),
             "end": complex(braid.arc.end), "samples": len(braid.samples),
             "collisions": len(braid.collisions)}
            for _, braid in system.braids
        ],
    }


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_build_mirror(args, out_dir: str) -> RunReport:
    model = _load_model(args)
    steps = _reduce(model)
    name = f"model-{model.name}.toml"
    write_model_file(model, os.path.join(out_dir, name))
    print(f"wrote {os.path.join(out_dir, name)}")
    results = {
        "variables": list(model.variables),
        "relations": [r.format() for r in model.relations],
        "free_variables": list(steps.free_variables),
        "substitutions": [[var, str(sol)] for var, sol in steps.substitutions],
        "potential": str(steps.potential),
        "artifacts": [name],
    }
    return RunReport("build-mirror", _model_inputs(args, model), results,
                     [], args.seed, stem=f"build-mirror-{model.name}")


def _cmd_critical(args, out_dir: str) -> RunReport:
    model = _load_model(args)
    tols = _parse_tols(args.tol)
    steps, result, clusters, notes = _run_critical(model, args.seed, tols)
    claims, claim_notes = _claims_payload(model, result.points, clusters, tols)
    diagnostics = notes + claim_notes
    stem = f"critical-{model.name}"
    header = ",".join(
        [f"re_{v},im_{v}" for v in steps.free_variables]
        + ["re_value,im_value,residual,nondegenerate"])
    rows = [header]
    for p in result.points:
        cells = []
        for z in p.location:
            cells += [repr(complex(z).real), repr(complex(z).imag)]
        cells += [repr(p.value.real), repr(p.value.imag),
                  repr(p.residual), str(int(p.nondegenerate))]
        rows.append(",".join(cells))
    artifacts = [_write_text(out_dir, f"{stem}.csv", "\n".join(rows) + "\n")]
    if args.svg:
        labels = [f"v{k + 1}" for k in range(len(clusters))]
        svg = _svg_value_scatter([c.value for c in clusters], labels)
        artifacts.append(_write_text(out_dir, f"{stem}.svg", svg))
    results = {
        "free_variables": list(steps.free_variables),
        "potential": str(steps.potential),
        "points": [_point_payload(p) for p in result.points],
        "clusters": [
            {"value": c.value, "members": list(c.members),
             "multiplicity": c.multiplicity}
            for c in clusters
        ],
        "discarded_count": len(result.discarded),
        "torus_root_count": result.torus_root_count,
        "bernstein_bound": result.bernstein_bound,
        "artifacts": artifacts,
    }
    if claims is not None:
        results["claim_comparison"] = claims
    return RunReport("critical", _model_inputs(args, model), results,
                     diagnostics, args.seed, stem=stem)


def _cmd_cycles(args, out_dir: str) -> RunReport:
    model = _load_model(args)
    tols = _parse_tols(args.tol)
    steps, found, system, diagnostics = _run_cycles(model, args, tols)
    results = _cycles_payload(system)
    results["free_variables"] = list(steps.free_variables)
    results["stationary_points"] = len(found.points)
    artifacts = []
    if args.svg:
        artifacts.append(_write_text(out_dir, f"cycles-{model.name}.svg",
                                     _svg_branch_tracks(system)))
    results["artifacts"] = artifacts
    inputs = _model_inputs(args, model)
    inputs["arcs"] = args.arcs
    return RunReport("cycles", inputs, results, diagnostics, args.seed,
                     stem=f"cycles-{model.name}")


def _cmd_quiver(args, out_dir: str) -> RunReport:
    model = _load_model(args)
    tols = _parse_tols(args.tol)
    steps, found, system, diagnostics = _run_cycles(model, args, tols)
    matrix = system.quiver()
    stem = f"quiver-{model.name}"
    artifacts = [_write_text(out_dir, f"{stem}.csv", _int_csv(matrix.entries))]
    if args.svg:
        artifacts.append(_write_text(out_dir, f"cycles-{model.name}.svg",
                                     _svg_branch_tracks(system)))
    results = {
        "labels": list(matrix.labels),
        "matrix": [list(map(int, row)) for row in matrix.entries],
        "cycles": _cycles_payload(system)["cycles"],
        "base_point": complex(system.base_point),
        "artifacts": artifacts,
    }
    inputs = _model_inputs(args, model)
    inputs["arcs"] = args.arcs
    return RunReport("quiver", inputs, results, diagnostics, args.seed,
                     stem=stem)


def _parse_fix(text: str) -> dict:
    fixed = {}
    for name in filter(None, (part.strip() for part in text.split(","))):
        if name not in GENERATORS:
            raise CLIError(f"unknown generator {name!r}; choose from "
                           + ", ".join(GENERATORS))
        fixed[name] = SU2Element.identity()
    return fixed


def _cmd_floer_su2(args, out_dir: str) -> RunReport:
    fixed = _parse_fix(args.fix)
    target_text = args.target.strip()
    if target_text in ("I", "+I"):
        target = SU2Element.identity()
    elif target_text == "-I":
        target = SU2Element.minus_identity()
    else:
        raise CLIError("--target must be I or -I")
    problem = HolonomyProblem(fixed=fixed, target=target)
    config = SearchConfig(seed=args.seed, starts=args.starts)
    diagnostics = []
    try:
        found = solve_relation(problem, config)
        status = found.status
        count = found.count
        representatives = [
            {name: list(element.as_array())
             for name, element in zip(GENERATORS, rep)}
            for rep in found.representatives
        ]
        signatures = [list(map(float, sig)) for sig in found.invariant_signatures]
        budget = found.budget
    except BudgetExhaustedAmbiguous as exc:
        status, count, representatives, signatures = "ambiguous", None, [], []
        budget = args.starts
        diagnostics.append(f"clustering ambiguity: {exc}")
    results = {
        "fixed": sorted(fixed),
        "free": [g for g in GENERATORS if g not in fixed],
        "target": target_text.lstrip("+"),
        "status": status,
        "count": count,
        "budget": budget,
        "representatives": representatives,
        "invariant_signatures": signatures,
    }
    if len(results["free"]) == 2 and target_text == "-I":
        expected = surface_loop_intersections(*results["free"])
        results["expected_intersections"] = expected
        observed = count if count is not None else -1
        results["intersection_match"] = observed == expected
        if not results["intersection_match"]:
            diagnostics.append(
                f"solution count {count} differs from the {expected} "
                f"intersection(s) of loops {results['free'][0]} and "
                f"{results['free'][1]}")
    stem = "floer-su2-" + ("".join(sorted(fixed)) or "free")
    inputs = {"fix": sorted(fixed), "target": results["target"],
              "starts": args.starts}
    return RunReport("floer-su2", inputs, results, diagnostics, args.seed,
                     stem=stem)


def _quadruple_sheaf(config, text: str):
    """Resolve a sheaf argument: a quadruple label or degree data.

    Degree data reads like ``S1:q1=0,q3=2`` with one entry per adjacent
    curve of the named component.
    """
    if ":" not in text:
        by_label = {
            "O_S1(E12)": exceptional_twist(config, 1, 2),
            "O_S1(E13)": exceptional_twist(config, 1, 3),
            "O_S2": structure_sheaf(config, 2),
            "O_S3": structure_sheaf(config, 3),
        }
        if text not in by_label:
            raise CLIError(f"unknown sheaf {text!r}; known labels: "
                           + ", ".join(sorted(by_label)) + ", or degree "
                           "data like S1:q1=0,q3=2")
        return by_label[text]
    comp_name, _, degree_text = text.partition(":")
    index = {"S1": 1, "S2": 2, "S3": 3}.get(comp_name.strip())
    if index is None:
        raise CLIError(f"unknown component {comp_name!r}")
    degrees = {}
    for name, value in _parse_assignments([degree_text], "sheaf data").items():
        try:
            degrees[name] = int(value)
        except ValueError as exc:
            raise CLIError(f"degree {name}={value!r} is not an integer") from exc
    return SheafOnNC(config, index, degrees)


def _cmd_dsing_ext(args, out_dir: str) -> RunReport:
    config = standard_config()
    extra_pairs = []
    for left_text, right_text in args.pair or ():
        left = _quadruple_sheaf(config, left_text.strip())
        right = _quadruple_sheaf(config, right_text.strip())
        extra_pairs.append({
            "left": left_text.strip(),
            "right": right_text.strip(),
            "ranks": [dsing_hom_rank(left, right, 0),
                      dsing_hom_rank(left, right, 1)],
        })
    table = floer_match_table(config)
    diagnostics = list(table.mismatches)
    shift0 = [[pair[0] for pair in row] for row in table.ranks]
    shift1 = [[pair[1] for pair in row] for row in table.ranks]
    artifacts = [
        _write_text(out_dir, "dsing-shift0.csv", _int_csv(shift0)),
        _write_text(out_dir, "dsing-shift1.csv", _int_csv(shift1)),
        _write_text(out_dir, "dsing-loop-counts.csv",
                    _int_csv(table.loop_counts)),
    ]
    results = {
        "labels": list(table.labels),
        "loops": list(table.loops),
        "ranks": [[list(pair) for pair in row] for row in table.ranks],
        "loop_counts": [list(row) for row in table.loop_counts],
        "verdict": table.verdict,
        "artifacts": artifacts,
    }
    if args.pair:
        results["pairs"] = extra_pairs
    inputs = {"pairs": [list(p) for p in (args.pair or [])]}
    return RunReport("dsing-ext", inputs, results, diagnostics, args.seed,
                     stem="dsing-ext")


def _cmd_report_all(args, out_dir: str) -> RunReport:
    runs = []
    diagnostics = []

    def record(report: RunReport) -> dict:
        _write_text(out_dir, f"{report.stem}.json", report.to_json())
        diagnostics.extend(report.diagnostics)
        summary = {"command": report.command,
                   "report": f"{report.stem}.json",
                   "diagnostics": len(report.diagnostics)}
        runs.append(summary)
        return summary

    presets = (
        ("delpezzo4_deformed", ["e=0.1"]),
        ("genus2", ["a1=0.01,a2=0.02"]),
        ("quadrics_x4", ["A=1"]),
    )
    for preset, params in presets:
        sub = argparse.Namespace(preset=preset, model=None, param=params,
                                 seed=args.seed, out=args.out, tol=args.tol,
                                 svg=args.svg)
        report = _cmd_critical(sub, out_dir)
        summary = record(report)
        summary["points"] = len(report.results["points"])
        summary["values"] = len(report.results["clusters"])

    quiver_args = argparse.Namespace(preset="delpezzo4_deformed", model=None,
                                     param=["e=0.1"], seed=args.seed,
                                     out=args.out, tol=args.tol, svg=args.svg,
                                     arcs="auto")
    report = _cmd_quiver(quiver_args, out_dir)
    summary = record(report)
    summary["labels"] = report.results["labels"]

    for fix in ("a1,b1", "a1,a2"):
        sub = argparse.Namespace(fix=fix, target="-I", starts=args.starts,
                                 seed=args.seed, out=args.out, tol=args.tol,
                                 svg=args.svg)
        report = _cmd_floer_su2(sub, out_dir)
        summary = record(report)
        summary["status"] = report.results["status"]
        summary["count"] = report.results["count"]

    dsing_args = argparse.Namespace(pair=[], seed=args.seed, out=args.out,
                                    tol=args.tol, svg=args.svg)
    report = _cmd_dsing_ext(dsing_args, out_dir)
    summary = record(report)
    summary["verdict"] = report.results["verdict"]
    results = {"runs": runs}
    inputs = {"presets": [name for name, _ in presets],
              "starts": args.starts,
              "tolerances": _parse_tols(args.tol)}
    return RunReport("report-all", inputs, results, diagnostics, args.seed,
                     stem="report-all")


# ---------------------------------------------------------------------------
# argument parser and entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lgmirror",
        description="Mirror superpotentials: critical loci, vanishing-cycle "
                    "quivers, holonomy counts, and sheaf Hom-rank tables.")
    parser.add_argument("--version", action="version",
                        version=f"lgmirror {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="seed threaded through every stochastic search")
    common.add_argument("--out", default=None,
                        help=f"output directory (default: ${OUT_ENV_VAR} "
                             f"or ./{DEFAULT_OUT})")
    common.add_argument("--tol", action="append", default=[],
                        metavar="NAME=VALUE",
                        help="override a named tolerance or tracking knob; "
                             "repeatable, comma-separable")
    common.add_argument("--svg", action="store_true",
                        help="also emit SVG plots")
    modelful = argparse.ArgumentParser(add_help=False)
    modelful.add_argument("--preset",
                          help="built-in model name, one of: "
                               + ", ".join(preset_names()))
    modelful.add_argument("--model", metavar="FILE",
                          help="TOML model file")
    modelful.add_argument("--param", action="append", default=[],
                          metavar="K=V,...",
                          help="preset parameters, e.g. e=0.1 or "
                               "k=4,a1=0.01,a2=0.02")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("build-mirror", parents=[common, modelful],
                   help="construct a model, reduce it, and archive it")
    sub.add_parser("critical", parents=[common, modelful],
                   help="locate and classify stationary points")
    for name, text in (("cycles", "track branch points and extract "
                                  "vanishing cycles"),
                       ("quiver", "assemble the cycle intersection matrix")):
        p = sub.add_parser(name, parents=[common, modelful], help=text)
        p.add_argument("--arcs", choices=("auto", "paper"), default="auto",
                       help="arc selection: automatic, or the pinned "
                            "published choice where one is recorded")
    floer = sub.add_parser("floer-su2", parents=[common],
                           help="count SU(2) holonomy solutions of the "
                                "genus-2 relation")
    floer.add_argument("--fix", default="",
                       help="comma list of generators pinned to the "
                            "identity, e.g. a1,b1")
    floer.add_argument("--target", default="-I",
                       help="required loop product: I or -I")
    floer.add_argument("--starts", type=int, default=10000,
                       help="random starts in the search budget")
    dsing = sub.add_parser("dsing-ext", parents=[common],
                           help="emit sheaf Hom-rank tables on the "
                                "three-component fiber")
    dsing.add_argument("--pair", action="append", nargs=2, default=[],
                       metavar=("LEFT", "RIGHT"),
                       help="extra ordered pair to report; labels or "
                            "degree data like S1:q1=0,q3=2")
    everything = sub.add_parser("report-all", parents=[common],
                                help="run the whole battery on the three "
                                     "main presets")
    everything.add_argument("--starts", type=int, default=2500,
                            help="search budget for the holonomy runs")
    return parser


_HANDLERS = {
    "build-mirror": _cmd_build_mirror,
    "critical": _cmd_critical,
    "cycles": _cmd_cycles,
    "quiver": _cmd_quiver,
    "floer-su2": _cmd_floer_su2,
    "dsing-ext": _cmd_dsing_ext,
    "report-all": _cmd_report_all,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out_dir = _resolve_out(args)
        report = _HANDLERS[args.command](args, out_dir)
        stem = report.stem or report.command
        _write_text(out_dir, f"{stem}.json", report.to_json())
    except (CLIError, MirrorError, ParseError, CriticalError, CycleError,
            HolonomyError, DsingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for note in report.diagnostics:
        print(f"warning: {note}", file=sys.stderr)
    return 2 if report.diagnostics else 0


if __name__ == "__main__":
    sys.exit(main())
