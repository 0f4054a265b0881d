"""Plan files (YAML, schema v1), snapshot CSVs, metrics and plot-script output.

A plan file looks like::

    schema_version: 1
    label: fig2
    kinetic: 1.0
    grid: {x_min: -40.0, x_max: 40.0, n_points: 1024}
    init:
      kind: ground_state
      potential: {kind: harmonic, half_strength: 0.25}
      nonlinearity: {kind: constant, cn: 20.0}
    stepper: {dt: 1.0e-4, method: rk4}
    stages:
      - name: expand
        duration: 1pi
        potential: {kind: zero}
        nonlinearity: {kind: constant, cn: 20.0}
      - name: interact
        duration: 0.3pi
        potential: {kind: zero}
        nonlinearity: {kind: sinusoidal_mod, c: 20.0, k: 2.0, d: 0.0}

Durations accept a trailing ``pi``.  Unknown keys and variants are errors.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np
import yaml

from . import schedules as sch
from .analysis import AnalysisError, analyze_wavefunction, max_height_series
from .core import Grid1D, WaveFunction, density, norm_sq
from .integrator import StepperConfig
from .pipeline import (ExperimentPlan, GaussianInit, GroundStateInit, Stage,
                       Trajectory)
from .schedules import sample_nonlinearity, sample_potential

SCHEMA_VERSION = 1
SNAPSHOT_HEADER = "x,re,im,density"


class PlanError(ValueError):
    """Invalid plan text; ``path`` names the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


# -- scalar coercion ----------------------------------------------------------

_PI_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*pi\s*$")


def parse_duration(value, path: str = "duration") -> float:
    if isinstance(value, str):
        m = _PI_RE.match(value)
        if m:
            return float(m.group(1) or 1.0) * math.pi
    return _real(value, path)


def format_duration(value: float):
    """``0.3pi`` when that reads back to exactly ``value``, else the plain float."""
    text = f"{value / math.pi:.12g}"
    if value != 0 and float(text) * math.pi == value:
        return f"{text}pi"
    return value


def _real(value, path: str) -> float:
    if isinstance(value, bool):
        raise PlanError(f"expected a number, got {value!r}", path)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            # YAML 1.1 reads '1e-4' (no dot) as a string
            return float(value)
        except ValueError:
            pass
    raise PlanError(f"expected a number, got {value!r}", path)


def _int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise PlanError(f"expected an integer, got {value!r}", path)
    return value


def _table(value, path: str, required: tuple, optional: tuple = ()) -> dict:
    if not isinstance(value, dict):
        raise PlanError(f"expected a mapping, got {type(value).__name__}", path)
    extra = set(value) - set(required) - set(optional)
    if extra:
        raise PlanError(f"unknown key(s) {sorted(extra)}", path)
    missing = [k for k in required if k not in value]
    if missing:
        raise PlanError(f"missing key(s) {missing}", path)
    return value


def _build(cls, path: str, **kwargs):
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as e:
        raise PlanError(str(e), path) from None


# -- schedules ----------------------------------------------------------------

_POTENTIALS = {
    "zero": (sch.Zero, ()),
    "harmonic": (sch.Harmonic, ("half_strength",)),
    "sinusoidal": (sch.Sinusoidal, ("amplitude", "k")),
}
_NONLINEARITIES = {
    "constant": (sch.Constant, ("cn",)),
    "sinusoidal_mod": (sch.SinusoidalMod, ("c", "k", "d")),
    "parabolic_mod": (sch.ParabolicMod, ("cn", "x_scale")),
}


def _kind(value, path, variants):
    if not isinstance(value, dict) or "kind" not in value:
        raise PlanError("expected a mapping with a 'kind' tag", path)
    kind = value["kind"]
    if kind not in variants:
        raise PlanError(f"unknown schedule variant {kind!r} (expected one of "
                        f"{sorted(variants)})", path + ".kind")
    return kind


def potential_from_dict(value, path: str = "potential"):
    kind = _kind(value, path, list(_POTENTIALS) + ["sum"])
    if kind == "sum":
        _table(value, path, ("kind", "terms"))
        terms = value["terms"]
        if not isinstance(terms, list):
            raise PlanError("expected a list", path + ".terms")
        return _build(sch.Sum, path, terms=tuple(
            potential_from_dict(t, f"{path}.terms.{i}") for i, t in enumerate(terms)))
    cls, fields = _POTENTIALS[kind]
    _table(value, path, ("kind",) + fields)
    return _build(cls, path, **{f: _real(value[f], f"{path}.{f}") for f in fields})


def nonlinearity_from_dict(value, path: str = "nonlinearity"):
    kind = _kind(value, path, _NONLINEARITIES)
    cls, fields = _NONLINEARITIES[kind]
    required = tuple(f for f in fields if not (kind == "sinusoidal_mod" and f == "d"))
    _table(value, path, ("kind",) + required, ("d",) if kind == "sinusoidal_mod" else ())
    return _build(cls, path, **{f: _real(value[f], f"{path}.{f}") for f in fields if f in value})


def potential_to_dict(spec) -> dict:
    if isinstance(spec, sch.Sum):
        return {"kind": "sum", "terms": [potential_to_dict(t) for t in spec.terms]}
    for kind, (cls, fields) in _POTENTIALS.items():
        if type(spec) is cls:
            return {"kind": kind, **{f: getattr(spec, f) for f in fields}}
    raise TypeError(f"not a potential schedule: {spec!r}")


def nonlinearity_to_dict(spec) -> dict:
    for kind, (cls, fields) in _NONLINEARITIES.items():
        if type(spec) is cls:
            return {"kind": kind, **{f: getattr(spec, f) for f in fields}}
    raise TypeError(f"not a nonlinearity schedule: {spec!r}")


# -- plans --------------------------------------------------------------------

def plan_from_dict(data) -> ExperimentPlan:
    top = _table(data, "", ("schema_version", "grid", "init", "stages"),
                 ("label", "kinetic", "stepper"))
    version = top["schema_version"]
    if version != SCHEMA_VERSION:
        raise PlanError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})",
                        "schema_version")

    g = _table(top["grid"], "grid", ("x_min", "x_max", "n_points"))
    grid = _build(Grid1D, "grid", x_min=_real(g["x_min"], "grid.x_min"),
                  x_max=_real(g["x_max"], "grid.x_max"),
                  n_points=_int(g["n_points"], "grid.n_points"))

    init_d = top["init"]
    kind = init_d.get("kind") if isinstance(init_d, dict) else None
    if kind == "ground_state":
        _table(init_d, "init", ("kind", "potential", "nonlinearity"), ("tol",))
        kw = {"potential": potential_from_dict(init_d["potential"], "init.potential"),
              "nonlinearity": nonlinearity_from_dict(init_d["nonlinearity"], "init.nonlinearity")}
        if "tol" in init_d:
            kw["tol"] = _real(init_d["tol"], "init.tol")
        init = _build(GroundStateInit, "init", **kw)
    elif kind == "gaussian":
        _table(init_d, "init", ("kind",), ("center", "width", "momentum"))
        init = _build(GaussianInit, "init", **{
            f: _real(init_d[f], f"init.{f}") for f in ("center", "width", "momentum")
            if f in init_d})
    else:
        raise PlanError(f"unknown init kind {kind!r} (expected 'ground_state' or 'gaussian')",
                        "init.kind")

    st = top.get("stepper", {})
    _table(st, "stepper", (), ("dt", "method", "norm_drift_tol", "boundary_density_tol"))
    kw = {f: _real(st[f], f"stepper.{f}") for f in
          ("dt", "norm_drift_tol", "boundary_density_tol") if f in st}
    if "method" in st:
        kw["method"] = st["method"]
    stepper = _build(StepperConfig, "stepper", **kw)

    stages_d = top["stages"]
    if not isinstance(stages_d, list) or not stages_d:
        raise PlanError("expected a non-empty list of stages", "stages")
    stages = []
    for i, s in enumerate(stages_d):
        path = f"stages.{i}"
        _table(s, path, ("name", "duration", "potential", "nonlinearity"), ("snapshot_every",))
        duration = parse_duration(s["duration"], f"{path}.duration")
        if not duration >= 0:
            raise PlanError(f"duration must be >= 0, got {s['duration']!r}", f"{path}.duration")
        stages.append(_build(
            Stage, path, name=str(s["name"]), duration=duration,
            potential=potential_from_dict(s["potential"], f"{path}.potential"),
            nonlinearity=nonlinearity_from_dict(s["nonlinearity"], f"{path}.nonlinearity"),
            snapshot_every=_int(s.get("snapshot_every", 0), f"{path}.snapshot_every")))

    return _build(ExperimentPlan, "", grid=grid, init=init, stages=tuple(stages),
                  stepper=stepper, label=str(top.get("label", "plan")),
                  kinetic=_real(top.get("kinetic", 0.5), "kinetic"))


def load_plan_dict(text: str) -> dict:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        problem = getattr(e, "problem", None) or str(e)
        raise PlanError(f"syntax error: {where}{problem}") from None
    return data


def parse_plan(text: str) -> ExperimentPlan:
    return plan_from_dict(load_plan_dict(text))


def plan_to_dict(plan: ExperimentPlan) -> dict:
    init = plan.init
    if isinstance(init, GroundStateInit):
        init_d = {"kind": "ground_state",
                  "potential": potential_to_dict(init.potential),
                  "nonlinearity": nonlinearity_to_dict(init.nonlinearity),
                  "tol": init.tol}
    else:
        init_d = {"kind": "gaussian", "center": init.center, "width": init.width,
                  "momentum": init.momentum}
    st = plan.stepper
    return {
        "schema_version": SCHEMA_VERSION,
        "label": plan.label,
        "kinetic": plan.kinetic,
        "grid": {"x_min": plan.grid.x_min, "x_max": plan.grid.x_max,
                 "n_points": plan.grid.n_points},
        "init": init_d,
        "stepper": {"dt": st.dt, "method": st.method, "norm_drift_tol": st.norm_drift_tol,
                    "boundary_density_tol": st.boundary_density_tol},
        "stages": [{"name": s.name, "duration": format_duration(s.duration),
                    "snapshot_every": s.snapshot_every,
                    "potential": potential_to_dict(s.potential),
                    "nonlinearity": nonlinearity_to_dict(s.nonlinearity)}
                   for s in plan.stages],
    }


def emit_plan(plan: ExperimentPlan) -> str:
    return yaml.safe_dump(plan_to_dict(plan), sort_keys=False, default_flow_style=None)


def read_plan(path) -> ExperimentPlan:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise PlanError(f"cannot read plan file: {e.strerror}", str(path)) from None
    return parse_plan(text)


def set_path(data, path: str, value):
    """Set ``a.b.0.c`` inside nested dicts/lists (used by parameter sweeps)."""
    keys = path.split(".")
    node = data
    for i, key in enumerate(keys):
        last = i == len(keys) - 1
        where = ".".join(keys[:i + 1])
        if isinstance(node, list):
            try:
                idx = int(key)
                node[idx]
            except (ValueError, IndexError):
                raise PlanError(f"no list element {key!r}", where) from None
            if last:
                node[idx] = value
            else:
                node = node[idx]
        elif isinstance(node, dict):
            if last:
                node[key] = value
            elif key not in node:
                raise PlanError("no such field", where)
            else:
                node = node[key]
        else:
            raise PlanError("cannot descend into a scalar", where)
    return data


# -- snapshots ----------------------------------------------------------------

def snapshot_name(index: int, t: float) -> str:
    return f"snap_{index:04d}_{t:.6f}.csv"


def write_snapshot(path, psi: WaveFunction) -> None:
    a = psi.amplitudes
    table = np.column_stack([np.asarray(psi.grid.x), a.real, a.imag, density(psi)])
    with open(path, "w", newline="\n") as fh:
        np.savetxt(fh, table, fmt="%.17g", delimiter=",", header=SNAPSHOT_HEADER,
                   comments="")


def read_snapshot(path):
    """Return ``(x, psi_amplitudes, density)`` from a snapshot CSV."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip()
    if header != SNAPSHOT_HEADER:
        raise ValueError(f"{path.name}: bad header {header!r}")
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if table.shape[1] != 4 or not np.all(np.isfinite(table)):
        raise ValueError(f"{path.name}: expected 4 finite numeric columns")
    return table[:, 0], table[:, 1] + 1j * table[:, 2], table[:, 3]


def grid_from_x(x) -> Grid1D:
    dx = float(x[1] - x[0])
    return Grid1D(float(x[0]), float(x[0] + dx * len(x)), len(x))


# -- outputs ------------------------------------------------------------------

def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _stage_report(psi):
    try:
        return analyze_wavefunction(psi).to_dict()
    except AnalysisError as e:
        return {"error": str(e)}


def emit_outputs(traj: Trajectory, report, out_dir) -> dict:
    """Write snapshots, metrics.json, schedule.csv, plot_figure.py and manifest.json."""
    if not traj.snapshots:
        raise ValueError("trajectory has no snapshots")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    snaps = []
    for i, s in enumerate(traj.snapshots):
        name = snapshot_name(i, s.t)
        write_snapshot(out / name, s.psi)
        snaps.append({"file": name, "t": s.t, "stage_index": s.stage_index})

    plan = traj.plan
    inter = plan.interaction_index() if plan is not None else None
    canonical = {"initial": 0, "final": len(traj.snapshots) - 1}
    if inter is not None:
        # snapshot index of each stage's last frame
        ends = {}
        for i, s in enumerate(traj.snapshots):
            ends[s.stage_index] = i
        canonical["pre_interaction"] = 0 if inter == 0 else ends.get(inter - 1, 0)
        canonical["post_interaction"] = ends.get(inter, 0)

    metrics = {
        "label": traj.plan_label,
        "final": report.to_dict(),
        "stages": {name: _stage_report(psi) for name, psi in traj.stage_states[1:]},
        "norm_drift": norm_sq(traj.final) - norm_sq(traj.initial),
        "max_height_series": [[t, h] for t, h in max_height_series(traj)],
    }
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2, default=_jsonable) + "\n")

    files = {"snapshots": snaps, "metrics": "metrics.json", "plot_script": "plot_figure.py"}
    if plan is not None:
        stage = plan.stages[inter if inter is not None else -1]
        g = traj.final.grid
        table = np.column_stack([np.asarray(g.x), sample_potential(stage.potential, g),
                                 sample_nonlinearity(stage.nonlinearity, g)])
        with open(out / "schedule.csv", "w", newline="\n") as fh:
            np.savetxt(fh, table, fmt="%.17g", delimiter=",", header="x,V,Cn", comments="")
        files["schedule"] = "schedule.csv"
    (out / "plot_figure.py").write_text(PLOT_SCRIPT)
    manifest = {"label": traj.plan_label, "canonical": canonical, **files}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


PLOT_SCRIPT = '''"""Render a run directory in the style of the original figures.

Solid: final density.  Dashed: density just before the interaction stage.
Dotted: shape of the interaction-stage schedule, rescaled onto the density axis.

    python plot_figure.py [output.png]
"""
import json
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = Path(__file__).resolve().parent
manifest = json.loads((here / "manifest.json").read_text())
snaps = manifest["snapshots"]
canon = manifest["canonical"]


def load(i):
    return np.loadtxt(here / snaps[i]["file"], delimiter=",", skiprows=1)


final = load(canon["final"])
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(final[:, 0], final[:, 3], "k-", lw=1.2, label=f"t = {snaps[canon['final']]['t']:.4g}")
if "pre_interaction" in canon:
    pre = load(canon["pre_interaction"])
    ax.plot(pre[:, 0], pre[:, 3], "k--", lw=1.0, label="before interaction")
mask = final[:, 3] > 1e-4 * final[:, 3].max()
lo, hi = final[mask, 0].min(), final[mask, 0].max()
if "schedule" in manifest:
    sched = np.loadtxt(here / manifest["schedule"], delimiter=",", skiprows=1)
    # V + Cn: the effective shape the condensate sees, scaled over the plotted window
    x, col = sched[:, 0], sched[:, 1] + sched[:, 2]
    win = (x >= lo - 2) & (x <= hi + 2)
    if np.ptp(col[win]) > 0:
        top = final[:, 3].max()
        shape = (col[win] - col[win].min()) / np.ptp(col[win]) * 0.5 * top
        ax.plot(x[win], shape, "k:", lw=0.8, label="schedule shape")
ax.set_xlim(lo - 2, hi + 2)
ax.set_xlabel("x")
ax.set_ylabel("|psi|^2")
ax.set_title(manifest["label"])
ax.legend(frameon=False, fontsize=8)
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else here / "figure.png", dpi=150)
'''
