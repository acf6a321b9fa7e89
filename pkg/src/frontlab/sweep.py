"""
Parameter sweeps.

A grid file names an analysis, a base model descriptor and the axes to vary:

{
  "analysis": "branches",
  "base": {"epsilon": 0.1, "tau": 1.0, "regime": {"super_slow": {"gamma": 2.0}},
           "H": {"kind": "power", "h0": 1.0, "m": 1}},
  "axes": {"gamma": {"start": 1.0, "stop": 3.0, "step": 0.1}}
}

Axes are gamma, g1, H0, tau and epsilon, each either {"start", "stop", "step"}
(inclusive) or {"values": [...]}. Rows come out in lexicographic order of the
grid indices; a failing point is recorded in its row and never stops the sweep.
"""

from __future__ import annotations

import copy
import itertools
import logging
import math
from multiprocessing import Pool
from typing import Any, Callable

import numpy as np
import pandas as pd

from frontlab.config import reject_unknown_keys, parse_model_descriptor, read_structured_file
from frontlab.errors import ConfigError
from frontlab.existence import build_composite_front, find_branches, find_fold, refine_front_bvp
from frontlab.spectrum.essential import classify_regime
from frontlab.spectrum.evans import LinearizationContext, lambda_edge_predict
from frontlab.spectrum.oracle import discrete_spectrum_oracle

logger = logging.getLogger("frontlab.sweep")

MAX_JOBS = 1_000_000
_GRID_KEYS = {"analysis", "base", "axes"}
_AXES = ("gamma", "g1", "H0", "tau", "epsilon")


# --- analyses: descriptor -> row fields ---

def _branches(raw: dict) -> dict[str, Any]:
    config = parse_model_descriptor(raw)
    branches = find_branches(config.params, config.spec)
    row: dict[str, Any] = {"n_branches": len(branches)}
    for b in branches[:2]:
        row[f"v{b.branch_index}"] = b.v0
    return row


def _fold(raw: dict) -> dict[str, Any]:
    config = parse_model_descriptor(raw)
    fold = find_fold(config.params, config.spec)
    return {"gamma_double": fold.gamma_double, "v_fold": fold.v_fold, "contact_order": fold.contact_order}


def _regime(raw: dict) -> dict[str, Any]:
    config = parse_model_descriptor(raw)
    report = classify_regime(config.params, config.spec)
    return {
        "regime": report.regime.value,
        "k_minus": report.k_minus,
        "k_plus": report.k_plus,
        "tip_re": report.tip_lambda_plus.real,
        "tip_im": report.tip_lambda_plus.imag,
    }


def _edge(raw: dict) -> dict[str, Any]:
    config = parse_model_descriptor(raw)
    row: dict[str, Any] = {}
    for b in find_branches(config.params, config.spec)[:2]:
        edge = lambda_edge_predict(b.v0, config.params, config.spec)
        row[f"lambda_tilde_edge_{b.branch_index}"] = edge.lambda_tilde_edge
        row[f"lambda_edge_{b.branch_index}"] = edge.lambda_edge
    return row


def _edge_oracle(raw: dict) -> dict[str, Any]:
    """Predicted vs oracle edge eigenvalue of the first branch."""
    config = parse_model_descriptor(raw)
    params, spec = config.params, config.spec
    branches = find_branches(params, spec)
    if not branches:
        return {"n_branches": 0}
    v1 = branches[0].v0
    predicted = lambda_edge_predict(v1, params, spec).lambda_edge
    front = refine_front_bvp(build_composite_front(v1, params, spec), params, spec)
    ctx = LinearizationContext.build(front, params, spec)
    N = 8192 if params.epsilon <= 0.05 else 4096
    eigenvalues = discrete_spectrum_oracle(ctx, N=N, shifts=(predicted, 0.01))
    nearest = min(eigenvalues, key=lambda e: abs(e.value - predicted))
    return {
        "predicted": predicted,
        "oracle": nearest.value.real,
        "oracle_imag": nearest.value.imag,
        "error": abs(nearest.value - predicted),
        "relative_error": abs(nearest.value - predicted) / abs(predicted),
        "error_estimate": nearest.error_estimate,
    }


ANALYSES: dict[str, Callable[[dict], dict[str, Any]]] = {
    "branches": _branches,
    "fold": _fold,
    "regime": _regime,
    "edge": _edge,
    "edge_oracle": _edge_oracle,
}


# --- grid handling ---

def _axis_values(name: str, raw: Any) -> list[float]:
    if not isinstance(raw, dict):
        raise ConfigError(f"axis '{name}' must be an object")
    if "values" in raw:
        reject_unknown_keys(raw, {"values"}, f"axes.{name}")
        values = raw["values"]
        if not isinstance(values, list):
            raise ConfigError(f"'axes.{name}.values' must be a list")
        return [float(v) for v in values]
    reject_unknown_keys(raw, {"start", "stop", "step"}, f"axes.{name}")
    try:
        start, stop, step = (float(raw[k]) for k in ("start", "stop", "step"))
    except KeyError as e:
        raise ConfigError(f"axis '{name}' needs start, stop and step") from e
    if step <= 0:
        raise ConfigError(f"axis '{name}' step must be positive")
    count = math.floor((stop - start) / step + 1e-9) + 1
    return [float(round(v, 12)) for v in start + step * np.arange(max(count, 0))]


def apply_axis(raw: dict, name: str, value: float) -> dict:
    """Copy of a descriptor with one axis set."""
    out = copy.deepcopy(raw)
    if name in ("tau", "epsilon"):
        out[name] = value
    elif name == "gamma":
        out["regime"] = {"super_slow": {"gamma": value}}
    elif name == "g1":
        out["regime"] = {"regular": {"g1": value}}
    elif name == "H0":
        h = out.get("H")
        if not isinstance(h, dict) or h.get("kind") != "power":
            raise ConfigError("axis 'H0' needs a power-law H in the base descriptor")
        h["h0"] = value
    else:
        raise ConfigError(f"unknown axis '{name}' (expected one of {list(_AXES)})")
    # a linear G follows the regime unless pinned
    if name in ("gamma", "g1", "epsilon") and isinstance(out.get("G"), dict) and out["G"].get("kind") == "linear":
        out["G"].pop("g1", None)
    return out


def expand_grid(grid: dict) -> tuple[str, dict, list[str], list[tuple[tuple[int, ...], tuple[float, ...]]]]:
    if not isinstance(grid, dict):
        raise ConfigError("sweep grid must be an object")
    reject_unknown_keys(grid, _GRID_KEYS, "sweep grid")
    analysis = grid.get("analysis")
    if analysis not in ANALYSES:
        raise ConfigError(f"'analysis' must be one of {sorted(ANALYSES)}, got {analysis!r}")
    base = grid.get("base")
    if not isinstance(base, dict):
        raise ConfigError("'base' must be a model descriptor object")
    axes = grid.get("axes")
    if not isinstance(axes, dict) or not axes:
        raise ConfigError("sweep grid has no axes")

    names = list(axes)
    values = [_axis_values(name, axes[name]) for name in names]
    total = math.prod(len(v) for v in values)
    if total == 0:
        raise ConfigError("sweep grid is empty")
    if total > MAX_JOBS:
        raise ConfigError(f"sweep grid has {total} points (limit {MAX_JOBS})")
    points = [
        (tuple(idx), tuple(values[a][i] for a, i in enumerate(idx)))
        for idx in itertools.product(*(range(len(v)) for v in values))
    ]
    return analysis, base, names, points


def run_job(job: tuple[str, dict, list[str], tuple[int, ...], tuple[float, ...]]) -> dict[str, Any]:
    """Top-level (picklable) worker: one grid point."""
    analysis, base, names, index, point = job
    row: dict[str, Any] = dict(zip(names, point))
    try:
        raw = base
        for name, value in zip(names, point):
            raw = apply_axis(raw, name, value)
        row.update(ANALYSES[analysis](raw))
        row["status"] = "ok"
        row["message"] = ""
    except Exception as e:
        logger.warning(f"Grid point {index} failed: {type(e).__name__}: {e}")
        row["status"] = type(e).__name__
        row["message"] = str(e)
    return row


def run_sweep(grid: dict, workers: int = 1) -> pd.DataFrame:
    analysis, base, names, points = expand_grid(grid)
    jobs = [(analysis, base, names, index, point) for index, point in points]
    logger.info(f"Sweep '{analysis}' over {names}: {len(jobs)} point(s), {workers} worker(s)")

    if workers > 1 and len(jobs) > 1:
        with Pool(min(workers, len(jobs))) as pool:
            rows = pool.map(run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers)))
    else:
        rows = [run_job(job) for job in jobs]

    columns = list(names) + ["status", "message"]
    for row in rows:
        columns += [k for k in row if k not in columns]
    frame = pd.DataFrame(rows, columns=columns)
    failed = int((frame["status"] != "ok").sum())
    logger.info(f"Sweep finished: {len(frame) - failed} ok, {failed} failed")
    return frame


def load_sweep_grid(path) -> dict:
    """Read a sweep grid file and validate it; raises ConfigError before any job runs."""
    grid = read_structured_file(path)
    expand_grid(grid)
    return grid
