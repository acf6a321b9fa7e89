"""
Result files: CSV tables (pandas), JSON reports and the provenance record.

Everything except the provenance file is a pure function of the inputs, so
identical configs give byte-identical outputs.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import pandas as pd

from frontlab.existence import BranchPoint, FrontProfile, TakeoffSample
from frontlab.model import ReactionSpec, probe_points
from frontlab.spectrum.types import DispersionPoint, EvansEvaluation, OracleEigenvalue

logger = logging.getLogger("frontlab.reports")

FLOAT_FORMAT = "%.12g"


def to_jsonable(obj: Any) -> Any:
    """Plain JSON types; complex numbers become {"re", "im"}, non-finite floats null."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n"


def write_json(path: str | Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload))
    logger.debug(f"Wrote {path}")
    return path


def write_table(path: str | Path, frame: pd.DataFrame, header: dict | None = None) -> Path:
    """CSV with an optional leading '# {json}' metadata line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        if header is not None:
            fh.write("# " + json.dumps(to_jsonable(header), sort_keys=True) + "\n")
        frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug(f"Wrote {path} ({len(frame)} rows)")
    return path


def read_table(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


# --- table builders ---

def branches_frame(branches: Sequence[BranchPoint]) -> pd.DataFrame:
    return pd.DataFrame(
        [(b.gamma, b.v0, b.branch_index, b.transversal, b.residual) for b in branches],
        columns=["gamma", "v0", "branch_index", "transversal", "residual"],
    )


def takeoff_frame(samples: Sequence[TakeoffSample]) -> pd.DataFrame:
    return pd.DataFrame(
        [(s.v, s.half_jump, s.slow_line, s.residual) for s in samples],
        columns=["v", "half_jump", "slow_line", "residual"],
    )


def profile_frame(front: FrontProfile) -> pd.DataFrame:
    return pd.DataFrame({"x": front.x_grid, "U": front.U, "V": front.V})


def dispersion_frame(points: Iterable[DispersionPoint]) -> pd.DataFrame:
    return pd.DataFrame(
        [(p.k, p.lambda1.real, p.lambda1.imag, p.lambda2.real, p.lambda2.imag) for p in points],
        columns=["k", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2"],
    )


def evans_frame(evaluations: Iterable[EvansEvaluation]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            (e.lam.real, e.lam.imag, e.mantissa.real, e.mantissa.imag, e.rescale_log, e.method.value)
            for e in evaluations
        ],
        columns=["re_lambda", "im_lambda", "re_D", "im_D", "log_scale", "method"],
    )


def probe_frame(spec: ReactionSpec) -> pd.DataFrame:
    """H, G and F on the validation probe set."""
    rows = []
    for u_sq, v in probe_points():
        rows.append((u_sq, v, float(spec.H(u_sq, v)), float(spec.G(v)), float(spec.F(u_sq, v))))
    return pd.DataFrame(rows, columns=["u_sq", "v", "H", "G", "F"])


def oracle_frame(eigenvalues: Iterable[OracleEigenvalue]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            (e.value.real, e.value.imag, e.error_estimate, e.label, e.parity.value, e.distance_to_essential)
            for e in eigenvalues
        ],
        columns=["re_lambda", "im_lambda", "error_estimate", "label", "parity", "distance_to_essential"],
    )


def snapshot_frame(x: np.ndarray, U: np.ndarray, V: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"x": x, "U": U, "V": V})


def provenance(
    command: str,
    config_path: str | None,
    digest: str | None,
    output_dir: str | Path,
    wall_time: float,
    version: str,
) -> dict[str, Any]:
    return {
        "command": command,
        "config": config_path,
        "config_sha256": digest,
        "output_dir": str(output_dir),
        "deterministic": True,
        "version": version,
        "wall_time_s": round(wall_time, 6),
    }
