import json
import math

import numpy as np
import pandas as pd

from frontlab import reports
from frontlab.existence import BranchPoint
from frontlab.model import ReactionSpec
from frontlab.spectrum.types import OracleEigenvalue, ParityClass, SpectralRegime


def test_jsonable_scalars():
    assert reports.to_jsonable(1 + 2j) == {"re": 1.0, "im": 2.0}
    assert reports.to_jsonable(float("nan")) is None
    assert reports.to_jsonable(np.float64(math.inf)) is None
    assert reports.to_jsonable(np.int64(3)) == 3
    assert reports.to_jsonable(np.bool_(True)) is True
    assert reports.to_jsonable(SpectralRegime.ALL_REAL) == "AllReal"


def test_jsonable_containers():
    payload = {"a": np.array([1.0, np.nan]), 2: (1j,)}
    assert reports.to_jsonable(payload) == {"a": [1.0, None], "2": [{"re": 0.0, "im": 1.0}]}


def test_jsonable_dataclass():
    b = BranchPoint(v0=0.8, gamma=2.0, branch_index=1, transversal=True, residual=1e-12, slope=0.46)
    assert reports.to_jsonable(b)["branch_index"] == 1
    assert reports.to_jsonable(b)["transversal"] is True


def test_dumps_is_canonical():
    assert reports.dumps({"b": 1, "a": 2}) == reports.dumps({"a": 2, "b": 1})
    assert reports.dumps({}).endswith("\n")


def test_table_round_trip_with_header(tmp_path):
    frame = pd.DataFrame({"x": [0.1, 0.2], "y": [1.0 / 3.0, 2.0]})
    path = reports.write_table(tmp_path / "sub" / "t.csv", frame, header={"v0": 0.8})
    first = path.read_text().splitlines()[0]
    assert first.startswith("# ")
    assert json.loads(first[2:]) == {"v0": 0.8}
    back = reports.read_table(path)
    assert list(back.columns) == ["x", "y"]
    assert back["y"][0] == float("%.12g" % (1.0 / 3.0))


def test_write_json(tmp_path):
    path = reports.write_json(tmp_path / "r.json", {"value": 1 + 0j})
    assert json.loads(path.read_text()) == {"value": {"im": 0.0, "re": 1.0}}


def test_branches_frame():
    b = BranchPoint(v0=0.8, gamma=2.0, branch_index=1, transversal=True, residual=0.0, slope=0.5)
    frame = reports.branches_frame([b])
    assert list(frame.columns) == ["gamma", "v0", "branch_index", "transversal", "residual"]
    assert frame.loc[0, "v0"] == 0.8


def test_probe_frame():
    frame = reports.probe_frame(ReactionSpec.power(1.0, g1=-1.0))
    assert list(frame.columns) == ["u_sq", "v", "H", "G", "F"]
    assert np.allclose(frame["H"], frame["u_sq"])
    assert np.allclose(frame["F"], (1 + frame["v"] - frame["u_sq"]) * frame["H"] + frame["G"])


def test_oracle_frame():
    e = OracleEigenvalue(
        value=-1.5 + 0j, error_estimate=1e-4, label="point",
        parity=ParityClass.U_ODD_V_EVEN, distance_to_essential=0.5,
    )
    frame = reports.oracle_frame([e])
    assert frame.loc[0, "parity"] == "u_odd_v_even"
    assert frame.loc[0, "re_lambda"] == -1.5


def test_provenance():
    record = reports.provenance("fold", "m.json", "abc", "out", 1.23456789, "0.3.0")
    assert record["config_sha256"] == "abc"
    assert record["wall_time_s"] == 1.234568
    assert record["deterministic"] is True
