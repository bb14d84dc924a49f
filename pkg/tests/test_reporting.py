import json
from pathlib import Path

import numpy as np

from bmoheat.grids import Domain, SampledFunction, make_grid
from bmoheat.kernels import OpTag
from bmoheat.reporting import format_cell, jsonable, output_dir, write_csv, write_function


def test_format_cell_round_trips():
    assert format_cell(True) == "true"
    assert format_cell(np.bool_(False)) == "false"
    assert format_cell(0.1) == "0.1"
    assert float(format_cell(np.float64(1.0 / 3.0))) == 1.0 / 3.0
    assert format_cell(np.int64(7)) == "7"
    assert format_cell(1.5 - 2.0j) == "1.5-2j"
    assert format_cell("DeltaN") == "DeltaN"


def test_jsonable_handles_numpy_and_enums():
    payload = {"a": np.float64(0.5), "b": np.arange(3), "c": OpTag.DeltaDN,
               "d": (np.int32(2), Path("x/y")), "e": 1.0 + 2.0j}
    out = jsonable(payload)
    assert out == {"a": 0.5, "b": [0, 1, 2], "c": "DeltaDN",
                   "d": [2, "x/y"], "e": {"re": 1.0, "im": 2.0}}
    json.dumps(out)


def test_write_csv_bytes(tmp_path):
    p = write_csv(tmp_path / "t.csv", ["a", "b"], [(1, 0.5), (2, True)])
    assert p.read_text() == "a,b\n1,0.5\n2,true\n"


def test_write_function_round_trip(tmp_path):
    grid = make_grid(Domain.FULL, -1.0, 1.0, 0.5)
    f = SampledFunction(grid, np.array([0.0, 1.0, 4.0, 1.0, 0.0]), name="v")
    csv_path, json_path = write_function(f, tmp_path / "fn")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "x0,value"
    assert lines[3] == "0.0,4.0"
    meta = json.loads(json_path.read_text())
    assert meta["name"] == "v"
    assert meta["shape"] == [5]
    assert meta["domain"] == "Full"


def test_output_dir_resolution(tmp_path, monkeypatch):
    assert output_dir("given") == Path("given")
    monkeypatch.setenv("BMOHEAT_OUT", str(tmp_path))
    assert output_dir(None) == tmp_path
    monkeypatch.delenv("BMOHEAT_OUT")
    assert output_dir(None) == Path("reports")
