import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scatter_channels import cli, scenario
from scatter_channels.io import Table, body, dumps_json, fmt
from scatter_channels.reports import AMPLITUDE_COLUMNS, DECOMPOSITION_COLUMNS


def _write(tmp_path, obj, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def _rows(path):
    with open(path) as f:
        return [r for r in csv.reader(line for line in f if not line.startswith("#"))]


def test_reference_defaults():
    s = scenario.reference()
    assert s.spec.segments == ((1.0, 2.0),)
    sp = s.section("spectrum")
    assert (sp["k0"], sp["sigma_k"], sp["x0"]) == (1.0, 0.05, -30.0)
    assert len(s.energies) == 200
    assert len(s.section("evolve")["series_times"]) >= 10
    assert s.digest() == scenario.reference().digest()


def test_schema_is_valid_draft_2020_12():
    import jsonschema

    jsonschema.Draft202012Validator.check_schema(scenario.schema())


@pytest.mark.parametrize("bad,pointer", [
    ({"schema_version": 1, "spectrum": {"k0": "one"}}, "/spectrum/k0"),
    ({"schema_version": 1, "surprise": 1}, "/"),
    ({"schema_version": 2}, "/schema_version"),
    ({}, "/"),
    ({"schema_version": 1, "barrier": {"rectangular": {"V0": 1.0}}}, "/barrier/rectangular"),
    ({"schema_version": 1, "spectrum": {"n_k": 10}}, "/spectrum/n_k"),
])
def test_validation_errors_point_at_key(bad, pointer):
    with pytest.raises(scenario.ScenarioError) as err:
        scenario.from_dict(bad)
    assert err.value.pointer == pointer


@settings(max_examples=30, deadline=None)
@given(st.text(min_size=1, max_size=12).filter(lambda k: k not in scenario.schema()["properties"]))
def test_unknown_top_level_keys_rejected(key):
    with pytest.raises(scenario.ScenarioError):
        scenario.from_dict({"schema_version": 1, key: 0})


def test_barrier_forms(tmp_path):
    (tmp_path / "b.json").write_text(json.dumps({"a": -1.0, "segments": [[1.0, 2.0], [1.0, 2.0]]}))
    s = scenario.load(_write(tmp_path, {"schema_version": 1, "barrier": {"file": "b.json"}}))
    assert s.spec.a == -1.0 and s.spec.b == 1.0
    s = scenario.from_dict({"schema_version": 1, "barrier": {"segments": [[0.5, 1.0]]}})
    assert s.spec.segments == ((0.5, 1.0),)
    s = scenario.from_dict({"schema_version": 1, "energies": {"values": [1.0, 2.0]}})
    assert s.energies.tolist() == [1.0, 2.0]


def test_fmt_and_table():
    assert fmt(0.1) == "0.1" and fmt(float("nan")) == "nan" and fmt(3) == "3" and fmt(True) == "1"
    t = Table(["a", "b"], footer=["done"])
    t.add({"a": 1.5, "b": "x"})
    with pytest.raises(ValueError):
        t.add([1])
    text = t.render("# scatter-channels test generated now")
    assert text.splitlines()[1:] == ["a,b", "1.5,x", "# done"]
    assert body(text) == "a,b\n1.5,x\n# done\n"
    assert json.loads(dumps_json({"v": np.float64(2.0), "n": float("nan")})) == {"n": None, "v": 2.0}


def test_amplitudes_command(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["amplitudes", "--out", str(out), "--no-banner"]) == 0
    rows = _rows(out / "amplitudes.csv")
    assert rows[0] == list(AMPLITUDE_COLUMNS)
    assert len(rows) == 201
    unit = np.array([float(r[11]) for r in rows[1:]])
    assert np.max(np.abs(unit)) < 1e-12
    footer = [l for l in (out / "amplitudes.csv").read_text().splitlines() if l.startswith("# max_unitarity")]
    assert float(footer[0].split("=")[1]) < 1e-12
    assert (out / "amplitudes.gp").exists()


def test_zero_barrier_sweep_has_unit_transmission(tmp_path):
    path = _write(tmp_path, {"schema_version": 1, "barrier": {"rectangular": {"V0": 0.0, "d": 1.0, "a": -0.5}},
                             "energies": {"min": 0.1, "max": 6.0, "count": 30}})
    out = tmp_path / "out"
    assert cli.main(["amplitudes", "--scenario", path, "--out", str(out)]) == 0
    T = [float(r[5]) for r in _rows(out / "amplitudes.csv")[1:]]
    assert np.allclose(T, 1.0, atol=1e-15)


def test_decompose_command_and_zero_barrier(tmp_path):
    out = tmp_path / "ref"
    assert cli.main(["decompose", "--out", str(out), "--no-banner"]) == 0
    rows = _rows(out / "decomposition_000.csv")
    assert rows[0] == list(DECOMPOSITION_COLUMNS)
    path = _write(tmp_path, {"schema_version": 1, "barrier": {"rectangular": {"V0": 0.0, "d": 1.0, "a": -0.5}}})
    out = tmp_path / "free"
    assert cli.main(["decompose", "--scenario", path, "--out", str(out)]) == 0
    data = np.array([[float(v) for v in r] for r in _rows(out / "decomposition_000.csv")[1:]])
    assert np.all(np.abs(data[:, 9:11]) < 1e-15)
    manifest = json.loads((out / "decomposition_manifest.json").read_text())
    assert manifest["files"][0]["E"] == 1.0


def test_exit_codes(tmp_path):
    bad = _write(tmp_path, {"schema_version": 1, "spectrum": {"k0": "x"}})
    out = tmp_path / "never"
    assert cli.main(["amplitudes", "--scenario", bad, "--out", str(out)]) == 2
    assert not out.exists()
    (tmp_path / "broken.json").write_text("{not json")
    assert cli.main(["times", "--scenario", str(tmp_path / "broken.json"), "--out", str(out)]) == 2
    assert cli.main(["times", "--scenario", str(tmp_path / "missing.json"), "--out", str(out)]) == 4
    asym = _write(tmp_path, {"schema_version": 1, "barrier": {"segments": [[0.5, 2.0], [0.5, 1.0]]}})
    assert cli.main(["decompose", "--scenario", asym, "--out", str(out)]) == 3
    assert not out.exists()
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["amplitudes", "--out", str(blocker / "sub")]) == 4
    with pytest.raises(SystemExit) as exc:
        cli.main(["nonsense"])
    assert exc.value.code == 2


def test_asymmetric_message(tmp_path, capsys):
    asym = _write(tmp_path, {"schema_version": 1, "barrier": {"segments": [[0.5, 2.0], [0.5, 1.0]]}})
    cli.main(["decompose", "--scenario", asym, "--out", str(tmp_path / "o")])
    assert "symmetric potential required" in capsys.readouterr().err


def test_banner_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["times", "--out", str(a)]) == 0
    assert cli.main(["times", "--out", str(b), "--no-banner", "--threads", "1"]) == 0
    first = (a / "times.csv").read_text()
    second = (b / "times.csv").read_text()
    assert first.startswith("# scatter-channels times generated")
    assert not second.startswith("#")
    assert body(first) == second


def test_times_command_rows(tmp_path):
    out = tmp_path / "t"
    assert cli.main(["times", "--out", str(out), "--no-banner"]) == 0
    rows = _rows(out / "times.csv")
    header = rows[0]
    free = [r for r in rows if r[0] == "free"][0]
    assert float(free[header.index("dwell_full")]) == pytest.approx(0.5, abs=1e-12)
    assert float(free[header.index("group_delay")]) == pytest.approx(0.5, abs=1e-8)
    h = _rows(out / "hartman.csv")
    assert [float(r[0]) for r in h[1:]] == [6.0, 8.0, 10.0]
