from __future__ import annotations

import io
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from conftest import BRAKING_NET, BRAKING_VIEW, CORPUS
from fnet.cli import run


def invoke(*argv: str) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def workdir(tmp_path: Path) -> Path:
    for p in CORPUS.iterdir():
        shutil.copy(p, tmp_path / p.name)
    return tmp_path


def test_clean_corpus():
    assert invoke("check", str(BRAKING_NET), "--view", str(BRAKING_VIEW)) == (0, "", "")


def test_views_directory():
    code, out, _ = invoke("check", str(BRAKING_NET), "--views", str(CORPUS))
    assert (code, out) == (0, "")


def test_mutated_view(workdir: Path):
    view = workdir / "braking.fview"
    view.write_text(view.read_text().replace("block HydraulicActuation\n", "block AutoPilot\n", 1))
    code, out, _ = invoke("check", str(workdir / "braking.fnet"), "--view", str(view))
    lines = out.splitlines()
    assert code == 1
    assert len(lines) == 1
    assert "error[V001]" in lines[0] and lines[0].startswith(f"{view}:")


def test_missing_file():
    code, out, err = invoke("check", "missing.fnet")
    assert (code, out) == (2, "")
    assert err.startswith("fnet: cannot read missing.fnet")


def test_missing_views_directory():
    assert invoke("check", str(BRAKING_NET), "--views", "nowhere")[0] == 2


def test_usage_errors():
    assert invoke()[0] == 2
    assert invoke("check")[0] == 2
    assert invoke("frobnicate", "x")[0] == 2


def test_invalid_utf8(tmp_path: Path):
    bad = tmp_path / "bad.fnet"
    bad.write_bytes(b"block \xff")
    code, _, err = invoke("lint", str(bad))
    assert code == 2 and "not valid UTF-8" in err


def test_syntax_error_is_a_finding(tmp_path: Path):
    bad = tmp_path / "bad.fnet"
    bad.write_text("block {")
    code, out, _ = invoke("check", str(bad))
    assert code == 1 and "[P001]" in out


def test_warnings_do_not_fail_unless_strict(tmp_path: Path):
    net = tmp_path / "n.fnet"
    net.write_text("block A\nblock B\nconnect A -> B\n")
    code, out, _ = invoke("lint", str(net))
    assert code == 0 and "warning[W001]" in out
    code, out, _ = invoke("lint", str(net), "--strict")
    assert code == 1 and "error[W001]" in out


def test_json_output_matches_text(workdir: Path):
    view = workdir / "braking.fview"
    view.write_text(view.read_text().replace("[decelRequest]", "[steeringAngle]"))
    args = ["check", str(workdir / "braking.fnet"), "--views", str(workdir)]
    code_text, text, _ = invoke(*args)
    code_json, raw, _ = invoke(*args, "--format", "json")
    assert code_text == code_json == 1
    doc = json.loads(raw)
    assert doc["schema_version"] == 1
    rendered = [
        f"{d['span']['file']}:{d['span']['line']}:{d['span']['col']}: {d['severity']}[{d['code']}]: {d['message']}"
        for d in doc["diagnostics"]
    ]
    assert rendered == text.splitlines()


def test_single_connector_flag(tmp_path: Path):
    net = tmp_path / "n.fnet"
    net.write_text("signal s\nsignal t\nblock A { block X block Y }\nblock B\n"
                   "connect A.X -> B : [s]\nconnect A.Y -> B : [t]\n")
    view = tmp_path / "v.fview"
    view.write_text("view V { connect A -> B : [s, t] }\n")
    assert invoke("check", str(net), "--view", str(view))[0] == 0
    assert invoke("check", str(net), "--view", str(view), "--cc3-single-connector")[0] == 1


def test_output_file(tmp_path: Path):
    target = tmp_path / "out.json"
    code, out, _ = invoke("export", "json", str(BRAKING_NET), "-o", str(target))
    assert (code, out) == (0, "")
    assert len(json.loads(target.read_text())["blocks"]) == 8


def test_export_dot():
    code, out, _ = invoke("export", "dot", str(BRAKING_NET), "--views", str(CORPUS),
                          "--highlight", "Braking", "--no-signals")
    assert code == 0 and out.startswith("digraph fnet {")
    assert invoke("export", "dot", str(BRAKING_NET), "--highlight", "Nope")[0] == 2


def test_query_impact():
    code, out, _ = invoke("query", "impact", "Vehicle.ACC.DistanceControl", str(BRAKING_NET),
                          "--views", str(CORPUS))
    assert code == 0
    assert out.splitlines()[0] == "impact of Vehicle.ACC.DistanceControl:"
    assert any("superblock-match" in line for line in out.splitlines())
    assert invoke("query", "impact", "Vehicle.Gearbox", str(BRAKING_NET))[0] == 2


def test_query_matrix_csv():
    code, out, _ = invoke("query", "matrix", str(BRAKING_NET), "--views", str(CORPUS), "--format", "csv")
    assert code == 0
    rows = out.splitlines()
    assert [r.split(",")[0] for r in rows] == ["view", "ACCFeature", "Braking", "NormalBrake"]


def test_fmt_is_idempotent(workdir: Path):
    files = sorted(str(p) for p in workdir.iterdir())
    assert invoke("fmt", *files)[0] == 0
    once = {f: Path(f).read_text() for f in files}
    assert invoke("fmt", *files)[0] == 0
    assert {f: Path(f).read_text() for f in files} == once
    # the canonical form still checks clean
    assert invoke("check", str(workdir / "braking.fnet"), "--views", str(workdir)) == (0, "", "")


def test_fmt_rejects_unknown_extension(tmp_path: Path):
    other = tmp_path / "notes.txt"
    other.write_text("")
    assert invoke("fmt", str(other))[0] == 2


def test_fmt_leaves_broken_files_alone(tmp_path: Path):
    bad = tmp_path / "bad.fnet"
    bad.write_text("block {\n")
    code, out, _ = invoke("fmt", str(bad))
    assert code == 1 and "[P001]" in out
    assert bad.read_text() == "block {\n"


def test_entry_point_runs_as_module():
    proc = subprocess.run(
        [sys.executable, "-m", "fnet", "check", str(BRAKING_NET), "--view", str(BRAKING_VIEW)],
        capture_output=True, text=True,
    )
    assert (proc.returncode, proc.stdout) == (0, "")
