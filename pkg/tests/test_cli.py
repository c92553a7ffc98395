import json

from stomega.cli import EXIT_ERROR, EXIT_PASS, RunConfig, body_bytes, main, run, stringify


def test_betti_report(tmp_path):
    out = tmp_path / "r.json"
    assert main(["betti", "--n", "2", "--p", "2", "--out", str(out)]) == EXIT_PASS
    doc = json.loads(out.read_text())
    assert doc["body"]["results"]["betti"]["1"] == "16"
    assert set(doc["header"]) == {"schema_version", "tool_version", "sign_convention", "run_info"}


def test_reports_are_deterministic(tmp_path):
    a, _ = run("presentation", RunConfig("presentation", cache_dir=tmp_path))
    b, _ = run("presentation", RunConfig("presentation", cache_dir=tmp_path))
    assert body_bytes(a) == body_bytes(b)


def test_tampered_cache_rebuilds(tmp_path, caplog):
    run("d2-check", RunConfig("d2-check", degree_max=1, cache_dir=tmp_path))
    f = next(tmp_path.glob("*degree1*"))
    doc = json.loads(f.read_text())
    doc["payload"]["gens"][0][0][1][0] = [1, 1, 1, 1]
    f.write_text(json.dumps(doc))
    rep, status = run("d2-check", RunConfig("d2-check", degree_max=1, cache_dir=tmp_path))
    assert status == EXIT_PASS
    assert "rejected" in caplog.text


def test_version_in_cache_key(tmp_path):
    run("presentation", RunConfig("presentation", cache_dir=tmp_path))
    assert all("-v" in f.name for f in tmp_path.iterdir())


def test_config_error_exit():
    doc, status = run("betti", RunConfig("betti", n=0))
    assert status == EXIT_ERROR and "error" in doc["body"]


def test_budget_error_exit():
    doc, status = run("presentation", RunConfig("presentation", n=2, p=5))
    assert status == EXIT_ERROR and doc["body"]["error"]["type"] == "ResourceError"


def test_congruence_task():
    doc, status = run("congruence-check", RunConfig("congruence-check", n=1, p=3, trials=50))
    assert status == EXIT_PASS
    assert doc["body"]["results"]["relations"]["byk1"]["passes"] == "50"


def test_export(tmp_path):
    run("presentation", RunConfig("presentation", export_matrices=tmp_path))
    text = (tmp_path / "presentation-n2-p2-d1.txt").read_text()
    assert text.split()[:2] == ["180", "960"]


def test_stringify():
    assert stringify({1: [2, True, None]}) == {"1": ["2", True, None]}
