import json
import shutil

import pytest

from mateforge.cli import main
from mateforge.fixtures import EXPECTED_VERDICTS, FIXTURE_NAMES
from mateforge.io import load_assembly


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    assert main(["fixtures", str(d)]) == 0
    return d


def run(argv, report):
    code = main(argv + ["--report", str(report)])
    return code, json.loads(report.read_text())


def test_fixtures_written(corpus):
    assert sorted(p.stem for p in corpus.glob("*.json")) == sorted(FIXTURE_NAMES)


def test_fixture_subset_and_unknown(tmp_path):
    assert main(["fixtures", str(tmp_path / "a"), "telescope", "--seed", "2", "--report", str(tmp_path / "r")]) == 0
    assert [p.name for p in (tmp_path / "a").iterdir()] == ["telescope.json"]
    assert main(["fixtures", str(tmp_path / "b"), "nope"]) == 2


def test_filter_verdicts(corpus, tmp_path):
    code, rep = run(["filter", str(corpus)], tmp_path / "r.json")
    assert code == 0
    got = {o["assembly_id"]: o["stage"] for o in rep["outcomes"]}
    assert got == EXPECTED_VERDICTS
    assert rep["kept"] == sorted(k for k, v in EXPECTED_VERDICTS.items() if v is None)


def test_reports_identical_across_jobs_and_repeats(corpus, tmp_path):
    blobs = []
    for i, jobs in enumerate(["1", "1", "2", "4"]):
        p = tmp_path / f"r{i}.json"
        assert main(["filter", str(corpus), "--jobs", jobs, "--report", str(p)]) == 0
        blobs.append(p.read_bytes())
    assert len(set(blobs)) == 1


def test_densify_out(corpus, tmp_path):
    out = tmp_path / "out"
    code, rep = run(["densify", str(corpus), "--out", str(out)], tmp_path / "r.json")
    assert code == 0
    assert rep["densified"]["telescope"] == ["densified:bracket_r:tube"]
    tele = load_assembly(out / "telescope.json")
    assert any(m.provenance.value == "densified" for m in tele.mates)
    # re-densifying the output adds nothing
    code, rep2 = run(["densify", str(out)], tmp_path / "r2.json")
    assert all(v == [m for m in rep["densified"][k]] for k, v in rep2["densified"].items())


def test_filter_out_writes_originals(corpus, tmp_path):
    out = tmp_path / "out"
    assert main(["filter", str(corpus), "--out", str(out), "--report", str(tmp_path / "r")]) == 0
    assert (out / "telescope.json").read_bytes() == (corpus / "telescope.json").read_bytes()


def test_stats(corpus, tmp_path):
    code, rep = run(["stats", str(corpus)], tmp_path / "r.json")
    assert code == 0
    s = rep["stats"]
    assert s["total"] == len(FIXTURE_NAMES) and s["kept"] == 4 and s["errors"] == 0


def test_stats_empty_dir(tmp_path):
    (tmp_path / "empty").mkdir()
    code, rep = run(["stats", str(tmp_path / "empty")], tmp_path / "r.json")
    assert code == 0
    assert rep["stats"]["total"] == 0 and rep["stats"]["kept"] == 0 and rep["errors"] == []


def test_bad_file_exit_one(corpus, tmp_path):
    d = tmp_path / "c"
    shutil.copytree(corpus, d)
    (d / "broken.json").write_text("{oops")
    code, rep = run(["filter", str(d)], tmp_path / "r.json")
    assert code == 1
    assert rep["errors"][0]["file"] == "broken.json"
    assert "MalformedDocumentError" in rep["errors"][0]["error"]
    assert len(rep["outcomes"]) == len(FIXTURE_NAMES)
    code, rep = run(["stats", str(d)], tmp_path / "s.json")
    assert code == 1 and rep["stats"]["errors"] == 1


def test_duplicate_ids_reported(corpus, tmp_path):
    d = tmp_path / "c"
    d.mkdir()
    shutil.copy(corpus / "telescope.json", d / "a.json")
    shutil.copy(corpus / "telescope.json", d / "b.json")
    code, rep = run(["filter", str(d)], tmp_path / "r.json")
    assert code == 1 and "duplicate" in rep["errors"][0]["error"]


def test_usage_errors(tmp_path):
    assert main(["filter", str(tmp_path / "missing")]) == 2
    assert main(["bogus"]) == 2
    assert main(["filter", str(tmp_path), "--jobs", "0"]) == 2
    cfg = tmp_path / "c.json"
    cfg.write_text('{"unknown": 1}')
    assert main(["stats", str(tmp_path), "--config", str(cfg)]) == 2
    assert main(["analyze", str(tmp_path / "nothing.json")]) == 2


def test_analyze(corpus, tmp_path):
    code, rep = run(["analyze", str(corpus / "telescope.json")], tmp_path / "r.json")
    assert code == 0
    assert rep["id"] == "telescope"
    assert {m["id"] for m in rep["mates"]} == {m.id for m in load_assembly(corpus / "telescope.json").mates}
    assert rep["relative_motions"]


def test_analyze_bad_document(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("[]")
    code, rep = run(["analyze", str(p)], tmp_path / "r.json")
    assert code == 1 and "SchemaError" in rep["errors"][0]["error"]


def test_predict_and_evaluate(corpus, tmp_path):
    out = tmp_path / "pred"
    code, rep = run(["predict", str(corpus), "--out", str(out), "--jobs", "2"], tmp_path / "p.json")
    assert code == 0
    assert sorted(rep["predicted"]) == sorted(FIXTURE_NAMES)
    preds = load_assembly(out / "shaft_hole.json")
    assert all(m.provenance.value == "predicted" for m in preds.mates)

    code, rep = run(["evaluate", str(out), str(corpus)], tmp_path / "e.json")
    assert code == 1 and rep["errors"][0]["assembly_id"] == "planar_tagged"
    assert rep["report"]["n"] > 0


def test_evaluate_self_is_perfect(corpus, tmp_path):
    kept = tmp_path / "kept"
    assert main(["filter", str(corpus), "--out", str(kept), "--report", str(tmp_path / "f")]) == 0
    ann = tmp_path / "ann.json"
    ann.write_text(json.dumps({"annotations": {"m": ["revolute", "revolute", "slider"]}, "original": {"m": "revolute"}}))
    code, rep = run(["evaluate", str(kept), str(kept), "--annotations", str(ann)], tmp_path / "e.json")
    assert code == 0
    assert rep["report"]["type_accuracy"] == 1.0
    assert rep["report"]["axis_accuracy_overall"] == 1.0
    assert rep["report"]["expert_agreement"]["consensus_fraction"] == 1.0
