import json
import subprocess
import sys

from argforge.cli import main
from argforge.pipeline import fixture_config_path

CORPUS = [str(fixture_config_path().parent / "fixture_corpus" / n) for n in ("shard_a.jsonl", "shard_b.jsonl")]


def test_stepwise_commands(tmp_path, capsys):
    s, a, asp, docs = (tmp_path / n for n in ("s.jsonl", "a.jsonl", "asp.jsonl", "docs"))
    assert main(["ingest", "--corpus", *CORPUS, "--topic", "nuclear energy", "--query", "nuclear",
                 "--out", str(s)]) == 0
    assert main(["classify", "--in", str(s), "--out", str(a)]) == 0
    assert main(["aspects", "--in", str(a), "--out", str(asp)]) == 0
    assert main(["build-docs", "--in", str(asp), "--max", "100", "--cap", "100", "--out", str(docs)]) == 0
    sizes = sorted(json.loads(l)["n_args"] for l in (docs / "documents.jsonl").read_text().splitlines())
    assert sizes == [40, 60]


def test_query_from_file(tmp_path):
    q = tmp_path / "q.txt"
    q.write_text("(nuclear power) OR (nuclear energy)\n")
    out = tmp_path / "s.jsonl"
    assert main(["ingest", "--corpus", *CORPUS, "--topic", "nuclear energy", "--query", f"@{q}",
                 "--out", str(out)]) == 0
    assert out.read_text().strip()


def test_validation_exit_code(tmp_path, capsys):
    assert main(["ingest", "--corpus", *CORPUS, "--topic", "t", "--query", "(a", "--out", str(tmp_path / "x")]) == 2
    assert "unbalanced" in capsys.readouterr().err
    assert main(["build-docs", "--in", "x", "--min", "20", "--max", "10", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bounds": {"min": 0}}))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_stage_failure_exit_code(tmp_path, capsys):
    bad = tmp_path / "corpus.jsonl"
    bad.write_text("not json\n")
    assert main(["run", "--config", str(fixture_config_path()), "--corpus", str(bad),
                 "--out", str(tmp_path / "o")]) == 3
    assert "ingest" in capsys.readouterr().err


def test_counter_and_eval(tmp_path, capsys):
    assert main(["counter", "--topic", "school uniforms", "--stance", "con",
                 "--text", "School uniforms are expensive and affect the pupil's individuality."]) == 0
    lines = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert [l["control_code"] for l in lines] == ["school uniforms PRO expensive .", "school uniforms PRO individuality ."]
    gen = tmp_path / "gen.jsonl"
    gen.write_text("\n".join(json.dumps(l) for l in lines) + "\n")
    refs = tmp_path / "refs.jsonl"
    refs.write_text(json.dumps({"topic": "school uniforms", "stance": "PRO",
                                "text": "Uniforms are not expensive at all."}) + "\n")
    report = tmp_path / "r.json"
    assert main(["eval", "--generated", str(gen), "--refs", str(refs), "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["presence_rate"] == 1.0 and data["reference"]["metrics"]["excluded"] == 1.0


def test_run_and_module_entry(tmp_path):
    out = tmp_path / "o"
    proc = subprocess.run([sys.executable, "-m", "argforge.cli", "run", "--config", str(fixture_config_path()),
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["documents"] == 4
