import json
import socket

from chartsum.cli import main
from tests.conftest import MINI_CORPUS, STOCKS


def run_cli(*argv):
    return main(list(argv))


def test_analyze_writes_records(tmp_path):
    out = tmp_path / "analysis.json"
    code = run_cli(
        "analyze",
        "--spec", str(STOCKS / "spec.json"),
        "--data", str(STOCKS / "data.csv"),
        "--out", str(out),
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert {r["dimension"] for r in payload["uni_insights"]} == {"Google", "Apple"}
    assert payload["multi_insight"]["pairs"]


def test_analyze_constant_series_single_patch(tmp_path):
    spec = tmp_path / "spec.json"
    data = tmp_path / "data.csv"
    spec.write_text(json.dumps({
        "title": "t", "mark": "line",
        "encoding": {"x": {"field": "date", "type": "temporal"},
                     "y": {"field": "v", "type": "quantitative"}},
    }))
    data.write_text("date,v\n2020,5\n2021,5\n2022,5\n")
    out = tmp_path / "out.json"
    assert run_cli("analyze", "--spec", str(spec), "--data", str(data),
                   "--out", str(out)) == 0
    payload = json.loads(out.read_text())
    assert len(payload["uni_insights"][0]["patches"]) == 1


def test_analyze_bad_csv_reports_row(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    data = tmp_path / "data.csv"
    spec.write_text(json.dumps({
        "title": "t", "mark": "line",
        "encoding": {"x": {"field": "date", "type": "temporal"},
                     "y": {"field": "v", "type": "quantitative"}},
    }))
    data.write_text("date,v\n2020,1\n2021,abc\n")
    assert run_cli("analyze", "--spec", str(spec), "--data", str(data)) == 1
    err = capsys.readouterr().err
    assert "ParseError" in err
    assert "row 3" in err


def test_summarize_deterministic(tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        code = run_cli(
            "summarize",
            "--spec", str(STOCKS / "spec.json"),
            "--data", str(STOCKS / "data.csv"),
            "--backend", "mock", "--seed", "7",
            "--out", str(out),
        )
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_summarize_max_iters_one(tmp_path):
    out = tmp_path / "s.json"
    transcript = tmp_path / "t.log"
    code = run_cli(
        "summarize",
        "--spec", str(STOCKS / "spec.json"),
        "--data", str(STOCKS / "data.csv"),
        "--backend", "mock", "--seed", "7", "--max-iters", "1",
        "--out", str(out), "--transcript", str(transcript),
    )
    assert code == 0
    rounds = [l for l in transcript.read_text().splitlines() if "round=" in l]
    assert len(rounds) == 1


def test_summarize_missing_data_path(tmp_path, capsys):
    code = run_cli(
        "summarize",
        "--spec", str(STOCKS / "spec.json"),
        "--data", str(tmp_path / "missing.csv"),
    )
    assert code == 1


def test_summarize_mock_never_touches_network(tmp_path, monkeypatch):
    def forbidden(*args, **kwargs):
        raise AssertionError("network activity attempted")

    monkeypatch.setattr(socket.socket, "connect", forbidden)
    monkeypatch.setattr(socket, "create_connection", forbidden)
    out = tmp_path / "s.json"
    code = run_cli(
        "summarize",
        "--spec", str(STOCKS / "spec.json"),
        "--data", str(STOCKS / "data.csv"),
        "--backend", "mock", "--seed", "3",
        "--out", str(out),
    )
    assert code == 0


def test_evaluate_mini_corpus(tmp_path):
    out = tmp_path / "report.json"
    assert run_cli("evaluate", "--corpus", str(MINI_CORPUS),
                   "--out", str(out)) == 0
    rows = json.loads(out.read_text())
    assert set(rows) == {"gold", "model-a", "model-b"}


def test_evaluate_diversity_only(tmp_path):
    out = tmp_path / "report.json"
    assert run_cli("evaluate", "--corpus", str(MINI_CORPUS),
                   "--metrics-only", "diversity", "--out", str(out)) == 0
    rows = json.loads(out.read_text())
    assert "semantic_richness" not in rows["gold"]
    assert "remote_clique" in rows["gold"]


def test_evaluate_empty_dir_fails(tmp_path, capsys):
    assert run_cli("evaluate", "--corpus", str(tmp_path)) == 1
    assert "LayoutError" in capsys.readouterr().err


def test_bench_stats_hand_tally(tmp_path):
    out = tmp_path / "stats.json"
    assert run_cli("bench-stats", "--corpus", str(MINI_CORPUS),
                   "--out", str(out)) == 0
    stats = json.loads(out.read_text())
    assert stats["total"] == 12
    assert stats["counts"]["ExtremumError"] == 2


def test_bench_stats_bad_type_names_entry(tmp_path, capsys):
    import shutil

    corpus = tmp_path / "corpus"
    shutil.copytree(MINI_CORPUS / "tech-stocks", corpus / "tech-stocks")
    path = corpus / "tech-stocks" / "generated" / "model-a.summary.json"
    payload = json.loads(path.read_text())
    payload["annotations"][0]["type"] = "NotAType"
    path.write_text(json.dumps(payload))
    code = run_cli("bench-stats", "--corpus", str(corpus))
    err = capsys.readouterr().err
    assert "tech-stocks" in err
    assert code == 1  # the only entry failed, nothing left to tally


def test_text_format_outputs(capsys):
    assert run_cli("bench-stats", "--corpus", str(MINI_CORPUS),
                   "--format", "text") == 0
    out = capsys.readouterr().out
    assert "ExtremumError" in out.splitlines()[2]
