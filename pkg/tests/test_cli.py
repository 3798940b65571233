import json

import pytest

from edcsmatch.cli import main


@pytest.fixture
def graph(tmp_path):
    path = tmp_path / "g.txt"
    assert main(["gen", "--kind", "bipartite", "--n", "12", "--m", "20", "--weights", "uniform", "--W", "3",
                 "--seed", "2", "--out", str(path)]) == 0
    return path


def test_unfold(graph, tmp_path):
    out = tmp_path / "phi.txt"
    assert main(["unfold", "--in", str(graph), "--out", str(out)]) == 0
    first = out.read_text().splitlines()[1].split()
    assert "_" in first[0] and first[2] == "1"


def test_stream_run_json(graph, tmp_path):
    out = tmp_path / "r.json"
    assert main(["stream", "run", "--graph", str(graph), "--eps", "0.05", "--beta", "32", "--lambda", "0.1",
                 "--trials", "2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["records"]) == 2 and doc["records"][0]["config"]["beta"] == 32


def test_stream_run_bucketed_csv(graph, tmp_path, capsys):
    assert main(["stream", "run", "--graph", str(graph), "--bucketed", "--gamma-cap", "4", "--beta", "8",
                 "--lambda", "0.1", "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("seed,ratio")


def test_comm_run(graph, tmp_path):
    out = tmp_path / "c.json"
    assert main(["comm", "run", "--graph", str(graph), "--parties", "3", "--beta", "8", "--lambda", "0.1",
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["records"][0]["msg_words"] >= 2


def test_verify_unfold(graph, capsys):
    assert main(["verify", "unfold", "--graph", str(graph)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mu_w"] == str(doc["mu_phi"])


def test_verify_edcs(tmp_path, capsys):
    g = tmp_path / "c4.txt"
    g.write_text("4 4\n0 1 1\n1 2 1\n2 3 1\n3 0 1\n")
    h = tmp_path / "h.txt"
    h.write_text("4 2\n0 1 1\n2 3 1\n")
    assert main(["verify", "edcs", "--graph", str(g), "--subgraph", str(h), "--beta", "2"]) == 0
    h.write_text("4 0\n")
    assert main(["verify", "edcs", "--graph", str(g), "--subgraph", str(h), "--beta", "2"]) == 1


def test_verify_blossom(tmp_path):
    g = tmp_path / "tri.txt"
    g.write_text("3 3\n0 1 1\n1 2 1\n0 2 1\n")
    x = tmp_path / "x.txt"
    x.write_text("0 1 1/2\n1 2 1/2\n0 2 1/2\n")
    assert main(["verify", "blossom", "--graph", str(g), "--x", str(x), "--eps", "1/3"]) == 1
    x.write_text("0 1 1\n")
    assert main(["verify", "blossom", "--graph", str(g), "--x", str(x), "--eps", "1/3"]) == 0


def test_verify_xval(tmp_path):
    g = tmp_path / "g.txt"
    g.write_text("5 5\n0 1 2\n1 2 1\n2 3 2\n3 4 1\n0 4 1\n")
    assert main(["verify", "xval", "--graph", str(g), "--eps", "0.2", "--blossom"]) == 0


def test_parse_error_exit_code(tmp_path, capsys):
    g = tmp_path / "bad.txt"
    g.write_text("3 1\n0 1 abc\n")
    assert main(["verify", "unfold", "--graph", str(g)]) == 2
    assert "line 2" in capsys.readouterr().err
