import json

import pytest

from edcsmatch.errors import InfeasibleParams
from edcsmatch.graph import max_cardinality_matching_exact
from edcsmatch.harness import ExperimentSpec, emit_report, generate_graph, run_experiment


def test_cycle_fixture():
    g = generate_graph("cycle", 4)
    assert sorted((min(u, v), max(u, v)) for u, v, _ in g.edges) ==[(0, 1), (0, 3), (1, 2), (2, 3)]
    assert {w for *_, w in g.edges} == {1}


def test_same_seed_same_graph():
    a = generate_graph("uniform", 20, m=40, weights="uniform", W=5, seed=3)
    b = generate_graph("uniform", 20, m=40, weights="uniform", W=5, seed=3)
    assert a.edges == b.edges
    assert a.edges != generate_graph("uniform", 20, m=40, weights="uniform", W=5, seed=4).edges


def test_planted_has_perfect_matching():
    g = generate_graph("planted", 30, m=60, seed=1)
    assert max_cardinality_matching_exact(g).size == 15


def test_bipartite_is_balanced():
    g = generate_graph("bipartite", 9, m=10, seed=0)
    assert g.bipartition == (0,) * 4 + (1,) * 5


def test_geometric_weights_in_range():
    g = generate_graph("uniform", 30, m=100, weights="geometric", R=1000, seed=2)
    assert all(1 <= w <= 1000 for *_, w in g.edges)


def test_infeasible():
    with pytest.raises(InfeasibleParams):
        generate_graph("uniform", 4, m=7)
    with pytest.raises(InfeasibleParams):
        generate_graph("planted", 5)
    with pytest.raises(InfeasibleParams):
        generate_graph("hypercube", 5)


def fixture_spec(trials, scenario="stream", overrides=None):
    return ExperimentSpec(scenario, {"kind": "uniform", "n": 14, "m": 30, "weights": "uniform", "W": 3, "seed": 5},
                          overrides or {"eps": "0.05", "beta": 8, "lam": "0.1"}, trials, 11)


def test_single_trial():
    records, summary = run_experiment(fixture_spec(1))
    assert len(records) == 1 and summary["trials"] == 1
    assert summary["min"] == summary["mean"] == float(records[0].ratio)


def test_many_trials_distinct_seeds(monkeypatch):
    import edcsmatch.harness as h
    calls = []
    orig = h.exact_optimum
    monkeypatch.setattr(h, "exact_optimum", lambda g: calls.append(1) or orig(g))
    records, _ = run_experiment(fixture_spec(100))
    assert len({r.seed for r in records}) == 100
    assert len(calls) == 1
    assert all(0 <= r.ratio <= 1 for r in records)


def test_comm_and_bucketed_scenarios():
    recs, _ = run_experiment(fixture_spec(3, "comm", {"eps": "0.1", "beta": 8, "lam": "0.1", "parties": 3}))
    assert all(r.msg_words >= 2 and r.error is None for r in recs)
    recs, _ = run_experiment(fixture_spec(2, "stream", {"eps": "0.1", "beta": 8, "lam": "0.1",
                                                        "bucketed": True, "gamma_cap": 2}))
    assert all(r.error is None and r.extra["bucket_span"] >= 1 for r in recs)


def test_errors_do_not_abort():
    spec = ExperimentSpec("stream", {"kind": "uniform", "n": 10, "m": 12, "weights": "geometric", "R": 10,
                                     "seed": 0}, {"eps": "0.1", "beta": 8, "lam": "0.1"}, 3, 0)
    records, summary = run_experiment(spec)
    assert len(records) == 3 and summary["errors"] == 3
    assert "NonIntegralWeight" in records[0].error


def test_csv_report(tmp_path):
    records, _ = run_experiment(fixture_spec(1))
    text = emit_report(records, "csv", tmp_path / "r.csv")
    lines = text.splitlines()
    assert len(lines) == 2
    assert lines[0] == "seed,ratio,output_weight,optimum,h_edges,u_edges,phase1_batches,msg_words,ms"


def test_json_round_trips_config(tmp_path):
    spec = fixture_spec(2)
    records, summary = run_experiment(spec)
    doc = json.loads(emit_report(records, "json", None, spec, summary))
    again = ExperimentSpec.from_json(doc["spec"])
    assert again == spec
    r2, _ = run_experiment(again)
    assert [r.row() | {"ms": 0} for r in r2] == [r.row() | {"ms": 0} for r in records]


def test_empty_report_refused():
    with pytest.raises(ValueError):
        emit_report([], "csv")
