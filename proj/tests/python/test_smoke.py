import json
import math
import os
import pathlib

import pytest

import litscape

FIXTURE = pathlib.Path(os.environ.get("LITSCAPE_FIXTURE_DIR", "tests/fixtures")) / "synthetic"


def test_parse_response():
    items = litscape.parse_response('["SVM", "LSTM"]')
    assert items == ["SVM", "LSTM"]


def test_ward_and_cut():
    d = litscape.ward_cluster([[0.0, 0.0], [0.0, 1.0], [0.0, 10.0]])
    heights = [s.height for s in d.steps]
    assert heights[0] == pytest.approx(1.0)
    assert heights[1] == pytest.approx(math.sqrt(361 / 3))
    assert litscape.cut_dendrogram(d, 5.0) == [[0, 1], [2]]


def test_f1_and_vectors():
    s = litscape.f1_scores(3, 1, 2)
    assert s.precision == pytest.approx(0.75)
    assert s.recall == pytest.approx(0.6)
    v = litscape.normalize_vector([3.0, 4.0])
    assert v == pytest.approx([0.6, 0.8])
    with pytest.raises(litscape.LitscapeError):
        litscape.normalize_vector([0.0, 0.0])


def test_communities():
    g = litscape.CooccurrenceGraph(
        [litscape.GraphNode("n%d" % i, litscape.Category.Objective if i < 3 else litscape.Category.Dataset,
                            "n%d" % i, 1) for i in range(6)],
        [litscape.GraphEdge(a, b, 1) for a, b in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]],
    )
    assert litscape.modularity(g, [0, 0, 0, 1, 1, 1]) == pytest.approx(0.5)
    best = litscape.best_partition(g)
    assert best.community_count == 2


def test_build_query():
    q = litscape.build_query(["stock"], None)
    assert "stock" in q


def test_pipeline(tmp_path):
    code, log = litscape.run_pipeline(str(FIXTURE / "config.json"), str(tmp_path))
    assert code == 0, log
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["communities"]["modularity"] > 0.4
    eval_ = json.loads((tmp_path / "eval.json").read_text())
    assert eval_["micro"]["tp"] == 6
