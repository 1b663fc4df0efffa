import csv
import json

import numpy as np

from rolemix import io
from rolemix.anomaly import AnomalyScores, AnomalyTimeSeries
from rolemix.transitions import TransitionMatrix


def read_csv(path):
    with open(path) as fh:
        first = fh.readline()
        rows = list(csv.reader(fh))
    return first, rows


class TestConfigHash:
    def test_stable_under_key_order(self):
        a = io.config_hash({"x": 1, "y": 2})
        b = io.config_hash({"y": 2, "x": 1})
        assert a == b
        assert len(a) == 12

    def test_sensitive_to_values(self):
        assert io.config_hash({"x": 1}) != io.config_hash({"x": 2})


class TestWriters:
    def test_csv_hash_comment_and_rows(self, tmp_path):
        path = tmp_path / "out" / "x.csv"
        io.write_csv(path, ["a", "b"], [[1, 2], [3, 4]], cfg_hash="deadbeef")
        first, rows = read_csv(path)
        assert first == "# config deadbeef\n"
        assert rows == [["a", "b"], ["1", "2"], ["3", "4"]]

    def test_json_hash_field_and_numpy_payloads(self, tmp_path):
        path = tmp_path / "x.json"
        io.write_json(path, {"v": np.arange(3), "s": np.float64(1.5)},
                      cfg_hash="cafe")
        data = json.loads(path.read_text())
        assert data["config_hash"] == "cafe"
        assert data["v"] == [0, 1, 2]
        assert data["s"] == 1.5

    def test_transition_matrix_roundtrip(self, tmp_path):
        tm = TransitionMatrix(np.array([[0.5, 0.5], [0.0, 1.0]]))
        path = tmp_path / "t.csv"
        io.write_transition_matrix(path, tm, cfg_hash="ff")
        _, rows = read_csv(path)
        assert rows[0] == ["from\\to", "role_0", "inactive"]
        got = np.array([[float(x) for x in row[1:]] for row in rows[1:]])
        np.testing.assert_allclose(got, tm.values)

    def test_heatmap_payload(self):
        tm = TransitionMatrix(np.eye(3), scope="global", window=(0, 2))
        payload = io.transition_heatmap_payload(tm)
        assert payload["rows"] == ["role_0", "role_1", "inactive"]
        assert payload["values"] == np.eye(3).tolist()
        assert payload["window"] == (0, 2)

    def test_anomaly_timeseries_skips_nan(self, tmp_path):
        scores = np.array([[np.nan, np.nan], [1.5, np.nan]])
        defined = np.array([[False, False], [True, False]])
        ats = AnomalyTimeSeries(scores=scores, defined=defined)
        path = tmp_path / "a.csv"
        io.write_anomaly_timeseries(path, ats)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows == [["node", "t", "score", "defined"],
                        ["0", "1", "1.5", "1"]]

    def test_top_k_payload(self):
        sc = AnomalyScores(scores=np.array([0.1, 5.0, 3.0]),
                           defined=np.ones(3, dtype=bool), t_evaluated=4)
        payload = io.top_k_payload(sc, 2, labels=["a", "b", "c"])
        assert payload["t"] == 4
        assert [e["node"] for e in payload["top"]] == [1, 2]
        assert payload["top"][0]["label"] == "b"

    def test_edge_list_roundtrip(self, tmp_path):
        from rolemix.temporal import TemporalEdge, parse_edge_list
        edges = [TemporalEdge(0, 1, 2.0, 3.0), TemporalEdge(1, 2, 1.0, 4.0)]
        path = tmp_path / "e.txt"
        io.write_edge_list(path, edges)
        parsed, _ = parse_edge_list(path.read_text())
        assert [e.weight for e in parsed] == [2.0, 1.0]
        assert [e.timestamp for e in parsed] == [3.0, 4.0]
