import math

import pytest
from fastapi.testclient import TestClient

from sd2e.service.app import app

client = TestClient(app)

FAST_SYNTH = {"sample_count": 300, "feature_dim": 12, "seed": 0}
FAST_DECODE = {
    "data": {"synthetic": FAST_SYNTH},
    "n_levels": 2,
    "outer_iterations": 2,
    "em_iterations": 2,
    "lookback": 3,
    "regressor": {"kind": "linear"},
}


def test_health():
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


class TestRobustness:
    def test_table(self):
        resp = client.post("/robustness", json={"length": 25, "width": 15, "n_max": 3})
        assert resp.status_code == 200
        rows = resp.json()["rows"]
        assert len(rows) == 4
        assert rows[3]["r_x"] == pytest.approx(3.125)
        assert rows[3]["r_xy"] == pytest.approx(math.hypot(3.125, 1.875))

    def test_validation(self):
        resp = client.post("/robustness", json={"length": -1})
        assert resp.status_code == 422


class TestRmse:
    def test_value(self):
        resp = client.post("/rmse", json={"pred": [0, 0], "truth": [3, 4]})
        assert resp.status_code == 200
        assert resp.json()["rmse"] == pytest.approx(math.sqrt(12.5))

    def test_length_mismatch_is_422(self):
        resp = client.post("/rmse", json={"pred": [0], "truth": [1, 2]})
        assert resp.status_code == 422


class TestDecode:
    def test_small_synthetic(self):
        resp = client.post("/decode", json=FAST_DECODE)
        assert resp.status_code == 200
        report = resp.json()["report"]
        assert report["mode"] == "closed"
        assert report["cost"]["n1"] == 2
        m = report["test"]
        assert m["rmse_xy"] == pytest.approx(math.hypot(m["rmse_x"], m["rmse_y"]))

    def test_deterministic_payload(self):
        r1 = client.post("/decode", json=FAST_DECODE).json()
        r2 = client.post("/decode", json=FAST_DECODE).json()
        assert r1 == r2

    def test_bad_mode_is_422(self):
        resp = client.post("/decode", json={**FAST_DECODE, "mode": "sideways"})
        assert resp.status_code == 422

    def test_missing_data_source_is_422(self):
        resp = client.post("/decode", json={**FAST_DECODE, "data": {}})
        assert resp.status_code == 422

    def test_missing_csv_is_400(self, tmp_path):
        resp = client.post(
            "/decode",
            json={
                **FAST_DECODE,
                "data": {
                    "train_csv": str(tmp_path / "a.csv"),
                    "test_csv": str(tmp_path / "b.csv"),
                },
            },
        )
        assert resp.status_code == 400


class TestSweepAndAblate:
    def test_sweep(self):
        resp = client.post("/sweep", json={**FAST_DECODE, "n_max": 1})
        assert resp.status_code == 200
        rows = resp.json()["rows"]
        assert [r["N"] for r in rows] == [0, 1]

    def test_ablate(self):
        resp = client.post("/ablate", json=FAST_DECODE)
        assert resp.status_code == 200
        names = [r["algorithm"] for r in resp.json()["rows"]]
        assert names[0] == "Un-EM"
        assert "full(G)" in names
