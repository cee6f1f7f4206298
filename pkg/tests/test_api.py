import math

import pytest
from fastapi.testclient import TestClient

from logspectra import __version__
from logspectra.main import app

client = TestClient(app)


def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "healthy"
    assert body["version"] == __version__


def test_constants():
    response = client.get("/constants", params={"dim": 1, "s": 0.5})
    assert response.status_code == 200
    body = response.json()
    assert body["c_frac"] == pytest.approx(1.0 / math.pi)
    assert body["omega"] == pytest.approx(2.0)


def test_constants_rejects_order_out_of_range():
    assert client.get("/constants", params={"s": 1.5}).status_code == 422


def test_opeval():
    payload = {"op": "log", "bump": "smooth-bump", "center": [0.0], "radius": 0.5, "at": [2.0]}
    response = client.post("/opeval", json=payload)
    assert response.status_code == 200
    assert response.json()["value"] < 0.0


def test_opeval_bad_input_is_a_client_error():
    response = client.post("/opeval", json={"bump": "gaussian"})
    assert response.status_code == 400
    response = client.post("/opeval", json={"center": [0.0], "at": [0.0, 1.0]})
    assert response.status_code == 400


def test_bounds_table():
    response = client.get("/bounds", params={"dim": 2, "s": "0.1,0.05"})
    assert response.status_code == 200
    body = response.json()
    assert [row["s"] for row in body["rows"]] == [0.1, 0.05]
    assert body["checks"] == []


def test_bounds_with_galerkin_checks():
    response = client.get("/bounds", params={"dim": 1, "s": "0.1", "galerkin": True, "n": 16})
    assert response.status_code == 200
    assert all(check["passed"] for check in response.json()["checks"])


def test_bounds_rejects_unparsable_grid():
    assert client.get("/bounds", params={"s": "abc"}).status_code == 400
