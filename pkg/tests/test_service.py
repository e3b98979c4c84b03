"""HTTP endpoints, exercised in-process. The service is stateless; every
request carries its own matrix, and domain violations come back as 422."""

import pytest
from fastapi.testclient import TestClient

from l1line.service import create_app

MATRIX = [
    [4.0, -2.0, 3.0, -6.0],
    [-3.0, 4.0, 2.0, -1.0],
    [2.0, 3.0, -3.0, -2.0],
    [-3.0, 4.0, 2.0, 3.0],
    [5.0, 3.0, 2.0, -1.0],
]


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def test_health(client):
    r = client.get("/healthz")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


def test_fit_endpoint(client):
    r = client.post("/fit", json={"matrix": MATRIX, "lambda": 4.0})
    assert r.status_code == 200
    body = r.json()
    assert body["preserved_column"] == 1  # documents are 1-based
    assert body["l0"] == 2
    assert body["v"] == pytest.approx([1.0, 0.0, 0.0, -0.2], abs=1e-12)
    assert body["z"] == pytest.approx(43.6, abs=1e-9)


def test_fit_penalty_defaults_to_zero(client):
    r = client.post("/fit", json={"matrix": MATRIX})
    assert r.status_code == 200
    assert r.json()["z"] == pytest.approx(34.5, abs=1e-9)


def test_path_endpoint(client):
    r = client.post("/path", json={"matrix": MATRIX})
    assert r.status_code == 200
    body = r.json()
    assert len(body["intervals"]) == 4
    assert body["intervals"][-1]["hi"] == "inf"
    assert body["diagnostics"]["envelope_fallbacks"] == 0
    assert "per_coordinate" not in body
    assert len(body["fingerprint"]) == 64  # filled in when the caller sends none


def test_path_per_coordinate_payload(client):
    r = client.post("/path", json={"matrix": MATRIX, "per_coordinate": True})
    body = r.json()
    per = {p["preserved_column"]: p for p in body["per_coordinate"]}
    assert sorted(per) == [1, 2, 3, 4]
    assert per[1]["breakpoints"] == [1.0, 3.0]
    assert per[4]["breakpoints"] == pytest.approx([3.0, 5.0, 11.0], abs=1e-12)
    assert per[2]["segments"][-1]["hi"] == "inf"


def test_path_echoes_caller_fingerprint(client):
    r = client.post("/path", json={"matrix": MATRIX, "fingerprint": "f" * 64})
    assert r.json()["fingerprint"] == "f" * 64


def test_certify_endpoint_and_negative_control(client):
    r = client.post("/certify", json={"matrix": MATRIX, "lambda": 3.5})
    assert r.status_code == 200
    assert r.json() == {"lambda": 3.5, "pairs": 12, "ok": True, "failures": []}
    r = client.post("/certify", json={"matrix": MATRIX, "lambda": 3.5, "corrupt": True})
    assert r.status_code == 200
    body = r.json()
    assert body["ok"] is False and body["failures"]


def test_simulate_endpoint(client):
    r = client.post(
        "/simulate", json={"n": 30, "m": 4, "nc": 3, "mc": 1, "reps": 2, "seed": 1}
    )
    assert r.status_code == 200
    body = r.json()
    assert [row["label"] for row in body["rows"]] == [
        "l2-baseline",
        "lambda=0",
        "lambda=min",
        "lambda=avg",
        "lambda=max",
    ]
    assert body["reps"] == 2
    assert body["config"]["outlier_scale"] == pytest.approx(50.0)


def test_validation_failures_are_422(client):
    assert client.post("/fit", json={"matrix": MATRIX, "lambda": -1.0}).status_code == 422
    assert client.post("/fit", json={"matrix": [[1.0], [2.0]]}).status_code == 422
    assert client.post("/fit", json={"matrix": []}).status_code == 422
    assert (
        client.post("/simulate", json={"n": 10, "m": 3, "nc": 11, "reps": 1}).status_code
        == 422
    )
    assert client.post("/path", json={}).status_code == 422


def test_requests_do_not_leak_state(client):
    # same matrix twice: identical answers, no cross-request caching effects
    a = client.post("/path", json={"matrix": MATRIX}).json()
    b = client.post("/path", json={"matrix": MATRIX}).json()
    assert a == b