"""
Tests for the HTTP routes, driven through FastAPI's TestClient.
"""
from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from plasticity_symmetry.main import app


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


class TestRoutes:
    def test_health(self, client):
        body = client.get("/v1/health").json()
        assert body["status"] == "ok"
        assert "version" in body

    def test_normal_form(self, client):
        resp = client.post("/v1/classify/normal-form", json={"f": "2t^2 + 6t^3"})
        assert resp.status_code == 200
        body = resp.json()
        assert (body["m1"], body["m2"], body["mu"]) == (2, 3, 1)
        assert body["roundtrip"] is True

    def test_both_zero_is_bad_request(self, client):
        resp = client.post("/v1/classify/normal-form", json={"f": "0", "g": "0"})
        assert resp.status_code == 400

    def test_missing_slot_is_validation_error(self, client):
        assert client.post("/v1/classify/normal-form", json={}).status_code == 422

    def test_adjoint_report(self, client):
        resp = client.post("/v1/adjoint", json={"gen": "L", "on": "X[t^2]", "trials": 8})
        assert resp.status_code == 200
        assert resp.json()["passed"] is True

    def test_unknown_generator_is_bad_request(self, client):
        resp = client.post("/v1/adjoint", json={"gen": "Q", "on": "D"})
        assert resp.status_code == 400

    def test_residual_of_source_flow(self, client):
        resp = client.post("/v1/solutions/R10/residual", json={"points": 10})
        assert resp.status_code == 200
        report = resp.json()
        assert report["command"] == "solution residual"
        assert report["passed"] is True

    def test_unknown_family_is_bad_request(self, client):
        resp = client.post("/v1/solutions/R99/residual", json={})
        assert resp.status_code == 400

    def test_flowfield_csv(self, client):
        resp = client.get("/v1/solutions/R17/flowfield",
                          params={"t": 0.1, "lo": -1, "hi": 1, "n": 3})
        assert resp.status_code == 200
        assert resp.headers["content-type"].startswith("text/csv")
        lines = resp.text.splitlines()
        assert lines[1] == "x,y,u,v"
        assert len(lines) == 2 + 8

    def test_flowfield_needs_positive_time(self, client):
        resp = client.get("/v1/solutions/R17/flowfield", params={"t": 0})
        assert resp.status_code == 400
