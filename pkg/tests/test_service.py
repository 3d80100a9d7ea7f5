import warnings

import pytest

from fdwpcn.config import SystemConfig, config_to_text
from fdwpcn.service.app import create_app

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from starlette.testclient import TestClient


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def spec_text():
    base = SystemConfig(K=2, Mx=2, Mz=1, rng_seed=0)
    return config_to_text(base, extra={
        "sweep_axis": "Pmax_dBm", "sweep_values": "30",
        "schemes": "no_irs,random_phase", "n_seeds": "2", "seed0": "5"})


class TestHealth:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"


class TestRunEndpoint:
    def test_run_experiment(self, client):
        response = client.post("/experiments/run", json={"spec_text": spec_text()})
        assert response.status_code == 200
        body = response.json()
        assert body["n_errors"] == 0
        assert len(body["rows"]) == 4
        assert body["csv"].splitlines()[0] == (
            "scheme,axis,value,seed,objective,iterations,xi_final,wallclock_ms")
        assert len(body["aggregates"]) == 2
        checksums = {r["channel_checksum"] for r in body["rows"]
                     if r["seed"] == body["rows"][0]["seed"]}
        assert len(checksums) == 1

    def test_deterministic_csv_through_service(self, client):
        a = client.post("/experiments/run", json={"spec_text": spec_text()})
        b = client.post("/experiments/run", json={"spec_text": spec_text()})
        assert a.json()["csv"] == b.json()["csv"]

    def test_bad_spec_rejected(self, client):
        response = client.post("/experiments/run", json={"spec_text": "K = 2\n"})
        assert response.status_code == 422

    def test_missing_body_rejected(self, client):
        response = client.post("/experiments/run", json={})
        assert response.status_code == 422


class TestTraceEndpoint:
    def test_trace(self, client):
        config = config_to_text(SystemConfig(K=2, Mx=2, Mz=1))
        response = client.post("/trace", json={
            "config_text": config, "scheme": "fd_perfect", "seed": 3})
        assert response.status_code == 200
        body = response.json()
        assert body["csv"].splitlines()[0] == "iter,objective"
        assert body["scheme"] == "fd_perfect"

    def test_unknown_scheme_rejected(self, client):
        config = config_to_text(SystemConfig(K=2, Mx=2, Mz=1))
        response = client.post("/trace", json={
            "config_text": config, "scheme": "bogus", "seed": 3})
        assert response.status_code == 422


class TestChannelsEndpoint:
    def test_dump(self, client):
        config = config_to_text(SystemConfig(K=2, Mx=2, Mz=1))
        response = client.post("/channels/dump", json={"config_text": config})
        assert response.status_code == 200
        assert response.json()["csv"].splitlines()[0] == "link,k,m,re,im"

    def test_bad_config_rejected(self, client):
        response = client.post("/channels/dump", json={"config_text": "K = 0"})
        assert response.status_code == 422
