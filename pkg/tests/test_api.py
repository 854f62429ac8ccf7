import io

import pytest
from fastapi.testclient import TestClient
from PyPDF2 import PdfReader

from app.main import app
from app.schemas import InequalityModel
from app.services.inequalities import gyni_inequality

from tests.conftest import single_term_inequality


@pytest.fixture
def client():
    return TestClient(app)


def inequality_json(inequality):
    return InequalityModel.from_domain(inequality).model_dump()


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_generate_and_check(client):
    response = client.post("/sets/generate", json={"family": "shifts"})
    assert response.status_code == 200
    product_set = response.json()
    assert len(product_set["members"]) == 4

    response = client.post("/sets/check/upb", json={"set": product_set})
    assert response.status_code == 200
    assert response.json()["unextendible"] is True

    response = client.post("/sets/check/property-p", json={"set": product_set})
    assert response.json()["subsets"][0] == [[0, 1], [2, 3]]


def test_unknown_check_kind(client):
    product_set = client.post("/sets/generate", json={"family": "shifts"}).json()
    assert client.post("/sets/check/bogus", json={"set": product_set}).status_code == 400


def test_degenerate_e_is_a_bad_request(client):
    response = client.post("/sets/generate", json={"family": "gyni", "n": 4, "e": [1, 0, 0, 0]})
    assert response.status_code == 400


def test_extend(client):
    product_set = client.post("/sets/generate", json={"family": "gyni", "n": 3}).json()
    response = client.post("/sets/extend", json={"set": product_set})
    assert response.status_code == 200
    assert len(response.json()["members"]) == 8


def test_gyni_and_canonical(client):
    response = client.get("/inequalities/gyni/3")
    assert response.status_code == 200
    assert len(response.json()["terms"]) == 4
    assert client.get("/inequalities/gyni/2").status_code == 400

    canonical = client.post("/inequalities/canonical", json={"inequality": response.json()})
    assert canonical.status_code == 200
    assert canonical.json()["classical_bound"] == "1/1"


def test_from_set(client):
    product_set = client.post("/sets/generate", json={"family": "shifts"}).json()
    response = client.post("/inequalities/from-set", json={"set": product_set, "weights": ["1", "2/3", 1, 0.5]})
    assert response.status_code == 200
    assert [t["q"] for t in response.json()["terms"]] == ["1/1", "2/3", "1/1", "1/2"]


def test_bounds(client):
    body = {"inequality": inequality_json(gyni_inequality(3))}
    response = client.post("/inequalities/bounds/ns", json=body)
    assert response.status_code == 200
    assert response.json()["beta_n"] == "4/3"
    assert client.post("/inequalities/bounds/spectral", json=body).status_code == 400
    assert client.post("/inequalities/bounds/quantum", json=body).status_code == 400


def test_tightness(client, monkeypatch):
    body = {"inequality": inequality_json(single_term_inequality())}
    response = client.post("/inequalities/tightness", json=body)
    assert response.status_code == 200
    assert response.json()["face_dim"] == 3

    monkeypatch.setenv("UPBBELL_MAX_TIGHT_VERTICES", "4")
    body = {"inequality": inequality_json(gyni_inequality(3))}
    assert client.post("/inequalities/tightness", json=body).status_code == 413


def test_pipeline_and_pdf(client):
    response = client.post("/pipeline", json={"n": 3, "seed": 1, "restarts": 4})
    assert response.status_code == 200
    assert response.json()["bounds"]["beta_n"] == "4/3"

    response = client.post("/pipeline/pdf", json={"n": 3, "seed": 1, "restarts": 4})
    assert response.status_code == 200
    assert response.headers["content-type"] == "application/pdf"
    reader = PdfReader(io.BytesIO(response.content))
    assert reader.metadata.title == "UPB / Bell inequality pipeline"
    text = "".join(page.extract_text() for page in reader.pages)
    assert "beta_C" in text
