"""HTTP session service: protocol, error codes, determinism, concurrency."""

import threading

import numpy as np
import pytest
from fastapi.testclient import TestClient

from wbrf.cli import main
from wbrf.datagen import default_manifest, manifest_pairs
from wbrf.imageio import encode_png, write_image
from wbrf.service import SessionStore, build_app
from wbrf.training import TrainConfig, train


@pytest.fixture(scope="module")
def model():
    manifest = default_manifest()
    manifest["train_scene_seeds"] = list(range(8))
    pairs = manifest_pairs(manifest, "train")
    return train(pairs, TrainConfig(k=4, seed=0))


@pytest.fixture(scope="module")
def sample_pngs():
    manifest = default_manifest()
    manifest["test_scene_seeds"] = [10_000]
    return [encode_png(p.input) for p in manifest_pairs(manifest, "test")]


@pytest.fixture()
def client(model):
    return TestClient(build_app(model))


def upload(client, png: bytes) -> dict:
    r = client.post("/api/session",
                    files={"file": ("img.png", png, "image/png")})
    assert r.status_code == 200
    return r.json()


# ---------------------------------------------------------------------------
# protocol round trip


def test_upload_reports_id_and_dimensions(client, sample_pngs):
    info = upload(client, sample_pngs[0])
    assert set(info) == {"id", "width", "height"}
    assert (info["width"], info["height"]) == (96, 64)


def test_session_ids_are_unique(client, sample_pngs):
    ids = {upload(client, sample_pngs[0])["id"] for _ in range(5)}
    assert len(ids) == 5


def test_awb_returns_correction_summary(client, sample_pngs):
    sid = upload(client, sample_pngs[0])["id"]
    r = client.post(f"/api/session/{sid}/awb")
    assert r.status_code == 200
    body = r.json()
    assert body["mode"] == "awb"
    assert len(body["gamma"]) == 3 and len(body["ell"]) == 3
    assert body["ell"][1] == 1.0
    assert 0 <= body["cluster"] < 4
    corrected = client.get(body["corrected_url"])
    assert corrected.status_code == 200
    assert corrected.headers["content-type"] == "image/png"


def test_pick_appends_and_lists_history(client, sample_pngs):
    sid = upload(client, sample_pngs[0])["id"]
    first = client.post(f"/api/session/{sid}/pick", json={"x": 48, "y": 32})
    second = client.post(f"/api/session/{sid}/pick", json={"x": 2, "y": 3})
    assert first.status_code == 200 and second.status_code == 200
    assert first.json()["pick"]["index"] == 0
    assert second.json()["pick"]["index"] == 1

    picks = client.get(f"/api/session/{sid}/picks").json()["picks"]
    assert [p["index"] for p in picks] == [0, 1]
    assert [(p["x"], p["y"]) for p in picks] == [(48, 32), (2, 3)]
    for p in picks:
        assert len(p["gamma"]) == 3
        assert len(p["ell"]) == 3 and p["ell"][1] == 1.0
        assert len(p["picked_rgb"]) == 3
        assert 0 <= p["cluster"] < 4


def test_pick_swatch_is_neighborhood_mean(client, sample_pngs, model):
    from wbrf.correction import pick_pixel_rgb
    from wbrf.imageio import decode_png

    sid = upload(client, sample_pngs[0])["id"]
    body = client.post(f"/api/session/{sid}/pick", json={"x": 10, "y": 7}).json()
    expected = pick_pixel_rgb(decode_png(sample_pngs[0]), 10, 7)
    assert np.allclose(body["pick"]["picked_rgb"], expected, atol=0)


def test_original_image_roundtrips(client, sample_pngs):
    sid = upload(client, sample_pngs[0])["id"]
    r = client.get(f"/api/session/{sid}/image/original")
    assert r.status_code == 200
    assert r.content == sample_pngs[0]  # canonical encoder in == out


def test_corrected_image_before_any_correction_is_404(client, sample_pngs):
    sid = upload(client, sample_pngs[0])["id"]
    assert client.get(f"/api/session/{sid}/image/corrected").status_code == 404


def test_delete_session(client, sample_pngs):
    sid = upload(client, sample_pngs[0])["id"]
    assert client.delete(f"/api/session/{sid}").json() == {"deleted": True}
    assert client.delete(f"/api/session/{sid}").status_code == 404
    assert client.get(f"/api/session/{sid}/picks").status_code == 404


# ---------------------------------------------------------------------------
# error codes


def test_unknown_session_is_404_everywhere(client):
    assert client.post("/api/session/nope/awb").status_code == 404
    assert client.post("/api/session/nope/pick",
                       json={"x": 0, "y": 0}).status_code == 404
    assert client.get("/api/session/nope/picks").status_code == 404
    assert client.get("/api/session/nope/image/original").status_code == 404
    assert client.delete("/api/session/nope").status_code == 404


def test_malformed_upload_is_400(client):
    r = client.post("/api/session",
                    files={"file": ("x.png", b"definitely not a png", "image/png")})
    assert r.status_code == 400


def test_out_of_bounds_pick_is_400(client, sample_pngs):
    sid = upload(client, sample_pngs[0])["id"]
    for x, y in ((-1, 0), (96, 0), (0, 64), (5, -2)):
        r = client.post(f"/api/session/{sid}/pick", json={"x": x, "y": y})
        assert r.status_code == 400, (x, y)
    assert client.get(f"/api/session/{sid}/picks").json()["picks"] == []


def test_pick_without_coordinates_is_400(client, sample_pngs):
    sid = upload(client, sample_pngs[0])["id"]
    assert client.post(f"/api/session/{sid}/pick",
                       json={"x": 3}).status_code == 400


def test_unknown_image_name_is_404(client, sample_pngs):
    sid = upload(client, sample_pngs[0])["id"]
    assert client.get(f"/api/session/{sid}/image/other").status_code == 404


def test_pixel_budget_is_413(model, sample_pngs):
    tight = TestClient(build_app(model, max_pixels=1000))
    r = tight.post("/api/session",
                   files={"file": ("img.png", sample_pngs[0], "image/png")})
    assert r.status_code == 413


# ---------------------------------------------------------------------------
# store semantics


def test_lru_eviction(model, sample_pngs):
    client = TestClient(build_app(model, capacity=2))
    a = upload(client, sample_pngs[0])["id"]
    b = upload(client, sample_pngs[1 % len(sample_pngs)])["id"]
    client.get(f"/api/session/{a}/picks")  # refresh a; b is now oldest
    c = upload(client, sample_pngs[0])["id"]
    assert client.get(f"/api/session/{a}/picks").status_code == 200
    assert client.get(f"/api/session/{b}/picks").status_code == 404
    assert client.get(f"/api/session/{c}/picks").status_code == 200


def test_session_store_rejects_bad_capacity():
    with pytest.raises(ValueError):
        SessionStore(0)


def test_root_without_static_reports_service(client):
    body = client.get("/").json()
    assert body["service"] == "wbrf"


def test_root_with_static_serves_bundle(model, tmp_path):
    (tmp_path / "index.html").write_text("<html>picker-ui-marker</html>")
    client = TestClient(build_app(model, static_dir=str(tmp_path)))
    r = client.get("/")
    assert r.status_code == 200
    assert "picker-ui-marker" in r.text
    # API routes still win over the static mount
    assert client.post("/api/session/nope/awb").status_code == 404


# ---------------------------------------------------------------------------
# determinism and parity


def test_awb_matches_cli_auto_byte_for_byte(model, sample_pngs, tmp_path):
    from wbrf.model_io import save_model

    model_file = tmp_path / "m.wbrf"
    save_model(model, model_file)
    src = tmp_path / "src.png"
    src.write_bytes(sample_pngs[0])
    out = tmp_path / "cli.png"
    assert main(["correct", "--model", str(model_file), "--in", str(src),
                 "--out", str(out), "--auto"]) == 0

    client = TestClient(build_app(model))
    sid = upload(client, sample_pngs[0])["id"]
    client.post(f"/api/session/{sid}/awb")
    served = client.get(f"/api/session/{sid}/image/corrected").content
    assert served == out.read_bytes()


def test_restart_and_replay_reproduces_bytes(model, sample_pngs):
    def run_once() -> bytes:
        client = TestClient(build_app(model))
        sid = upload(client, sample_pngs[0])["id"]
        client.post(f"/api/session/{sid}/pick", json={"x": 48, "y": 32})
        return client.get(f"/api/session/{sid}/image/corrected").content

    assert run_once() == run_once()


def test_concurrent_sessions_match_sequential(model, sample_pngs):
    app = build_app(model)
    client = TestClient(app)
    picks = [(48, 32), (10, 7)]

    def sequential() -> list[bytes]:
        out = []
        for (x, y), png in zip(picks, sample_pngs[:2]):
            sid = upload(client, png)["id"]
            client.post(f"/api/session/{sid}/pick", json={"x": x, "y": y})
            out.append(client.get(f"/api/session/{sid}/image/corrected").content)
        return out

    expected = sequential()

    results = [None, None]
    sessions = [upload(client, png)["id"] for png in sample_pngs[:2]]

    def worker(i: int) -> None:
        x, y = picks[i]
        client.post(f"/api/session/{sessions[i]}/pick", json={"x": x, "y": y})
        results[i] = client.get(
            f"/api/session/{sessions[i]}/image/corrected"
        ).content

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results == expected
