import base64

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from tissuemask import io as tio
from tissuemask import phantom as ph
from tissuemask.service import create_app


def _b64(mask: np.ndarray) -> str:
    return base64.b64encode(tio.mask_to_png_bytes(mask)).decode("ascii")


@pytest.fixture
def corpus(tmp_path):
    img_dir = tmp_path / "corpus"
    img_dir.mkdir()
    for i in range(2):
        rgb, gt = ph.make_phantom(ph.PhantomSpec(
            width=64, height=64, blobs=[ph.Rect(8, 8 + i, 48, 48)]))
        Image.fromarray(rgb).save(img_dir / f"s{i}.png")
        if i == 0:
            tio.write_mask(img_dir / "s0_mask.png", gt)
    return img_dir


@pytest.fixture
def client(corpus):
    app = create_app(corpus)
    with TestClient(app) as c:
        yield c


class TestListing:
    def test_items_sorted_with_state(self, client):
        items = client.get("/api/items").json()
        assert [it["itemId"] for it in items] == ["s0", "s1"]
        assert items[0]["hasMask"] is True and items[0]["version"] == 1
        assert items[1]["hasMask"] is False and items[1]["version"] == 0
        assert all(it["refined"] is False for it in items)

    def test_unknown_item_404(self, client):
        assert client.get("/api/items/zz/image.png").status_code == 404


class TestImageAndMask:
    def test_image_png_decodes(self, client):
        r = client.get("/api/items/s0/image.png")
        assert r.status_code == 200
        assert r.headers["content-type"] == "image/png"
        img = np.asarray(Image.open(__import__("io").BytesIO(r.content)))
        assert img.shape == (64, 64, 3)

    def test_mask_roundtrip_and_etag(self, client, corpus):
        r = client.get("/api/items/s0/mask.png")
        assert r.status_code == 200
        got = tio.mask_from_png_bytes(r.content)
        want = tio.read_mask(corpus / "s0_mask.png")
        assert np.array_equal(got, want)
        etag = r.headers["etag"]
        r2 = client.get("/api/items/s0/mask.png",
                        headers={"If-None-Match": etag})
        assert r2.status_code == 304

    def test_missing_mask_404(self, client):
        assert client.get("/api/items/s1/mask.png").status_code == 404


class TestSegment:
    def test_candidate_not_persisted(self, client, corpus):
        r = client.post("/api/items/s1/segment",
                        json={"method": "otsu", "params": {}})
        assert r.status_code == 200
        body = r.json()
        mask = tio.mask_from_png_bytes(base64.b64decode(body["maskPng"]))
        assert mask.shape == (64, 64) and mask.sum() > 0
        assert body["elapsedSeconds"] >= 0
        assert not (corpus / "s1_mask.png").exists()
        items = {it["itemId"]: it for it in client.get("/api/items").json()}
        assert items["s1"]["version"] == 0

    def test_bad_param_names_field(self, client):
        r = client.post("/api/items/s0/segment",
                        json={"method": "fesi", "params": {"bogus": 1}})
        assert r.status_code == 400
        assert "bogus" in r.json()["detail"]

    def test_unknown_method_400(self, client):
        r = client.post("/api/items/s0/segment",
                        json={"method": "magic", "params": {}})
        assert r.status_code == 400


class TestSave:
    def test_save_bumps_version_and_persists(self, client, corpus):
        mask = np.zeros((64, 64), dtype=np.uint8)
        mask[10:20, 10:20] = 1
        r = client.put("/api/items/s0/mask",
                       json={"maskPng": _b64(mask), "baseVersion": 1})
        assert r.status_code == 200
        body = r.json()
        assert body["version"] == 2 and body["refined"] is True
        assert np.array_equal(tio.read_mask(corpus / "s0_mask.png"), mask)
        r2 = client.get("/api/items/s0/mask.png")
        assert np.array_equal(tio.mask_from_png_bytes(r2.content), mask)

    def test_stale_base_version_409(self, client, corpus):
        before = (corpus / "s0_mask.png").read_bytes()
        mask = np.ones((64, 64), dtype=np.uint8)
        r = client.put("/api/items/s0/mask",
                       json={"maskPng": _b64(mask), "baseVersion": 0})
        assert r.status_code == 409
        assert r.json()["currentVersion"] == 1
        assert (corpus / "s0_mask.png").read_bytes() == before

    def test_first_save_on_unmasked_item(self, client, corpus):
        mask = np.zeros((64, 64), dtype=np.uint8)
        mask[0, 0] = 1
        r = client.put("/api/items/s1/mask",
                       json={"maskPng": _b64(mask), "baseVersion": 0})
        assert r.status_code == 200 and r.json()["version"] == 1
        assert np.array_equal(tio.read_mask(corpus / "s1_mask.png"), mask)

    def test_rejects_non_binary_payload(self, client):
        gray = np.full((64, 64), 40, dtype=np.uint8)
        buf = __import__("io").BytesIO()
        Image.fromarray(gray, mode="L").save(buf, format="PNG")
        payload = base64.b64encode(buf.getvalue()).decode("ascii")
        r = client.put("/api/items/s0/mask",
                       json={"maskPng": payload, "baseVersion": 1})
        assert r.status_code == 400

    def test_rejects_wrong_dimensions(self, client):
        mask = np.ones((32, 32), dtype=np.uint8)
        r = client.put("/api/items/s0/mask",
                       json={"maskPng": _b64(mask), "baseVersion": 1})
        assert r.status_code == 400

    def test_rejects_garbage_base64(self, client):
        r = client.put("/api/items/s0/mask",
                       json={"maskPng": "!!!not-b64!!!", "baseVersion": 1})
        assert r.status_code == 400

    def test_state_survives_restart(self, corpus):
        mask = np.zeros((64, 64), dtype=np.uint8)
        mask[5:9, 5:9] = 1
        with TestClient(create_app(corpus)) as c:
            r = c.put("/api/items/s0/mask",
                      json={"maskPng": _b64(mask), "baseVersion": 1})
            assert r.status_code == 200
        with TestClient(create_app(corpus)) as c:
            items = {it["itemId"]: it for it in c.get("/api/items").json()}
            assert items["s0"]["version"] == 2
            assert items["s0"]["refined"] is True


class TestSegmentMetrics:
    def test_metrics_only_after_refinement(self, client):
        r = client.post("/api/items/s0/segment",
                        json={"method": "otsu", "params": {}})
        assert r.json().get("metrics") is None
        mask = tio.mask_from_png_bytes(
            base64.b64decode(r.json()["maskPng"]))
        c = client.put("/api/items/s0/mask",
                       json={"maskPng": _b64(mask), "baseVersion": 1})
        assert c.status_code == 200
        r2 = client.post("/api/items/s0/segment",
                         json={"method": "otsu", "params": {}})
        metrics = r2.json()["metrics"]
        assert metrics is not None
        assert metrics["jaccard"] == pytest.approx(1.0)
