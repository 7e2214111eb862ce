"""HTTP backend for human mask review and refinement.

Serves a corpus directory of thumbnails plus <stem>_mask.png masks.
Saves are optimistic-concurrency writes: the client sends the version it
edited from, a stale version gets 409 and nothing changes on disk.
Masks are written atomically (temp file + rename) and each successful
save bumps the item's version by exactly one and marks it refined.

Segment candidates are never persisted; the stored corpus stays equal to
machine-initial masks plus human-approved saves.
"""

from __future__ import annotations

import base64
import json
from contextlib import asynccontextmanager
import os
import tempfile
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import dataset as ds
from . import evaluation as ev
from . import io as tio
from . import methods as me
from .errors import InvalidParamError

STATE_FILE = ".review_state.json"


class SegmentBody(BaseModel):
    method: str
    params: dict = {}


class SaveBody(BaseModel):
    maskPng: str
    baseVersion: int


class _ItemState:
    def __init__(self, item: ds.DatasetItem, version: int, refined: bool):
        self.item = item
        self.version = version
        self.refined = refined
        self.lock = threading.Lock()


class ReviewCorpus:
    """Disk-backed corpus state; refined flags persist in a sidecar file."""

    def __init__(self, corpus_dir):
        self.dir = Path(corpus_dir)
        self._state_path = self.dir / STATE_FILE
        persisted = {}
        if self._state_path.exists():
            persisted = json.loads(self._state_path.read_text())
        self.items: dict[str, _ItemState] = {}
        for item in ds.scan_pairs(self.dir):
            entry = persisted.get(item.id, {})
            version = entry.get("version", 1 if item.mask_path else 0)
            refined = entry.get("refined", False)
            self.items[item.id] = _ItemState(item, version, refined)

    def flush_state(self):
        data = {
            item_id: {"version": s.version, "refined": s.refined}
            for item_id, s in self.items.items()
        }
        fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
        with os.fdopen(fd, "w") as f:
            json.dump(data, f)
        os.replace(tmp, self._state_path)

    def mask_path(self, item_id: str) -> Path:
        return self.dir / f"{item_id}{ds.MASK_SUFFIX}.png"


def create_app(corpus_dir, static_dir=None) -> FastAPI:
    corpus = ReviewCorpus(corpus_dir)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        corpus.flush_state()

    app = FastAPI(title="tissuemask review service", lifespan=lifespan)
    app.state.corpus = corpus

    def get_item(item_id: str) -> _ItemState:
        state = corpus.items.get(item_id)
        if state is None:
            raise HTTPException(status_code=404, detail=f"unknown item {item_id}")
        return state

    @app.get("/api/items")
    def list_items():
        out = []
        for item_id in sorted(corpus.items):
            s = corpus.items[item_id]
            out.append(
                {
                    "itemId": item_id,
                    "hasMask": corpus.mask_path(item_id).exists(),
                    "refined": s.refined,
                    "version": s.version,
                }
            )
        return out

    @app.get("/api/items/{item_id}/image.png")
    def get_image(item_id: str):
        state = get_item(item_id)
        return Response(
            content=state.item.image_path.read_bytes(), media_type="image/png"
        )

    @app.get("/api/items/{item_id}/mask.png")
    def get_mask(item_id: str, request: Request):
        state = get_item(item_id)
        path = corpus.mask_path(item_id)
        if not path.exists():
            raise HTTPException(status_code=404, detail="no mask yet")
        etag = f'"{state.version}"'
        if request.headers.get("if-none-match") == etag:
            return Response(status_code=304)
        return Response(
            content=path.read_bytes(),
            media_type="image/png",
            headers={"ETag": etag},
        )

    @app.post("/api/items/{item_id}/segment")
    def segment_item(item_id: str, body: SegmentBody):
        state = get_item(item_id)
        try:
            spec = me.make_spec(body.method, body.params)
        except InvalidParamError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        img = tio.read_image(state.item.image_path)
        result = me.segment(img, spec)
        payload = {
            "maskPng": base64.b64encode(
                tio.mask_to_png_bytes(result.mask)
            ).decode("ascii"),
            "elapsedSeconds": result.elapsed_seconds,
        }
        mask_path = corpus.mask_path(item_id)
        if state.refined and mask_path.exists():
            stored = tio.read_mask(mask_path)
            if stored.shape == result.mask.shape:
                m = ev.metrics(ev.confusion(result.mask, stored))
                payload["metrics"] = {
                    "jaccard": m.jaccard,
                    "dice": m.dice,
                    "sensitivity": m.sensitivity,
                    "specificity": m.specificity,
                }
        return payload

    @app.put("/api/items/{item_id}/mask")
    def save_mask(item_id: str, body: SaveBody):
        state = get_item(item_id)
        try:
            png = base64.b64decode(body.maskPng, validate=True)
        except Exception:
            raise HTTPException(status_code=400, detail="maskPng is not base64")
        import numpy as np
        from PIL import Image
        import io as _io

        try:
            with Image.open(_io.BytesIO(png)) as img:
                arr = np.asarray(img.convert("L"))
        except Exception:
            raise HTTPException(status_code=400, detail="maskPng is not a PNG")
        if not set(np.unique(arr).tolist()) <= {0, 255}:
            raise HTTPException(
                status_code=400, detail="mask content must be binary {0, 255}"
            )
        img_shape = tio.read_image(state.item.image_path).shape[:2]
        if arr.shape != img_shape:
            raise HTTPException(
                status_code=400,
                detail=f"mask {arr.shape} does not match image {img_shape}",
            )
        with state.lock:
            if body.baseVersion != state.version:
                return JSONResponse(
                    status_code=409,
                    content={
                        "detail": "version conflict",
                        "currentVersion": state.version,
                    },
                )
            tio.write_mask(
                corpus.mask_path(item_id), (arr >= 128).astype("uint8"),
                atomic=True,
            )
            state.version += 1
            state.refined = True
            corpus.flush_state()
        return {"version": state.version, "refined": state.refined}

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
