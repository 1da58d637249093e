"""HTTP session service around the corrector.

Sessions live in an in-memory LRU store; each holds the uploaded image, its
canonical PNG encoding, the ordered pick history, and the latest corrected
frame.  State within one session is mutated under a per-session lock, so
concurrent requests against distinct sessions run in parallel while requests
against the same session serialize.
"""

from __future__ import annotations

import io
import threading
import uuid
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response, UploadFile
from PIL import Image

from .core import PixelMatrix
from .correction import (
    AutoSource,
    CorrectionRequest,
    CorrectionResult,
    ManualPixel,
    correct,
    pick_pixel_rgb,
)
from .errors import OutOfBoundsPixel, WbrfError
from .imageio import encode_png
from .training import RectificationModel

DEFAULT_MAX_PIXELS = 24_000_000
DEFAULT_CAPACITY = 32


@dataclass
class PickRecord:
    index: int
    x: int
    y: int
    picked_rgb: tuple[float, float, float]
    gamma: tuple[float, float, float]
    ell: tuple[float, float, float]
    cluster: int

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "x": self.x,
            "y": self.y,
            "picked_rgb": list(self.picked_rgb),
            "gamma": list(self.gamma),
            "ell": list(self.ell),
            "cluster": self.cluster,
        }


@dataclass
class Session:
    id: str
    image: PixelMatrix
    original_png: bytes
    picks: list[PickRecord] = field(default_factory=list)
    corrected_png: bytes | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def width(self) -> int:
        return self.image.width

    @property
    def height(self) -> int:
        return self.image.height


class SessionStore:
    """Thread-safe LRU mapping of session id to Session."""

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._lock = threading.Lock()
        self._sessions: OrderedDict[str, Session] = OrderedDict()

    def add(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.id] = session
            self._sessions.move_to_end(session.id)
            while len(self._sessions) > self.capacity:
                self._sessions.popitem(last=False)

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise KeyError(session_id)
            self._sessions.move_to_end(session_id)
            return session

    def delete(self, session_id: str) -> None:
        with self._lock:
            if session_id not in self._sessions:
                raise KeyError(session_id)
            del self._sessions[session_id]

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)


def _decode_upload(data: bytes, max_pixels: int) -> PixelMatrix:
    try:
        im = Image.open(io.BytesIO(data))
        width, height = im.size
    except Exception as exc:
        raise HTTPException(status_code=400,
                            detail=f"cannot decode image: {exc}") from exc
    if width * height > max_pixels:
        raise HTTPException(
            status_code=413,
            detail=f"image has {width * height} pixels, budget is {max_pixels}",
        )
    try:
        arr = np.asarray(im.convert("RGB"))
    except Exception as exc:
        raise HTTPException(status_code=400,
                            detail=f"cannot decode image: {exc}") from exc
    return PixelMatrix.from_uint8(arr)


def _result_payload(session: Session, result: CorrectionResult) -> dict:
    return {
        "gamma": [float(v) for v in result.gamma_used.gamma],
        "ell": [float(v) for v in result.ell_used.ell],
        "cluster": result.cluster_index,
        "corrected_url": f"/api/session/{session.id}/image/corrected",
    }


def build_app(
    model: RectificationModel,
    static_dir: str | None = None,
    max_pixels: int = DEFAULT_MAX_PIXELS,
    capacity: int = DEFAULT_CAPACITY,
) -> FastAPI:
    app = FastAPI(title="wbrf")
    store = SessionStore(capacity)
    app.state.store = store
    app.state.model = model

    def _session(session_id: str) -> Session:
        try:
            return store.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404,
                                detail=f"unknown session {session_id}") from None

    @app.post("/api/session")
    def create_session(file: UploadFile) -> dict:
        data = file.file.read()
        img = _decode_upload(data, max_pixels)
        session = Session(id=uuid.uuid4().hex, image=img,
                          original_png=encode_png(img))
        store.add(session)
        return {"id": session.id, "width": session.width,
                "height": session.height}

    @app.post("/api/session/{session_id}/awb")
    def run_awb(session_id: str) -> dict:
        session = _session(session_id)
        with session.lock:
            result = correct(session.image,
                             CorrectionRequest(source=AutoSource(), model=model))
            session.corrected_png = encode_png(result.corrected)
            return {"mode": "awb", **_result_payload(session, result)}

    @app.post("/api/session/{session_id}/pick")
    async def make_pick(session_id: str, request: Request) -> dict:
        body = await request.json()
        try:
            x = int(body["x"])
            y = int(body["y"])
        except (KeyError, TypeError, ValueError):
            raise HTTPException(status_code=400,
                                detail="body must carry integer x and y") from None
        session = _session(session_id)
        with session.lock:
            try:
                rgb = pick_pixel_rgb(session.image, x, y)
                result = correct(
                    session.image,
                    CorrectionRequest(source=ManualPixel(x, y), model=model),
                )
            except OutOfBoundsPixel as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            record = PickRecord(
                index=len(session.picks),
                x=x,
                y=y,
                picked_rgb=tuple(float(v) for v in rgb),
                gamma=tuple(float(v) for v in result.gamma_used.gamma),
                ell=tuple(float(v) for v in result.ell_used.ell),
                cluster=result.cluster_index,
            )
            session.picks.append(record)
            session.corrected_png = encode_png(result.corrected)
            return {"mode": "pick", "pick": record.to_dict(),
                    **_result_payload(session, result)}

    @app.get("/api/session/{session_id}/picks")
    def list_picks(session_id: str) -> dict:
        session = _session(session_id)
        with session.lock:
            return {"picks": [p.to_dict() for p in session.picks]}

    @app.get("/api/session/{session_id}/image/{which}")
    def get_image(session_id: str, which: str) -> Response:
        session = _session(session_id)
        with session.lock:
            if which == "original":
                data = session.original_png
            elif which == "corrected":
                if session.corrected_png is None:
                    raise HTTPException(status_code=404,
                                        detail="no correction yet")
                data = session.corrected_png
            else:
                raise HTTPException(
                    status_code=404,
                    detail="image name must be 'original' or 'corrected'",
                )
        return Response(content=data, media_type="image/png")

    @app.delete("/api/session/{session_id}")
    def delete_session(session_id: str) -> dict:
        try:
            store.delete(session_id)
        except KeyError:
            raise HTTPException(status_code=404,
                                detail=f"unknown session {session_id}") from None
        return {"deleted": True}

    @app.exception_handler(WbrfError)
    async def wbrf_error_handler(request: Request, exc: WbrfError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=400, content={"detail": str(exc)})

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="static")
    else:

        @app.get("/")
        def root() -> dict:
            return {"service": "wbrf", "sessions": len(store)}

    return app
