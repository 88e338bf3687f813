"""HTTP + WebSocket surface of the avatar service.

GET /state and /history read the loop's atomic snapshots; WS /live
relays change pushes; POST /env/command proxies steering to the device
command endpoint. Readers never block the polling loop.
"""
from __future__ import annotations

import asyncio
import functools
import queue
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .service import AvatarLoop

_WS_POLL_S = 0.25


def create_app(loop: AvatarLoop, static_dir: Optional[str | Path] = None) -> FastAPI:
    app = FastAPI(title="plantavatar", docs_url=None, redoc_url=None)

    @app.get("/state")
    def state() -> JSONResponse:
        record = loop.current
        if record is None:
            return JSONResponse({"error": "no state yet"}, status_code=503)
        return JSONResponse(record.as_dict())

    @app.get("/history")
    def history(since: int = 0) -> JSONResponse:
        records = loop.history_since(since)
        return JSONResponse([r.as_dict() for r in records])

    @app.post("/env/command")
    async def env_command(request: Request) -> JSONResponse:
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "body must be JSON"}, status_code=422)
        if not isinstance(body, dict):
            return JSONResponse({"error": "body must be a JSON object"}, status_code=422)
        status, payload = await asyncio.get_running_loop().run_in_executor(
            None, functools.partial(loop.submit_command, body)
        )
        return JSONResponse(payload, status_code=status)

    @app.websocket("/live")
    async def live(ws: WebSocket) -> None:
        await ws.accept()
        sub = loop.subscribe()
        last_seq = -1
        try:
            current = loop.current
            if current is not None:
                await ws.send_json(current.as_dict())
                last_seq = current.seq
            aio_loop = asyncio.get_running_loop()
            while not sub.dropped:
                try:
                    record = await aio_loop.run_in_executor(
                        None, functools.partial(sub.queue.get, timeout=_WS_POLL_S)
                    )
                except queue.Empty:
                    continue
                if record.seq <= last_seq:
                    continue  # already sent as the greeting snapshot
                last_seq = record.seq
                await ws.send_json(record.as_dict())
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            loop.unsubscribe(sub)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
