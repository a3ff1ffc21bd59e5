"""HTTP API over the simulation pipeline, run store, and agent loop.

Endpoints mirror the library contracts one-to-one: simulation requests use
the same document shape as persisted run metadata, agent chats stream the
same turn objects the episode loop produces, and artifact endpoints serve
the files the run store wrote. Small grids simulate synchronously; larger
ones run in a background thread behind a pollable "running" record.
"""

from __future__ import annotations

import json
import queue
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from .agent import ChatPlanner, Planner, ScriptedPlanner, run_episode
from .analysis import render_summary_text, summarize_pathloss_map
from .catalog import UnknownLocationError, list_environments, resolve_location
from .chatclient import ChatClient, ChatEndpointConfig
from .radiomap import SimulationParams, simulate_radio_environment
from .runstore import RunRecord, RunStore
from .tools import build_default_registry

# grids up to this many cells answer synchronously; larger ones go async
SYNC_CELL_LIMIT = 200 * 200


@dataclass
class ServerConfig:
    data_dir: str | Path = "data/runs"
    chat_base_url: Optional[str] = None
    chat_model: str = "gpt-4o-mini"
    chat_api_key_env: str = "CHAT_API_KEY"
    ui_dir: Optional[str | Path] = None


def create_app(config: Optional[ServerConfig] = None) -> FastAPI:
    config = config or ServerConfig()
    store = RunStore(config.data_dir)
    chat_client: Optional[ChatClient] = None
    if config.chat_base_url:
        chat_client = ChatClient(ChatEndpointConfig(
            base_url=config.chat_base_url,
            model=config.chat_model,
            api_key_env=config.chat_api_key_env))
    registry = build_default_registry(store, vision_client=chat_client)

    app = FastAPI(title="raymap", version=__version__)
    app.state.store = store
    app.state.registry = registry
    app.state.config = config

    def record_response(rec: RunRecord) -> dict:
        doc = rec.to_dict()
        base = f"/api/runs/{rec.run_id}"
        links = {"self": base}
        if rec.status == "done":
            links["heatmap"] = f"{base}/heatmap.png"
            links["dataset"] = f"{base}/dataset"
            links["metadata"] = f"{base}/metadata"
            links["summary"] = f"{base}/summary"
        doc["links"] = links
        return doc

    def get_run(run_id: str) -> RunRecord:
        try:
            return store.get(run_id)
        except KeyError:
            raise HTTPException(404, f"unknown run: {run_id}")

    def require_done(rec: RunRecord):
        if rec.status != "done":
            raise HTTPException(409, f"run {rec.run_id} is {rec.status}")

    @app.get("/api/environments")
    def environments():
        return {"environments": list_environments()}

    @app.get("/api/environments/{location}")
    def environment_detail(location: str):
        try:
            env = resolve_location(location)
        except UnknownLocationError as exc:
            raise HTTPException(404, str(exc))
        return env.to_dict()

    @app.post("/api/simulate")
    def simulate(doc: dict):
        try:
            params = SimulationParams.from_dict(doc)
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise HTTPException(400, f"invalid simulation request: {exc}")
        try:
            env = resolve_location(params.location)
        except UnknownLocationError as exc:
            raise HTTPException(404, str(exc))
        try:
            params.validate(env)
        except ValueError as exc:
            raise HTTPException(400, str(exc))

        if params.nx * params.ny <= SYNC_CELL_LIMIT:
            result = simulate_radio_environment(params, env=env)
            return record_response(store.save(result, env))

        run_id = uuid.uuid4().hex
        record = store.mark_running(run_id, params, env)

        def work():
            try:
                result = simulate_radio_environment(params, env=env)
                result.run_id = run_id
                store.save(result, env)
            except Exception as exc:
                store.mark_failed(run_id, str(exc))

        threading.Thread(target=work, daemon=True).start()
        return record_response(record)

    @app.get("/api/runs")
    def runs():
        return {"runs": [record_response(r) for r in store.list_runs()]}

    @app.get("/api/runs/{run_id}")
    def run_detail(run_id: str):
        return record_response(get_run(run_id))

    @app.get("/api/runs/{run_id}/heatmap.png")
    def run_heatmap(run_id: str):
        rec = get_run(run_id)
        require_done(rec)
        return FileResponse(rec.heatmap_path, media_type="image/png")

    @app.get("/api/runs/{run_id}/dataset")
    def run_dataset(run_id: str):
        rec = get_run(run_id)
        require_done(rec)
        return FileResponse(rec.dataset_path, media_type="text/plain")

    @app.get("/api/runs/{run_id}/metadata")
    def run_metadata(run_id: str):
        rec = get_run(run_id)
        require_done(rec)
        return FileResponse(rec.metadata_path, media_type="application/json")

    @app.get("/api/runs/{run_id}/summary")
    def run_summary(run_id: str):
        rec = get_run(run_id)
        require_done(rec)
        result = store.load_result(run_id)
        summary = summarize_pathloss_map(result)
        return {"run_id": run_id, "summary": summary.to_dict(),
                "text": render_summary_text(summary)}

    @app.get("/api/transcripts/{episode_id}")
    def transcript_detail(episode_id: str):
        try:
            return store.load_transcript_dict(episode_id)
        except KeyError:
            raise HTTPException(404, f"unknown episode: {episode_id}")

    @app.post("/api/agent/chat")
    def agent_chat(doc: dict):
        prompt = str(doc.get("prompt", ""))
        backend = str(doc.get("backend", "scripted"))
        planner: Planner
        if backend == "remote":
            if chat_client is None:
                raise HTTPException(
                    400, "no chat endpoint configured for the remote backend")
            planner = ChatPlanner(chat_client)
        elif backend == "scripted":
            planner = ScriptedPlanner()
        else:
            raise HTTPException(400, f"unknown backend {backend!r}")

        turns: queue.Queue = queue.Queue()

        def work():
            # runs to completion even if the client disconnects mid-stream
            try:
                transcript = run_episode(
                    registry, planner, prompt,
                    on_turn=lambda t: turns.put(t.to_dict()))
                store.save_transcript(transcript)
                turns.put({"kind": "episode_end",
                           "episode_id": transcript.episode_id,
                           "artifacts": transcript.artifacts})
            except Exception as exc:
                turns.put({"kind": "error", "content": str(exc)})
            finally:
                turns.put(None)

        threading.Thread(target=work, daemon=True).start()

        def stream():
            while True:
                item = turns.get()
                if item is None:
                    break
                yield f"data: {json.dumps(item)}\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    ui_dir = Path(config.ui_dir) if config.ui_dir else None
    if ui_dir is not None and ui_dir.is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:
        @app.get("/")
        def index():
            return {
                "name": "raymap",
                "version": __version__,
                "endpoints": [
                    "GET /api/environments",
                    "GET /api/environments/{location}",
                    "POST /api/simulate",
                    "GET /api/runs",
                    "GET /api/runs/{run_id}",
                    "GET /api/runs/{run_id}/heatmap.png",
                    "GET /api/runs/{run_id}/dataset",
                    "GET /api/runs/{run_id}/metadata",
                    "GET /api/runs/{run_id}/summary",
                    "GET /api/transcripts/{episode_id}",
                    "POST /api/agent/chat",
                ],
            }

    return app


def serve(config: Optional[ServerConfig] = None, host: str = "127.0.0.1",
          port: int = 8000):
    """Run the API under uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port)
