"""Filesystem persistence for simulation runs and agent transcripts.

Every run gets its own directory named by run_id containing the dataset, the
rendered heatmap, and a metadata record that reproduces the parameters
exactly. Writes land in a hidden staging directory first and are moved into
place with a single atomic rename, so concurrent readers never observe a
half-written run and concurrent writers never interleave files.
"""

from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import __version__
from .geometry import Environment
from .radiomap import (
    RadioMapResult,
    SimulationParams,
    export_dataset,
    parse_dataset,
    render_heatmap,
    sidecar_for,
)

DATASET_NAME = "dataset.txt"
HEATMAP_NAME = "heatmap.png"
RECORD_NAME = "record.json"


@dataclass
class RunRecord:
    run_id: str
    params: SimulationParams
    environment_name: str
    environment_hash: str
    created_at: str
    status: str  # running | done | failed
    dataset_path: Optional[Path]
    heatmap_path: Optional[Path]
    metadata_path: Optional[Path]
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "params": self.params.to_dict(),
            "environment_name": self.environment_name,
            "environment_hash": self.environment_hash,
            "created_at": self.created_at,
            "status": self.status,
            "version": __version__,
            "files": {
                "dataset": str(self.dataset_path) if self.dataset_path else None,
                "heatmap": str(self.heatmap_path) if self.heatmap_path else None,
                "metadata": str(self.metadata_path) if self.metadata_path else None,
            },
            "error": self.error,
        }


def environment_hash(env: Environment) -> str:
    canonical = json.dumps(env.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(canonical).hexdigest()


class RunStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.transcripts_root = self.root / "transcripts"

    def run_dir(self, run_id: str) -> Path:
        return self.root / run_id

    def _pending_path(self, run_id: str) -> Path:
        return self.root / ".pending" / f"{run_id}.json"

    def mark_running(self, run_id: str, params: SimulationParams,
                     env: Environment) -> RunRecord:
        """Register a run that is still computing, so it can be polled."""
        record = RunRecord(
            run_id=run_id,
            params=params,
            environment_name=env.name,
            environment_hash=environment_hash(env),
            created_at=datetime.now(timezone.utc).isoformat(),
            status="running",
            dataset_path=None,
            heatmap_path=None,
            metadata_path=None,
        )
        path = self._pending_path(run_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(record.to_dict(), indent=2) + "\n")
        return record

    def mark_failed(self, run_id: str, error: str) -> RunRecord:
        path = self._pending_path(run_id)
        if not path.exists():
            raise KeyError(f"unknown run: {run_id}")
        doc = json.loads(path.read_text())
        doc["status"] = "failed"
        doc["error"] = error
        path.write_text(json.dumps(doc, indent=2) + "\n")
        return self._record_from_dict(doc)

    def save(self, result: RadioMapResult, env: Environment) -> RunRecord:
        """Persist a completed simulation: stage, write, atomic rename."""
        run_id = result.run_id
        final_dir = self.run_dir(run_id)
        stage = self.root / f".stage-{run_id}"
        if stage.exists():
            shutil.rmtree(stage)
        stage.mkdir(parents=True)
        try:
            export_dataset(result, stage / DATASET_NAME)
            render_heatmap(result, stage / HEATMAP_NAME)
            record = RunRecord(
                run_id=run_id,
                params=result.params,
                environment_name=env.name,
                environment_hash=environment_hash(env),
                created_at=result.created_at,
                status="done",
                dataset_path=final_dir / DATASET_NAME,
                heatmap_path=final_dir / HEATMAP_NAME,
                metadata_path=final_dir / sidecar_for(Path(DATASET_NAME)).name,
            )
            (stage / RECORD_NAME).write_text(
                json.dumps(record.to_dict(), indent=2) + "\n")
            stage.rename(final_dir)
        except Exception:
            shutil.rmtree(stage, ignore_errors=True)
            raise
        self._pending_path(run_id).unlink(missing_ok=True)
        return record

    def get(self, run_id: str) -> RunRecord:
        record_path = self.run_dir(run_id) / RECORD_NAME
        if record_path.exists():
            return self._record_from_dict(json.loads(record_path.read_text()))
        pending = self._pending_path(run_id)
        if pending.exists():
            return self._record_from_dict(json.loads(pending.read_text()))
        raise KeyError(f"unknown run: {run_id}")

    def _record_from_dict(self, doc: dict) -> RunRecord:
        files = doc.get("files", {})
        return RunRecord(
            run_id=doc["run_id"],
            params=SimulationParams.from_dict(doc["params"]),
            environment_name=doc["environment_name"],
            environment_hash=doc["environment_hash"],
            created_at=doc["created_at"],
            status=doc["status"],
            dataset_path=Path(files["dataset"]) if files.get("dataset") else None,
            heatmap_path=Path(files["heatmap"]) if files.get("heatmap") else None,
            metadata_path=Path(files["metadata"]) if files.get("metadata") else None,
            error=doc.get("error"),
        )

    def list_runs(self) -> list[RunRecord]:
        out = []
        if not self.root.exists():
            return out
        seen = set()
        for d in sorted(self.root.iterdir()):
            if d.is_dir() and not d.name.startswith(".") \
                    and (d / RECORD_NAME).exists():
                out.append(self._record_from_dict(
                    json.loads((d / RECORD_NAME).read_text())))
                seen.add(d.name)
        pending_dir = self.root / ".pending"
        if pending_dir.is_dir():
            for p in sorted(pending_dir.glob("*.json")):
                if p.stem not in seen:
                    out.append(self._record_from_dict(
                        json.loads(p.read_text())))
        return out

    def find_by_heatmap_path(self, image_path: str | Path) -> Optional[RunRecord]:
        """Resolve a run from a heatmap file reference (absolute, relative, or
        basename-with-run-dir suffix)."""
        want = Path(image_path)
        for rec in self.list_runs():
            if rec.heatmap_path is None:
                continue
            have = rec.heatmap_path
            if want == have or want.resolve() == have.resolve():
                return rec
            if str(have).endswith(str(want)):
                return rec
        return None

    def load_result(self, run_id: str) -> RadioMapResult:
        """Reconstruct a RadioMapResult from a persisted run's dataset."""
        rec = self.get(run_id)
        if rec.status != "done":
            raise RuntimeError(f"run {run_id} is {rec.status}, not done")
        grids = parse_dataset(rec.dataset_path)
        meta = grids["meta"]
        bounds = ((meta["bounds"][0][0], meta["bounds"][0][1]),
                  (meta["bounds"][1][0], meta["bounds"][1][1]))
        return RadioMapResult(
            params=rec.params,
            bounds=bounds,
            pathloss_db=grids["pathloss_db"],
            los_mask=grids["los_mask"],
            phi=grids["phi"],
            d3d=grids["d3d"],
            ref_mask=grids["ref_mask"],
            building_mask=grids["building_mask"],
            height_map=grids["height_map"],
            run_id=rec.run_id,
            created_at=rec.created_at,
        )

    def purge(self) -> int:
        """Delete every stored run; keeps transcripts. Returns count removed."""
        n = 0
        for d in list(self.root.iterdir()) if self.root.exists() else []:
            if d.is_dir() and d.name != "transcripts":
                shutil.rmtree(d)
                n += 1
        return n

    # -- transcripts ---------------------------------------------------------

    def save_transcript(self, transcript) -> Path:
        self.transcripts_root.mkdir(parents=True, exist_ok=True)
        path = self.transcripts_root / f"{transcript.episode_id}.json"
        path.write_text(json.dumps(transcript.to_dict(), indent=2) + "\n")
        return path

    def load_transcript_dict(self, episode_id: str) -> dict:
        path = self.transcripts_root / f"{episode_id}.json"
        if not path.exists():
            raise KeyError(f"unknown episode: {episode_id}")
        return json.loads(path.read_text())
