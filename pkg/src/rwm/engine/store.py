"""On-disk layout for projects: state checkpoint, model file, event log,
and report artifacts, one directory per project under a store root."""
from __future__ import annotations

import json
from pathlib import Path

from ..canonical import canonical_json_bytes
from ..errors import CorruptModelError, EngineError
from .project import ProjectState


class ProjectStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def project_dir(self, project_id: str) -> Path:
        return self.root / project_id

    def state_path(self, project_id: str) -> Path:
        return self.project_dir(project_id) / "state.json"

    def events_path(self, project_id: str) -> Path:
        return self.project_dir(project_id) / "events.jsonl"

    def model_path(self, project_id: str) -> Path:
        return self.project_dir(project_id) / "model.rwm.json"

    def reports_dir(self, project_id: str) -> Path:
        path = self.project_dir(project_id) / "reports"
        path.mkdir(parents=True, exist_ok=True)
        return path

    def create(self, project_id: str) -> Path:
        path = self.project_dir(project_id)
        if path.exists():
            raise EngineError(f"project {project_id!r} already exists")
        path.mkdir(parents=True)
        return path

    def exists(self, project_id: str) -> bool:
        return self.state_path(project_id).exists()

    def list_projects(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir()
                      if (p / "state.json").exists())

    def save_state(self, state: ProjectState) -> Path:
        path = self.state_path(state.project_id)
        path.write_bytes(canonical_json_bytes(state.to_dict()))
        return path

    def load_state(self, project_id: str) -> ProjectState:
        path = self.state_path(project_id)
        if not path.exists():
            raise EngineError(f"no project {project_id!r} in store {self.root}")
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorruptModelError(f"corrupted project state {path}: {exc}") from exc
        return ProjectState.from_dict(payload)
