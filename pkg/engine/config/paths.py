from __future__ import annotations

import os
from pathlib import Path

_REPO_ROOT = Path(__file__).resolve().parents[2]


def _env_path(name: str, default: str | Path) -> Path:
    return Path(os.getenv(name, str(default))).resolve()


STATE_DIR: Path = _env_path("FZ_STATE_DIR", _REPO_ROOT / "state")
OUTPUT_DIR: Path = _env_path("FZ_OUTPUT_DIR", STATE_DIR / "artifacts")
CATALOG_PATH: Path = _env_path("FZ_CATALOG_PATH", _REPO_ROOT / "catalog.json")
SCHEMAS_DIR: Path = _env_path("FZ_SCHEMAS_DIR", _REPO_ROOT / "schemas" / "v1")


def ensure_runtime_dirs() -> None:
    for d in (STATE_DIR, OUTPUT_DIR):
        d.mkdir(parents=True, exist_ok=True)
