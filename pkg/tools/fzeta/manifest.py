# tools/fzeta/manifest.py

from __future__ import annotations

from pathlib import Path
from typing import Any

from loguru import logger

from engine.serialize import content_hash, pretty_json
from engine.types import OutputRecord, RunManifest

from . import TOOL_VERSION


def write_output(path: Path, text: str) -> OutputRecord:
    """Write a payload file and return its content hash record."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.bind(path=str(path)).debug("output written")
    return OutputRecord(path=str(path), sha256=content_hash(text))


def build_manifest(
    command: str,
    parameters: dict[str, Any],
    seed: int,
    elapsed: float,
    outputs: list[OutputRecord],
) -> RunManifest:
    return RunManifest(
        command=command,
        parameters=parameters,
        seed=seed,
        tool_version=TOOL_VERSION,
        elapsed=elapsed,
        outputs=outputs,
    )


def write_manifest(path: Path, manifest: RunManifest) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(pretty_json(manifest.model_dump(mode="json")), encoding="utf-8")
