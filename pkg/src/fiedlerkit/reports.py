"""Run manifests and deterministic JSON/CSV emission."""

from __future__ import annotations

import hashlib
import json
import os
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from . import __version__


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def run_timestamp() -> str:
    """UTC timestamp, pinned by ``SOURCE_DATE_EPOCH`` when set so reruns are byte-identical."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def build_manifest(command: str, config: dict, inputs, seeds) -> dict:
    digests = {}
    for path in inputs:
        if path is None:
            continue
        p = Path(path)
        if p.is_file():
            digests[p.name if p.name not in digests else str(p)] = file_digest(p)
    return {
        "command": command,
        "config": config,
        "input_digests": digests,
        "tool_version": __version__,
        "seeds": list(seeds),
        "timestamp": run_timestamp(),
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def write_csv(text: str, path, manifest: dict | None = None) -> None:
    """Write CSV text, optionally preceded by a ``# manifest {...}`` comment line."""
    head = ""
    if manifest is not None:
        head = "# manifest " + json.dumps(manifest, sort_keys=True) + "\n"
    Path(path).write_text(head + text)


def load_schema(kind: str) -> dict:
    return json.loads(resources.files("fiedlerkit").joinpath(f"schemas/{kind}.schema.json").read_text())
