"""Run directory layout and manifest bookkeeping.

Every CLI command that produces artifacts works inside its own run
directory.  A manifest is written up front (status "running") so that a
crashed run is recognizable, then finalized atomically with the end
timestamp, termination record, exit code and a file inventory (sha256 and
byte count of every artifact except the manifest itself).

The manifest is the one artifact allowed to differ between repeat runs
(it carries wall-clock timestamps); all other CSV/JSON outputs are
byte-identical for identical inputs.
"""
from __future__ import annotations

import hashlib
import json
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Mapping, Optional

MANIFEST_NAME = "manifest.json"


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def allocate_run_dir(base: str, name: str) -> Path:
    """Create base/name, falling back to name-2, name-3, ... if taken."""
    root = Path(base)
    root.mkdir(parents=True, exist_ok=True)
    candidate = root / name
    suffix = 1
    while True:
        try:
            candidate.mkdir(parents=False, exist_ok=False)
            return candidate
        except FileExistsError:
            suffix += 1
            candidate = root / f"{name}-{suffix}"
            if suffix > 10_000:
                raise RuntimeError(f"cannot allocate a run directory under {root}")


def dump_json(path: Path, payload) -> None:
    """Write JSON with sorted keys and a trailing newline (deterministic)."""
    text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=False)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")


def start_manifest(run_dir: Path, command: str,
                   sections: Mapping[str, Mapping[str, str]],
                   version: str, seed: Optional[int] = None) -> Dict:
    manifest = {
        "command": command,
        "config": {name: dict(vals) for name, vals in sections.items()},
        "version": version,
        "seed": seed,
        "started": _utc_now(),
        "status": "running",
    }
    dump_json(run_dir / MANIFEST_NAME, manifest)
    return manifest


def _inventory(run_dir: Path) -> Dict[str, Dict[str, object]]:
    files: Dict[str, Dict[str, object]] = {}
    for path in sorted(run_dir.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(run_dir).as_posix()
        if rel == MANIFEST_NAME:
            continue
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        files[rel] = {"sha256": digest, "bytes": path.stat().st_size}
    return files


def finalize_manifest(run_dir: Path, manifest: Dict, exit_code: int,
                      termination: Optional[Mapping[str, object]] = None) -> Dict:
    """Complete the manifest and replace it atomically."""
    manifest = dict(manifest)
    manifest["finished"] = _utc_now()
    if exit_code == 0:
        manifest["status"] = "done"
    elif exit_code == 3:
        manifest["status"] = "stopped"
    else:
        manifest["status"] = "failed"
    manifest["exit_code"] = exit_code
    manifest["termination"] = dict(termination) if termination else None
    manifest["files"] = _inventory(run_dir)
    tmp = run_dir / (MANIFEST_NAME + ".tmp")
    dump_json(tmp, manifest)
    os.replace(tmp, run_dir / MANIFEST_NAME)
    return manifest
