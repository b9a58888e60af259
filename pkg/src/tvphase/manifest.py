"""Run manifests: every file-producing CLI invocation records what made it.

The manifest hash (SHA-256 of the canonical JSON of the identifying fields)
is embedded in sibling JSON outputs and appended as a trailing column to
tabular CSVs, so any artifact can be traced back to its exact command,
configuration, seed, and library versions.
"""

from __future__ import annotations

import hashlib
import json
import os
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _versions() -> dict:
    import numpy
    import scipy

    from . import __version__

    return {
        "tvphase": __version__,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "python": sys.version.split()[0],
        "platform": platform.platform(),
    }


@dataclass(frozen=True)
class RunManifest:
    command: str
    config: dict
    master_seed: int | None
    versions: dict = field(default_factory=_versions)
    started_at: str = field(default_factory=_now)

    @property
    def hash(self) -> str:
        payload = {
            "command": self.command,
            "config": self.config,
            "master_seed": self.master_seed,
            "versions": self.versions,
            "started_at": self.started_at,
        }
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()

    def to_json_dict(self, finished_at: str | None = None) -> dict:
        return {
            "manifest_hash": self.hash,
            "command": self.command,
            "config": self.config,
            "master_seed": self.master_seed,
            "versions": dict(self.versions),
            "started_at": self.started_at,
            "finished_at": finished_at,
        }

    def write(self, directory, filename: str = "manifest.json") -> str:
        """Write manifest.json (stamped with the finish time) and return its path."""
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, filename)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(finished_at=_now()), fh, indent=1, default=str)
            fh.write("\n")
        return path
