"""Reproducibility manifests.

A manifest records the fully resolved configuration, master seed, per-chain
stream keys and diagnostics, and the SHA-256 of every output file. Re-running
a command from its manifest reproduces every CSV byte-for-byte (timestamps
live only in the manifest itself).
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

from . import __version__

SEED_SCHEME = (
    "numpy Philox(SeedSequence(entropy=master_seed, spawn_key=stream)); "
    "stream=(density_index, phase, chain_index, replica) with phase 0 = "
    "coupling scan, phase 1 = production"
)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(command: str, config: dict, master_seed: int | None = None) -> dict:
    return {
        "schema_version": 1,
        "tool": "ueglab",
        "version": __version__,
        "command": command,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "master_seed": master_seed,
        "seed_scheme": SEED_SCHEME if master_seed is not None else None,
        "config": config,
        "chains": [],
        "flags": [],
        "outputs": {},
    }


def attach_outputs(manifest: dict, paths) -> None:
    for p in paths:
        manifest["outputs"][Path(p).name] = sha256_file(p)


def write_manifest(manifest: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
