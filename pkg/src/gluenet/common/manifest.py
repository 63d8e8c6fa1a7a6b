"""
Run manifests.

Every command that writes files records what produced them next to the
primary output as ``<output>.manifest.yaml``: the command, every resolved
flag, the seed, SHA-256 digests of all input files and the tool version.
Manifests carry no timestamps, so equal manifests describe equal outputs.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

import yaml

from gluenet import __version__

log = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest.yaml"
CHUNK_BYTES = 1 << 20


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(CHUNK_BYTES), b""):
            h.update(chunk)
    return h.hexdigest()


def _plain(value: Any) -> Any:
    """YAML-safe rendering of flag values."""
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


@dataclass
class RunManifest:
    command: str
    flags: dict[str, Any]
    seed: Optional[int] = None
    inputs: dict[str, str] = field(default_factory=dict)
    version: str = __version__

    @classmethod
    def for_command(
        cls,
        command: str,
        flags: dict[str, Any],
        inputs: Iterable[Path] = (),
        seed: Optional[int] = None,
    ) -> "RunManifest":
        digests = {str(p): file_digest(Path(p)) for p in inputs if p is not None}
        return cls(command=command, flags=_plain(flags), seed=seed, inputs=digests)

    def to_yaml(self) -> str:
        return yaml.safe_dump(asdict(self), sort_keys=False, default_flow_style=False)

    @classmethod
    def from_yaml(cls, path: Path) -> "RunManifest":
        with open(path, "r") as f:
            return cls(**yaml.safe_load(f))


def manifest_path(output: Path) -> Path:
    output = Path(output)
    return output.with_name(output.name + MANIFEST_SUFFIX)


def write_manifest(manifest: RunManifest, output: Path) -> Path:
    path = manifest_path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.to_yaml())
    log.info(f"Wrote manifest {path}")
    return path
