"""Run manifests: what a command read, wrote and was asked to do."""

import json
import time
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

from pydantic import BaseModel, Field

from tabgen.errors import IoError
from tabgen.seeding import sha256_bytes, sha256_file
from tabgen.version import VERSION

PathLike = Union[str, Path]


class RunManifest(BaseModel):
    """Emitted next to the outputs of every command."""

    command: str
    arguments: Dict[str, object] = Field(default_factory=dict)
    seed: Optional[int] = None
    config_hashes: Dict[str, str] = Field(default_factory=dict)
    inputs: Dict[str, str] = Field(default_factory=dict)
    outputs: Dict[str, str] = Field(default_factory=dict)
    wall_time_seconds: float = 0.0
    version: str = VERSION

    def verify(self) -> Dict[str, bool]:
        """Recompute every recorded file hash; True where it still matches."""
        recorded = {**self.inputs, **self.outputs}
        return {
            path: Path(path).exists() and sha256_file(path) == digest
            for path, digest in recorded.items()
        }


def _hashes(paths: Iterable[PathLike]) -> Dict[str, str]:
    return {str(p): sha256_file(p) for p in paths}


class ManifestRecorder:
    """
    Context manager timing a command and collecting its file hashes.

    Example:
        with ManifestRecorder("train", {"data": "prep"}, seed=1) as rec:
            ...
            rec.outputs(["model.ckpt"])
        rec.write("model.ckpt.manifest.json")
    """

    def __init__(self, command: str, arguments: Dict[str, object], seed: Optional[int] = None):
        self.manifest = RunManifest(command=command, arguments=_jsonable(arguments), seed=seed)
        self._start = 0.0

    def __enter__(self) -> "ManifestRecorder":
        self._start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.manifest.wall_time_seconds = round(time.perf_counter() - self._start, 3)

    def inputs(self, paths: Iterable[PathLike]) -> None:
        self.manifest.inputs.update(_hashes(paths))

    def outputs(self, paths: Iterable[PathLike]) -> None:
        self.manifest.outputs.update(_hashes(paths))

    def config(self, name: str, payload: str) -> None:
        self.manifest.config_hashes[name] = sha256_bytes(payload.encode("utf-8"))

    def write(self, path: PathLike) -> Path:
        out = Path(path)
        try:
            payload = json.dumps(self.manifest.model_dump(mode="json"), indent=2, sort_keys=True)
            out.write_text(payload + "\n")
        except OSError as e:
            raise IoError(f"Cannot write manifest {out}: {e}")
        return out


def _jsonable(arguments: Dict[str, object]) -> Dict[str, object]:
    out = {}
    for key, value in arguments.items():
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, (list, tuple)):
            value = [str(v) if isinstance(v, Path) else v for v in value]
        out[key] = value
    return out
