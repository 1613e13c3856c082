"""Thread-safe cache of loaded checkpoints."""

import logging
import threading
from pathlib import Path
from typing import Dict, List, Tuple, Union

from tabgen.training.checkpoint import Checkpoint, load_checkpoint

logger = logging.getLogger(__name__)

_Key = Tuple[str, int, int]


class ModelRegistry:
    """
    In-memory cache of frozen checkpoints keyed by path.

    An entry is reused only while the file's size and modification time are
    unchanged; a rewritten checkpoint is loaded again.
    """

    def __init__(self):
        self._models: Dict[str, Tuple[_Key, Checkpoint]] = {}
        self._lock = threading.Lock()

    @staticmethod
    def _key(path: Path) -> _Key:
        stat = path.stat()
        return str(path), stat.st_mtime_ns, stat.st_size

    def get(self, path: Union[str, Path]) -> Checkpoint:
        """
        Return the checkpoint at ``path``, loading it on first use.

        Raises:
            IoError: If the file is missing or unreadable
            CheckpointError: If the file is not a valid checkpoint
        """
        resolved = Path(path).resolve()
        if not resolved.exists():
            # let the loader raise its IoError
            return load_checkpoint(resolved)
        key = self._key(resolved)
        with self._lock:
            cached = self._models.get(str(resolved))
            if cached is not None and cached[0] == key:
                return cached[1]
        checkpoint = load_checkpoint(resolved)
        with self._lock:
            self._models[str(resolved)] = (key, checkpoint)
        logger.debug("Loaded checkpoint %s into the registry", resolved)
        return checkpoint

    def paths(self) -> List[str]:
        with self._lock:
            return list(self._models.keys())

    def evict(self, path: Union[str, Path]) -> None:
        with self._lock:
            self._models.pop(str(Path(path).resolve()), None)

    def clear(self) -> None:
        """Drop every cached checkpoint (useful for testing)."""
        with self._lock:
            self._models.clear()


_model_registry = ModelRegistry()


def get_model_registry() -> ModelRegistry:
    """Process-wide registry instance."""
    return _model_registry
