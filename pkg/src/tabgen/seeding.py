"""Hash-based derivation of independent random streams from one master seed.

A command-level ``--seed`` fans out into named streams (split, init, eps,
batches, sampling, experiment grid points). Each stream seed is the first
eight bytes of SHA-256 over the master seed and the stream path, so streams
never collide and do not depend on the order in which they are requested.
"""

import hashlib
from typing import Union

import numpy as np

PathPart = Union[str, int, float]


def derive_seed(master: int, *path: PathPart) -> int:
    """
    Derive a 64-bit sub-seed for a named stream.

    Args:
        master: Master seed given on the command line
        *path: Stream coordinates, e.g. ("batches", 3)

    Returns:
        Unsigned 64-bit integer seed
    """
    key = "/".join([str(int(master))] + [str(part) for part in path])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def rng(master: int, *path: PathPart) -> np.random.Generator:
    """Return a PCG64 generator seeded from ``derive_seed(master, *path)``."""
    return np.random.Generator(np.random.PCG64(derive_seed(master, *path)))


def sha256_file(path) -> str:
    """Hex SHA-256 of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_bytes(payload: bytes) -> str:
    """Hex SHA-256 of a byte string."""
    return hashlib.sha256(payload).hexdigest()
