"""Small shared helpers: seeded generators, atomic writes, artifact headers."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

TOOL_VERSION = "0.1.0"


def seeded_rng(seed: int, label: str = "") -> np.random.Generator:
    """Return a generator whose stream depends only on ``seed`` and ``label``.

    Labels split one run seed into independent per-module streams, so adding
    draws in one module never shifts the numbers seen by another.
    """
    digest = hashlib.sha256(label.encode()).digest()
    salt = int.from_bytes(digest[:8], "little")
    return np.random.default_rng(np.random.SeedSequence([int(seed), salt]))


def bracket(k):
    """Japanese bracket <k> = sqrt(1 + k^2), elementwise."""
    k = np.asarray(k, dtype=float)
    return np.sqrt(1.0 + k * k)


def header_lines(config: dict | None, seed: int | None, kind: str) -> list[str]:
    cfg = json.dumps(config or {}, sort_keys=True, default=str)
    return [
        f"# dnls-lab {TOOL_VERSION} artifact={kind}",
        f"# seed={seed}",
        f"# config={cfg}",
    ]


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    """Write ``text`` to ``path`` via a temporary file and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def fmt(x) -> str:
    """Full-precision, platform-stable text for a real number."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))
