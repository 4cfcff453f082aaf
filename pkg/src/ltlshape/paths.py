"""Lookup of shipped fixture files."""
from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Optional


def data_dir() -> Path:
    return Path(str(resources.files("ltlshape") / "data"))


def resolve(name, base: Optional[Path] = None) -> Path:
    """Find ``name`` relative to ``base``, then the working directory, then
    the shipped data directory. Returns the first candidate if none exist."""
    p = Path(name)
    candidates = [p] if p.is_absolute() else []
    if not p.is_absolute():
        if base is not None:
            candidates.append(Path(base) / p)
        candidates += [p, data_dir() / p]
    for c in candidates:
        if c.exists():
            return c
    return candidates[0]
