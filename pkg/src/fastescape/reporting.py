"""Atomic file outputs: CSV tables with 17 significant digits, plain PGM
rasters, and flat key = value manifests."""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .logmag import LogMag, fmt_logmag


def fmt_number(x) -> str:
    if isinstance(x, LogMag):
        return fmt_logmag(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    return str(x)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_number(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_manifest(path, mapping: dict) -> None:
    lines = [f"{k} = {fmt_number(v)}" for k, v in sorted(mapping.items())]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_manifest(path) -> dict:
    out = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def write_pgm(path, data: np.ndarray, maxval: int = 255) -> None:
    """Plain (P2) PGM; row 0 is written first."""
    data = np.asarray(data)
    if data.ndim != 2:
        raise ValueError("PGM data must be 2-d")
    if data.min() < 0 or data.max() > maxval:
        raise ValueError("PGM values outside [0, maxval]")
    ny, nx = data.shape
    body = "\n".join(" ".join(str(int(v)) for v in row) for row in data)
    atomic_write_text(path, f"P2\n{nx} {ny}\n{maxval}\n{body}\n")


def read_pgm(path) -> np.ndarray:
    tokens = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0]
        tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise ValueError("only plain (P2) PGM is supported")
    nx, ny, _maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    vals = np.array(tokens[4 : 4 + nx * ny], dtype=np.int64)
    if vals.size != nx * ny:
        raise ValueError("truncated PGM body")
    return vals.reshape(ny, nx)
