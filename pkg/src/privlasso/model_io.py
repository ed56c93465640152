"""Plain-text model files.

A model file is a block of ``# key value`` header lines followed by one
line per nonzero weight: ``index value`` for a weight vector, or
``class index value`` for a ``K x p`` matrix. Indices are 0-based and
values are written with ``repr`` so a save/load round trip is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

HEADER_KEYS = ("algorithm", "epsilon_total", "epsilon1", "epsilon2", "delta", "lambda",
               "iterations", "seed", "p", "classes")


@dataclass
class Model:
    weights: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def is_matrix(self) -> bool:
        return self.weights.ndim == 2


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def save_model(path, weights, **meta) -> None:
    """Write ``weights`` and header ``meta`` to ``path``.

    ``meta`` keys outside :data:`HEADER_KEYS` are written after the
    standard ones. ``None`` values are written as ``-``.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim not in (1, 2):
        raise ValueError("weights must be a vector or a matrix")
    meta = dict(meta)
    meta.setdefault("p", w.shape[-1])
    meta.setdefault("classes", w.shape[0] if w.ndim == 2 else 2)
    keys = [k for k in HEADER_KEYS if k in meta] + [k for k in meta if k not in HEADER_KEYS]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k in keys:
            fh.write(f"# {k} {_fmt(meta[k])}\n")
        if w.ndim == 1:
            for j in np.flatnonzero(w):
                fh.write(f"{j} {float(w[j])!r}\n")
        else:
            for k, j in zip(*np.nonzero(w)):
                fh.write(f"{k} {j} {float(w[k, j])!r}\n")


def _parse_value(text: str):
    if text == "-":
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def load_model(path) -> Model:
    """Read a file written by :func:`save_model`."""
    meta = {}
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(" ")
                meta[key] = _parse_value(value.strip())
                continue
            parts = line.split()
            try:
                entries.append((tuple(int(t) for t in parts[:-1]), float(parts[-1])))
            except (ValueError, IndexError):
                raise ValueError(f"line {lineno}: malformed weight entry {line!r}") from None
    if "p" not in meta:
        raise ValueError("model file is missing the 'p' header")
    p = int(meta["p"])
    classes = int(meta.get("classes") or 2)
    matrix = any(len(idx) == 2 for idx, _ in entries) or meta.get("algorithm") == "multinomial"
    w = np.zeros((classes, p)) if matrix else np.zeros(p)
    for idx, value in entries:
        if len(idx) != w.ndim:
            raise ValueError("model file mixes vector and matrix entries")
        if any(not 0 <= i < n for i, n in zip(idx, w.shape)):
            raise ValueError(f"weight index {idx} outside shape {w.shape}")
        w[idx] = value
    return Model(w, meta)


def epsilon_total(meta: dict) -> float:
    eps = meta.get("epsilon_total")
    return math.inf if eps is None else float(eps)
