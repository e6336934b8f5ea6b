"""JSON-compatible encoding of complex vectors and matrices.

Complex scalars are serialized as ``[re, im]`` pairs so that documents stay
unambiguous and language neutral. Vectors are lists of pairs; matrices are
lists of rows of pairs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import ValidationError


def complex_pair(x: complex) -> list[float]:
    return [float(np.real(x)), float(np.imag(x))]


def encode_vector(v: np.ndarray) -> list[list[float]]:
    return [complex_pair(x) for x in np.asarray(v).ravel()]


def encode_matrix(a: np.ndarray) -> list[list[list[float]]]:
    return [[complex_pair(x) for x in row] for row in np.asarray(a)]


def encode_real_vector(v: np.ndarray) -> list[float]:
    return [float(x) for x in np.asarray(v, dtype=float).ravel()]


def decode_scalar(obj: Any, where: str = "scalar") -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        re, im = obj
        if isinstance(re, (int, float)) and isinstance(im, (int, float)):
            return complex(re, im)
    raise ValidationError(f"{where}: expected a number or [re, im] pair, got {obj!r}")


def decode_vector(obj: Any, where: str = "vector") -> np.ndarray:
    if not isinstance(obj, (list, tuple)):
        raise ValidationError(f"{where}: expected a list of [re, im] pairs")
    return np.array([decode_scalar(x, where) for x in obj], dtype=complex)


def decode_matrix(obj: Any, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, (list, tuple)) or not obj:
        raise ValidationError(f"{where}: expected a non-empty list of rows")
    rows = [decode_vector(row, where) for row in obj]
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise ValidationError(f"{where}: rows have inconsistent lengths {sorted(lengths)}")
    return np.array(rows, dtype=complex)


def read_document(source: str | Path | Mapping[str, Any]) -> dict[str, Any]:
    """Read a structured document from a mapping or a JSON file path."""
    if isinstance(source, Mapping):
        return dict(source)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top-level document must be an object")
    return doc
