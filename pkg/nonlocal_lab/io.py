"""
Artifact writers: CSV tables, JSON payloads and the binary form file.

Every writer goes through a temporary file in the target directory that is
renamed into place, so a failing run leaves no partial artifact behind.
"""

from __future__ import annotations

import json
import logging
import os
import struct
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Mapping, NamedTuple, Sequence, Union

import numpy as np
import pandas as pd

from .errors import DomainError, NonlocalError
from .models import FormMatrix, GridFunction

logger = logging.getLogger(__name__)

FORM_MAGIC = b"NLFORM"
FORM_VERSION = 1
# magic, version, N, n_interior, n_shell, h
_HEADER = struct.Struct("<6sHiqqd")


def _atomic_write(path: Path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug("wrote %s (%d bytes)", path, len(data))
    return path


def table_frame(columns: Union[Mapping[str, Sequence], pd.DataFrame]) -> pd.DataFrame:
    if isinstance(columns, pd.DataFrame):
        return columns
    return pd.DataFrame({key: np.asarray(value) for key, value in columns.items()})


def write_csv(path: Path, columns: Union[Mapping[str, Sequence], pd.DataFrame]) -> Path:
    """CSV with '.' decimals and 17 significant digits."""
    text = table_frame(columns).to_csv(index=False, float_format="%.17g", lineterminator="\n")
    return _atomic_write(path, text.encode("utf-8"))


def read_values(path: Path, expected: int, column: str = "value") -> np.ndarray:
    """
    One value per cell from a CSV file: the `column` column when present,
    otherwise the last column.
    """
    path = Path(path)
    if not path.exists():
        raise DomainError(f"data file not found: {path}")
    frame = pd.read_csv(path)
    series = frame[column] if column in frame.columns else frame.iloc[:, -1]
    values = pd.to_numeric(series, errors="coerce").to_numpy(dtype=float)
    if values.shape[0] != expected:
        raise DomainError(f"{path} holds {values.shape[0]} values, expected {expected}")
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{path} holds non-numeric or non-finite values")
    return values


def grid_frame(u: GridFunction) -> pd.DataFrame:
    """Cell centers, region label and value of a grid function."""
    domain = u.domain
    centers = domain.centers()
    columns = {"x": centers[:, 0]}
    if domain.dimension == 2:
        columns["y"] = centers[:, 1]
    columns["region"] = np.where(np.arange(domain.n_cells) < domain.n_interior, "interior", "shell")
    columns["value"] = u.values
    return pd.DataFrame(columns)


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def dumps(payload: Mapping) -> str:
    return json.dumps(_plain(payload), indent=2, sort_keys=True)


def write_json(path: Path, payload: Mapping, timestamp: bool = False) -> Path:
    """Sorted, indented JSON; `timestamp` adds a generated_at field."""
    body = dict(payload)
    if timestamp:
        body["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return _atomic_write(path, (dumps(body) + "\n").encode("utf-8"))


class FormFile(NamedTuple):
    """Contents of a binary form file."""
    dimension: int
    h: float
    interior_index: np.ndarray
    shell_index: np.ndarray
    weights: np.ndarray
    exterior_mass: np.ndarray
    tail_uncertainty: np.ndarray


def encode_form(form: FormMatrix) -> bytes:
    domain = form.domain
    header = _HEADER.pack(FORM_MAGIC, FORM_VERSION, domain.dimension, domain.n_interior, domain.n_shell, domain.h)
    upper = form.weights[np.triu_indices(domain.n_cells, k=1)]
    parts = [
        header,
        domain.cell_index.astype("<i8").tobytes(),
        upper.astype("<f8").tobytes(),
        np.asarray(form.exterior_mass).astype("<f8").tobytes(),
        np.asarray(form.tail_uncertainty).astype("<f8").tobytes(),
    ]
    return b"".join(parts)


def write_form(path: Path, form: FormMatrix) -> Path:
    return _atomic_write(path, encode_form(form))


def decode_form(data: bytes) -> FormFile:
    if len(data) < _HEADER.size:
        raise NonlocalError("form file is truncated")
    magic, version, dim, n_int, n_shell, h = _HEADER.unpack_from(data, 0)
    if magic != FORM_MAGIC:
        raise NonlocalError("not a form file (bad magic)")
    if version != FORM_VERSION:
        raise NonlocalError(f"unsupported form file version {version}")
    n = n_int + n_shell
    offset = _HEADER.size
    sizes = [n * dim * 8, n * (n - 1) // 2 * 8, n_int * 8, n_int * 8]
    if len(data) != offset + sum(sizes):
        raise NonlocalError("form file length does not match its header")
    index = np.frombuffer(data, dtype="<i8", count=n * dim, offset=offset).reshape(n, dim)
    offset += sizes[0]
    upper = np.frombuffer(data, dtype="<f8", count=n * (n - 1) // 2, offset=offset)
    offset += sizes[1]
    mass = np.frombuffer(data, dtype="<f8", count=n_int, offset=offset)
    offset += sizes[2]
    uncertainty = np.frombuffer(data, dtype="<f8", count=n_int, offset=offset)
    weights = np.zeros((n, n))
    weights[np.triu_indices(n, k=1)] = upper
    weights = weights + weights.T
    return FormFile(int(dim), float(h), index[:n_int].copy(), index[n_int:].copy(), weights, mass.copy(), uncertainty.copy())


def read_form(path: Path) -> FormFile:
    return decode_form(Path(path).read_bytes())


def form_info(form: Union[FormMatrix, FormFile]) -> Dict[str, float]:
    """Summary printed by `form info`."""
    mass = np.asarray(form.exterior_mass)
    weights = np.asarray(form.weights)
    return {
        "dimension": float(form.dimension if isinstance(form, FormFile) else form.domain.dimension),
        "h": float(form.h if isinstance(form, FormFile) else form.domain.h),
        "n_interior": float(mass.shape[0]),
        "lambda_min": float(mass.min()),
        "lambda_max": float(mass.max()),
        "weight_count": float(np.count_nonzero(np.triu(weights, k=1))),
    }
