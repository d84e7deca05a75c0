"""File formats: coordinate tensor files, decomposition JSON, CSV tables.

Tensor files are UTF-8 text::

    dims,<n1>,<n2>,<n3>
    label,<axis>,<index>,<name>      (optional, axis 1-3, index 0-based)
    <i>,<j>,<k>,<value>              (0-based; unlisted coordinates are 0)

Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import TensorFileError
from .rescal import Decomposition

__all__ = [
    "TensorBoundsError",
    "TensorDomainError",
    "load_tensor",
    "save_tensor",
    "dumps_tensor",
    "atomic_write",
    "write_json",
    "read_json",
    "load_decomposition",
    "decomposition_record",
    "curve_csv",
    "matrix_csv",
]

DECOMPOSITION_FORMAT = "rescalk.decomposition/1"


class TensorBoundsError(TensorFileError):
    kind = "bounds"


class TensorDomainError(TensorFileError):
    kind = "domain"


def _fmt(x):
    return format(float(x), ".17g")


def _parse_int(text, line, what):
    try:
        return int(text)
    except ValueError:
        raise TensorFileError(f"{what} is not an integer: {text!r}", line) from None


def parse_tensor(lines):
    """Parse tensor-file lines; returns ``(X, labels)``.

    ``labels`` maps axis (1, 2, 3) to a list of names, ``None`` for unnamed
    indices. Axes without any label line are absent from the dict.
    """
    dims = None
    labels = {}
    values = {}
    for lineno, row in enumerate(csv.reader(lines), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        row = [cell.strip() for cell in row]
        if dims is None:
            if row[0] != "dims" or len(row) != 4:
                raise TensorFileError("first record must be 'dims,<n1>,<n2>,<n3>'", lineno)
            dims = tuple(_parse_int(c, lineno, "dimension") for c in row[1:])
            if min(dims) < 1:
                raise TensorFileError(f"dimensions must be positive, got {dims}", lineno)
            continue
        if row[0] == "label":
            if len(row) != 4:
                raise TensorFileError("label record must be 'label,<axis>,<index>,<name>'", lineno)
            axis = _parse_int(row[1], lineno, "axis")
            idx = _parse_int(row[2], lineno, "label index")
            if axis not in (1, 2, 3):
                raise TensorFileError(f"label axis must be 1, 2 or 3, got {axis}", lineno)
            if not 0 <= idx < dims[axis - 1]:
                raise TensorBoundsError(f"label index {idx} outside axis {axis} of size {dims[axis - 1]}", lineno)
            names = labels.setdefault(axis, [None] * dims[axis - 1])
            if names[idx] is not None:
                raise TensorFileError(f"duplicate label for axis {axis} index {idx}", lineno)
            names[idx] = row[3]
            continue
        if len(row) != 4:
            raise TensorFileError(f"expected 4 fields '<i>,<j>,<k>,<value>', got {len(row)}", lineno)
        coord = tuple(_parse_int(c, lineno, "index") for c in row[:3])
        for axis, (c, d) in enumerate(zip(coord, dims), start=1):
            if not 0 <= c < d:
                raise TensorBoundsError(f"index {c} outside axis {axis} of size {d}", lineno)
        try:
            value = float(row[3])
        except ValueError:
            raise TensorFileError(f"value is not a number: {row[3]!r}", lineno) from None
        if not math.isfinite(value):
            raise TensorDomainError(f"value must be finite, got {row[3]}", lineno)
        if value < 0:
            raise TensorDomainError(f"value must be nonnegative, got {row[3]}", lineno)
        if coord in values:
            raise TensorFileError(f"duplicate coordinate {coord} (first on line {values[coord][1]})", lineno)
        values[coord] = (value, lineno)
    if dims is None:
        raise TensorFileError("missing 'dims' header")
    X = np.zeros(dims)
    for coord, (value, _) in values.items():
        X[coord] = value
    return X, labels


def load_tensor(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_tensor(fh)


def dumps_tensor(X, labels=None):
    X = np.asarray(X, dtype=np.float64)
    out = io.StringIO()
    out.write("dims,%d,%d,%d\n" % X.shape)
    for axis, names in sorted((labels or {}).items()):
        for idx, name in enumerate(names):
            if name is not None:
                out.write(f"label,{axis},{idx},{name}\n")
    for i, j, k in zip(*np.nonzero(X)):
        out.write(f"{i},{j},{k},{_fmt(X[i, j, k])}\n")
    return out.getvalue()


def atomic_write(path, text):
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_tensor(path, X, labels=None):
    atomic_write(path, dumps_tensor(X, labels))


def write_json(path, obj):
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=False) + "\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def decomposition_record(dec, config=None, labels=None):
    record = {"format": DECOMPOSITION_FORMAT}
    if config is not None:
        record["config"] = config
    record["decomposition"] = dec.to_dict()
    if labels:
        record["labels"] = {str(axis): names for axis, names in labels.items()}
    return record


def load_decomposition(path):
    """Read a decomposition JSON; returns ``(Decomposition, record)``."""
    record = read_json(path)
    if record.get("format") != DECOMPOSITION_FORMAT:
        raise TensorFileError(f"{path}: not a {DECOMPOSITION_FORMAT} file")
    try:
        dec = Decomposition.from_dict(record["decomposition"])
    except (KeyError, ValueError, TypeError) as exc:
        raise TensorFileError(f"{path}: malformed decomposition ({exc})") from exc
    return dec, record


CURVE_COLUMNS = ("k", "rel_error", "mean_silhouette", "min_cluster_silhouette")


def curve_csv(curve):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for row in curve.rows:
        writer.writerow([row.k] + [_fmt(getattr(row, c)) for c in CURVE_COLUMNS[1:]])
    return out.getvalue()


def matrix_csv(M, row_labels, col_labels, corner="group"):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([corner, *col_labels])
    for name, values in zip(row_labels, np.asarray(M)):
        writer.writerow([name, *(_fmt(v) for v in values)])
    return out.getvalue()
