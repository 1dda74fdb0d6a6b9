"""JSON and CSV serialization of signals, bases and measurement vectors.

Complex numbers are written as ``[re, im]`` pairs; matrices are row-major
nested lists. Float formatting is Python's shortest round-trip repr, so
writing the same values twice yields identical bytes.
"""
import csv
import io
import json

import numpy as np

from .exceptions import ConfigError
from .model import Basis


def encode_array(a):
    """Nested lists of floats, with complex entries as ``[re, im]``."""
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return np.stack([a.real, a.imag], axis=-1).tolist()
    return a.astype(float).tolist()


def decode_vector(data, name="vector"):
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be an array of numbers or [re, im] pairs") from exc
    if arr.ndim == 1:
        return arr
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    raise ConfigError(f"{name} must be an array of numbers or [re, im] pairs, got shape {arr.shape}")


def decode_matrix(data, field=None, name="matrix"):
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a rectangular nested array") from exc
    if arr.ndim == 3 and arr.shape[2] == 2:
        out = arr[..., 0] + 1j * arr[..., 1]
    elif arr.ndim == 2:
        out = arr
    else:
        raise ConfigError(f"{name} must be 2-D (or 2-D of [re, im] pairs), got shape {arr.shape}")
    if field == "complex":
        out = out.astype(complex)
    elif field == "real" and np.iscomplexobj(out):
        raise ConfigError(f"{name} is complex but field is real")
    return out


def dumps_json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def read_signal(path):
    data = _load_json(path)
    if isinstance(data, dict):
        data = data.get("signal", data.get("x"))
    return decode_vector(data, "signal")


def signal_json(x):
    return dumps_json(encode_array(x))


def basis_to_dict(basis):
    return {"field": basis.field, "n": basis.n, "matrix": encode_array(basis.matrix)}


def read_basis(path, field=None):
    data = _load_json(path)
    if isinstance(data, dict):
        field = field or data.get("field")
        data = data.get("matrix")
    if data is None:
        raise ConfigError(f"{path}: no basis matrix found")
    basis = Basis.from_matrix(decode_matrix(data, field, "basis matrix"))
    if field == "complex" and basis.field != "complex":
        basis = Basis(basis.matrix.astype(complex), basis.condition)
    return basis


def vector_csv(values):
    """``index,value`` rows with a header; complex values get ``re,im`` columns."""
    values = np.asarray(values)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if np.iscomplexobj(values):
        writer.writerow(["index", "re", "im"])
        writer.writerows([k, repr(float(v.real)), repr(float(v.imag))] for k, v in enumerate(values))
    else:
        writer.writerow(["index", "value"])
        writer.writerows([k, repr(float(v))] for k, v in enumerate(values))
    return buf.getvalue()


def read_vector_csv(path):
    """Read ``index,value`` (or ``index,re,im``) rows; a header and bare values are allowed."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    if not rows:
        raise ConfigError(f"{path}: no measurement values")
    try:
        if len(rows[0]) == 1:
            return np.array([float(r[0]) for r in rows])
        idx = [int(float(r[0])) for r in rows]
        if idx != list(range(len(rows))):
            raise ConfigError(f"{path}: indices must run 0..{len(rows) - 1} in order")
        if len(rows[0]) >= 3:
            return np.array([float(r[1]) + 1j * float(r[2]) for r in rows])
        return np.array([float(r[1]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: malformed CSV row ({exc})") from exc


def read_vector(path):
    """Measurement vector from ``.json`` or CSV."""
    if str(path).endswith(".json"):
        return decode_vector(_load_json(path), "measurements")
    return read_vector_csv(path)


def _is_number(text):
    try:
        float(text)
        return True
    except ValueError:
        return False
