"""Input validation helpers shared by the public functions."""
import numpy as np

from .exceptions import ConfigError

FIELDS = ("real", "complex")


def check_field(field):
    if field not in FIELDS:
        raise ConfigError(f"field must be one of {FIELDS}, got {field!r}")
    return field


def infer_field(x):
    return "complex" if np.iscomplexobj(x) else "real"


def check_signal(x, field=None, name="x"):
    """Return ``x`` as a finite 1-D float or complex array.

    With ``field="real"`` complex input is accepted only if its imaginary
    part vanishes identically; it is returned as a real array.
    """
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.size == 0 or arr.dtype.kind not in "biufc":
        raise ConfigError(f"{name} must be a non-empty 1-D numeric vector")
    if not np.isfinite(arr).all():
        raise ConfigError(f"{name} has non-finite entries")
    if field is None:
        return arr.astype(complex if arr.dtype.kind == "c" else float)
    check_field(field)
    if field == "real":
        if np.iscomplexobj(arr):
            if np.any(arr.imag != 0):
                raise ConfigError(f"{name} has nonzero imaginary part but field is real")
            arr = arr.real
        return arr.astype(float)
    return arr.astype(complex)


def check_signals(x, name="x"):
    """Like :func:`check_signal` without a field, but also accepts a 2-D batch (one signal per row)."""
    arr = np.asarray(x)
    if arr.ndim == 1:
        return check_signal(arr, name=name)
    if arr.ndim != 2 or arr.size == 0 or arr.dtype.kind not in "biufc":
        raise ConfigError(f"{name} must be a non-empty 1-D vector or 2-D batch of vectors")
    if not np.isfinite(arr).all():
        raise ConfigError(f"{name} has non-finite entries")
    return arr.astype(complex if arr.dtype.kind == "c" else float)


def check_matrix(a, name="matrix", square=False):
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.size == 0 or not np.issubdtype(arr.dtype, np.number):
        raise ConfigError(f"{name} must be a non-empty 2-D numeric array")
    if square and arr.shape[0] != arr.shape[1]:
        raise ConfigError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} has non-finite entries")
    return arr.astype(complex) if np.iscomplexobj(arr) else arr.astype(float)


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return int(value)
