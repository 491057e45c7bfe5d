"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

_WINDOW_ALIASES = {
    "hann": "hann",
    "hanning": "hann",
    "gauss": "gauss",
    "gaussian": "gauss",
}

WINDOW_KINDS = ("hann", "gauss")


def normalize_window_kind(kind: str) -> str:
    """Map a window name to its canonical form ('hann' or 'gauss')."""
    try:
        return _WINDOW_ALIASES[str(kind).lower()]
    except KeyError:
        raise ValueError(
            f"unknown window kind {kind!r}; expected one of {sorted(set(_WINDOW_ALIASES))}"
        ) from None


def as_float_array(x, name: str, *, ndim: int = 1) -> np.ndarray:
    """Coerce to a float64 array and reject non-finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_support(support) -> int:
    n = int(support)
    if n != support or n < 2:
        raise ValueError(f"support must be an integer >= 2, got {support!r}")
    return n


def check_length(lam, support: int) -> float:
    lam = float(lam)
    if not np.isfinite(lam) or lam <= 0.0 or lam > support:
        raise ValueError(
            f"window length must lie in (0, {support}], got {lam!r}"
        )
    return lam


def check_positive(value, name: str) -> float:
    v = float(value)
    if not v > 0.0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return v


def check_non_negative(value, name: str) -> float:
    v = float(value)
    if not v >= 0.0:
        raise ValueError(f"{name} must be non-negative, got {value!r}")
    return v
