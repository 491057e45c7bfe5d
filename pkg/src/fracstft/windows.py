"""Tapering windows with analytic derivatives.

Both kernels live on an integer support of ``N`` samples, are centered
on ``c = (N - 1) / 2``, and take a continuous effective length ``lam``:

* ``hann``: raised cosine ``(1 + cos(2 pi x / lam)) / 2`` with
  ``x = u - c``, exactly zero outside ``|x| <= lam / 2``.
* ``gauss``: ``exp(-x**2 / (2 sigma**2))`` with ``sigma = lam / 6`` so
  the +-3 sigma extent equals ``lam``.  It never reaches zero and is
  implicitly truncated at the edge of whatever sample range the caller
  evaluates; the clipped tail value is ``exp(-18 ((N+1) / (2 lam))**2)``
  at worst (about 1e-2 only when ``lam`` approaches ``N``).

Neither kernel is renormalized as ``lam`` varies, so absolute spectral
magnitudes are not comparable across different lengths.

``window_eval`` also returns the exact partial derivatives with respect
to the evaluation point ``u`` and the length ``lam``.  At the raised
cosine's support boundary all three outputs vanish (the interior
limits), which keeps the kernel C1 in both arguments.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ._validation import check_length, check_support, normalize_window_kind

__all__ = ["WindowEval", "window_eval", "WINDOW_KINDS"]

from ._validation import WINDOW_KINDS


class WindowEval(NamedTuple):
    """Window value and its partials at one or more evaluation points."""

    value: np.ndarray
    d_du: np.ndarray
    d_dlambda: np.ndarray


def window_eval(kind: str, u, support: int, lam: float) -> WindowEval:
    """Evaluate a tapering window and its analytic partial derivatives.

    Parameters
    ----------
    kind : {'hann', 'gauss'}
        Window family (aliases 'hanning' and 'gaussian' are accepted).
    u : float or array_like
        Evaluation points in samples, measured from the start of the
        support.  Any finite real value is allowed; the Hann window is
        zero outside its own extent.
    support : int >= 2
        Integer sample support ``N``; the center sits at ``(N - 1) / 2``.
    lam : float in (0, support]
        Continuous window length in samples.

    Returns
    -------
    WindowEval
        ``value``, ``d value / d u`` and ``d value / d lam``, with the
        same shape as ``u``.
    """
    kind = normalize_window_kind(kind)
    n = check_support(support)
    lam = check_length(lam, n)
    u = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(u)):
        raise ValueError("window evaluation points must be finite")

    x = u - 0.5 * (n - 1)
    if kind == "hann":
        inside = np.abs(x) <= 0.5 * lam
        phase = np.where(inside, 2.0 * math.pi * x / lam, 0.0)
        sin_phase = np.sin(phase)
        value = np.where(inside, 0.5 * (1.0 + np.cos(phase)), 0.0)
        d_du = np.where(inside, -(math.pi / lam) * sin_phase, 0.0)
        d_dlambda = np.where(inside, (math.pi * x / lam**2) * sin_phase, 0.0)
    else:
        # sigma = lam / 6, so the exponent is -18 x^2 / lam^2.
        scale = 18.0 / lam**2
        value = np.exp(-scale * x * x)
        d_du = -2.0 * scale * x * value
        d_dlambda = (2.0 * scale / lam) * x * x * value
    return WindowEval(value, d_du, d_dlambda)
