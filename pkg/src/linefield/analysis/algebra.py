"""Recovery of the first derivatives of ``a`` from ``div P``.

With ``b^2 = a (1 - a)`` one has ``b b_k = (1/2 - a) a_k``. Combined with
``div P = (a_1 + b_2, b_1 - a_2) = (f, g)`` this gives

    (1/2 - a) a_1 - b a_2 = b g
    b a_1 + (1/2 - a) a_2 = b f

whose determinant ``(1/2 - a)^2 + b^2`` equals 1/4 on the constraint set.
For a solution, ``P div P = 0`` turns the right-hand side into
``(-a f, (a - 1) g)``; a known residual ``r = P div P`` can be supplied
instead.
"""
from __future__ import annotations

import logging

import numpy as np

from ..errors import InvalidProjectionError

log = logging.getLogger(__name__)


def determinant(a, b):
    return (0.5 - np.asarray(a)) ** 2 + np.asarray(b) ** 2


def gradient_recovery(a, b, f, g, residual=None, tol: float = 1e-6):
    """Solve the 2x2 system per cell for ``(a_1, a_2)``.

    ``residual`` is ``(r1, r2) = P div P`` with shape ``a.shape + (2,)``;
    ``None`` assumes ``P div P = 0``. Returns ``(a1, a2, det)``.
    """
    a, b, f, g = (np.asarray(v, dtype=float) for v in (a, b, f, g))
    ok = np.isfinite(a) & np.isfinite(b)
    defect = np.abs(b * b - a * (1.0 - a))
    if np.any(defect[ok] > tol):
        raise InvalidProjectionError(f"b^2 = a(1-a) violated by {defect[ok].max():.3g} > {tol:g}")
    det = determinant(a, b)
    dev = np.abs(det - 0.25)[ok]
    if dev.size and dev.max() > 1e-9:
        log.warning("determinant deviates from 1/4 by %.3g", dev.max())
    if residual is None:
        r1, r2 = -a * f, (a - 1.0) * g
    else:
        residual = np.asarray(residual, dtype=float)
        r1 = residual[..., 0] - a * f
        r2 = residual[..., 1] + (a - 1.0) * g
    p = 0.5 - a
    a1 = (p * r1 + b * r2) / det
    a2 = (p * r2 - b * r1) / det
    return a1, a2, det
