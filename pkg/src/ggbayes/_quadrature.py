"""Adaptive 2-D quadrature of exp(f) with log-space accumulation.

Integrands here have log-values spanning hundreds of orders of magnitude,
so panel sums, the global total, and error estimates are all carried as
logarithms. Panels are tensor-product Gauss-Kronrod (7/15) rules refined
by greedy bisection of the panel with the largest error estimate; a
monotone counter breaks ties so refinement order is deterministic.
"""

from __future__ import annotations

import heapq
import math

import numpy as np
from scipy.special import logsumexp

__all__ = ["QuadratureError", "integrate_log"]

# 15-point Kronrod extension of 7-point Gauss, positive half in QUADPACK
# layout: odd indices are the embedded Gauss nodes.
_XGK_HALF = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WGK_HALF = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG_HALF = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

_NODES = np.concatenate([-_XGK_HALF[:7], _XGK_HALF[::-1]])
_WK = np.concatenate([_WGK_HALF[:7], _WGK_HALF[::-1]])
# Gauss nodes sit at odd positions of the sorted 15-node rule.
_GAUSS_IDX = np.arange(1, 15, 2)
_WG = np.concatenate([_WG_HALF[:3], _WG_HALF[::-1]])

_LWK2 = np.log(_WK)[:, None] + np.log(_WK)[None, :]
_LWG2 = np.log(_WG)[:, None] + np.log(_WG)[None, :]


class QuadratureError(RuntimeError):
    """The integrand returned a non-finite (inf or nan) log-value."""


def _panel(f_log, x0, x1, y0, y1):
    """Kronrod and |Kronrod - Gauss| estimates of log integral exp(f)."""
    hx = 0.5 * (x1 - x0)
    hy = 0.5 * (y1 - y0)
    xs = 0.5 * (x0 + x1) + hx * _NODES
    ys = 0.5 * (y0 + y1) + hy * _NODES
    F = np.asarray(f_log(xs[:, None], ys[None, :]), dtype=float)
    if F.shape != (15, 15):
        raise QuadratureError("integrand must broadcast to the node grid")
    if np.any(np.isnan(F)) or np.any(F == np.inf):
        raise QuadratureError(
            f"non-finite integrand inside box ({x0:g},{x1:g})x({y0:g},{y1:g})")
    scale = math.log(hx) + math.log(hy)
    lk = logsumexp(F + _LWK2) + scale
    lg = logsumexp(F[np.ix_(_GAUSS_IDX, _GAUSS_IDX)] + _LWG2) + scale
    # log|K - G|; -inf when the two rules agree exactly
    lerr, _ = logsumexp([lk, lg], b=[1.0, -1.0], return_sign=True)
    return float(lk), float(lerr)


def integrate_log(f_log, box, rel_tol=1e-7, max_panels=600):
    """Integrate exp(f_log) over box = (x0, x1, y0, y1), in log space.

    f_log must be vectorized over numpy arrays and return log-integrand
    values; -inf is permitted (a zero of the integrand), +inf and nan
    abort with QuadratureError.

    Returns (log_integral, log_error_estimate, panels_used).
    """
    x0, x1, y0, y1 = map(float, box)
    if not (x0 < x1 and y0 < y1):
        raise ValueError("integration box must have positive extent")
    counter = 0
    lk, lerr = _panel(f_log, x0, x1, y0, y1)
    # min-heap on -log_err: the roughest panel is split first
    heap = [(-lerr, counter, x0, x1, y0, y1, lk)]
    while len(heap) < max_panels:
        log_total = logsumexp([p[6] for p in heap])
        log_err = logsumexp([-p[0] for p in heap])
        if log_total == -np.inf or log_err - log_total <= math.log(rel_tol):
            break
        _, _, px0, px1, py0, py1, _unused = heapq.heappop(heap)
        xm = 0.5 * (px0 + px1)
        ym = 0.5 * (py0 + py1)
        for cx0, cx1, cy0, cy1 in ((px0, xm, py0, ym), (xm, px1, py0, ym),
                                   (px0, xm, ym, py1), (xm, px1, ym, py1)):
            counter += 1
            clk, clerr = _panel(f_log, cx0, cx1, cy0, cy1)
            heapq.heappush(heap, (-clerr, counter, cx0, cx1, cy0, cy1, clk))
    log_total = logsumexp([p[6] for p in heap])
    log_err = logsumexp([-p[0] for p in heap])
    return float(log_total), float(log_err), len(heap)
