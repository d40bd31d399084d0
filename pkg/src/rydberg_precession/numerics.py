"""Low-level numerical kernels.

* ``laguerre_scaled``: generalized Laguerre polynomials by three-term
  recurrence, carried as mantissa plus a log-scale so degree-50+ values at
  large argument neither overflow nor lose their sign.
* ``gauss_laguerre``: generalized Gauss-Laguerre rules with weights kept in
  log form (the weight total is Gamma(alpha + 1), which overflows for the
  exponents met in overlap integrals of high-l levels).
* ``compensated_sum``: Neumaier summation along an array axis.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

_RESCALE_AT = 1e100


def laguerre_scaled(degree: int, alpha: float, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate ``L_degree^(alpha)(x)`` and ``L_{degree-1}^(alpha)(x)``.

    Returns
    -------
    (top, prev, log_scale)
        The true values are ``top * exp(log_scale)`` and
        ``prev * exp(log_scale)``; ``prev`` is zero for ``degree == 0``.
    """
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    top = np.ones_like(x)
    log_scale = np.zeros_like(x)
    for k in range(degree):
        nxt = ((2 * k + 1 + alpha - x) * top - (k + alpha) * prev) / (k + 1)
        prev, top = top, nxt
        big = np.abs(top) > _RESCALE_AT
        if np.any(big):
            s = np.where(big, np.abs(top), 1.0)
            top = top / s
            prev = prev / s
            log_scale = log_scale + np.log(s)
    return top, prev, log_scale


@lru_cache(maxsize=512)
def gauss_laguerre(order: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and log-weights for ``int_0^inf x^alpha e^-x f(x) dx``.

    Nodes come from the Jacobi matrix and are polished by Newton steps on the
    scaled recurrence; weights use
    ``w_i = Gamma(N+alpha+1) x_i / (N! (N+alpha)^2 L_{N-1}(x_i)^2)``.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if alpha <= -1.0:
        raise ValueError("alpha must exceed -1")
    k = np.arange(order)
    diag = 2.0 * k + alpha + 1.0
    off = np.sqrt(k[1:] * (k[1:] + alpha))
    x = eigh_tridiagonal(diag, off, eigvals_only=True)
    for _ in range(3):
        top, prev, _ = laguerre_scaled(order, alpha, x)
        deriv = (order * top - (order + alpha) * prev) / x
        x = x - top / deriv
    _, prev, log_scale = laguerre_scaled(order, alpha, x)
    log_w = (
        gammaln(order + alpha + 1.0)
        - gammaln(order + 1.0)
        + np.log(x)
        - 2.0 * math.log(order + alpha)
        - 2.0 * (np.log(np.abs(prev)) + log_scale)
    )
    x.setflags(write=False)
    log_w.setflags(write=False)
    return x, log_w


def compensated_sum(values, axis: int = 0) -> np.ndarray:
    """Neumaier-compensated sum of ``values`` along ``axis``.

    Works for real and complex arrays; complex parts are compensated
    independently.
    """
    arr = np.moveaxis(np.asarray(values), axis, 0)
    if np.iscomplexobj(arr):
        return compensated_sum(arr.real) + 1j * compensated_sum(arr.imag)
    total = np.zeros(arr.shape[1:], dtype=float)
    carry = np.zeros_like(total)
    for v in arr:
        t = total + v
        carry += np.where(np.abs(total) >= np.abs(v), (total - t) + v, (v - t) + total)
        total = t
    return total + carry
