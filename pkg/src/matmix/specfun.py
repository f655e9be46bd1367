"""Log-space special functions.

Everything here works on the natural log of the modified Bessel function of
the third kind, ``K_v(x)``, so that neither the underflow for large ``x`` nor
the overflow for large ``|v|`` ever materialises in floating point.
"""

from __future__ import annotations

import numpy as np
from scipy import special

MAX_ORDER = 500.0
MAX_ORDER_DERIV = 499.0


def _check_args(order, x, max_order):
    order = np.asarray(order, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("log_bessel_k: argument must be positive and finite")
    if np.any(~np.isfinite(order)) or np.any(np.abs(order) > max_order):
        raise ValueError(f"log_bessel_k: |order| must not exceed {max_order}")
    return order, x


def _log_k_recurrence(nu, x):
    """ln K_nu(x) for nu >= 0 by forward recurrence on Bessel ratios.

    ``K_{m+1} = K_{m-1} + (2m/x) K_m`` is stable upwards; carrying the ratio
    ``K_{m+1}/K_m`` instead of the values keeps every quantity O(order/x).
    """
    steps = np.floor(nu)
    base = nu - steps
    log_k = np.log(special.kve(base, x)) - x
    if not np.any(steps > 0):
        return log_k
    ratio = special.kve(base + 1.0, x) / special.kve(base, x)
    mu = base + 1.0
    out = log_k.copy()
    for j in range(int(steps.max())):
        active = steps > j
        out = np.where(active, out + np.log(ratio), out)
        ratio = 1.0 / ratio + 2.0 * mu / x
        mu = mu + 1.0
    return out


def log_bessel_k_scaled(order, x):
    """``ln(e^x K_order(x))``.

    Differences between orders should be taken on this form: subtracting
    ``x`` first would cost ``x * eps`` of absolute accuracy when ``x`` is large.
    """
    order, x = _check_args(order, x, MAX_ORDER)
    nu, x = np.broadcast_arrays(np.abs(order), x)
    # kve returns nan for subnormal orders; K is even in the order, so
    # K_v = K_0 to O(v^2) there
    nu = np.where(nu < 1e-100, 0.0, nu)
    with np.errstate(over="ignore", divide="ignore"):
        out = np.log(special.kve(nu, x))
    bad = ~np.isfinite(out)
    if np.any(bad):
        out = np.array(out, dtype=float)
        out[bad] = _log_k_recurrence(nu[bad], x[bad]) + x[bad]
    return out[()] if out.ndim == 0 else out


def log_bessel_k(order, x):
    """Natural log of ``K_order(x)``.

    Accepts scalars or broadcastable arrays. Valid for ``x > 0`` and
    ``|order| <= 500``; anything else raises ``ValueError``.
    """
    return log_bessel_k_scaled(order, x) - np.asarray(x, dtype=float)


def dlog_bessel_k_dorder(order, x):
    """Partial derivative of ``ln K_order(x)`` with respect to the order.

    Central difference with step ``1e-5 * max(1, |order|)``.
    """
    order, x = _check_args(order, x, MAX_ORDER_DERIV)
    h = 1e-5 * np.maximum(1.0, np.abs(order))
    return (log_bessel_k_scaled(order + h, x) - log_bessel_k_scaled(order - h, x)) / (2.0 * h)


def bessel_k_ratio(order, x):
    """``K_{order+1}(x) / K_order(x)``."""
    return np.exp(log_bessel_k_scaled(np.asarray(order) + 1.0, x) - log_bessel_k_scaled(order, x))


def digamma(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("digamma: argument must be positive")
    out = special.psi(x)
    return out[()] if out.ndim == 0 else out


def log_gamma(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("log_gamma: argument must be positive")
    out = special.gammaln(x)
    return out[()] if out.ndim == 0 else out
