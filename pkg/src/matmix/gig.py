"""Generalized inverse Gaussian distribution.

Standard parameterisation ``GIG(a, b, lambda)`` with density

    f(y) = (a/b)^(lambda/2) y^(lambda-1) / (2 K_lambda(sqrt(ab)))
           * exp(-(a y + b / y) / 2),

and the alternative ``I(omega, eta, lambda)`` form with ``omega = sqrt(ab)``
and scale ``eta = sqrt(b/a)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import dlog_bessel_k_dorder, log_bessel_k, log_bessel_k_scaled


@dataclass(frozen=True)
class GigParams:
    a: float
    b: float
    lam: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"GIG requires a > 0 and b > 0, got a={self.a}, b={self.b}")
        if not math.isfinite(self.lam):
            raise ValueError("GIG index must be finite")


@dataclass(frozen=True)
class GigAltParams:
    omega: float
    eta: float
    lam: float

    def __post_init__(self):
        if not (self.omega > 0 and self.eta > 0):
            raise ValueError("I(omega, eta, lambda) requires omega > 0 and eta > 0")


@dataclass(frozen=True)
class GigMoments:
    e_y: float
    e_inv_y: float
    e_log_y: float


def to_alt(params: GigParams) -> GigAltParams:
    return GigAltParams(math.sqrt(params.a * params.b), math.sqrt(params.b / params.a), params.lam)


def to_standard(alt: GigAltParams) -> GigParams:
    return GigParams(alt.omega / alt.eta, alt.omega * alt.eta, alt.lam)


def gig_log_density(params: GigParams, y):
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise ValueError("GIG density is defined for y > 0 only")
    a, b, lam = params.a, params.b, params.lam
    out = (
        0.5 * lam * math.log(a / b)
        + (lam - 1.0) * np.log(y)
        - math.log(2.0)
        - log_bessel_k(lam, math.sqrt(a * b))
        - 0.5 * (a * y + b / y)
    )
    return out[()] if np.ndim(out) == 0 else out


def gig_log_density_alt(alt: GigAltParams, y):
    """Log density in the ``I(omega, eta, lambda)`` parameterisation."""
    y = np.asarray(y, dtype=float)
    u = y / alt.eta
    return (
        (alt.lam - 1.0) * np.log(u)
        - math.log(2.0 * alt.eta)
        - log_bessel_k(alt.lam, alt.omega)
        - 0.5 * alt.omega * (u + 1.0 / u)
    )


def moments(a, b, lam, log_kve=None):
    """Vectorised ``E[Y]``, ``E[1/Y]`` and ``E[log Y]`` for GIG(a, b, lam).

    Only one neighbouring order is evaluated: the other Bessel ratio follows
    from ``K_{l+1} = K_{l-1} + (2l/w) K_l``, choosing the direction in which
    both terms are positive so nothing cancels. ``log_kve`` may carry a
    precomputed ``ln(e^w K_lam(w))`` with ``w = sqrt(ab)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lam = np.asarray(lam, dtype=float)
    omega = np.sqrt(a * b)
    if log_kve is None:
        log_kve = log_bessel_k_scaled(lam, omega)
    step = np.where(lam >= 0, -1.0, 1.0)
    ratio = np.exp(log_bessel_k_scaled(lam + step, omega) - log_kve)
    shift = 2.0 * np.abs(lam) / omega
    r_up = np.where(lam >= 0, ratio + shift, ratio)  # K_{lam+1} / K_lam
    r_down = np.where(lam >= 0, ratio, ratio + shift)  # K_{lam-1} / K_lam
    e_y = np.sqrt(b / a) * r_up
    e_inv_y = np.sqrt(a / b) * r_down
    e_log_y = 0.5 * np.log(b / a) + dlog_bessel_k_dorder(lam, omega)
    return e_y, e_inv_y, e_log_y


def gig_moments(params: GigParams) -> GigMoments:
    e_y, e_inv_y, e_log_y = moments(params.a, params.b, params.lam)
    return GigMoments(float(e_y), float(e_inv_y), float(e_log_y))


def _devroye_setup(lam, omega):
    # Devroye (2014), log-concave envelope for t = log(x / mode), lam >= 0.
    alpha = math.sqrt(omega * omega + lam * lam) - lam

    def psi(t):
        return -alpha * (math.cosh(t) - 1.0) - lam * (math.expm1(t) - t)

    def dpsi(t):
        return -alpha * math.sinh(t) - lam * math.expm1(t)

    x = -psi(1.0)
    if 0.5 <= x <= 2.0:
        t = 1.0
    elif x > 2.0:
        t = math.sqrt(2.0 / (alpha + lam))
    else:
        t = math.log(4.0 / (alpha + 2.0 * lam))

    x = -psi(-1.0)
    if 0.5 <= x <= 2.0:
        s = 1.0
    elif x > 2.0:
        s = math.sqrt(4.0 / (alpha * math.cosh(1.0) + lam))
    elif lam == 0.0:
        s = math.log(1.0 + 1.0 / alpha + math.sqrt(1.0 / alpha**2 + 2.0 / alpha))
    else:
        s = min(1.0 / lam, math.log(1.0 + 1.0 / alpha + math.sqrt(1.0 / alpha**2 + 2.0 / alpha)))

    eta, zeta = -psi(t), -dpsi(t)
    theta, xi = -psi(-s), dpsi(-s)
    p, r = 1.0 / xi, 1.0 / zeta
    td, sd = t - r * eta, s - p * theta
    q = td + sd
    return psi, (t, s, eta, zeta, theta, xi, p, r, td, sd, q)


def sample_gig(params: GigParams, rng: np.random.Generator, size=None):
    """Exact GIG draws by Devroye's rejection sampler.

    Returns a float when ``size`` is None, otherwise an array of that shape.
    """
    lam = abs(params.lam)
    omega = math.sqrt(params.a * params.b)
    psi, (t, s, eta, zeta, theta, xi, p, r, td, sd, q) = _devroye_setup(lam, omega)
    mode_scale = lam / omega + math.sqrt(1.0 + (lam / omega) ** 2)
    scale = math.sqrt(params.b / params.a)
    total = p + q + r

    n = 1 if size is None else int(np.prod(size))
    out = np.empty(n)
    for k in range(n):
        while True:
            u, v, w = rng.random(3)
            if u < q / total:
                x = -sd + q * v
            elif u < (q + r) / total:
                x = td - r * math.log(v)
            else:
                x = -sd + p * math.log(v)
            if x > td:
                env = math.exp(-eta - zeta * (x - t))
            elif x < -sd:
                env = math.exp(-theta + xi * (x + s))
            else:
                env = 1.0
            if w * env <= math.exp(psi(x)):
                break
        y = math.exp(x) * mode_scale
        if params.lam < 0:
            y = 1.0 / y
        out[k] = y * scale
    if size is None:
        return float(out[0])
    return out.reshape(size)
