"""Matrix variate densities.

The four skewed laws all come from ``X = M + W A + sqrt(W) V`` with
``V ~ N_{n x p}(0, Sigma, Psi)``; they differ only in the law of ``W``.
Every density below is evaluated in log-space through
:func:`matmix.specfun.log_bessel_k`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .specfun import log_bessel_k, log_gamma

LOG_2PI = math.log(2.0 * math.pi)


class DegenerateObservationError(ValueError):
    """Raised when a density or conditional law is singular at an observation."""


class DistKind(str, enum.Enum):
    MVST = "mvst"
    MVGH = "mvgh"
    MVVG = "mvvg"
    MVNIG = "mvnig"

    @classmethod
    def parse(cls, value) -> "DistKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown distribution kind {value!r}") from None


THETA_NAMES = {
    DistKind.MVST: ("nu",),
    DistKind.MVGH: ("lam", "omega"),
    DistKind.MVVG: ("gamma",),
    DistKind.MVNIG: ("gamma_tilde",),
}


def check_theta(kind: DistKind, theta: dict) -> None:
    kind = DistKind.parse(kind)
    names = THETA_NAMES[kind]
    if set(theta) != set(names):
        raise ValueError(f"{kind.value} expects parameters {names}, got {tuple(theta)}")
    for name in names:
        if not math.isfinite(theta[name]):
            raise ValueError(f"{name} must be finite")
    if kind is DistKind.MVST and not theta["nu"] > 0:
        raise ValueError("nu must be positive")
    if kind is DistKind.MVGH and not theta["omega"] > 0:
        raise ValueError("omega must be positive")
    if kind is DistKind.MVVG and not theta["gamma"] > 0:
        raise ValueError("gamma must be positive")
    if kind is DistKind.MVNIG and not theta["gamma_tilde"] > 0:
        raise ValueError("gamma_tilde must be positive")


class ScaleMatrix:
    """A symmetric positive-definite scale matrix with its Cholesky factor cached."""

    def __init__(self, values):
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError("scale matrix must be square")
        if not np.allclose(values, values.T, rtol=1e-10, atol=1e-12):
            raise ValueError("scale matrix must be symmetric")
        self.values = 0.5 * (values + values.T)
        try:
            self.chol = np.linalg.cholesky(self.values)
        except np.linalg.LinAlgError:
            raise ValueError("scale matrix is not positive definite") from None
        self.values.setflags(write=False)
        self.chol.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @cached_property
    def log_det(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.chol))))

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = cho_solve((self.chol, True), np.eye(self.dim))
        return 0.5 * (inv + inv.T)

    @cached_property
    def chol_inv(self) -> np.ndarray:
        """``L^{-1}`` so that ``values^{-1} = L^{-T} L^{-1}``."""
        return solve_triangular(self.chol, np.eye(self.dim), lower=True)

    def scaled(self, c: float) -> "ScaleMatrix":
        return ScaleMatrix(self.values * c)

    def __repr__(self):
        return f"ScaleMatrix({self.values.tolist()!r})"


@dataclass
class ComponentParams:
    m: np.ndarray
    a: np.ndarray
    sigma: ScaleMatrix
    psi: ScaleMatrix
    theta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        if not isinstance(self.sigma, ScaleMatrix):
            self.sigma = ScaleMatrix(self.sigma)
        if not isinstance(self.psi, ScaleMatrix):
            self.psi = ScaleMatrix(self.psi)
        n, p = self.m.shape
        if self.a.shape != (n, p) or self.sigma.dim != n or self.psi.dim != p:
            raise ValueError("component parameters have inconsistent dimensions")
        self.theta = {k: float(v) for k, v in self.theta.items()}

    @property
    def shape(self) -> tuple[int, int]:
        return self.m.shape

    def to_dict(self) -> dict:
        return {
            "M": self.m.tolist(),
            "A": self.a.tolist(),
            "Sigma": self.sigma.values.tolist(),
            "Psi": self.psi.values.tolist(),
            "theta": dict(self.theta),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComponentParams":
        return cls(d["M"], d["A"], d["Sigma"], d["Psi"], d["theta"])


def _whiten(d, sigma: ScaleMatrix, psi: ScaleMatrix):
    # L_S^{-1} D L_P^{-T}; works on a single matrix or a stack (..., n, p).
    return sigma.chol_inv @ d @ psi.chol_inv.T


def _check_conformable(x, m, n, p):
    if np.shape(x)[-2:] != (n, p) or np.shape(m) != (n, p):
        raise ValueError(f"expected {n}x{p} matrices, got {np.shape(x)} and {np.shape(m)}")


def delta(x, m, sigma: ScaleMatrix, psi: ScaleMatrix):
    """``tr(Sigma^{-1} (X - M) Psi^{-1} (X - M)')`` for one matrix or a stack."""
    x = np.asarray(x, dtype=float)
    _check_conformable(x, m, sigma.dim, psi.dim)
    z = _whiten(x - m, sigma, psi)
    return np.sum(z * z, axis=(-2, -1))


def rho(a, sigma: ScaleMatrix, psi: ScaleMatrix) -> float:
    """``tr(Sigma^{-1} A Psi^{-1} A')``."""
    a = np.asarray(a, dtype=float)
    _check_conformable(a, a, sigma.dim, psi.dim)
    z = _whiten(a, sigma, psi)
    return float(np.sum(z * z))


def quad_forms(x, params: ComponentParams):
    """Return ``(delta, rho, cross)`` for a stack of observations.

    ``cross`` is ``tr(Sigma^{-1} (X - M) Psi^{-1} A')``.
    """
    x = np.asarray(x, dtype=float)
    n, p = params.shape
    _check_conformable(x, params.m, n, p)
    zx = _whiten(x - params.m, params.sigma, params.psi)
    za = _whiten(params.a, params.sigma, params.psi)
    d = np.sum(zx * zx, axis=(-2, -1))
    r = float(np.sum(za * za))
    cross = np.sum(zx * za, axis=(-2, -1))
    return d, r, cross


def log_density_matrix_normal(x, m, sigma: ScaleMatrix, psi: ScaleMatrix):
    n, p = sigma.dim, psi.dim
    d = delta(x, m, sigma, psi)
    return -0.5 * n * p * LOG_2PI - 0.5 * p * sigma.log_det - 0.5 * n * psi.log_det - 0.5 * d


def log_density(kind, x, params: ComponentParams):
    """Log density of one of the four skewed matrix variate laws.

    ``x`` may be a single ``n x p`` matrix or a stack of shape ``(N, n, p)``.
    """
    kind = DistKind.parse(kind)
    check_theta(kind, params.theta)
    d, r, cross = quad_forms(x, params)
    out = log_density_from_forms(kind, params, np.atleast_1d(d), r, np.atleast_1d(cross))
    if np.ndim(x) == 2:
        return float(out[0])
    return out


def log_density_from_forms(kind: DistKind, params: ComponentParams, d, r, cross, log_k=None):
    """Log density given the quadratic forms.

    ``log_k`` optionally supplies ``ln K_s(sqrt(u v))`` already evaluated for
    the kind's Bessel order and argument (the same pair that parameterises
    the conditional GIG law of ``W``); it is only used when every argument
    is positive.
    """
    n, p = params.shape
    dim = n * p
    base = cross - 0.5 * dim * LOG_2PI - 0.5 * p * params.sigma.log_det - 0.5 * n * params.psi.log_det
    th = params.theta

    def bessel(order, arg_sq):
        if log_k is not None:
            return log_k
        return log_bessel_k(order, np.sqrt(arg_sq))

    if kind is DistKind.MVST:
        nu = th["nu"]
        s = 0.5 * (nu + dim)
        const = math.log(2.0) + 0.5 * nu * math.log(0.5 * nu) - log_gamma(0.5 * nu)
        u = d + nu
        if r > 0:
            tail = -0.5 * s * (np.log(u) - math.log(r)) + bessel(-s, r * u)
        else:
            tail = log_gamma(s) - math.log(2.0) + s * math.log(2.0) - s * np.log(u)
        return const + base + tail

    if kind is DistKind.MVGH:
        lam, omega = th["lam"], th["omega"]
        s = lam - 0.5 * dim
        u, v = d + omega, r + omega
        return base - log_bessel_k(lam, omega) + 0.5 * s * (np.log(u) - math.log(v)) + bessel(s, u * v)

    if kind is DistKind.MVVG:
        g = th["gamma"]
        s = g - 0.5 * dim
        v = r + 2.0 * g
        const = math.log(2.0) + g * math.log(g) - log_gamma(g)
        zero = d <= 0.0
        if not np.any(zero):
            return const + base + 0.5 * s * (np.log(d) - math.log(v)) + bessel(s, v * d)
        if s <= 0:
            raise DegenerateObservationError(
                "variance-gamma density is unbounded at X = M when gamma <= np/2"
            )
        tail = np.empty_like(d)
        pos = ~zero
        tail[pos] = 0.5 * s * (np.log(d[pos]) - math.log(v)) + log_bessel_k(s, np.sqrt(v * d[pos]))
        tail[zero] = log_gamma(s) - math.log(2.0) + s * math.log(2.0) - s * math.log(v)
        return const + base + tail

    gt = th["gamma_tilde"]
    s = 0.5 * (1.0 + dim)
    u, v = d + 1.0, r + gt * gt
    return (
        math.log(2.0) + gt - 0.5 * LOG_2PI + base
        - 0.5 * s * (np.log(u) - math.log(v))
        + bessel(-s, u * v)
    )
