"""ECM fitting of finite mixtures of skewed matrix variate distributions.

One iteration is: E-step (responsibilities and the conditional GIG moments
of the mixing variable), the location/skewness CM step, the row-scale step,
the column-scale step, the concentration update, and the identifiability
rescaling ``Sigma_g[0, 0] = 1``. Labelled observations keep one-hot
responsibilities throughout.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from . import gig
from .matvar import (
    THETA_NAMES,
    ComponentParams,
    DegenerateObservationError,
    DistKind,
    ScaleMatrix,
    log_density_from_forms,
    quad_forms,
)
from .specfun import bessel_k_ratio, digamma, dlog_bessel_k_dorder, log_bessel_k, log_bessel_k_scaled, log_gamma

log = logging.getLogger(__name__)

NU_BRACKET = (2.001, 200.0)
GAMMA_BRACKET = (0.05, 200.0)
OMEGA_BOUNDS = (1e-4, 500.0)
LAMBDA_BOUND = 200.0
SINGULAR_TOL = 1e-10

DEFAULT_THETA = {
    DistKind.MVST: {"nu": 10.0},
    DistKind.MVGH: {"lam": 1.0, "omega": 1.0},
    DistKind.MVVG: {"gamma": 2.0},
    DistKind.MVNIG: {"gamma_tilde": 1.0},
}


class FitError(RuntimeError):
    """A start (or a whole fit) could not proceed."""

    def __init__(self, message, *, obs=None, component=None, iteration=None):
        super().__init__(message)
        self.obs = obs
        self.component = component
        self.iteration = iteration


class SingularUpdateError(FitError):
    pass


class ComponentDeathError(FitError):
    pass


@dataclass
class MixtureModel:
    kind: DistKind
    weights: np.ndarray
    components: list

    def __post_init__(self):
        self.kind = DistKind.parse(self.kind)
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.components) or len(self.components) == 0:
            raise ValueError("need one weight per component")
        if np.any(self.weights <= 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("mixing proportions must be positive and sum to one")
        shapes = {c.shape for c in self.components}
        if len(shapes) != 1:
            raise ValueError("all components must share (n, p)")

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def shape(self) -> tuple[int, int]:
        return self.components[0].shape

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "weights": self.weights.tolist(),
            "components": [c.to_dict() for c in self.components],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MixtureModel":
        return cls(d["kind"], d["weights"], [ComponentParams.from_dict(c) for c in d["components"]])


@dataclass
class LatentMoments:
    z: np.ndarray  # (N, G) responsibilities
    a: np.ndarray  # E[W | X, g]
    b: np.ndarray  # E[1/W | X, g]
    c: np.ndarray  # E[log W | X, g]


@dataclass
class FitOptions:
    max_iter: int = 1000
    epsilon: float = 1e-5
    n_starts: int = 5
    init: str = "kmeans"
    seed: int = 0
    min_component_weight: float | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 3:
            raise ValueError("max_iter must be at least 3")
        if self.n_starts < 1:
            raise ValueError("n_starts must be positive")
        if self.init not in ("kmeans", "random-soft"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class FitReport:
    model: MixtureModel
    loglik_trace: list
    converged: bool
    iterations: int
    map_labels: np.ndarray
    z: np.ndarray
    bic: float
    icl: float
    warnings: list = field(default_factory=list)
    start_failures: list = field(default_factory=list)

    @property
    def loglik(self) -> float:
        return self.loglik_trace[-1]

    def to_dict(self) -> dict:
        return {
            "kind": self.model.kind.value,
            "G": self.model.n_components,
            "loglik": self.loglik,
            "loglik_trace": list(self.loglik_trace),
            "converged": self.converged,
            "iterations": self.iterations,
            "bic": self.bic,
            "icl": self.icl,
            "warnings": list(self.warnings),
            "start_failures": list(self.start_failures),
            "map_labels": [int(v) for v in self.map_labels],
            "model": self.model.to_dict(),
        }


def _as_data(data) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if data.ndim != 3:
        raise ValueError(f"data must have shape (N, n, p), got {data.shape}")
    bad = np.flatnonzero(~np.isfinite(data).all(axis=(1, 2)))
    if len(bad):
        raise ValueError(f"observation {bad[0]} contains non-finite entries")
    return data


def _as_labels(labels, n_obs, n_comp):
    if labels is None:
        return np.full(n_obs, -1, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (n_obs,):
        raise ValueError("need one label per observation")
    if np.any(labels < -1) or np.any(labels >= n_comp):
        raise ValueError(f"labels must lie in -1..{n_comp - 1}")
    return labels


def _check_finite(terms):
    bad = np.argwhere(~np.isfinite(terms))
    if len(bad):
        i, g = bad[0]
        raise FitError(f"non-finite log-density for observation {i}, component {g}", obs=int(i), component=int(g))


def _log_weighted_densities(model: MixtureModel, data):
    """(N, G) matrix of ``log pi_g + log f(X_i | theta_g)``."""
    out = np.empty((data.shape[0], model.n_components))
    for g, comp in enumerate(model.components):
        out[:, g] = math.log(model.weights[g]) + _component_terms(model.kind, data, comp, g, False)[0]
    _check_finite(out)
    return out


def _loglik_from_terms(terms, labels):
    known = labels >= 0
    total = logsumexp(terms[~known], axis=1).sum() if np.any(~known) else 0.0
    if np.any(known):
        total += terms[np.flatnonzero(known), labels[known]].sum()
    return float(total)


def observed_loglik(model: MixtureModel, data, labels=None) -> float:
    data = _as_data(data)
    labels = _as_labels(labels, data.shape[0], model.n_components)
    return _loglik_from_terms(_log_weighted_densities(model, data), labels)


def conditional_gig(kind: DistKind, delta, rho, theta: dict, dim: int):
    """Parameters ``(a, b, lambda)`` of the GIG law of ``W`` given ``X`` and ``g``."""
    kind = DistKind.parse(kind)
    if kind is DistKind.MVST:
        nu = theta["nu"]
        return rho, delta + nu, -(nu + dim) / 2.0
    if kind is DistKind.MVGH:
        omega = theta["omega"]
        return rho + omega, delta + omega, theta["lam"] - dim / 2.0
    if kind is DistKind.MVVG:
        g = theta["gamma"]
        return rho + 2.0 * g, delta, g - dim / 2.0
    gt = theta["gamma_tilde"]
    return rho + gt * gt, delta + 1.0, -(1.0 + dim) / 2.0


def _component_terms(kind, data, comp: ComponentParams, g, with_moments=True):
    """Log density of every observation under one component, plus W-moments.

    The density and the conditional GIG law share the Bessel factor
    ``K_lambda(sqrt(ab))``, so it is evaluated once.
    """
    n, p = comp.shape
    d, r, cross = quad_forms(data, comp)
    ga, gb, glam = conditional_gig(kind, d, r, comp.theta, n * p)
    ga = np.broadcast_to(ga, d.shape)
    gb = np.broadcast_to(gb, d.shape)
    regular = bool(np.all(ga > 0) and np.all(gb > 0))
    if regular:
        arg = np.sqrt(ga * gb)
        log_kve = log_bessel_k_scaled(glam, arg)
        log_k = log_kve - arg
    else:
        log_k = None
    logf = log_density_from_forms(kind, comp, d, r, cross, log_k=log_k)
    if not with_moments:
        return logf, None
    if regular:
        return logf, gig.moments(ga, gb, glam, log_kve=log_kve)
    if np.any(gb <= 0):
        i = int(np.flatnonzero(gb <= 0)[0])
        raise DegenerateObservationError(f"observation {i} coincides with the location of component {g}")
    # A = 0 in the skew-t: the conditional law is the inverse-gamma limit.
    shape = -glam
    rate = gb / 2.0
    return logf, (rate / (shape - 1.0), shape / rate, np.log(rate) - digamma(shape))


def e_step(model: MixtureModel, data, labels=None) -> LatentMoments:
    return _e_step(model, _as_data(data), labels)[0]


def _e_step(model: MixtureModel, data, labels, z=None):
    """Moments at ``model`` and the observed log-likelihood there.

    A supplied ``z`` replaces the computed responsibilities.
    """
    labels = _as_labels(labels, data.shape[0], model.n_components)
    shape = (data.shape[0], model.n_components)
    terms = np.empty(shape)
    a, b, c = np.empty(shape), np.empty(shape), np.empty(shape)
    for g, comp in enumerate(model.components):
        logf, (a[:, g], b[:, g], c[:, g]) = _component_terms(model.kind, data, comp, g)
        terms[:, g] = math.log(model.weights[g]) + logf
    _check_finite(terms)
    ll = _loglik_from_terms(terms, labels)
    if z is None:
        z = np.exp(terms - logsumexp(terms, axis=1, keepdims=True))
        known = labels >= 0
        if np.any(known):
            z[known] = 0.0
            z[np.flatnonzero(known), labels[known]] = 1.0
    return LatentMoments(z, a, b, c), ll


def component_stats(moments: LatentMoments):
    """``N_g`` and the responsibility-weighted means of a, b and c."""
    z = moments.z
    n_g = z.sum(axis=0)
    a_bar = (z * moments.a).sum(axis=0) / n_g
    b_bar = (z * moments.b).sum(axis=0) / n_g
    c_bar = (z * moments.c).sum(axis=0) / n_g
    return n_g, a_bar, b_bar, c_bar


def cm_step_weights_location_skew(data, moments: LatentMoments):
    """Mixing proportions, locations ``M_g`` and skewness ``A_g``."""
    data = _as_data(data)
    n_g, a_bar, b_bar, _ = component_stats(moments)
    weights = n_g / n_g.sum()
    locs, skews = [], []
    for g in range(moments.z.shape[1]):
        zg, bg = moments.z[:, g], moments.b[:, g]
        denom = float(np.sum(zg * a_bar[g] * bg) - n_g[g])
        if abs(denom) < SINGULAR_TOL:
            raise SingularUpdateError(
                f"location/skewness update is singular for component {g}", component=g
            )
        locs.append(np.einsum("i,ijk->jk", zg * (a_bar[g] * bg - 1.0), data) / denom)
        skews.append(np.einsum("i,ijk->jk", zg * (b_bar[g] - bg), data) / denom)
    return weights, locs, skews


def _scale_matrix(s, what, g):
    try:
        return ScaleMatrix(0.5 * (s + s.T))
    except ValueError as exc:
        raise FitError(f"{what} update for component {g} is not positive definite", component=g) from exc


def cm_step_sigma(data, moments: LatentMoments, locs, skews, psi_prev):
    """Row-scale update, holding each ``Psi_g`` at its previous value."""
    data = _as_data(data)
    p = data.shape[2]
    out = []
    for g, (m, a, psi) in enumerate(zip(locs, skews, psi_prev)):
        zg = moments.z[:, g]
        r = data - m
        pinv = psi.inverse
        s = np.tensordot((zg * moments.b[:, g])[:, None, None] * (r @ pinv), r, axes=([0, 2], [0, 2]))
        cr = np.einsum("i,ijk->jk", zg, r) @ pinv @ a.T
        s = s - cr - cr.T + np.sum(zg * moments.a[:, g]) * (a @ pinv @ a.T)
        out.append(_scale_matrix(s / (zg.sum() * p), "Sigma", g))
    return out


def cm_step_psi(data, moments: LatentMoments, locs, skews, sigma_new):
    """Column-scale update, using the freshly updated ``Sigma_g``."""
    data = _as_data(data)
    n = data.shape[1]
    out = []
    for g, (m, a, sigma) in enumerate(zip(locs, skews, sigma_new)):
        zg = moments.z[:, g]
        r = data - m
        sinv = sigma.inverse
        s = np.tensordot((zg * moments.b[:, g])[:, None, None] * (sinv @ r), r, axes=([0, 1], [0, 1]))
        cr = a.T @ sinv @ np.einsum("i,ijk->jk", zg, r)
        s = s - cr - cr.T + np.sum(zg * moments.a[:, g]) * (a.T @ sinv @ a)
        out.append(_scale_matrix(s / (zg.sum() * n), "Psi", g))
    return out


def expected_l3(data, zg, ag, bg, m, a, sigma: ScaleMatrix, psi: ScaleMatrix) -> float:
    """Expected complete-data term in ``(M, A, Sigma, Psi)`` for one component."""
    n, p = m.shape
    d, r, cross = quad_forms(data, ComponentParams(m, a, sigma, psi))
    per_obs = 2.0 * cross - bg * d - ag * r - p * sigma.log_det - n * psi.log_det
    return 0.5 * float(np.sum(zg * per_obs))


def expected_l2(kind, theta: dict, a_bar, b_bar, c_bar) -> float:
    """Expected log mixing density per unit responsibility, up to constants."""
    kind = DistKind.parse(kind)
    if kind is DistKind.MVST:
        h = theta["nu"] / 2.0
        return h * math.log(h) - log_gamma(h) - h * (b_bar + c_bar)
    if kind is DistKind.MVGH:
        lam, omega = theta["lam"], theta["omega"]
        return -float(log_bessel_k(lam, omega)) + lam * c_bar - 0.5 * omega * (a_bar + b_bar)
    if kind is DistKind.MVVG:
        g = theta["gamma"]
        return g * math.log(g) - log_gamma(g) + g * (c_bar - a_bar)
    gt = theta["gamma_tilde"]
    return gt - 0.5 * gt * gt * a_bar


def _solve_bracketed(fun, lo, hi, name, g, warnings):
    f_lo, f_hi = fun(lo), fun(hi)
    if f_lo * f_hi > 0:
        # decreasing residual: both positive -> root beyond hi
        pinned = hi if f_lo > 0 else lo
        warnings.append(f"{name} for component {g} pinned at {pinned:g} (no sign change in bracket)")
        return pinned
    return brentq(fun, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


def _nu_residual(target):
    return lambda nu: math.log(nu / 2.0) + 1.0 - digamma(nu / 2.0) - target


def _gamma_residual(c_bar, a_bar):
    return lambda g: math.log(g) + 1.0 - digamma(g) + c_bar - a_bar


def _mvgh_update(lam, omega, a_bar, b_bar, c_bar):
    def q(l, w):
        return expected_l2(DistKind.MVGH, {"lam": l, "omega": w}, a_bar, b_bar, c_bar)

    # lambda: c_bar * lambda / (d/ds log K_s(omega)) at s = lambda
    if abs(lam) > 1e-6:
        slope = dlog_bessel_k_dorder(lam, omega) / lam
    else:
        h = 1e-4
        slope = (float(log_bessel_k_scaled(h, omega)) - float(log_bessel_k_scaled(0.0, omega))) * 2.0 / (h * h)
    q0 = q(lam, omega)
    new_lam = lam
    if slope > 0 and math.isfinite(slope):
        cand = float(np.clip(c_bar / slope, -LAMBDA_BOUND, LAMBDA_BOUND))
        for _ in range(30):
            if q(cand, omega) >= q0:
                new_lam = cand
                break
            cand = 0.5 * (cand + lam)
    lam = new_lam

    # omega: damped Newton on q(lambda, .)
    r_pos = float(bessel_k_ratio(lam, omega))
    r_neg = float(bessel_k_ratio(-lam, omega))
    grad = 0.5 * (r_pos + r_neg - (a_bar + b_bar))
    hess = 0.5 * (
        r_pos**2 - (1.0 + 2.0 * lam) / omega * r_pos - 1.0
        + r_neg**2 - (1.0 - 2.0 * lam) / omega * r_neg - 1.0
    )
    step = -grad / hess if hess < 0 else grad
    q1 = q(lam, omega)
    new_omega = omega
    for _ in range(50):
        cand = float(np.clip(omega + step, *OMEGA_BOUNDS))
        if q(lam, cand) >= q1:
            new_omega = cand
            break
        step *= 0.5
    return lam, new_omega


def update_concentration(kind, moments: LatentMoments, theta_prev: list):
    """Concentration parameters for every component.

    Returns ``(thetas, warnings)``; a root that leaves its bracket is pinned
    at the nearer endpoint and reported in ``warnings``.
    """
    kind = DistKind.parse(kind)
    _, a_bar, b_bar, c_bar = component_stats(moments)
    out, warnings = [], []
    for g, prev in enumerate(theta_prev):
        if kind is DistKind.MVST:
            nu = _solve_bracketed(_nu_residual(b_bar[g] + c_bar[g]), *NU_BRACKET, "nu", g, warnings)
            out.append({"nu": float(nu)})
        elif kind is DistKind.MVVG:
            gam = _solve_bracketed(_gamma_residual(c_bar[g], a_bar[g]), *GAMMA_BRACKET, "gamma", g, warnings)
            out.append({"gamma": float(gam)})
        elif kind is DistKind.MVNIG:
            out.append({"gamma_tilde": float(1.0 / a_bar[g])})
        else:
            lam, omega = _mvgh_update(prev["lam"], prev["omega"], a_bar[g], b_bar[g], c_bar[g])
            out.append({"lam": lam, "omega": omega})
    return out, warnings


def normalize_identifiability(model: MixtureModel) -> MixtureModel:
    """Rescale so that ``Sigma_g[0, 0] == 1``, moving the factor into ``Psi_g``."""
    comps = []
    for comp in model.components:
        c = comp.sigma.values[0, 0]
        if not c > 0:
            raise ValueError("Sigma[0, 0] must be positive")
        if c == 1.0:
            comps.append(comp)
            continue
        comps.append(ComponentParams(comp.m, comp.a, comp.sigma.values / c, comp.psi.values * c, comp.theta))
    return MixtureModel(model.kind, model.weights, comps)


def aitken_converged(loglik_trace, epsilon: float) -> bool:
    """Aitken stopping rule on the last three log-likelihood values."""
    if len(loglik_trace) < 3:
        raise ValueError("Aitken's criterion needs at least three log-likelihood values")
    l0, l1, l2 = (float(v) for v in loglik_trace[-3:])
    step_prev, step = l1 - l0, l2 - l1
    if step_prev == 0.0:
        return step == 0.0
    acc = step / step_prev
    if acc >= 1.0:
        return False
    diff = l1 + step / (1.0 - acc) - l1
    return 0.0 < diff < epsilon


def count_free_params(kind, n_components: int, n: int, p: int) -> int:
    kind = DistKind.parse(kind)
    per = 2 * n * p + n * (n + 1) // 2 + p * (p + 1) // 2 - 1 + len(THETA_NAMES[kind])
    return (n_components - 1) + n_components * per


def _initial_z(data, labels, n_comp, method, rng):
    n_obs = data.shape[0]
    known = labels >= 0
    vec = data.reshape(n_obs, -1)
    if method == "random-soft":
        z = rng.dirichlet(np.ones(n_comp), size=n_obs)
    else:
        from sklearn.cluster import KMeans

        seed = int(rng.integers(2**31 - 1))
        if np.any(known):
            centers = vec[rng.choice(n_obs, n_comp, replace=False)]
            for g in range(n_comp):
                if np.any(labels == g):
                    centers[g] = vec[labels == g].mean(axis=0)
            hard = np.empty(n_obs, dtype=int)
            hard[known] = labels[known]
            if np.any(~known):
                km = KMeans(n_comp, init=centers, n_init=1, random_state=seed).fit(vec[~known])
                hard[~known] = km.labels_
        else:
            # k-means readily isolates a few heavy-tail outliers; such tiny
            # clusters give singular scale updates, so re-seed a few times.
            min_size = min(data.shape[1] * data.shape[2], n_obs // n_comp)
            for _ in range(20):
                hard = KMeans(n_comp, n_init=1, random_state=seed).fit(vec).labels_
                if np.bincount(hard, minlength=n_comp).min() >= min_size:
                    break
                seed = int(rng.integers(2**31 - 1))
        z = np.eye(n_comp)[hard]
    if np.any(known):
        z[known] = np.eye(n_comp)[labels[known]]
    return z


def initialize(data, labels, n_comp: int, kind, rng: np.random.Generator, method="kmeans"):
    """Starting model and responsibilities for one ECM start."""
    kind = DistKind.parse(kind)
    data = _as_data(data)
    labels = _as_labels(labels, data.shape[0], n_comp)
    _, n, p = data.shape
    z = _initial_z(data, labels, n_comp, method, rng)
    n_g = z.sum(axis=0)
    if np.any(n_g <= 0):
        raise ComponentDeathError("initialisation left a component empty")
    comps = []
    for g in range(n_comp):
        m = np.einsum("i,ijk->jk", z[:, g], data) / n_g[g]
        a = rng.uniform(-0.1, 0.1, size=(n, p))
        comps.append(ComponentParams(m, a, np.eye(n), np.eye(p), dict(DEFAULT_THETA[kind])))
    return MixtureModel(kind, n_g / n_g.sum(), comps), z


def _ecm_iteration(model, data, moments, min_weight, warnings):
    n_g = moments.z.sum(axis=0)
    dead = np.flatnonzero(n_g < min_weight * data.shape[0])
    if len(dead):
        raise ComponentDeathError(f"component {int(dead[0])} has weight below the minimum", component=int(dead[0]))
    weights, locs, skews = cm_step_weights_location_skew(data, moments)
    sigmas = cm_step_sigma(data, moments, locs, skews, [c.psi for c in model.components])
    psis = cm_step_psi(data, moments, locs, skews, sigmas)
    thetas, warn = update_concentration(model.kind, moments, [c.theta for c in model.components])
    warnings.extend(warn)
    comps = [ComponentParams(*args) for args in zip(locs, skews, sigmas, psis, thetas)]
    return normalize_identifiability(MixtureModel(model.kind, weights, comps))


def run_ecm(data, labels, model: MixtureModel, options: FitOptions | None = None, init_z=None, callback=None) -> FitReport:
    """Iterate ECM from ``model`` until Aitken convergence or ``max_iter``.

    ``init_z`` replaces the first E-step's responsibilities (the mixing
    moments still come from ``model``). ``callback(t, model, moments)`` is
    invoked after each E-step.
    """
    from .select import bic, icl

    options = options or FitOptions()
    data = _as_data(data)
    n_obs, n, p = data.shape
    labels = _as_labels(labels, n_obs, model.n_components)
    min_weight = options.min_component_weight
    if min_weight is None:
        min_weight = 2.0 / n_obs

    if init_z is None:
        moments, _ = _e_step(model, data, labels)
    else:
        moments, _ = _e_step(model, data, labels, z=np.asarray(init_z, dtype=float))
    trace, warnings = [], []
    converged = False
    t = 0
    while t < options.max_iter:
        t += 1
        try:
            model = _ecm_iteration(model, data, moments, min_weight, warnings)
            moments, ll = _e_step(model, data, labels)
        except FitError as exc:
            exc.iteration = t
            raise
        except (DegenerateObservationError, ValueError) as exc:
            raise FitError(f"iteration {t}: {exc}", iteration=t) from exc
        if trace and ll < trace[-1] - 1e-8:
            log.debug("log-likelihood decreased at iteration %d by %g", t, trace[-1] - ll)
        trace.append(ll)
        if callback is not None:
            callback(t, model, moments)
        if len(trace) >= 3 and aitken_converged(trace, options.epsilon):
            converged = True
            break

    k = count_free_params(model.kind, model.n_components, n, p)
    b = bic(trace[-1], k, n_obs)
    return FitReport(
        model=model,
        loglik_trace=trace,
        converged=converged,
        iterations=t,
        map_labels=np.argmax(moments.z, axis=1),
        z=moments.z,
        bic=b,
        icl=icl(b, moments.z),
        warnings=sorted(set(warnings)),
    )


def _start_method(init: str, start: int) -> str:
    # k-means is often stable across seeds, so restarts would repeat the same
    # partition; odd-numbered starts use random soft memberships instead.
    if init == "kmeans" and start % 2 == 1:
        return "random-soft"
    return init


def fit(data, labels, n_components: int, kind, options: FitOptions | None = None) -> FitReport:
    """Best of ``options.n_starts`` independent ECM runs by final log-likelihood."""
    options = options or FitOptions()
    kind = DistKind.parse(kind)
    data = _as_data(data)
    if data.ndim != 3:
        raise ValueError("data must have shape (N, n, p)")
    n_obs = data.shape[0]
    if n_obs < 2 * n_components:
        raise ValueError("need at least two observations per component")
    labels = _as_labels(labels, n_obs, n_components)

    best, failures = None, []
    for start, seq in enumerate(np.random.SeedSequence(options.seed).spawn(options.n_starts)):
        rng = np.random.default_rng(seq)
        try:
            model, z0 = initialize(data, labels, n_components, kind, rng, _start_method(options.init, start))
            report = run_ecm(data, labels, model, options, init_z=z0)
        except (FitError, ValueError) as exc:
            failures.append(f"start {start}: {exc}")
            log.info("start %d aborted: %s", start, exc)
            continue
        if best is None or report.loglik > best.loglik:
            best = report
    if best is None:
        raise FitError(f"all {options.n_starts} starts failed; last cause: {failures[-1]}")
    best.start_failures = failures
    return best
