"""Samplers for the four skewed matrix variate laws and the simulation presets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gig import GigParams, sample_gig
from .matvar import ComponentParams, DistKind, check_theta


@dataclass
class SimulationSpec:
    kind: DistKind
    groups: list  # list of (ComponentParams, count)
    seed: int = 0

    def __post_init__(self):
        self.kind = DistKind.parse(self.kind)
        if not self.groups:
            raise ValueError("simulation needs at least one group")
        shape = self.groups[0][0].shape
        for params, count in self.groups:
            if params.shape != shape:
                raise ValueError("all groups must share the matrix dimensions")
            if int(count) < 1:
                raise ValueError("group counts must be positive")
            check_theta(self.kind, params.theta)

    @property
    def shape(self):
        return self.groups[0][0].shape


@dataclass
class LabeledDataset:
    tensor: np.ndarray  # (N, n, p)
    labels: np.ndarray  # (N,), -1 for unlabelled

    def __post_init__(self):
        self.tensor = np.asarray(self.tensor, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.tensor.ndim != 3 or self.labels.shape != (self.tensor.shape[0],):
            raise ValueError("tensor must be (N, n, p) with one label per observation")


def sample_inverse_gaussian(delta, gamma, rng: np.random.Generator, size=None):
    """Inverse Gaussian ``IG(delta, gamma)`` (mean ``delta/gamma``, shape ``delta**2``).

    Transformation with rejection of Michael, Schucany & Haas.
    """
    mu = delta / gamma
    shape = delta * delta
    y = rng.standard_normal(size) ** 2
    x = mu + mu * mu * y / (2.0 * shape) - mu / (2.0 * shape) * np.sqrt(4.0 * mu * shape * y + (mu * y) ** 2)
    u = rng.random(size)
    out = np.where(u <= mu / (mu + x), x, mu * mu / x)
    return float(out) if size is None else out


def sample_w(kind, theta: dict, rng: np.random.Generator, size=None):
    """Draw the mixing variable ``W`` for the given law."""
    kind = DistKind.parse(kind)
    check_theta(kind, theta)
    if kind is DistKind.MVST:
        half = 0.5 * theta["nu"]
        w = 1.0 / rng.gamma(half, 1.0 / half, size)
    elif kind is DistKind.MVGH:
        omega = theta["omega"]
        w = sample_gig(GigParams(omega, omega, theta["lam"]), rng, size)
    elif kind is DistKind.MVVG:
        g = theta["gamma"]
        w = rng.gamma(g, 1.0 / g, size)
    else:
        w = sample_inverse_gaussian(1.0, theta["gamma_tilde"], rng, size)
    return float(w) if size is None else np.asarray(w)


def sample_observation(kind, params: ComponentParams, rng: np.random.Generator, w=None):
    """One draw of ``M + W A + sqrt(W) V``; pass ``w`` to fix the mixing value."""
    if w is None:
        w = sample_w(kind, params.theta, rng)
    n, p = params.shape
    z = rng.standard_normal((n, p))
    v = params.sigma.chol @ z @ params.psi.chol.T
    return params.m + w * params.a + math.sqrt(w) * v


def simulate_dataset(spec: SimulationSpec) -> LabeledDataset:
    """Draw every group in order; observation ``i`` uses its own spawned stream."""
    total = sum(int(c) for _, c in spec.groups)
    streams = np.random.SeedSequence(spec.seed).spawn(total)
    n, p = spec.shape
    tensor = np.empty((total, n, p))
    labels = np.empty(total, dtype=int)
    i = 0
    for g, (params, count) in enumerate(spec.groups):
        for _ in range(int(count)):
            rng = np.random.Generator(np.random.Philox(streams[i]))
            tensor[i] = sample_observation(spec.kind, params, rng)
            labels[i] = g
            i += 1
    return LabeledDataset(tensor, labels)


# Simulation 1: 3 x 4 matrices, two groups.
SIM1_SIGMA = [
    [[1.0, 0.5, 0.1], [0.5, 1.0, 0.5], [0.1, 0.5, 1.0]],
    [[1.0, 0.1, 0.1], [0.1, 1.0, 0.1], [0.1, 0.1, 1.0]],
]
SIM1_PSI = [
    [[1.0, 0.5, 0.5, 0.5], [0.5, 1.0, 0.0, 0.0], [0.5, 0.0, 1.0, 0.0], [0.5, 0.0, 0.0, 1.0]],
    [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.5, 0.5], [0.0, 0.5, 1.0, 0.2], [0.0, 0.5, 0.2, 1.0]],
]
SIM1_M = [
    [[1, 0, 0, -1], [0, 1, -1, 0], [-1, 0, 2, -1]],
    [[3, 4, 2, 4], [4, 3, 3, 3], [3, 4, 2, 4]],
]
SIM1_A = [
    [[1, -1, 0, 1], [1, -1, 0, 1], [1, -1, 0, 1]],
    [[1, 1, 1, -1], [1, 1, 0.5, -1], [1, 1, 0, -1]],
]
SIM1_THETA = {
    DistKind.MVST: [{"nu": 4.0}, {"nu": 20.0}],
    DistKind.MVGH: [{"lam": 2.0, "omega": 4.0}, {"lam": 2.0, "omega": 2.0}],
    DistKind.MVVG: [{"gamma": 7.0}, {"gamma": 14.0}],
    DistKind.MVNIG: [{"gamma_tilde": 0.5}, {"gamma_tilde": 2.0}],
}

# Simulation 2: 4 x 3 matrices, three groups; scale matrices reuse Simulation 1's.
SIM2_SIGMA = [SIM1_PSI[0], SIM1_PSI[1], SIM1_PSI[1]]
SIM2_PSI = [SIM1_SIGMA[0], SIM1_SIGMA[1], SIM1_SIGMA[0]]
SIM2_M = [
    [[1, -1, 0], [0, 0, -1], [0, 1, 0], [-1, 0, -1]],
    [[-1, 1, 0], [0, 0, 1], [0, -1, 0], [1, 0, 1]],
    [[1, 1, 2], [1, 2, 0], [0, 1, 1], [0, 1, 0]],
]
_SIM2_A23 = [[1, 1, -1], [1, 0.5, 0.5], [1, 0, 0], [1, 0, 0]]
SIM2_A = [
    [[1, -1, -1], [1, -0.5, -1], [1, 0, -1], [1, 0, -1]],
    _SIM2_A23,
    _SIM2_A23,
]
SIM2_THETA = {
    DistKind.MVST: [{"nu": 4.0}, {"nu": 8.0}, {"nu": 20.0}],
    DistKind.MVGH: [{"lam": 4.0, "omega": 4.0}, {"lam": 0.0, "omega": 2.0}, {"lam": -2.0, "omega": 2.0}],
    DistKind.MVVG: [{"gamma": 7.0}, {"gamma": 9.0}, {"gamma": 14.0}],
    DistKind.MVNIG: [{"gamma_tilde": 0.5}, {"gamma_tilde": 1.0}, {"gamma_tilde": 2.0}],
}

DEFAULT_GROUP_SIZE = 200

PRESETS = tuple(f"sim{k}_{kind.value}" for k in (1, 2) for kind in DistKind)


def preset_components(name: str) -> tuple[DistKind, list]:
    """Generating components of a named preset."""
    try:
        sim, kind = name.split("_", 1)
        kind = DistKind.parse(kind)
    except ValueError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    if sim == "sim1":
        mats = zip(SIM1_M, SIM1_A, SIM1_SIGMA, SIM1_PSI, SIM1_THETA[kind])
    elif sim == "sim2":
        mats = zip(SIM2_M, SIM2_A, SIM2_SIGMA, SIM2_PSI, SIM2_THETA[kind])
    else:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return kind, [ComponentParams(m, a, s, ps, dict(th)) for m, a, s, ps, th in mats]


def preset_spec(name: str, seed: int = 0, per_group: int = DEFAULT_GROUP_SIZE) -> SimulationSpec:
    kind, comps = preset_components(name)
    return SimulationSpec(kind, [(c, per_group) for c in comps], seed)
