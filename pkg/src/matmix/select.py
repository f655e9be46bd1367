"""Model selection criteria and clustering agreement measures.

BIC and ICL use the "larger is better" convention ``2 loglik - k log N``.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

Z_FLOOR = 1e-300


def bic(loglik: float, n_params: int, n_obs: int) -> float:
    if n_obs < 1:
        raise ValueError("n_obs must be positive")
    return 2.0 * loglik - n_params * math.log(n_obs)


def map_matrix(z) -> np.ndarray:
    """One-hot indicator of each row's arg max."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    out[np.arange(z.shape[0]), np.argmax(z, axis=1)] = 1.0
    return out


def icl(bic_value: float, z) -> float:
    z = np.asarray(z, dtype=float)
    best = z[np.arange(z.shape[0]), np.argmax(z, axis=1)]
    return bic_value + 2.0 * float(np.sum(np.log(np.maximum(best, Z_FLOOR))))


def contingency(labels_a, labels_b):
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("label vectors must have equal length")
    ua, ia = np.unique(a, return_inverse=True)
    ub, ib = np.unique(b, return_inverse=True)
    table = np.zeros((len(ua), len(ub)), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table, ua, ub


def _comb2(x):
    x = np.asarray(x, dtype=np.int64)
    return x * (x - 1) // 2


def ari(labels_a, labels_b) -> float:
    """Hubert & Arabie adjusted Rand index."""
    table, _, _ = contingency(labels_a, labels_b)
    n = int(table.sum())
    if n < 2:
        raise ValueError("ARI needs at least two observations")
    sum_ij = int(_comb2(table).sum())
    sum_a = int(_comb2(table.sum(axis=1)).sum())
    sum_b = int(_comb2(table.sum(axis=0)).sum())
    total = n * (n - 1) // 2
    # integer numerator and denominator, so the one division is correctly rounded
    num = 2 * (sum_ij * total - sum_a * sum_b)
    den = (sum_a + sum_b) * total - 2 * sum_a * sum_b
    if den == 0:
        # both partitions trivial (all singletons or one block)
        return 1.0
    return num / den


def best_matching(pred, truth, max_classes: int = 8):
    """Relabelling of ``pred`` that maximises agreement with ``truth``.

    Exhaustive over permutations; returns a dict ``pred label -> truth label``.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    p_labels = np.unique(pred)
    t_labels = np.unique(truth)
    k = max(len(p_labels), len(t_labels))
    if k > max_classes:
        raise ValueError(f"exhaustive matching is limited to {max_classes} classes")
    targets = list(t_labels) + [None] * (k - len(t_labels))
    best, best_hits = None, -1
    for perm in itertools.permutations(targets, len(p_labels)):
        hits = sum(int(np.sum((pred == pl) & (truth == tl))) for pl, tl in zip(p_labels, perm) if tl is not None)
        if hits > best_hits:
            best, best_hits = dict(zip(p_labels.tolist(), perm)), hits
    return best


def misclassification_rate(pred, truth, mask=None) -> float:
    """Error rate on ``mask`` (default: all points) after the best relabelling."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("label vectors must have equal length")
    mask = np.ones(pred.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if not np.any(mask):
        raise ValueError("no points selected for evaluation")
    p, t = pred[mask], truth[mask]
    mapping = best_matching(p, t)
    hits = sum(int(np.sum((p == pl) & (t == tl))) for pl, tl in mapping.items() if tl is not None)
    return 1.0 - hits / len(p)


@dataclass
class SelectionResult:
    per_g: list  # (kind, G, FitReport | str)
    chosen_bic: tuple = None  # (kind, G)
    chosen_icl: tuple = None
    failures: list = field(default_factory=list)

    def successes(self):
        return [(k, g, r) for k, g, r in self.per_g if not isinstance(r, str)]


def _fit_one(args):
    from .ecm import fit

    data, labels, g, kind, options = args
    try:
        return fit(data, labels, g, kind, options)
    except Exception as exc:  # recorded per G, never fatal here
        return f"{type(exc).__name__}: {exc}"


def select_over_g(data, labels, kinds, g_range, options=None, n_jobs: int | None = None) -> SelectionResult:
    """Fit every (kind, G) pair and pick the BIC and ICL winners."""
    from .ecm import FitError, FitOptions
    from .matvar import DistKind

    options = options or FitOptions()
    if isinstance(kinds, (str, DistKind)):
        kinds = [kinds]
    kinds = [DistKind.parse(k) for k in kinds]
    g_range = list(g_range)
    if not g_range:
        raise ValueError("g_range must not be empty")
    jobs = [(data, labels, g, k, options) for k in kinds for g in g_range]
    if n_jobs is None:
        n_jobs = int(os.environ.get("MATMIX_THREADS", "1"))
    if n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_fit_one, jobs))
    else:
        results = [_fit_one(j) for j in jobs]

    per_g = [(j[3], j[2], r) for j, r in zip(jobs, results)]
    result = SelectionResult(per_g, failures=[(k, g, r) for k, g, r in per_g if isinstance(r, str)])
    ok = result.successes()
    if not ok:
        raise FitError("every fit failed: " + "; ".join(f"{k.value} G={g}: {r}" for k, g, r in per_g))
    best_bic = max(ok, key=lambda t: t[2].bic)
    best_icl = max(ok, key=lambda t: t[2].icl)
    result.chosen_bic = (best_bic[0], best_bic[1])
    result.chosen_icl = (best_icl[0], best_icl[1])
    return result
