"""Closed-form fixed-time law from the empty initial condition.

For the walk started from the empty diagram, the time-t law of the rows is an
explicit product over boxes with arm/leg/co-arm/co-leg combinatorics. This
module evaluates that law, enumerates the truncated state space, and checks
the simulator against it (and the law itself against direct integration of
the forward equation of the generator).
"""

from __future__ import annotations

import json
import math
from collections import Counter

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from . import _kernels
from .walker import default_refresh_every

__all__ = [
    "transpose",
    "charlier_density",
    "enumerate_diagrams",
    "master_equation_law",
    "exact_marginal_check",
]


def transpose(lam: tuple[int, ...]) -> tuple[int, ...]:
    """Transposed diagram: lam'_j = #{i : lam_i >= j}."""
    rows = [v for v in lam if v > 0]
    if not rows:
        return ()
    return tuple(sum(1 for v in rows if v >= j) for j in range(1, rows[0] + 1))


def _boxes(lam):
    """Yield (arm, leg, coarm, coleg) for every box of the diagram."""
    rows = [v for v in lam if v > 0]
    lamt = transpose(lam)
    for i, row in enumerate(rows, start=1):
        for j in range(1, row + 1):
            arm = row - j
            leg = lamt[j - 1] - i
            yield arm, leg, j - 1, i - 1


def charlier_density(lam: tuple[int, ...], n: int, theta: float, t: float) -> float:
    """Probability of the diagram at time t, started from the empty diagram.

    e^{-theta t n^2} (theta t n)^{|lam|}
        prod_boxes (theta n + a' - theta l') / ((a + theta l + theta)(a + theta l + 1))
    """
    rows = [v for v in lam if v > 0]
    if len(rows) > n:
        raise ValueError(f"diagram has {len(rows)} rows, more than n={n}")
    if not t > 0:
        raise ValueError("t must be positive")
    size = sum(rows)
    if size <= 30:
        p = math.exp(-theta * t * n * n) * (theta * t * n) ** size
        for a, l, ap, lp in _boxes(lam):
            p *= (theta * n + ap - theta * lp) / ((a + theta * l + theta) * (a + theta * l + 1))
        return p
    # log-space for large diagrams to avoid over/underflow
    logp = -theta * t * n * n + size * math.log(theta * t * n)
    for a, l, ap, lp in _boxes(lam):
        num = theta * n + ap - theta * lp
        if num <= 0:
            return 0.0
        logp += math.log(num) - math.log(a + theta * l + theta) - math.log(a + theta * l + 1)
    return math.exp(logp)


def enumerate_diagrams(n: int, max_boxes: int) -> list[tuple[int, ...]]:
    """All diagrams with at most n rows and at most max_boxes boxes."""
    if max_boxes < 0:
        raise ValueError("max_boxes must be >= 0")
    out = []

    def rec(prefix, rows_left, cap, budget):
        out.append(tuple(prefix))
        if rows_left == 0:
            return
        for v in range(1, min(cap, budget) + 1):
            rec(prefix + [v], rows_left - 1, v, budget - v)

    rec([], n, max_boxes, max_boxes)
    return out


def _pad(lam, n):
    return np.array(tuple(lam) + (0,) * (n - len(lam)), dtype=np.int64)


def master_equation_law(n: int, theta: float, t: float, max_boxes: int):
    """Integrate the forward equation on the truncated diagram space.

    Builds the generator restricted to diagrams with |lam| <= max_boxes (mass
    leaving the truncation is absorbed) and applies the matrix exponential to
    the point mass at the empty diagram. Independent of the event-driven
    simulator. Returns (diagrams, probabilities, absorbed_mass).
    """
    diagrams = enumerate_diagrams(n, max_boxes)
    index = {d: k for k, d in enumerate(diagrams)}
    nstate = len(diagrams)
    rows, cols, vals = [], [], []
    diag = np.zeros(nstate + 1)  # last state absorbs overflow
    for d, k in index.items():
        lam = _pad(d, n)
        w = _kernels.weights_full(lam, theta)
        for i in range(n):
            if w[i] <= 0.0:
                continue
            rate = theta * n * w[i]
            lam2 = lam.copy()
            lam2[i] += 1
            d2 = tuple(v for v in lam2 if v > 0)
            k2 = index.get(d2, nstate)
            rows.append(k2)
            cols.append(k)
            vals.append(rate)
            diag[k] -= rate
    rows.extend(range(nstate + 1))
    cols.extend(range(nstate + 1))
    vals.extend(diag)
    gen = sp.csr_matrix((vals, (rows, cols)), shape=(nstate + 1, nstate + 1))
    p0 = np.zeros(nstate + 1)
    p0[index[()]] = 1.0
    pt = expm_multiply(gen * t, p0)
    return diagrams, pt[:nstate], float(pt[nstate])


def _poisson_sf(k: int, mean: float) -> float:
    """P(Poisson(mean) > k)."""
    from scipy.stats import poisson

    return float(poisson.sf(k, mean))


def exact_marginal_check(
    n: int,
    theta: float,
    t: float,
    max_boxes: int,
    runs: int,
    rng: np.random.Generator,
    tail_threshold: float = 1e-4,
) -> dict:
    """Simulate endpoints from the empty diagram and compare with the exact law.

    Reports the total-variation distance over the enumerated diagrams plus the
    truncation tail bound P(N_t > max_boxes), N_t ~ Poisson(theta n^2 t).
    """
    if n > 3:
        raise ValueError("exhaustive check is intended for n <= 3")
    tail = _poisson_sf(max_boxes, theta * n * n * t)
    if tail > tail_threshold:
        # find the smallest truncation meeting the threshold
        need = max_boxes
        while _poisson_sf(need, theta * n * n * t) > tail_threshold:
            need += 1
        raise ValueError(
            f"truncation tail {tail:.2e} above {tail_threshold:.0e}; "
            f"use max_boxes >= {need}"
        )
    diagrams = enumerate_diagrams(n, max_boxes)
    p_exact = np.array([charlier_density(d, n, theta, t) for d in diagrams])
    counts = Counter()
    times = np.array([t])
    refresh = default_refresh_every(n)
    for _ in range(runs):
        lam = np.zeros(n, dtype=np.int64)
        lam_snap, _, status = _kernels.sim_snapshots(lam, theta, times, rng, refresh)
        if status != _kernels.STATUS_OK:
            raise RuntimeError("weight cache drifted")
        counts[tuple(v for v in lam_snap[0] if v > 0)] += 1
    p_emp = np.array([counts.get(d, 0) / runs for d in diagrams])
    overflow_emp = 1.0 - p_emp.sum()
    tv = 0.5 * (np.abs(p_exact - p_emp).sum() + abs((1.0 - p_exact.sum()) - overflow_emp))
    return {
        "tv_distance": float(tv),
        "truncation_tail": tail,
        "runs": runs,
        "per_state": [
            {"lambda": list(d), "p_exact": float(pe), "p_empirical": float(pm)}
            for d, pe, pm in zip(diagrams, p_exact, p_emp)
        ],
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2)
