"""Numba event loops for the jump process.

The total jump rate is exactly theta*n^2 (the rate-sum identity), so the
simulator draws a homogeneous exponential clock and a categorical particle,
with no thinning. Weights are maintained incrementally in O(n) per event and
refreshed from scratch every ``refresh_every`` events; a refresh that finds
|sum(w) - n| > 1e-6 aborts the run (status code 1).
"""

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_WEIGHT_DRIFT = 1


@njit(cache=True)
def weights_full(lam, theta):
    n = lam.size
    w = np.zeros(n)
    for i in range(n):
        if i > 0 and lam[i] == lam[i - 1]:
            w[i] = 0.0
        else:
            p = 1.0
            for j in range(n):
                if j != i:
                    d = (lam[i] - lam[j]) + (j - i) * theta
                    p *= (d + theta) / d
            w[i] = p
    return w


@njit(cache=True)
def _recompute_one(lam, theta, i):
    if i > 0 and lam[i] == lam[i - 1]:
        return 0.0
    n = lam.size
    p = 1.0
    for j in range(n):
        if j != i:
            d = (lam[i] - lam[j]) + (j - i) * theta
            p *= (d + theta) / d
    return p


@njit(cache=True)
def _select(w, wsum, u):
    # u is uniform on [0, wsum); linear scan, blocked particles have w == 0
    n = w.size
    acc = 0.0
    last = 0
    for i in range(n):
        if w[i] > 0.0:
            acc += w[i]
            last = i
            if u < acc:
                return i
    return last


@njit(cache=True)
def apply_jump(lam, w, theta, i):
    """Increment lam[i] and update all weights in O(n)."""
    n = lam.size
    for j in range(n):
        if j != i and w[j] != 0.0:
            # x_j - x_i before the jump
            d = (lam[j] - lam[i]) + (i - j) * theta
            w[j] *= (d - 1.0 + theta) * d / ((d - 1.0) * (d + theta))
    lam[i] += 1
    w[i] = _recompute_one(lam, theta, i)
    # the jump can only unblock particle i+1
    if i + 1 < n and w[i + 1] == 0.0:
        w[i + 1] = _recompute_one(lam, theta, i + 1)


@njit(cache=True)
def _refresh(lam, theta, w):
    n = lam.size
    wn = weights_full(lam, theta)
    s = 0.0
    for i in range(n):
        w[i] = wn[i]
        s += wn[i]
    return abs(s - n) <= 1e-6


@njit(cache=True)
def sim_snapshots(lam, theta, times, rng, refresh_every):
    """Evolve lam in place, recording lam and jump count at each time.

    ``times`` must be sorted ascending. Snapshots use the state including
    every jump at timestamps <= the snapshot time (cadlag convention).
    Returns (lam_snap[K, n], jumps[K], status).
    """
    n = lam.size
    k = times.size
    total_rate = theta * n * n
    w = weights_full(lam, theta)
    lam_snap = np.zeros((k, n), dtype=np.int64)
    jumps = np.zeros(k, dtype=np.int64)
    clock = 0.0
    njumps = 0
    for kk in range(k):
        target = times[kk]
        while True:
            wait = rng.standard_exponential() / total_rate
            if clock + wait > target:
                break
            clock += wait
            wsum = 0.0
            for i in range(n):
                wsum += w[i]
            i = _select(w, wsum, rng.random() * wsum)
            apply_jump(lam, w, theta, i)
            njumps += 1
            if njumps % refresh_every == 0:
                if not _refresh(lam, theta, w):
                    return lam_snap, jumps, STATUS_WEIGHT_DRIFT
        clock = target
        lam_snap[kk] = lam
        jumps[kk] = njumps
    return lam_snap, jumps, STATUS_OK


@njit(cache=True)
def sim_events(lam, theta, tmax, max_events, rng, refresh_every):
    """Full jump log up to time tmax (or max_events).

    Returns (times, particles (0-based), count, status).
    """
    n = lam.size
    total_rate = theta * n * n
    w = weights_full(lam, theta)
    times = np.zeros(max_events)
    parts = np.zeros(max_events, dtype=np.int64)
    clock = 0.0
    m = 0
    while m < max_events:
        wait = rng.standard_exponential() / total_rate
        if clock + wait > tmax:
            break
        clock += wait
        wsum = 0.0
        for i in range(n):
            wsum += w[i]
        i = _select(w, wsum, rng.random() * wsum)
        apply_jump(lam, w, theta, i)
        times[m] = clock
        parts[m] = i
        m += 1
        if m % refresh_every == 0:
            if not _refresh(lam, theta, w):
                return times, parts, m, STATUS_WEIGHT_DRIFT
    return times, parts, m, STATUS_OK


@njit(cache=True)
def sim_qv(lam, theta, zbase, cexp, times, rng, refresh_every):
    """Quadratic variation of the Stieltjes martingale along a characteristic.

    Accumulates n^2 * sum_jumps (m^n_s(z_s) - m^n_{s-}(z_s))^2 with
    z_s = zbase + s*cexp. Returns (qv[K] complex, qv_abs[K] real, jumps[K],
    status), sampled at the sorted checkpoint ``times``.
    """
    n = lam.size
    k = times.size
    total_rate = theta * n * n
    w = weights_full(lam, theta)
    qv = np.zeros(k, dtype=np.complex128)
    qv_abs = np.zeros(k)
    jumps = np.zeros(k, dtype=np.int64)
    clock = 0.0
    njumps = 0
    acc = 0.0 + 0.0j
    acc_abs = 0.0
    tn = theta * n
    for kk in range(k):
        target = times[kk]
        while True:
            wait = rng.standard_exponential() / total_rate
            if clock + wait > target:
                break
            clock += wait
            wsum = 0.0
            for i in range(n):
                wsum += w[i]
            i = _select(w, wsum, rng.random() * wsum)
            zs = zbase + clock * cexp
            xi = lam[i] + (n - 1 - i) * theta
            # n * (m after - m before) for the single moved atom
            dm = 1.0 / ((xi + 1.0) / tn - zs) - 1.0 / (xi / tn - zs)
            acc += dm * dm
            acc_abs += dm.real * dm.real + dm.imag * dm.imag
            apply_jump(lam, w, theta, i)
            njumps += 1
            if njumps % refresh_every == 0:
                if not _refresh(lam, theta, w):
                    return qv, qv_abs, jumps, STATUS_WEIGHT_DRIFT
        clock = target
        qv[kk] = acc
        qv_abs[kk] = acc_abs
        jumps[kk] = njumps
    return qv, qv_abs, jumps, STATUS_OK


@njit(cache=True)
def _stieltjes_and_deriv(lam, theta, z):
    n = lam.size
    tn = theta * n
    m = 0.0 + 0.0j
    m1 = 0.0 + 0.0j
    for i in range(n):
        r = 1.0 / ((lam[i] + (n - 1 - i) * theta) / tn - z)
        m += r
        m1 += r * r
    return m / n, m1 / n


@njit(cache=True)
def _nekrasov_products(lam, theta, z):
    """prod_j (1 + (1/n)/(z - x_j/theta n)) at z and at z - 1/(theta n)."""
    n = lam.size
    tn = theta * n
    p1 = 1.0 + 0.0j
    p2 = 1.0 + 0.0j
    zshift = z - 1.0 / tn
    for j in range(n):
        xj = (lam[j] + (n - 1 - j) * theta) / tn
        p1 *= 1.0 + (1.0 / n) / (z - xj)
        p2 *= 1.0 + (1.0 / n) / (zshift - xj)
    return p1, p2


@njit(cache=True)
def sim_martingale(lam, theta, zbase, cexp, times, nquad, rng, refresh_every):
    """Reconstruct the rescaled martingale n*M^n_t(z) along a characteristic.

    Integrates the drift terms of the Stieltjes-transform SDE with ``nquad``
    Gauss-Legendre nodes per inter-jump interval (the state is constant
    there, only z_s moves). Returns (nM[K] complex, status).
    """
    n = lam.size
    k = times.size
    total_rate = theta * n * n
    w = weights_full(lam, theta)
    out = np.zeros(k, dtype=np.complex128)
    # GL nodes/weights on [0,1]
    if nquad == 2:
        gx = np.array([0.2113248654051871, 0.7886751345948129])
        gw = np.array([0.5, 0.5])
    else:
        gx = np.array([0.1127016653792583, 0.5, 0.8872983346207417])
        gw = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])
    m0n, _ = _stieltjes_and_deriv(lam, theta, zbase)
    clock = 0.0
    njumps = 0
    drift = 0.0 + 0.0j
    tn = theta * n
    for kk in range(k):
        target = times[kk]
        while True:
            wait = rng.standard_exponential() / total_rate
            seg_end = clock + wait
            stop = seg_end > target
            if stop:
                seg_end = target
            # integrate drift over [clock, seg_end] with frozen state
            seg = seg_end - clock
            if seg > 0.0:
                for q in range(gx.size):
                    s = clock + gx[q] * seg
                    zs = zbase + s * cexp
                    _, m1 = _stieltjes_and_deriv(lam, theta, zs)
                    p1, p2 = _nekrasov_products(lam, theta, zs)
                    drift += gw[q] * seg * (n * m1 * cexp + theta * n * n * (p1 - p2))
            if stop:
                break
            clock = seg_end
            wsum = 0.0
            for i in range(n):
                wsum += w[i]
            i = _select(w, wsum, rng.random() * wsum)
            apply_jump(lam, w, theta, i)
            njumps += 1
            if njumps % refresh_every == 0:
                if not _refresh(lam, theta, w):
                    return out, STATUS_WEIGHT_DRIFT
        clock = target
        zt = zbase + clock * cexp
        mt, _ = _stieltjes_and_deriv(lam, theta, zt)
        out[kk] = n * (mt - m0n) - drift
    return out, STATUS_OK


@njit(cache=True)
def sim_coupled(lamx, lamy, theta, tmax, rng):
    """Monotone coupling of two walks by thinning against the 2*theta*n^2 envelope.

    Event rates per particle are theta*n*[wx-wy]_+ (x only),
    theta*n*[wy-wx]_+ (y only) and theta*n*min(wx, wy) (joint).
    Returns (violations, jumps_x, jumps_y, events, status); ``violations``
    counts coordinates with x_i > y_i seen at any event time.
    """
    n = lamx.size
    envelope = 2.0 * theta * n * n
    clock = 0.0
    jumps_x = 0
    jumps_y = 0
    events = 0
    violations = 0
    while True:
        wait = rng.standard_exponential() / envelope
        if clock + wait > tmax:
            break
        clock += wait
        wx = weights_full(lamx, theta)
        wy = weights_full(lamy, theta)
        # total coupled rate = theta*n*sum(max(wx, wy)) <= envelope
        tot = 0.0
        for i in range(n):
            tot += max(wx[i], wy[i])
        u = rng.random() * 2.0 * n
        if u >= tot:
            continue  # thinned
        acc = 0.0
        for i in range(n):
            mx = max(wx[i], wy[i])
            if u < acc + mx:
                r = u - acc
                mn = min(wx[i], wy[i])
                if r < mn:
                    lamx[i] += 1
                    lamy[i] += 1
                    jumps_x += 1
                    jumps_y += 1
                elif wx[i] > wy[i]:
                    lamx[i] += 1
                    jumps_x += 1
                else:
                    lamy[i] += 1
                    jumps_y += 1
                break
            acc += mx
        events += 1
        for i in range(n):
            if lamx[i] > lamy[i]:
                violations += 1
    return violations, jumps_x, jumps_y, events, STATUS_OK
