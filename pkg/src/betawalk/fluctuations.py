"""Gaussian fluctuation targets and Monte Carlo estimation.

The rescaled fluctuation field g^n_t(z) = n(m^n_t(z) - m_t(z)) converges,
along characteristic lines, to a Gaussian field with explicit mean mu(t, z)
and covariance sigma(s, z, t, z').  This module implements those targets in
both printed forms, the Monte Carlo harness that checks them, the martingale
quadratic-variation diagnostic, and contour-integral linear statistics.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import _kernels
from .core import ParticleConfig
from .limit import (
    AnalyticField,
    characteristic_forward,
    characteristic_inverse,
    characteristic_lifetime,
    limit_derivs_on_characteristic,
)
from .walker import default_refresh_every, stieltjes_from_lam

__all__ = [
    "FluctuationProbeSet",
    "MCReport",
    "g_field",
    "empirical_g0_field",
    "packed_g0_limit_field",
    "clt_mean",
    "clt_cov",
    "mc_clt_experiment",
    "theoretical_qv",
    "qv_from_trajectory",
    "mc_martingale_qv",
    "mc_martingale_mean",
    "rectangle_contour",
    "analytic_linear_statistic",
]


def _substreams(rng: np.random.Generator, k: int):
    return [np.random.Generator(np.random.PCG64(ss)) for ss in rng.bit_generator.seed_seq.spawn(k)]


def _check_status(status: int):
    if status != _kernels.STATUS_OK:
        raise RuntimeError("weight watchdog tripped during simulation")


# ---------------------------------------------------------------------------
# probe bookkeeping


@dataclass(frozen=True)
class FluctuationProbeSet:
    """Characteristic-anchored probe grid: sites[i, j] = z_{t_i}(z_j)."""

    base_points: np.ndarray  # complex, shape (J,)
    times: np.ndarray  # increasing, shape (K,)
    sites: np.ndarray  # complex, shape (K, J)

    @classmethod
    def build(cls, base_points, times, m0: AnalyticField, eta_min: float = 1e-3):
        zs = np.asarray(base_points, dtype=np.complex128)
        ts = np.asarray(times, dtype=np.float64)
        if np.any(np.diff(ts) <= 0) or np.any(ts < 0):
            raise ValueError("times must be nonnegative and strictly increasing")
        life = np.asarray(characteristic_lifetime(zs, m0))
        if np.any(ts[-1] >= life):
            raise ValueError("a base point dies before the last probe time")
        sites = np.empty((ts.size, zs.size), dtype=np.complex128)
        for i, t in enumerate(ts):
            sites[i] = characteristic_forward(zs, float(t), m0, check_lifetime=False)
        if np.any(np.abs(sites.imag) < eta_min):
            raise ValueError(f"probe site within {eta_min} of the real axis")
        return cls(zs, ts, sites)

    @property
    def flat_sites(self) -> np.ndarray:
        return self.sites.ravel()

    def flat_labels(self):
        return [
            (float(t), complex(z)) for t in self.times for z in self.base_points
        ]


def g_field(config: ParticleConfig, t: float, m_limit: AnalyticField, probes):
    """g^n_t(z) = n * (m^n_t(z) - m_t(z)) at the given probes."""
    z = np.asarray(probes, dtype=np.complex128)
    if np.any(z.imag == 0):
        raise ValueError("probe on the real axis")
    emp = stieltjes_from_lam(np.asarray(config.lam, dtype=np.int64), config.theta, z)
    return config.n * (emp - np.asarray(m_limit(z), dtype=np.complex128))


def empirical_g0_field(config: ParticleConfig, m0: AnalyticField) -> AnalyticField:
    """The deterministic initial field g_0^n = n(m^n_0 - m_0) with derivatives."""
    lam = np.asarray(config.lam, dtype=np.int64)
    n, theta = config.n, config.theta
    x = (lam + (n - 1 - np.arange(n)) * theta) / (theta * n)
    atoms = AnalyticField.from_atoms(x, np.full(n, 1.0 / n))

    def ev(z):
        e = atoms._eval(z)
        m = m0.derivs(z)
        return tuple(n * (a - b) for a, b in zip(e, m))

    return AnalyticField(ev)


def packed_g0_limit_field() -> AnalyticField:
    """n -> inf limit of g_0^n for packed initial data: -(1/2)(1/(1-z) + 1/z)."""

    def ev(z):
        a, b = 1.0 / (1.0 - z), 1.0 / z
        f0 = -0.5 * (a + b)
        f1 = -0.5 * (a**2 - b**2)
        f2 = -0.5 * (2 * a**3 + 2 * b**3)
        f3 = -0.5 * (6 * a**4 - 6 * b**4)
        return f0, f1, f2, f3

    return AnalyticField(ev)


# ---------------------------------------------------------------------------
# CLT mean and covariance


def _require_alive(z, t: float, m0: AnalyticField):
    life = np.asarray(characteristic_lifetime(z, m0))
    if np.any(t >= life):
        raise ValueError("characteristic reaches the real axis before time t")


def clt_mean(t: float, z, m0: AnalyticField, g0: AnalyticField, theta: float,
             form: str = "direct"):
    """Limit mean of g_t(z_t(z)).

    ``form`` selects between the direct expression in m_0 derivatives and the
    equivalent one written with derivatives of the characteristic map; the two
    agree to roundoff and are cross-checked in the tests.
    """
    z = np.asarray(z, dtype=np.complex128)
    _require_alive(z, t, m0)
    m, m1, m2, _ = m0.derivs(z)
    m, m1, m2 = map(np.asarray, (m, m1, m2))
    e = np.exp(-m)
    d = 1.0 - t * m1 * e
    g = np.asarray(g0(z), dtype=np.complex128)
    if form == "direct":
        out = g / d + (0.5 - 0.5 / theta) * t * (m1**2 - m2) * e / d**2
    elif form == "characteristic":
        dz_zt = d  # d/dz of z_t(z)
        d2z_zt = t * e * (m1**2 - m2)
        out = g / dz_zt + (0.5 - 0.5 / theta) * d2z_zt / dz_zt**2
    else:
        raise ValueError(f"unknown form {form!r}")
    return out if out.shape else complex(out)


def _clt_cov_diagonal(u: float, v: float, z, m0: AnalyticField, theta: float):
    """sigma(s, z, t, z) with u = min(s,t), v = max(s,t)."""
    m, m1, m2, m3 = m0.derivs(np.asarray(z, dtype=np.complex128))
    m, m1, m2, m3 = map(np.asarray, (m, m1, m2, m3))
    e = np.exp(-m)
    du, dv = 1.0 - u * m1 * e, 1.0 - v * m1 * e
    den = 12.0 * theta * du**3 * dv
    t1 = u * e * (2.0 * m1**3 - 6.0 * m1 * m2 + 2.0 * m3) / den
    t2 = u**2 * e**2 * (m1**4 + 3.0 * m2**2 - 2.0 * m1 * m3) / den
    return t1 + t2


def clt_cov(s: float, z, t: float, zp, m0: AnalyticField, theta: float,
            form: str = "direct", diag_threshold: float = 1e-4):
    """Limit covariance sigma(s, z, t, z') of (g_s(z_s(z)), g_t(z_t(z'))).

    Switches to the explicit diagonal-limit formula when |z - z'| falls
    below ``diag_threshold`` (the generic form loses ~8 digits there).
    Conjugate rule: cov[g_s(z_s(z)), conj g_t(z_t(z'))] = sigma(s, z, t, conj z').
    """
    z = np.asarray(z, dtype=np.complex128)
    zp = np.asarray(zp, dtype=np.complex128)
    _require_alive(z, s, m0)
    _require_alive(zp, t, m0)
    u, v = min(s, t), max(s, t)
    z, zp = np.broadcast_arrays(z, zp)
    near = np.abs(z - zp) < diag_threshold
    out = np.empty(z.shape, dtype=np.complex128)
    if np.any(near):
        out[near] = _clt_cov_diagonal(u, v, z[near], m0, theta)
    far = ~near
    if np.any(far):
        za, zb = z[far], zp[far]
        ma, m1a, _, _ = m0.derivs(za)
        mb, m1b, _, _ = m0.derivs(zb)
        ea, eb = np.exp(-np.asarray(ma)), np.exp(-np.asarray(mb))
        dsa = 1.0 - s * m1a * ea
        dtb = 1.0 - t * m1b * eb
        dua = 1.0 - u * m1a * ea
        dub = 1.0 - u * m1b * eb
        if form == "direct":
            bracket = 1.0 / (za - zb) ** 2 - dua * dub / (za - zb + u * (ea - eb)) ** 2
            out[far] = bracket / (theta * dsa * dtb)
        elif form == "characteristic":
            zu_a, zu_b = za + u * ea, zb + u * eb
            bracket = 1.0 / (za - zb) ** 2 - dua * dub / (zu_a - zu_b) ** 2
            out[far] = bracket / (theta * dsa * dtb)
        else:
            raise ValueError(f"unknown form {form!r}")
    return out if out.shape else complex(out)


# ---------------------------------------------------------------------------
# Monte Carlo CLT experiment


@dataclass
class MCReport:
    """Empirical vs theoretical fluctuation statistics at a probe set."""

    n: int
    theta: float
    runs: int
    probe_times: list  # per flattened probe
    probe_bases: list  # complex labels z_j
    probe_sites: list  # z_{t_i}(z_j)
    mean_emp: np.ndarray
    mean_se: np.ndarray
    mean_theory: np.ndarray
    mean_zscore: np.ndarray  # complex: re/im standardized separately
    cov_emp: np.ndarray  # E[(g-m)(g-m)^T], no conjugation
    cov_conj_emp: np.ndarray  # E[(g-m) conj(g-m)^T], Hermitian PSD
    cov_se: np.ndarray
    cov_conj_se: np.ndarray
    cov_theory: np.ndarray
    cov_conj_theory: np.ndarray
    normality_pvalues: np.ndarray  # (P, 2): Jarque-Bera on re and im parts

    def to_json(self, path):
        def c(x):
            x = np.asarray(x)
            return np.stack([x.real, x.imag], axis=-1).tolist()

        doc = {
            "n": self.n,
            "theta": self.theta,
            "runs": self.runs,
            "probe_times": self.probe_times,
            "probe_bases": c(np.array(self.probe_bases)),
            "probe_sites": c(np.array(self.probe_sites)),
            "mean_emp": c(self.mean_emp),
            "mean_se": self.mean_se.tolist(),
            "mean_theory": c(self.mean_theory),
            "mean_zscore": c(self.mean_zscore),
            "cov_emp": c(self.cov_emp),
            "cov_conj_emp": c(self.cov_conj_emp),
            "cov_se": self.cov_se.tolist(),
            "cov_conj_se": self.cov_conj_se.tolist(),
            "cov_theory": c(self.cov_theory),
            "cov_conj_theory": c(self.cov_conj_theory),
            "normality_pvalues": self.normality_pvalues.tolist(),
        }
        tmp = str(path) + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(doc, fh, indent=1)
        import os

        os.replace(tmp, path)

    def to_csv(self, path, header: bool = True):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            if header:
                wr.writerow(
                    ["probe", "t", "mean_re", "mean_im", "se", "theory_re", "theory_im", "zscore"]
                )
            for k in range(len(self.probe_times)):
                zmax = max(abs(self.mean_zscore[k].real), abs(self.mean_zscore[k].imag))
                wr.writerow(
                    [
                        k,
                        repr(self.probe_times[k]),
                        repr(self.mean_emp[k].real),
                        repr(self.mean_emp[k].imag),
                        repr(self.mean_se[k]),
                        repr(self.mean_theory[k].real),
                        repr(self.mean_theory[k].imag),
                        repr(zmax),
                    ]
                )


def _mc_g_samples(init: ParticleConfig, probes: FluctuationProbeSet, runs: int,
                  rng: np.random.Generator, m0: AnalyticField):
    """(runs, P) matrix of g^n at characteristic-anchored sites."""
    lam0 = np.asarray(init.lam, dtype=np.int64)
    n, theta = init.n, init.theta
    times = np.asarray(probes.times, dtype=np.float64)
    refresh = default_refresh_every(n)
    # m_t(z_t(z)) = m_0(z): constant along each characteristic
    m_limit = np.tile(np.asarray(m0(probes.base_points), dtype=np.complex128), (times.size, 1))
    samples = np.empty((runs, probes.sites.size), dtype=np.complex128)
    for r, sub in enumerate(_substreams(rng, runs)):
        lam_snap, _, status = _kernels.sim_snapshots(lam0.copy(), theta, times, sub, refresh)
        _check_status(status)
        g = np.empty_like(probes.sites)
        for i in range(times.size):
            emp = stieltjes_from_lam(lam_snap[i], theta, probes.sites[i])
            g[i] = n * (emp - m_limit[i])
        samples[r] = g.ravel()
    return samples


def mc_clt_experiment(init: ParticleConfig, probes: FluctuationProbeSet, runs: int,
                      rng: np.random.Generator, m0: AnalyticField,
                      g0: AnalyticField | None = None) -> MCReport:
    """Estimate the fluctuation field over ``runs`` trajectories and score it
    against the limiting Gaussian mean and covariance.

    ``g0`` defaults to the exact initial field of ``init`` (deterministic
    initial data), which removes the initial-layer part of the finite-n bias.
    """
    if g0 is None:
        g0 = empirical_g0_field(init, m0)
    samples = _mc_g_samples(init, probes, runs, rng, m0)
    M, P = samples.shape
    mean_emp = samples.mean(axis=0)
    centered = samples - mean_emp
    mean_se = np.sqrt(
        (centered.real.var(axis=0, ddof=1) + centered.imag.var(axis=0, ddof=1)) / M
    )
    # covariance estimates and jackknife standard errors
    prod = centered[:, :, None] * centered[:, None, :]
    prod_c = centered[:, :, None] * centered.conj()[:, None, :]
    cov_emp = prod.mean(axis=0) * M / (M - 1)
    cov_conj_emp = prod_c.mean(axis=0) * M / (M - 1)
    cov_se = np.sqrt(np.abs(prod - prod.mean(axis=0)).var(axis=0) / M)
    cov_conj_se = np.sqrt(np.abs(prod_c - prod_c.mean(axis=0)).var(axis=0) / M)

    labels = probes.flat_labels()
    mean_theory = np.array(
        [clt_mean(t, z, m0, g0, init.theta) for t, z in labels], dtype=np.complex128
    )
    cov_theory = np.empty((P, P), dtype=np.complex128)
    cov_conj_theory = np.empty((P, P), dtype=np.complex128)
    for a, (s, za) in enumerate(labels):
        for b, (t, zb) in enumerate(labels):
            cov_theory[a, b] = clt_cov(s, za, t, zb, m0, init.theta)
            cov_conj_theory[a, b] = clt_cov(s, za, t, np.conj(zb), m0, init.theta)
    se_part = mean_se / math.sqrt(2.0)  # per real component
    diff = mean_emp - mean_theory
    mean_zscore = diff.real / se_part + 1j * (diff.imag / se_part)
    pvals = np.empty((P, 2))
    for k in range(P):
        pvals[k, 0] = sps.jarque_bera(samples[:, k].real).pvalue
        pvals[k, 1] = sps.jarque_bera(samples[:, k].imag).pvalue
    return MCReport(
        n=init.n,
        theta=init.theta,
        runs=M,
        probe_times=[t for t, _ in labels],
        probe_bases=[z for _, z in labels],
        probe_sites=list(probes.flat_sites),
        mean_emp=mean_emp,
        mean_se=mean_se,
        mean_theory=mean_theory,
        mean_zscore=mean_zscore,
        cov_emp=cov_emp,
        cov_conj_emp=cov_conj_emp,
        cov_se=cov_se,
        cov_conj_se=cov_conj_se,
        cov_theory=cov_theory,
        cov_conj_theory=cov_conj_theory,
        normality_pvalues=pvals,
    )


# ---------------------------------------------------------------------------
# martingale quadratic variation


def theoretical_qv(z, t: float, theta: float, m0: AnalyticField, nquad: int = 64):
    """Limit of n^2 [M(z), M(z)]_t along the characteristic from z.

    Equals -(1/(6 theta)) * integral_0^t (d/ds d^2/dz^2 m_s)(z_s) ds, written
    as the total change of the second derivative minus the transport term.
    """
    z = complex(z)
    _require_alive(z, t, m0)
    if t == 0:
        return 0.0j
    m, m1, m2, _ = m0.derivs(z)
    e = np.exp(-m)
    _, _, _, mt2_t, _, _ = limit_derivs_on_characteristic(z, t, m0)
    # transport term: integral of (d^3/dz^3 m_s)(z_s) * e^{-m_0(z)} ds
    xg, wg = np.polynomial.legendre.leggauss(nquad)
    sg = 0.5 * t * (xg + 1.0)
    acc = 0.0 + 0.0j
    for s, wq in zip(sg, 0.5 * t * wg):
        mt3_s = limit_derivs_on_characteristic(z, float(s), m0)[4]
        acc += wq * mt3_s * e
    return -(mt2_t - m2 - acc) / (6.0 * theta)


def qv_from_trajectory(traj, z, m0: AnalyticField, theta: float):
    """Replay a jump log and accumulate n^2 sum (jump of m^n at z_s)^2.

    The probe moves along the characteristic z_s = z + s*exp(-m_0(z)).
    Returns the streaming accumulator at the trajectory horizon.
    """
    cfg = traj.config0
    n = cfg.n
    tn = theta * n
    e = np.exp(-complex(m0(complex(z))))
    lam = np.array(cfg.lam, dtype=np.int64)
    acc = 0.0 + 0.0j
    for k in range(traj.jumps):
        i = int(traj.particles[k]) - 1
        zs = complex(z) + traj.times[k] * e
        xi = lam[i] + (n - 1 - i) * theta
        dm = 1.0 / ((xi + 1.0) / tn - zs) - 1.0 / (xi / tn - zs)
        acc += dm * dm
        lam[i] += 1
    return acc


def mc_martingale_qv(init: ParticleConfig, z, t: float, m0: AnalyticField,
                     runs: int, rng: np.random.Generator):
    """Averaged empirical QV along the characteristic from z, plus the target.

    Returns (qv_mean complex, qv_se, theory complex).
    """
    z = complex(z)
    _require_alive(z, t, m0)
    lam0 = np.asarray(init.lam, dtype=np.int64)
    e = complex(np.exp(-complex(m0(z))))
    times = np.array([t])
    refresh = default_refresh_every(init.n)
    vals = np.empty(runs, dtype=np.complex128)
    for r, sub in enumerate(_substreams(rng, runs)):
        qv, _, _, status = _kernels.sim_qv(lam0.copy(), init.theta, z, e, times, sub, refresh)
        _check_status(status)
        vals[r] = qv[0]
    se = math.sqrt((vals.real.var(ddof=1) + vals.imag.var(ddof=1)) / runs)
    return vals.mean(), se, complex(theoretical_qv(z, t, init.theta, m0))


def mc_martingale_mean(init: ParticleConfig, z, times, m0: AnalyticField,
                       runs: int, rng: np.random.Generator, nquad: int = 3):
    """Sample mean and SE of the reconstructed martingale n*M^n_t(z_t(z)).

    The martingale property makes every checkpoint mean 0 in expectation.
    Returns (means[K] complex, ses[K]).
    """
    z = complex(z)
    ts = np.asarray(times, dtype=np.float64)
    _require_alive(z, float(ts[-1]), m0)
    lam0 = np.asarray(init.lam, dtype=np.int64)
    e = complex(np.exp(-complex(m0(z))))
    refresh = default_refresh_every(init.n)
    vals = np.empty((runs, ts.size), dtype=np.complex128)
    for r, sub in enumerate(_substreams(rng, runs)):
        out, status = _kernels.sim_martingale(
            lam0.copy(), init.theta, z, e, ts, nquad, sub, refresh
        )
        _check_status(status)
        vals[r] = out
    ses = np.sqrt((vals.real.var(axis=0, ddof=1) + vals.imag.var(axis=0, ddof=1)) / runs)
    return vals.mean(axis=0), ses


# ---------------------------------------------------------------------------
# contour-integral linear statistics


@dataclass(frozen=True)
class Contour:
    """Closed counterclockwise contour as quadrature nodes and dz weights."""

    nodes: np.ndarray
    dz: np.ndarray

    def integrate(self, values) -> complex:
        return complex(np.sum(np.asarray(values) * self.dz))


def rectangle_contour(re_min: float, re_max: float, half_height: float = 0.5,
                      per_side: int = 512) -> Contour:
    """Rectangle with Gauss-Legendre nodes on each side (no corner nodes)."""
    x, w = np.polynomial.legendre.leggauss(per_side)
    nodes, dz = [], []
    corners = [
        re_min - 1j * half_height,
        re_max - 1j * half_height,
        re_max + 1j * half_height,
        re_min + 1j * half_height,
    ]
    for a, b in zip(corners, corners[1:] + corners[:1]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes.append(mid + half * x)
        dz.append(half * w)
    return Contour(np.concatenate(nodes), np.concatenate(dz))


def analytic_linear_statistic(init: ParticleConfig, f, t: float, m0: AnalyticField,
                              runs: int, rng: np.random.Generator,
                              contour: Contour | None = None,
                              c_over_theta: float | None = None,
                              g0: AnalyticField | None = None) -> dict:
    """Monte Carlo report for the linear statistic n * integral f d(mu^n_t - mu_t).

    Each sample is evaluated two ways: directly from the particle atoms, and
    as the contour integral -(1/2 pi i) * closed-integral f(w) g^n_t(w) dw.
    Samples with a particle outside the contour are flagged (the residue
    identity fails for them) and excluded from the two-way comparison.
    Theoretical mean and variance come from the same contour applied to the
    limiting mean and covariance fields.
    """
    n, theta = init.n, init.theta
    if contour is None:
        if c_over_theta is None:
            raise ValueError("need a contour or a c/theta bound")
        contour = rectangle_contour(-0.2, c_over_theta + 0.2)
    if g0 is None:
        g0 = empirical_g0_field(init, m0)
    w = contour.nodes
    # invert characteristics once per node
    zlab = np.array([characteristic_inverse(complex(v), t, m0) for v in w])
    m_t = np.asarray(m0(zlab), dtype=np.complex128)
    fw = np.asarray([f(complex(v)) for v in w], dtype=np.complex128)
    pref = -1.0 / (2.0j * math.pi)
    # limit integral of f against mu_t via the same contour
    limit_int = (pref * contour.integrate(fw * m_t)).real

    mu_vals = np.array(
        [clt_mean(t, complex(z), m0, g0, theta) for z in zlab], dtype=np.complex128
    )
    mean_theory = pref * contour.integrate(fw * mu_vals)
    # double contour for the variance
    sig = np.empty((w.size, w.size), dtype=np.complex128)
    ma, m1a, _, _ = m0.derivs(zlab)
    ea = np.exp(-np.asarray(ma))
    da = 1.0 - t * np.asarray(m1a) * ea
    zz = zlab[:, None] - zlab[None, :]
    np.fill_diagonal(zz, 1.0)
    zt = zlab + t * ea
    ztzt = zt[:, None] - zt[None, :]
    np.fill_diagonal(ztzt, 1.0)
    bracket = 1.0 / zz**2 - (da[:, None] * da[None, :]) / ztzt**2
    sig = bracket / (theta * da[:, None] * da[None, :])
    diag = np.array([_clt_cov_diagonal(t, t, complex(z), m0, theta) for z in zlab])
    np.fill_diagonal(sig, diag)
    kern = (fw * contour.dz)[:, None] * (fw * contour.dz)[None, :] * sig
    var_theory = (pref**2 * kern.sum()).real

    lam0 = np.asarray(init.lam, dtype=np.int64)
    refresh = default_refresh_every(n)
    times = np.array([t])
    direct = np.empty(runs)
    via_contour = np.empty(runs, dtype=np.complex128)
    escaped = 0
    re_lo = float(w.real.min())
    re_hi = float(w.real.max())
    for r, sub in enumerate(_substreams(rng, runs)):
        lam_snap, _, status = _kernels.sim_snapshots(lam0.copy(), theta, times, sub, refresh)
        _check_status(status)
        lam = lam_snap[0]
        x = (lam + (n - 1 - np.arange(n)) * theta) / (theta * n)
        if x.min() <= re_lo or x.max() >= re_hi:
            escaped += 1
        direct[r] = float(np.sum([f(float(v)) for v in x])) - n * limit_int
        emp = stieltjes_from_lam(lam, theta, w)
        via_contour[r] = pref * contour.integrate(fw * n * (emp - m_t))
    resid = np.abs(via_contour - direct)
    mean_emp = direct.mean()
    se = direct.std(ddof=1) / math.sqrt(runs)
    var_emp = direct.var(ddof=1)
    var_se = np.abs((direct - mean_emp) ** 2 - var_emp).std(ddof=1) / math.sqrt(runs)
    return {
        "n": n,
        "theta": theta,
        "t": t,
        "runs": runs,
        "mean_emp": float(mean_emp),
        "mean_se": float(se),
        "mean_theory": float(mean_theory.real),
        "var_emp": float(var_emp),
        "var_se": float(var_se),
        "var_theory": float(var_theory),
        "escaped_fraction": escaped / runs,
        "max_direct_vs_contour": float(resid.max()),
        "limit_integral": float(limit_int),
    }
