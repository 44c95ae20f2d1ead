"""Event-driven simulation of the beta-nonintersecting Poisson random walk.

The total jump rate is constant (theta * n^2) by the rate-sum identity, so
waiting times are homogeneous exponentials and the jumping particle is a
categorical draw with probabilities w_i / n.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import JumpEvent, ParticleConfig, empirical_stieltjes

__all__ = [
    "WalkerState",
    "Trajectory",
    "jump_weights",
    "step",
    "update_weights_incremental",
    "simulate",
    "simulate_snapshots",
    "default_refresh_every",
]


def default_refresh_every(n: int) -> int:
    return 1000 * n


def jump_weights(config: ParticleConfig) -> np.ndarray:
    """w_i = prod_{j != i} (x_i - x_j + theta)/(x_i - x_j).

    Blocked particles (lam[i] == lam[i-1]) get an exact zero from the integer
    test, never from the floating product.
    """
    return _kernels.weights_full(config.lam_array(), config.theta)


@dataclass
class WalkerState:
    """Mutable simulation state: integer rows, clock, cached weights, jump count."""

    config: ParticleConfig
    clock: float = 0.0
    weights: np.ndarray = field(default=None)
    jumps: int = 0

    def __post_init__(self):
        if self.weights is None:
            self.weights = jump_weights(self.config)

    @classmethod
    def initial(cls, config: ParticleConfig) -> "WalkerState":
        return cls(config=config)


def step(state: WalkerState, rng: np.random.Generator) -> tuple[WalkerState, JumpEvent]:
    """One exact event: exponential wait at rate theta*n^2, categorical particle."""
    cfg = state.config
    n = cfg.n
    wait = rng.standard_exponential() / (cfg.theta * n * n)
    w = state.weights
    wsum = float(np.sum(w))
    i = _kernels._select(w, wsum, rng.random() * wsum)
    lam = cfg.lam_array()
    w_new = w.copy()
    _kernels.apply_jump(lam, w_new, cfg.theta, i)
    new_cfg = ParticleConfig(n, cfg.theta, tuple(int(v) for v in lam))
    new_state = WalkerState(new_cfg, state.clock + wait, w_new, state.jumps + 1)
    return new_state, JumpEvent(time=new_state.clock, particle=i + 1)


def update_weights_incremental(
    weights: np.ndarray, config: ParticleConfig, i: int
) -> tuple[np.ndarray, ParticleConfig]:
    """Apply the O(n) weight update for a jump of particle ``i`` (0-based).

    ``weights`` must be consistent with ``config`` before the jump. Returns
    the updated weights and the post-jump configuration.
    """
    lam = config.lam_array()
    w = np.asarray(weights, dtype=np.float64).copy()
    _kernels.apply_jump(lam, w, config.theta, i)
    new_cfg = ParticleConfig(config.n, config.theta, tuple(int(v) for v in lam))
    s = float(np.sum(_kernels.weights_full(lam, config.theta)))
    if abs(s - config.n) > 1e-6:
        raise RuntimeError(
            f"weight cache drifted: |sum(w) - n| = {abs(s - config.n):.3e}"
        )
    return w, new_cfg


@dataclass
class Trajectory:
    """Ordered jump log plus snapshot observations."""

    config0: ParticleConfig
    times: np.ndarray
    particles: np.ndarray  # 1-based
    lam_after: np.ndarray  # row length of the jumped particle after its jump
    observations: list = field(default_factory=list)  # (time, probe, m_value)

    @property
    def jumps(self) -> int:
        return len(self.times)

    def events_to_csv(self, path, header: bool = True):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            if header:
                wr.writerow(["event_index", "time", "particle", "lambda_of_particle"])
            for k in range(self.jumps):
                wr.writerow(
                    [k, repr(self.times[k]), self.particles[k], self.lam_after[k]]
                )

    def observations_to_csv(self, path, header: bool = True):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            if header:
                wr.writerow(["time", "probe_re", "probe_im", "m_re", "m_im"])
            for t, z, m in self.observations:
                wr.writerow([repr(t), repr(z.real), repr(z.imag), repr(m.real), repr(m.imag)])


def simulate(
    config0: ParticleConfig,
    horizon: float,
    observers: list[tuple[float, complex]] | None,
    rng: np.random.Generator,
    refresh_every: int | None = None,
) -> Trajectory:
    """Run the walk to ``horizon`` with a full jump log.

    ``observers`` is a list of (time, probe) requests; the empirical Stieltjes
    transform is evaluated at each probe using the state including every jump
    at timestamps <= the requested time (cadlag convention).
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    cfg = config0
    n = cfg.n
    if refresh_every is None:
        refresh_every = default_refresh_every(n)
    # mean + 10 sigma of the Poisson(theta n^2 T) jump count, with a floor
    mean_jumps = cfg.theta * n * n * horizon
    cap = int(mean_jumps + 10.0 * np.sqrt(mean_jumps) + 64)
    lam = cfg.lam_array()
    chunks_t, chunks_p = [], []
    t_off = 0.0
    while True:
        t, p, count, status = _kernels.sim_events(
            lam, cfg.theta, horizon - t_off, cap, rng, refresh_every
        )
        if status != _kernels.STATUS_OK:
            raise RuntimeError("internal consistency failure: weight cache drifted")
        chunks_t.append(t_off + t[:count])
        chunks_p.append(p[:count])
        if count < cap:
            break
        t_off += t[count - 1]  # cap hit: continue from the current state
    times = np.concatenate(chunks_t)
    parts = np.concatenate(chunks_p)
    count = len(times)
    # reconstruct per-event row length of the jumped particle
    lam_run = cfg.lam_array()
    lam_after = np.zeros(count, dtype=np.int64)
    for k in range(count):
        lam_run[parts[k]] += 1
        lam_after[k] = lam_run[parts[k]]
    traj = Trajectory(cfg, times, parts + 1, lam_after)
    if observers:
        lam0 = cfg.lam_array()
        for t_req, probe in observers:
            nj = int(np.searchsorted(times, t_req, side="right"))
            lam_t = lam0.copy()
            for k in range(nj):
                lam_t[parts[k]] += 1
            cfg_t = ParticleConfig(n, cfg.theta, tuple(int(v) for v in lam_t))
            traj.observations.append((t_req, probe, empirical_stieltjes(cfg_t, probe)))
    return traj


def simulate_snapshots(
    config0: ParticleConfig,
    times: np.ndarray,
    rng: np.random.Generator,
    refresh_every: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Fast path: evolve and return (lam_snap[K, n], jumps[K]) at sorted times."""
    if refresh_every is None:
        refresh_every = default_refresh_every(config0.n)
    times = np.asarray(times, dtype=np.float64)
    lam = config0.lam_array()
    lam_snap, jumps, status = _kernels.sim_snapshots(
        lam, config0.theta, times, rng, refresh_every
    )
    if status != _kernels.STATUS_OK:
        raise RuntimeError("internal consistency failure: weight cache drifted")
    return lam_snap, jumps


def stieltjes_from_lam(lam: np.ndarray, theta: float, z) -> np.ndarray:
    """Empirical Stieltjes transform for raw integer rows (vectorized in z)."""
    lam = np.asarray(lam, dtype=np.float64)
    n = lam.shape[-1]
    x = (lam + (n - 1 - np.arange(n)) * theta) / (theta * n)
    z = np.asarray(z, dtype=np.complex128)
    return np.mean(1.0 / (x[..., None, :] - z[..., :, None]), axis=-1)
