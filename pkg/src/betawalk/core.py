"""Exact particle-configuration state and empirical-measure probes.

Positions are always derived from the integer row lengths ``lam`` as
``x_i = lam[i] + (n-1-i)*theta`` (0-based), never stored as floats, so the
blocking condition ``lam[i] == lam[i-1]`` is an exact integer test.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ParticleConfig",
    "EmpiricalMeasure",
    "ComplexProbeGrid",
    "JumpEvent",
    "empirical_stieltjes",
    "empirical_log_potential",
    "config_from_json",
    "config_to_json",
]


@dataclass(frozen=True)
class ParticleConfig:
    """Integer state of n nonintersecting walkers.

    ``lam`` is a nonincreasing tuple of nonnegative integers; the walker
    positions are ``x_i = lam[i] + (n-1-i)*theta``.
    """

    n: int
    theta: float
    lam: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if len(self.lam) != self.n:
            raise ValueError(f"lambda must have length n={self.n}")
        lam = self.lam
        for i, v in enumerate(lam):
            if int(v) != v or v < 0:
                raise ValueError(f"lambda[{i}]={v} is not a nonnegative integer")
            if i > 0 and lam[i] > lam[i - 1]:
                raise ValueError(f"lambda must be nonincreasing, violated at index {i}")
        object.__setattr__(self, "lam", tuple(int(v) for v in lam))

    @classmethod
    def packed(cls, n: int, theta: float) -> "ParticleConfig":
        """Fully packed initial condition lambda = 0 (x_i = (n-i)*theta)."""
        return cls(n, theta, (0,) * n)

    def positions(self) -> np.ndarray:
        """x_i = lam[i] + (n-1-i)*theta, strictly decreasing."""
        n = self.n
        lam = np.asarray(self.lam, dtype=np.float64)
        return lam + (n - 1 - np.arange(n)) * self.theta

    def rescaled_positions(self) -> np.ndarray:
        """x_i / (theta * n), the support points of the empirical measure."""
        return self.positions() / (self.theta * self.n)

    def lam_array(self) -> np.ndarray:
        return np.asarray(self.lam, dtype=np.int64)

    def empirical_measure(self) -> "EmpiricalMeasure":
        return EmpiricalMeasure(self.rescaled_positions())

    def bumped(self, i: int) -> "ParticleConfig":
        """Configuration after particle i (0-based) jumps by one."""
        lam = list(self.lam)
        lam[i] += 1
        return ParticleConfig(self.n, self.theta, tuple(lam))


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Uniform atoms at the rescaled positions, weight 1/n each."""

    locations: np.ndarray = field(repr=False)

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=np.float64)
        if np.any(np.diff(loc) > 0):
            raise ValueError("locations must be nonincreasing")
        object.__setattr__(self, "locations", loc)

    @property
    def weights(self) -> np.ndarray:
        n = len(self.locations)
        return np.full(n, 1.0 / n)

    def stieltjes(self, z):
        return _atom_stieltjes(self.locations, z)


@dataclass(frozen=True)
class ComplexProbeGrid:
    """Evaluation sites off the real axis with a guaranteed imaginary floor."""

    points: np.ndarray = field(repr=False)
    eta_min: float = 1e-8

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128)
        if np.any(np.abs(pts.imag) < self.eta_min):
            raise ValueError(f"all probes must satisfy |Im z| >= {self.eta_min}")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class JumpEvent:
    """A single jump: ``particle`` is 1-based, matching the generator index."""

    time: float
    particle: int


def _require_off_axis(z):
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z.imag == 0):
        raise ValueError("probe on the real axis: Im z must be nonzero")
    return z


def _atom_stieltjes(locs, z):
    z = _require_off_axis(z)
    locs = np.asarray(locs, dtype=np.float64)
    vals = np.mean(1.0 / (locs - z[..., None]), axis=-1)
    return vals if vals.shape else complex(vals)


def empirical_stieltjes(config: ParticleConfig, z):
    """m^n(z) = (1/n) sum_i 1/(x_i/(theta n) - z), Im z != 0."""
    return _atom_stieltjes(config.rescaled_positions(), z)


def empirical_log_potential(config: ParticleConfig, z):
    """h^n(z) = (1/n) sum_i ln(x_i - z), principal branch per atom.

    Only differences of h at nearby arguments enter downstream formulas, so
    the per-atom principal branch is safe there (branch constants cancel).
    """
    z = _require_off_axis(z)
    x = config.positions()
    vals = np.mean(np.log(x - z[..., None]), axis=-1)
    return vals if vals.shape else complex(vals)


_INIT_SCHEMA = {
    "type": "object",
    "required": ["n", "theta", "lambda"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "theta": {"type": "number", "exclusiveMinimum": 0},
        "lambda": {
            "oneOf": [
                {"type": "array", "items": {"type": "integer", "minimum": 0}},
                {"const": "packed"},
            ]
        },
    },
    "additionalProperties": False,
}


def config_from_json(text_or_dict) -> ParticleConfig:
    """Parse initial data {"n": int, "theta": float, "lambda": [int...] | "packed"}."""
    if isinstance(text_or_dict, str):
        data = json.loads(text_or_dict)
    else:
        data = text_or_dict
    import jsonschema

    jsonschema.validate(data, _INIT_SCHEMA)
    n, theta, lam = data["n"], data["theta"], data["lambda"]
    if lam == "packed":
        return ParticleConfig.packed(n, theta)
    return ParticleConfig(n, theta, tuple(lam))


def config_to_json(config: ParticleConfig) -> str:
    return json.dumps(
        {"n": config.n, "theta": config.theta, "lambda": list(config.lam)}
    )
