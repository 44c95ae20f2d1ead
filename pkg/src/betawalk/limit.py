"""Deterministic hydrodynamic limit of the walk.

The limiting Stieltjes transform is transported along characteristic lines
z_t(z) = z + t * exp(-m_0(z)); everything here (forward/inverse maps, the
limit transform and its derivatives, the explicit one-parameter family nu_t,
the quantized R-transform and the Markov-Krein map Q) is built on top of
that relation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MeasureRep",
    "AnalyticField",
    "InversionError",
    "stieltjes_of",
    "uniform01_field",
    "characteristic_forward",
    "characteristic_lifetime",
    "omega_membership",
    "characteristic_inverse",
    "limit_stieltjes",
    "limit_derivs_on_characteristic",
    "limit_field",
    "nu_t_density",
    "nu_t_measure",
    "nu_t_stieltjes",
    "nu_t_mass",
    "nu_t_stieltjes_check",
    "quantized_R",
    "markov_krein_Q",
    "reflect_measure",
    "density_from_field",
]

_GL_NODES = 2048


def _gauss_legendre(a: float, b: float, npts: int = _GL_NODES):
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


@dataclass(frozen=True)
class MeasureRep:
    """A probability measure as weighted atoms or a gridded density."""

    kind: str  # "atoms" | "grid"
    locations: np.ndarray = field(repr=False)  # atom sites or grid points
    weights: np.ndarray = field(repr=False)  # atom weights or density values

    @classmethod
    def atoms(cls, locations, weights) -> "MeasureRep":
        loc = np.asarray(locations, dtype=np.float64)
        w = np.asarray(weights, dtype=np.float64)
        if np.any(w < -1e-12):
            raise ValueError("atom weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ValueError(f"total mass {w.sum()} is not 1")
        return cls("atoms", loc, np.maximum(w, 0.0))

    @classmethod
    def grid(cls, points, density) -> "MeasureRep":
        x = np.asarray(points, dtype=np.float64)
        d = np.asarray(density, dtype=np.float64)
        if np.any(np.diff(x) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if np.any(d < -1e-12):
            raise ValueError("density must be nonnegative")
        mass = np.trapezoid(d, x)
        if abs(mass - 1.0) > 1e-10:
            raise ValueError(f"total mass {mass} is not 1")
        return cls("grid", x, np.maximum(d, 0.0))

    @classmethod
    def uniform(cls, a: float = 0.0, b: float = 1.0, npts: int = 2001) -> "MeasureRep":
        x = np.linspace(a, b, npts)
        return cls.grid(x, np.full(npts, 1.0 / (b - a)))

    def mass(self) -> float:
        if self.kind == "atoms":
            return float(self.weights.sum())
        return float(np.trapezoid(self.weights, self.locations))

    def max_density(self) -> float:
        if self.kind == "grid":
            return float(self.weights.max())
        raise ValueError("atomic measures have no density")

    def quadrature_atoms(self, npts: int = _GL_NODES):
        """A Gauss-Legendre atomization (exact identity for atomic measures)."""
        if self.kind == "atoms":
            return self.locations, self.weights
        xq, wq = _gauss_legendre(self.locations[0], self.locations[-1], npts)
        dq = np.interp(xq, self.locations, self.weights)
        w = wq * dq
        return xq, w / w.sum() * self.mass()

    def stieltjes(self, z):
        locs, w = self.quadrature_atoms()
        z = np.asarray(z, dtype=np.complex128)
        out = np.sum(w / (locs - z[..., None]), axis=-1)
        return out if out.shape else complex(out)

    def second_moment_distance(self, z: complex) -> float:
        """integral of dmu(x) / |x - z|^2."""
        locs, w = self.quadrature_atoms()
        return float(np.sum(w / np.abs(locs - z) ** 2))

    def upper_quantile(self, q: float) -> float:
        """Leftmost y with mu([y, inf)) = q, by monotone search on the CDF."""
        if self.kind != "grid":
            raise ValueError("quantile discretization needs a gridded density")
        x, d = self.locations, self.weights
        # cumulative mass from the right, trapezoid rule
        seg = 0.5 * (d[1:] + d[:-1]) * np.diff(x)
        tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])  # mu([x_k, inf))
        if not 0.0 <= q <= tail[0] + 1e-12:
            raise ValueError("quantile out of range")
        # find the cell [x_k, x_{k+1}] with tail[k] >= q >= tail[k+1]
        k = int(np.searchsorted(-tail, -q, side="left"))
        if k == 0:
            return float(x[0])
        k -= 1
        # linear-in-mass interpolation inside the cell; a zero-density cell is
        # a plateau of the tail, resolved to its left endpoint
        dm = tail[k] - tail[k + 1]
        if dm <= 0:
            return float(x[k])
        frac = (tail[k] - q) / dm
        return float(x[k] + frac * (x[k + 1] - x[k]))

    def to_csv(self, path, header: bool = True):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            if header:
                wr.writerow(
                    ["location", "weight"] if self.kind == "atoms" else ["grid_point", "density"]
                )
            for a, b in zip(self.locations, self.weights):
                wr.writerow([repr(float(a)), repr(float(b))])

    @classmethod
    def from_csv(cls, path) -> "MeasureRep":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        head = rows[0]
        if head[0] == "location":
            kind = "atoms"
        elif head[0] == "grid_point":
            kind = "grid"
        else:
            raise ValueError("missing header row distinguishing atoms from grid")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
        if kind == "atoms":
            return cls.atoms(data[:, 0], data[:, 1])
        return cls.grid(data[:, 0], data[:, 1])


def reflect_measure(mu: MeasureRep) -> MeasureRep:
    """Reflection through the origin."""
    if mu.kind == "atoms":
        return MeasureRep.atoms(-mu.locations[::-1], mu.weights[::-1])
    return MeasureRep.grid(-mu.locations[::-1], mu.weights[::-1])


class AnalyticField:
    """A complex-analytic function off the real axis with derivatives to order 3.

    ``evaluator(z)`` takes a 1-d complex array and returns four arrays
    (value, first, second, third derivative).
    """

    def __init__(self, evaluator):
        self._eval = evaluator

    def derivs(self, z):
        z = np.asarray(z, dtype=np.complex128)
        scalar = z.ndim == 0
        out = self._eval(np.atleast_1d(z).ravel())
        out = tuple(np.asarray(o, dtype=np.complex128).reshape(z.shape) for o in out)
        if scalar:
            out = tuple(complex(o) for o in out)
        return out

    def __call__(self, z):
        return self.derivs(z)[0]

    @classmethod
    def from_atoms(cls, locations, weights) -> "AnalyticField":
        locs = np.asarray(locations, dtype=np.float64)
        w = np.asarray(weights, dtype=np.float64)

        def ev(z):
            r = 1.0 / (locs - z[:, None])
            f0 = (w * r).sum(axis=1)
            f1 = (w * r**2).sum(axis=1)
            f2 = 2.0 * (w * r**3).sum(axis=1)
            f3 = 6.0 * (w * r**4).sum(axis=1)
            return f0, f1, f2, f3

        return cls(ev)


def stieltjes_of(measure: MeasureRep) -> AnalyticField:
    """Stieltjes transform m(z) = integral of dmu(x)/(x - z), with derivatives."""
    locs, w = measure.quadrature_atoms()
    base = AnalyticField.from_atoms(locs, w)

    def ev(z):
        if np.any(z.imag == 0):
            raise ValueError("probe on the real axis")
        return base._eval(z)

    return AnalyticField(ev)


def uniform01_field() -> AnalyticField:
    """Closed-form Stieltjes transform of the uniform measure on [0, 1]."""

    def ev(z):
        f0 = np.log1p(-1.0 / z)  # = ln((z-1)/z), principal, correct at infinity
        f1 = 1.0 / (z - 1.0) - 1.0 / z
        f2 = -1.0 / (z - 1.0) ** 2 + 1.0 / z**2
        f3 = 2.0 / (z - 1.0) ** 3 - 2.0 / z**3
        return f0, f1, f2, f3

    return AnalyticField(ev)


# ---------------------------------------------------------------------------
# characteristics


def characteristic_forward(z, t: float, m0: AnalyticField, check_lifetime: bool = True):
    """z_t(z) = z + t * exp(-m_0(z)); flags characteristics past their lifetime."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z.imag == 0):
        raise ValueError("probe on the real axis")
    if t < 0:
        raise ValueError("t must be nonnegative")
    out = z + t * np.exp(-m0(z))
    if check_lifetime and t > 0:
        life = characteristic_lifetime(z, m0)
        if np.any(t >= np.asarray(life)):
            raise ValueError("characteristic reaches the real axis before time t")
    return out if out.shape else complex(out)


def characteristic_lifetime(z, m0: AnalyticField):
    """First time the characteristic from z hits the real axis (inf if never).

    Finite exactly when Im[exp(-m_0(z))] has sign opposite to Im z.
    """
    z = np.asarray(z, dtype=np.complex128)
    v = np.exp(-np.asarray(m0(z), dtype=np.complex128))
    ratio = -z.imag / np.where(v.imag != 0, v.imag, np.nan)
    life = np.where(np.isfinite(ratio) & (ratio > 0), ratio, np.inf)
    return life if life.shape else float(life)


def omega_membership(z, t: float, q_mu0: MeasureRep) -> bool:
    """z is in the conformality domain iff integral dQ(mu_0)/|x-z|^2 < 1/t."""
    z = complex(z)
    if z.imag == 0:
        raise ValueError("probe on the real axis")
    if t <= 0:
        return True
    return q_mu0.second_moment_distance(z) < 1.0 / t


class InversionError(RuntimeError):
    def __init__(self, message, last_iterate, residual):
        super().__init__(f"{message} (last iterate {last_iterate}, residual {residual:.3e})")
        self.last_iterate = last_iterate
        self.residual = residual


def _newton(f, z0, halfplane: float, tol: float = 1e-12, maxiter: int = 100):
    """Damped Newton for f(z) = (value, derivative), confined to one half-plane."""
    z = z0
    val, dv = f(z)
    for _ in range(maxiter):
        if abs(val) < tol:
            return z
        step = val / dv
        lam = 1.0
        improved = False
        while lam > 1.0 / 4096:
            zn = z - lam * step
            if halfplane == 0.0 or halfplane * zn.imag > 0:
                vn, dn = f(zn)
                if abs(vn) < abs(val):
                    z, val, dv = zn, vn, dn
                    improved = True
                    break
            lam *= 0.5
        if not improved:
            # fallback: bisect along the imaginary direction away from the axis
            zn = complex(z.real, z.imag * 2.0 if halfplane * z.imag > 0 else halfplane * abs(z.imag + 1e-3) * 2.0)
            vn, dn = f(zn)
            if abs(vn) >= abs(val):
                raise InversionError("Newton stalled", z, abs(val))
            z, val, dv = zn, vn, dn
    if abs(val) < tol:
        return z
    raise InversionError("Newton did not converge", z, abs(val))


def characteristic_inverse(w, t: float, m0: AnalyticField, tol: float = 1e-12):
    """The unique preimage z with z + t*exp(-m_0(z)) = w, by damped Newton."""
    w = complex(w)
    if w.imag == 0:
        raise ValueError("probe on the real axis")
    if t == 0:
        return w
    sign = math.copysign(1.0, w.imag)

    def f(z):
        f0, f1, _, _ = m0.derivs(z)
        e = np.exp(-f0)
        return z + t * e - w, 1.0 - t * f1 * e

    return _newton(f, w, sign, tol=tol)


def limit_stieltjes(w, t: float, m0: AnalyticField):
    """m_t(w): constant along characteristics, m_t(z_t(z)) = m_0(z)."""
    w = np.asarray(w, dtype=np.complex128)
    if w.ndim == 0:
        return m0(characteristic_inverse(complex(w), t, m0))
    return np.array([m0(characteristic_inverse(complex(v), t, m0)) for v in w.ravel()]).reshape(w.shape)


def limit_derivs_on_characteristic(z, t: float, m0: AnalyticField):
    """Derivatives of m_t evaluated at z_t(z), in terms of m_0 at the label z.

    Returns (w, mt, mt1, mt2, mt3, dt_mt) where w = z_t(z), mt* are the z-
    derivatives of m_t at w and dt_mt is the time derivative at w.
    """
    m, m1, m2, m3 = m0.derivs(z)
    m, m1, m2, m3 = map(np.asarray, (m, m1, m2, m3))
    e = np.exp(-m)
    d = 1.0 - t * m1 * e
    w = np.asarray(z, dtype=np.complex128) + t * e
    mt1 = m1 / d
    mt2 = (m2 - t * m1**3 * e) / d**3
    # third derivative: differentiate mt2 with respect to the label, divide by d
    a_z = (m3 - t * e * (3.0 * m1**2 * m2 - m1**4)) / d**3
    a_z = a_z + 3.0 * t * e * (m2 - m1**2) * (m2 - t * m1**3 * e) / d**4
    mt3 = a_z / d
    dt_mt = -m1 * e / d
    if np.asarray(z).ndim == 0:
        return tuple(complex(np.asarray(v)) for v in (w, m, mt1, mt2, mt3, dt_mt))
    return w, m, mt1, mt2, mt3, dt_mt


def limit_field(m0: AnalyticField, t: float) -> AnalyticField:
    """m_t as an AnalyticField in w (inverts the characteristic pointwise)."""
    if t == 0:
        return m0

    def ev(w):
        out = [np.empty(w.shape, dtype=np.complex128) for _ in range(4)]
        for k, wk in enumerate(w):
            z = characteristic_inverse(complex(wk), t, m0)
            _, mt, mt1, mt2, mt3, _ = limit_derivs_on_characteristic(z, t, m0)
            out[0][k], out[1][k], out[2][k], out[3][k] = mt, mt1, mt2, mt3
        return tuple(out)

    return AnalyticField(ev)


# ---------------------------------------------------------------------------
# the explicit family nu_t


def nu_t_density(x, t: float):
    """Density of the measure with quantized R-transform t*e^z.

    Bulk arccot profile on [(1-sqrt(t))^2, (1+sqrt(t))^2]; for t <= 1 the
    density is exactly 1 below the bulk.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=np.float64)
    st = math.sqrt(t)
    lo, hi = (1.0 - st) ** 2, (1.0 + st) ** 2
    disc = (x - lo) * (hi - x)
    bulk = (x >= lo) & (x <= hi)
    dens = np.zeros(x.shape)
    s = np.sqrt(np.where(bulk, disc, 0.0))
    dens = np.where(bulk, np.arctan2(s, x + t - 1.0) / math.pi, dens)
    if t <= 1.0:
        dens = np.where(x < lo, 1.0, dens)
    return dens if dens.shape else float(dens)


def _nu_t_bulk_nodes(t: float, npts: int = _GL_NODES):
    # x = c + r*cos(phi) removes the square-root edges of the bulk
    st = math.sqrt(t)
    c, r = 1.0 + t, 2.0 * st
    phi, wphi = _gauss_legendre(0.0, math.pi, npts)
    x = c + r * np.cos(phi)
    s = r * np.sin(phi)
    dens = np.arctan2(s, x + t - 1.0) / math.pi
    return x, dens * s * wphi  # atoms equivalent to the bulk integral


def nu_t_mass(t: float, npts: int = _GL_NODES) -> float:
    _, w = _nu_t_bulk_nodes(t, npts)
    mass = float(w.sum())
    if t <= 1.0:
        mass += (1.0 - math.sqrt(t)) ** 2
    return mass


def nu_t_measure(t: float, npts: int = 4001) -> MeasureRep:
    """Gridded representation (normalized to unit mass for file interop)."""
    st = math.sqrt(t)
    hi = (1.0 + st) ** 2
    x = np.linspace(0.0 if t <= 1.0 else (1.0 - st) ** 2, hi, npts)
    d = nu_t_density(x, t)
    return MeasureRep.grid(x, d / np.trapezoid(d, x))


def nu_t_stieltjes(z, t: float, npts: int = _GL_NODES):
    """m_{nu_t}(z) by quadrature (trig substitution in the bulk, exact flat part)."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z.imag == 0):
        raise ValueError("probe on the real axis")
    xq, wq = _nu_t_bulk_nodes(t, npts)
    m = np.sum(wq / (xq - z[..., None]), axis=-1)
    if t <= 1.0:
        lo = (1.0 - math.sqrt(t)) ** 2
        # the segment x - z keeps a fixed-sign imaginary part, so the
        # principal-log antiderivative is branch-safe
        m = m + np.log(lo - z) - np.log(-z)
    return m if m.shape else complex(m)


def nu_t_stieltjes_check(z, t: float) -> float:
    """Residual of the algebraic relation z*e^{2m} + (1-t-z)*e^{m} + t = 0."""
    z = complex(z)
    m = nu_t_stieltjes(z, t)
    em = np.exp(m)
    return float(abs(z * em * em + (1.0 - t - z) * em + t))


# ---------------------------------------------------------------------------
# quantized R-transform and the Markov-Krein map


def quantized_R(m: AnalyticField, z, y0=None):
    """R^quant(z) = m^{-1}(-z) - 1/(1 - e^{-z}).

    The functional inverse of m is computed by the same damped Newton used
    for the characteristic inversion. ``y0`` overrides the starting point.
    """
    z = complex(z)
    u = -z
    if y0 is None:
        y0 = -1.0 / u  # from m(y) ~ -1/y at infinity
    halfplane = math.copysign(1.0, u.imag) if u.imag != 0 else 0.0
    if halfplane != 0 and halfplane * np.imag(y0) <= 0:
        y0 = complex(np.real(y0), halfplane * max(abs(np.imag(y0)), 0.5))

    def f(y):
        f0, f1, _, _ = m.derivs(y)
        return f0 - u, f1

    y = _newton(f, y0, halfplane)
    return y - 1.0 / (1.0 - np.exp(-z))


def markov_krein_Q(mu: MeasureRep, m_disc: int) -> MeasureRep:
    """Discrete construction of Q(mu) from quantile atoms.

    Discretizes mu by the upper-quantile rule (i - 1/2)/m = mu([y_i, inf)),
    then reweights the atoms by the interaction products
    (1/m) * prod_{j != i} (y_i - y_j + 1/m)/(y_i - y_j). The Stieltjes
    transform of the result approaches 1 - exp(-m_mu) at rate O(1/m).
    """
    if m_disc < 10:
        raise ValueError("m_disc must be >= 10")
    if mu.kind == "grid" and mu.max_density() > 1.0 + 1e-9:
        raise ValueError("Q requires density <= 1")
    m = m_disc
    y = np.array([mu.upper_quantile((i - 0.5) / m) for i in range(1, m + 1)])
    y = y[::-1]  # increasing
    gaps = np.diff(y)
    if np.any(gaps < 1.0 / m * (1.0 - 1e-9)):
        raise ValueError("density-<=1 violated: quantile gap below 1/m")
    d = y[:, None] - y[None, :]
    np.fill_diagonal(d, 1.0)
    ratio = (d + 1.0 / m) / d
    np.fill_diagonal(ratio, 1.0)
    w = np.prod(ratio, axis=1) / m
    w = np.maximum(w, 0.0)
    s = w.sum()
    if abs(s - 1.0) > 1e-9:
        raise ValueError(f"interaction weights sum to {s}, not 1")
    order = np.argsort(y)
    return MeasureRep.atoms(y[order], w[order] / s)


def perelomov_popov_weights(y: np.ndarray, spacing: float) -> np.ndarray:
    """Interaction weights for explicit atom locations at the given spacing."""
    m = len(y)
    d = y[:, None] - y[None, :]
    np.fill_diagonal(d, 1.0)
    ratio = (d + spacing) / d
    np.fill_diagonal(ratio, 1.0)
    return np.prod(ratio, axis=1) / m


def density_from_field(fieldf: AnalyticField, xs, eta: float):
    """Stieltjes inversion with smoothing eta: Im m(x + i*eta) / pi."""
    xs = np.asarray(xs, dtype=np.float64)
    return np.imag(fieldf(xs + 1j * eta)) / math.pi
