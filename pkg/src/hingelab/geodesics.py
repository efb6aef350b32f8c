"""The stratified space of oriented geodesics as a boundary.

Geodesics are stratified by the multiplicity pattern of their velocity;
strata do not mix (a sequence whose pattern degenerates is divergent
here, honoring the disjoint-union topology).  An unbounded point
sequence converges to a geodesic in two steps: its direction from the
base point converges on the sky, and the unique geodesics through the
sample points asymptotic to that direction converge.

The asymptotic geodesic through a point x toward a sky point y is built
from the orthonormal frame adapted to y's flag and the reverse Cholesky
factor of x in that frame (block upper-triangular against the flag,
positive diagonal), which makes the construction deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import core, sky
from .core import DEFAULT_TOL, Matrix
from .errors import DimensionError, HingeLabError
from .satake import SpdPoint
from .sky import GeodesicFromBase, SkyPoint, orthonormal_frame_of_flag
from .velocity import PolySequence, VelocityPoint, ratio_limit


@dataclass(frozen=True)
class StratumDescriptor:
    """Cumulative block ends of a velocity multiplicity pattern."""

    n: int
    block_ends: tuple

    def __post_init__(self):
        ends = self.block_ends
        if not ends or ends[-1] != self.n:
            raise HingeLabError("block ends must accumulate to n")
        if any(ends[i] >= ends[i + 1] for i in range(len(ends) - 1)):
            raise HingeLabError("block ends must increase strictly")
        if len(ends) < 2:
            raise HingeLabError(
                "one-block patterns have zero velocity; the stratum is empty"
            )

    @property
    def block_sizes(self) -> tuple:
        prev = 0
        sizes = []
        for e in self.block_ends:
            sizes.append(e - prev)
            prev = e
        return tuple(sizes)

    @property
    def simplex_dimension(self) -> int:
        """Open simplex of patterns with these blocks: sigma - 2."""
        return len(self.block_ends) - 2


@dataclass(frozen=True)
class StabilizerDescriptor:
    """R_+* times a product of orthogonal groups, one per block."""

    factor_dims: tuple

    @property
    def dimension(self) -> int:
        return 1 + sum(d * (d - 1) // 2 for d in self.factor_dims)


def stratum_of(v: VelocityPoint) -> StratumDescriptor:
    return StratumDescriptor(v.n, v.block_ends())


def stabilizer(s: StratumDescriptor) -> StabilizerDescriptor:
    return StabilizerDescriptor(s.block_sizes)


def stratum_dimension(s: StratumDescriptor) -> int:
    """dim Delta(A) + dim SL(n,R) - dim G(A)."""
    sl_dim = s.n * s.n - 1
    return s.simplex_dimension + sl_dim - stabilizer(s).dimension


# ---------------------------------------------------------------------------
# oriented geodesics

class OrientedGeodesic:
    """gamma(t) = G e^{At} G^t, canonicalized at the point closest to E."""

    __slots__ = ("frame", "exponents", "n")

    def __init__(self, frame: Matrix, exponents: Sequence):
        if not frame.is_square:
            raise DimensionError("geodesic frame must be square")
        n = frame.rows
        if len(exponents) != n:
            raise DimensionError("one exponent per dimension")
        exps = [float(x) for x in exponents]
        if any(exps[i] < exps[i + 1] for i in range(n - 1)):
            raise HingeLabError("exponents must be nonincreasing")
        last = exps[-1]
        exps = tuple(x - last for x in exps)
        if all(x == 0.0 for x in exps):
            raise HingeLabError("a geodesic needs a nonzero direction")
        object.__setattr__(self, "frame", frame.to_float())
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "n", n)

    def __setattr__(self, *_):
        raise AttributeError("OrientedGeodesic is immutable")

    def point_at(self, t: float) -> np.ndarray:
        g = self.frame.to_numpy()
        lam = np.array(self.exponents)
        return g @ np.diag(np.exp(lam * t)) @ g.T

    def tangent_at(self, t: float) -> np.ndarray:
        """Trace-free unit tangent at gamma(t), in the symmetric model."""
        g = self.frame.to_numpy()
        lam = np.array(self.exponents)
        half = g @ np.diag(np.exp(lam * t / 2.0))
        tan = half @ np.diag(lam) @ half.T
        tan = tan - np.trace(tan) / self.n * np.eye(self.n)
        return tan / np.linalg.norm(tan)

    def distance_to_base_sq(self, t: float) -> float:
        vals = np.linalg.eigvalsh(self.point_at(t))
        logs = np.log(np.maximum(vals, 1e-300))
        logs = logs - logs.mean()
        return float(np.sum(logs * logs))

    def speed(self) -> float:
        lam = np.array(self.exponents)
        lam = lam - lam.mean()
        return float(np.linalg.norm(lam))

    def _distance_derivative(self, t: float) -> float:
        """d/dt of the squared distance to E, via eigen perturbation.

        With mu_i the log eigenvalues of gamma(t) and v_i unit
        eigenvectors, the derivative is 2 sum mu0_i (v_i' gamma' v_i) /
        w_i; value comparisons would only locate the minimum to sqrt(eps).
        """
        g = self.frame.to_numpy()
        lam = np.array(self.exponents)
        a = g @ np.diag(np.exp(lam * t)) @ g.T
        aprime = g @ np.diag(lam * np.exp(lam * t)) @ g.T
        w, v = np.linalg.eigh(0.5 * (a + a.T))
        w = np.maximum(w, 1e-300)
        mu = np.log(w)
        mu0 = mu - mu.mean()
        dmu = np.einsum("ij,ij->j", v, aprime @ v) / w
        return 2.0 * float(mu0 @ dmu)

    def closest_time_to_base(self) -> float:
        """Root of the distance derivative along the convex distance to E.

        The minimizer sits within 2 d(E, gamma(0)) / speed of t = 0 by
        the triangle inequality, which keeps the search bracket and all
        evaluated matrices bounded.
        """
        d0 = math.sqrt(self.distance_to_base_sq(0.0))
        radius = 2.0 * d0 / self.speed() + 1.0
        lo, hi = -radius, radius
        if self._distance_derivative(lo) >= 0.0:
            return lo
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self._distance_derivative(mid) < 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-14 * max(1.0, radius):
                break
        return 0.5 * (lo + hi)

    def canonical_data(self):
        """(closest point to E, unit tangent there); gauge free."""
        t0 = self.closest_time_to_base()
        return self.point_at(t0), self.tangent_at(t0)

    def velocity(self) -> VelocityPoint:
        top = self.exponents[0]
        return VelocityPoint(tuple(x / top for x in self.exponents[1:-1]),
                             self.n)

    def close_to(self, other: "OrientedGeodesic", tol: float = 1e-8) -> bool:
        if self.n != other.n:
            return False
        p1, t1 = self.canonical_data()
        p2, t2 = other.canonical_data()
        scale = max(1.0, float(np.abs(p1).max()))
        return (
            float(np.abs(p1 - p2).max()) <= tol * scale
            and float(np.abs(t1 - t2).max()) <= tol
        )

    def __repr__(self):
        return f"OrientedGeodesic(n={self.n})"


def geodesic_through_base(g: GeodesicFromBase) -> OrientedGeodesic:
    return OrientedGeodesic(g.frame, list(g.exponents))


def translate(geo: OrientedGeodesic, g: Matrix) -> OrientedGeodesic:
    return OrientedGeodesic(g.to_float() @ geo.frame, list(geo.exponents))


# ---------------------------------------------------------------------------
# the asymptotic geodesic through a point

def _reverse_cholesky(s: np.ndarray) -> np.ndarray:
    """Upper-triangular B with positive diagonal and B B^T = S."""
    n = s.shape[0]
    p = np.eye(n)[::-1]
    lower = np.linalg.cholesky(p @ s @ p)
    return p @ lower @ p


def asymptotic_geodesic_through(x: SpdPoint, y: SkyPoint,
                                tol: float = DEFAULT_TOL) -> OrientedGeodesic:
    """The unique geodesic through x converging to the sky point y.

    With U the orthonormal frame adapted to y's flag, factor
    U^T x U = B B^T with B upper triangular; the geodesic frame is U B
    and its QR orthogonal part is U again, so the limit flag is y's.
    """
    u = orthonormal_frame_of_flag(y.flag.complete(tol), tol).to_numpy()
    s = u.T @ x.matrix.to_numpy() @ u
    b = _reverse_cholesky(s)
    frame = Matrix.from_numpy(u @ b)
    return OrientedGeodesic(frame, y.velocity.full_pattern())


# ---------------------------------------------------------------------------
# two-step limits of point sequences

class DriftingSpdPath:
    """x(t) = M U diag(e^{l(t)}) U^T M^T with a fixed invertible drift M."""

    __slots__ = ("drift", "frame", "exponents")

    def __init__(self, drift: Matrix, frame: Matrix, exponents: PolySequence,
                 tol: float = DEFAULT_TOL):
        if not frame.is_orthogonal(tol):
            raise HingeLabError("path frame must be orthogonal")
        if abs(float(drift.det())) < 1e-12:
            raise HingeLabError("drift must be invertible")
        if exponents.size != frame.rows:
            raise DimensionError("one exponent polynomial per dimension")
        object.__setattr__(self, "drift", drift.to_float())
        object.__setattr__(self, "frame", frame.to_float())
        object.__setattr__(self, "exponents", exponents)

    def __setattr__(self, *_):
        raise AttributeError("DriftingSpdPath is immutable")

    @property
    def n(self) -> int:
        return self.frame.rows

    def value_at(self, t: float) -> np.ndarray:
        vals = [math.exp(float(v)) for v in self.exponents.values_at(t)]
        m = self.drift.to_numpy()
        u = self.frame.to_numpy()
        return m @ u @ np.diag(vals) @ u.T @ m.T


@dataclass(frozen=True)
class GeodesicLimitDiagnostics:
    residuals: tuple
    sample_times: tuple


def direction_limit_from_base(path: DriftingSpdPath,
                              tol: float = DEFAULT_TOL) -> SkyPoint:
    """Step one: the sky limit of the directions base -> x(t).

    The velocity comes from exact ratio limits of the exponents; the
    flag from the QR orthogonal part of (drift . frame), coarsened to
    the velocity breaks.
    """
    seq = path.exponents
    if seq.is_bounded():
        raise HingeLabError("bounded paths have no direction limit")
    gap = seq.top_gap()
    base = seq.polys[-1]
    taus = [ratio_limit(p - base, gap) for p in seq.polys]
    mu = VelocityPoint(tuple(taus[1:-1]), path.n)
    u, _ = core.qr(Matrix.from_numpy(
        path.drift.to_numpy() @ path.frame.to_numpy()
    ))
    ends = mu.block_ends()
    flag = sky.flag_of_matrix_columns(u, ends[:-1], tol)
    return SkyPoint(mu, flag)


def sequence_to_geodesic_limit(path: DriftingSpdPath,
                               base: SpdPoint | None = None,
                               sample_times: Sequence[float] = (10.0, 20.0,
                                                                30.0, 40.0),
                               tol: float = 1e-8):
    """Two-step limit of the point sequence x(t) to an oriented geodesic.

    Step one finds the limit direction y from the base; step two runs
    the unique geodesic through each sample point asymptotic to y and
    requires the canonical (closest point, tangent) data to settle.
    Returns (geodesic, diagnostics); non-settling residuals raise.
    """
    if base is not None and not _is_identity(base.matrix, tol):
        c = _inverse_sqrt(base)
        moved = DriftingSpdPath(
            Matrix.from_numpy(c @ path.drift.to_numpy()), path.frame,
            path.exponents,
        )
        geo, diag = sequence_to_geodesic_limit(moved, None, sample_times, tol)
        cinv = np.linalg.inv(c)
        return translate(geo, Matrix.from_numpy(cinv)), diag
    y = direction_limit_from_base(path)
    samples = []
    for t in sample_times:
        x = SpdPoint(Matrix.from_numpy(path.value_at(float(t))), check=False)
        samples.append(asymptotic_geodesic_through(x, y))
    residuals = []
    for g1, g2 in zip(samples, samples[1:]):
        p1, t1 = g1.canonical_data()
        p2, t2 = g2.canonical_data()
        scale = max(1.0, float(np.abs(p1).max()))
        residuals.append(
            float(np.abs(p1 - p2).max()) / scale + float(np.abs(t1 - t2).max())
        )
    diag = GeodesicLimitDiagnostics(tuple(residuals), tuple(sample_times))
    if residuals and residuals[-1] > math.sqrt(tol):
        raise HingeLabError(
            f"step-two geodesics do not settle; residuals {residuals}"
        )
    return samples[-1], diag


def _is_identity(m: Matrix, tol: float) -> bool:
    a = m.to_numpy()
    return bool(np.abs(a - np.eye(a.shape[0])).max() <= tol)


def _inverse_sqrt(p: SpdPoint) -> np.ndarray:
    values, q = core.eigensym(p.matrix.to_float())
    qn = q.to_numpy()
    return qn @ np.diag([1.0 / math.sqrt(v) for v in values]) @ qn.T


# ---------------------------------------------------------------------------
# sea urchin membership

def rational_approximation(x: float, max_denominator: int = 10 ** 6,
                           tol: float = 1e-9) -> Fraction | None:
    """Continued-fraction detection of a rational value.

    Expansion stops when the fractional remainder dips below tol
    (rational, returns the convergent) or the denominator exceeds the
    bound (treated as irrational, returns None).
    """
    if x < 0:
        r = rational_approximation(-x, max_denominator, tol)
        return None if r is None else -r
    h0, h1 = 1, int(math.floor(x))
    k0, k1 = 0, 1
    frac = x - math.floor(x)
    for _ in range(64):
        if abs(frac) < tol:
            return Fraction(h1, k1)
        inv = 1.0 / frac
        a = int(math.floor(inv))
        frac = inv - a
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > max_denominator:
            return None
    return None


def is_sea_urchin_point(geo: OrientedGeodesic | GeodesicFromBase,
                        max_denominator: int = 10 ** 6,
                        tol: float = 1e-9) -> bool:
    """True when every velocity coordinate is rational.

    Exact exponent data is rational by construction; float data is
    screened through bounded-denominator continued fractions.
    """
    if isinstance(geo, GeodesicFromBase):
        exps = geo.exponents
        n = geo.n
    else:
        exps = geo.exponents
        n = geo.n
    if all(isinstance(x, Fraction) for x in exps):
        return True
    top = float(exps[0])
    for x in exps[1:-1]:
        if rational_approximation(float(x) / top, max_denominator, tol) is None:
            return False
    return True
