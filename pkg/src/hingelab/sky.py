"""The visibility boundary of SL(n,R)/SO(n) with its Tits-building structure.

A point of the matrix sky is a (velocity, flag) pair: the velocity is a
point of the simplex of normalized exponent ratios and the flag collects
the frame images of the coordinate subspaces at the multiplicity breaks,
subject to dim V_j = s_j.  Connecting geodesics from the base point have
closed-form limits through the QR factorization of the frame.  Complete
flags tile the sky by simplices; the Tits metric is computed as the
spherical angle in a common apartment, with the n = 3 incidence graph of
lines and planes as an independent cross-check.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Sequence

import numpy as np

from . import core
from .core import (
    DEFAULT_TOL,
    EXACT,
    FLOAT,
    Matrix,
    Subspace,
    subspace_span,
)
from .errors import DimensionError, HingeLabError, SingularMatrixError
from .velocity import VelocityPoint


class Flag:
    """A strictly increasing chain of proper subspaces of R^n."""

    __slots__ = ("ambient", "subspaces")

    def __init__(self, ambient: int, subspaces: Sequence[Subspace]):
        subs = tuple(subspaces)
        for s in subs:
            if s.ambient != ambient:
                raise DimensionError("flag subspace in the wrong ambient space")
            if s.dim == 0 or s.dim == ambient:
                raise HingeLabError("flag subspaces must be proper and nonzero")
        for a, b in zip(subs, subs[1:]):
            if not (a.dim < b.dim and b.contains(a)):
                raise HingeLabError("flag subspaces must increase strictly")
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "subspaces", subs)

    def __setattr__(self, *_):
        raise AttributeError("Flag is immutable")

    @property
    def steps(self) -> int:
        return len(self.subspaces)

    @property
    def dims(self) -> tuple:
        return tuple(s.dim for s in self.subspaces)

    @property
    def is_complete(self) -> bool:
        return self.dims == tuple(range(1, self.ambient))

    @property
    def backend(self) -> str:
        return self.subspaces[0].backend if self.subspaces else EXACT

    def subspace_of_dim(self, d: int) -> Subspace:
        if d == 0:
            return core.zero_subspace(self.ambient, self.backend)
        if d == self.ambient:
            return core.full_subspace(self.ambient, self.backend)
        for s in self.subspaces:
            if s.dim == d:
                return s
        raise HingeLabError(f"flag has no subspace of dimension {d}")

    def complete(self, tol: float = DEFAULT_TOL) -> "Flag":
        """Canonical completion: gaps are filled one direction at a time
        with the canonical basis of the orthocomplement step."""
        if self.is_complete:
            return self
        n = self.ambient
        backend = self.backend
        chain = [core.zero_subspace(n, backend)] + list(self.subspaces) + [
            core.full_subspace(n, backend)
        ]
        full: list[Subspace] = []
        for lower, upper in zip(chain, chain[1:]):
            if lower.dim > 0 and lower.dim < n:
                full.append(lower)
            current = lower
            gap = core.intersect(upper, core.orthocomplement(lower, tol), tol)
            for row in gap.basis[:-1] if upper.dim == n else gap.basis:
                if current.dim + 1 >= upper.dim:
                    break
                current = core.subspace_sum(
                    current, subspace_span([row], backend, ambient=n), tol
                )
                full.append(current)
        return Flag(n, full)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Flag)
            and self.ambient == other.ambient
            and self.subspaces == other.subspaces
        )

    def __hash__(self):
        return hash((self.ambient, self.dims))

    def __repr__(self):
        return f"Flag(dims {self.dims} in R^{self.ambient})"


def coordinate_flag(n: int, dims: Sequence[int], backend: str = EXACT) -> Flag:
    ident = Matrix.identity(n, backend)
    subs = [
        subspace_span([ident.row(i) for i in range(d)], backend, ambient=n)
        for d in dims
    ]
    return Flag(n, subs)


def flag_of_matrix_columns(a: Matrix, dims: Sequence[int],
                           tol: float = DEFAULT_TOL) -> Flag:
    """Flag of leading-column spans of a matrix."""
    n = a.rows
    subs = [
        subspace_span([tuple(a.column(i)) for i in range(d)], a.backend,
                      tol=tol, ambient=n)
        for d in dims
    ]
    return Flag(n, subs)


@dataclass(frozen=True)
class SkyPoint:
    """A (velocity, flag) point of the visibility boundary."""

    velocity: VelocityPoint
    flag: Flag

    def __post_init__(self):
        n = self.velocity.n
        if self.flag.ambient != n:
            raise DimensionError("velocity and flag dimensions differ")
        ends = self.velocity.block_ends()
        if self.flag.dims != tuple(ends[:-1]):
            raise HingeLabError(
                "flag dimensions must match the velocity block pattern"
            )

    @property
    def n(self) -> int:
        return self.velocity.n


class GeodesicFromBase:
    """gamma(s) = A diag(e^{l_i s}) A^t with A orthogonal, l_n = 0, l != 0."""

    __slots__ = ("frame", "exponents", "n")

    def __init__(self, frame: Matrix, exponents: Sequence,
                 tol: float = DEFAULT_TOL):
        if not frame.is_orthogonal(tol):
            raise HingeLabError("geodesic frame must be orthogonal")
        n = frame.rows
        if len(exponents) != n:
            raise DimensionError("exponent count mismatch")
        if frame.backend == EXACT:
            exps = [core.as_exact(x) for x in exponents]
        else:
            exps = [float(x) for x in exponents]
        if any(exps[i] < exps[i + 1] for i in range(n - 1)):
            raise HingeLabError("exponents must be nonincreasing")
        last = exps[-1]
        exps = tuple(x - last for x in exps)
        if all(x == 0 for x in exps):
            raise HingeLabError("geodesic needs a nonzero direction")
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "n", n)

    def __setattr__(self, *_):
        raise AttributeError("GeodesicFromBase is immutable")

    def point_at(self, s: float) -> np.ndarray:
        lam = np.array([float(x) for x in self.exponents])
        a = self.frame.to_numpy()
        return a @ np.diag(np.exp(lam * s)) @ a.T

    def tangent(self) -> np.ndarray:
        """Trace-free tangent at the base point, A diag(l)_0 A^t."""
        lam = np.array([float(x) for x in self.exponents])
        lam = lam - lam.mean()
        a = self.frame.to_numpy()
        return a @ np.diag(lam) @ a.T

    def block_ends(self) -> tuple:
        ends = []
        for i, x in enumerate(self.exponents):
            if i + 1 == self.n or self.exponents[i + 1] != x:
                ends.append(i + 1)
        return tuple(ends)


def sky_from_geodesic(g: GeodesicFromBase,
                      tol: float = DEFAULT_TOL) -> SkyPoint:
    """Velocity D = (l_2/l_1, ...) and flag F = frame images at the breaks."""
    top = g.exponents[0]
    mu = tuple(x / top for x in g.exponents[1:-1])
    velocity = VelocityPoint(mu, g.n)
    ends = velocity.block_ends()
    flag = flag_of_matrix_columns(g.frame, ends[:-1], tol)
    return SkyPoint(velocity, flag)


def geodesic_from_sky(p: SkyPoint, tol: float = DEFAULT_TOL) -> GeodesicFromBase:
    """A geodesic from the base realizing the given sky point.

    The frame is the canonical orthonormal basis adapted to the flag
    (Gram-Schmidt through the completed chain); the exponents unfold the
    velocity pattern.
    """
    frame = orthonormal_frame_of_flag(p.flag, tol)
    return GeodesicFromBase(frame, p.velocity.full_pattern(), tol)


def orthonormal_frame_of_flag(flag: Flag, tol: float = DEFAULT_TOL) -> Matrix:
    """Orthonormal columns adapted to the flag: leading spans match."""
    n = flag.ambient
    chain = [core.zero_subspace(n, flag.backend)] + list(flag.subspaces) + [
        core.full_subspace(n, flag.backend)
    ]
    cols: list[np.ndarray] = []
    for lower, upper in zip(chain, chain[1:]):
        gap = core.intersect(upper.to_float(tol),
                             core.orthocomplement(lower.to_float(tol), tol),
                             tol)
        for row in gap.basis:
            v = np.array(row, dtype=float)
            for c in cols:
                v = v - (c @ v) * c
            norm = float(np.linalg.norm(v))
            if norm <= tol:
                continue
            cols.append(v / norm)
    if len(cols) != n:
        raise HingeLabError("flag adaptation failed")
    return Matrix.from_numpy(np.column_stack(cols))


def connecting_geodesic_limit(a: Matrix, exponents: Sequence,
                              tol: float = DEFAULT_TOL) -> GeodesicFromBase:
    """Limit of the geodesics joining the base to A e^{At} A^t.

    QR-factor A = U B with positive diagonal; the limit geodesic is
    U e^{At} U^{-1} from the base point.
    """
    u, _ = core.qr(a.to_float())
    return GeodesicFromBase(u, [float(x) for x in exponents], tol)


# ---------------------------------------------------------------------------
# relative position and apartments

def relative_position(f: Flag, g: Flag) -> tuple:
    """The permutation w with w(j) = i at the jumps of dim(V_i cap W_j).

    Zero-based: w[j] = i means the pair (i, j) carries a jump of the
    intersection-dimension table.  Identity for equal flags, the order
    reversal for flags in general position.
    """
    if not (f.is_complete and g.is_complete):
        raise HingeLabError("relative position needs complete flags")
    if f.ambient != g.ambient:
        raise DimensionError("flag ambients differ")
    n = f.ambient
    d = _intersection_table(f, g)
    w = [-1] * n
    for j in range(1, n + 1):
        for i in range(1, n + 1):
            if d[i][j] - d[i - 1][j] - d[i][j - 1] + d[i - 1][j - 1] == 1:
                w[j - 1] = i - 1
                break
    if sorted(w) != list(range(n)):
        raise HingeLabError("degenerate intersection table")
    return tuple(w)


def _intersection_table(f: Flag, g: Flag):
    n = f.ambient
    d = [[0] * (n + 1) for _ in range(n + 1)]
    fs = [f.subspace_of_dim(i) for i in range(n + 1)]
    gs = [g.subspace_of_dim(j) for j in range(n + 1)]
    for i in range(n + 1):
        for j in range(n + 1):
            if i == 0 or j == 0:
                d[i][j] = 0
            elif i == n:
                d[i][j] = j
            elif j == n:
                d[i][j] = i
            else:
                d[i][j] = core.intersect(fs[i], gs[j]).dim
    return d


class Apartment:
    """n independent lines; chambers are the complete flags of orderings.

    Frames coming from a flat through the base point are orthonormal;
    common apartments of two general flags need not be, and the Tits
    computation only uses coordinates relative to the frame.
    """

    __slots__ = ("lines",)

    def __init__(self, lines: Sequence[tuple]):
        lines = tuple(tuple(v) for v in lines)
        n = len(lines)
        if any(len(v) != n for v in lines):
            raise DimensionError("need n lines in R^n")
        span = subspace_span(list(lines), ambient=n)
        if span.dim != n:
            raise SingularMatrixError("frame lines must be independent")
        object.__setattr__(self, "lines", lines)

    def __setattr__(self, *_):
        raise AttributeError("Apartment is immutable")

    @property
    def n(self) -> int:
        return len(self.lines)

    @property
    def backend(self) -> str:
        return core.vector_backend(self.lines[0])

    def is_orthonormal(self, tol: float = DEFAULT_TOL) -> bool:
        m = Matrix(list(self.lines)).to_float()
        return m.is_orthogonal(tol)

    def flag_of_order(self, order: Sequence[int]) -> Flag:
        n = self.n
        subs = [
            subspace_span([self.lines[i] for i in order[:d]], self.backend,
                          ambient=n)
            for d in range(1, n)
        ]
        return Flag(n, subs)

    def chambers(self) -> list[Flag]:
        """All n! complete flags obtained by ordering the lines."""
        return [self.flag_of_order(p) for p in permutations(range(self.n))]


def common_apartment(f: Flag, g: Flag, tol: float = DEFAULT_TOL) -> Apartment:
    """A frame adapted to both complete flags.

    For each jump (i, j) of the intersection table, one direction of
    V_i cap W_j outside V_{i-1} cap W_j + V_i cap W_{j-1}; the resulting
    lines make both flags coordinate flags.
    """
    if not (f.is_complete and g.is_complete):
        raise HingeLabError("common apartment needs complete flags")
    n = f.ambient
    w = relative_position(f, g)
    lines: list[tuple] = [None] * n              # indexed by f-position i
    for j in range(n):
        i = w[j]
        s_ij = core.intersect(f.subspace_of_dim(i + 1),
                              g.subspace_of_dim(j + 1), tol)
        t_low = core.subspace_sum(
            core.intersect(f.subspace_of_dim(i), g.subspace_of_dim(j + 1), tol),
            core.intersect(f.subspace_of_dim(i + 1), g.subspace_of_dim(j), tol),
            tol,
        )
        vec = next(
            (row for row in s_ij.basis if not t_low.contains_vector(row, tol)),
            None,
        )
        if vec is None:
            raise HingeLabError("no direction witnesses the jump")
        lines[i] = tuple(vec)
    apartment = Apartment(lines)
    # adaptedness: f is the prefix flag, g the w-ordered prefix flag
    for i in range(1, n):
        if not f.subspace_of_dim(i).contains(
            subspace_span([lines[k] for k in range(i)], ambient=n), tol
        ):
            raise HingeLabError("frame is not adapted to the first flag")
    order_g = [w[j] for j in range(n)]
    for j in range(1, n):
        if not g.subspace_of_dim(j).contains(
            subspace_span([lines[k] for k in order_g[:j]], ambient=n), tol
        ):
            raise HingeLabError("frame is not adapted to the second flag")
    return apartment


# ---------------------------------------------------------------------------
# angles and the Tits metric

def _as_tangent(p) -> np.ndarray:
    if isinstance(p, GeodesicFromBase):
        return p.tangent()
    if isinstance(p, SkyPoint):
        return geodesic_from_sky(p).tangent()
    raise HingeLabError("expected a sky point or a geodesic from the base")


def angle_at_base(p, q) -> float:
    """Angle between base-point tangents under the trace inner product."""
    t1, t2 = _as_tangent(p), _as_tangent(q)
    return core.stable_angle(t1.ravel(), t2.ravel())


def _centered_pattern(v: VelocityPoint) -> list[float]:
    full = [float(x) for x in v.full_pattern()]
    mean = sum(full) / len(full)
    return [x - mean for x in full]


def tits_distance(p: SkyPoint, q: SkyPoint, tol: float = DEFAULT_TOL) -> float:
    """Tits metric via the common-apartment spherical angle.

    Flags are canonically completed (velocity values are constant on the
    completed blocks, so the completion does not matter), the relative
    position permutation aligns the two coordinate vectors, and the
    angle between the centered exponent vectors is returned.
    """
    if p.n != q.n:
        raise DimensionError("sky points of different ranks")
    fp = p.flag.complete(tol)
    fq = q.flag.complete(tol)
    w = relative_position(fp, fq)
    n = p.n
    xs = p.velocity.full_pattern()
    ys = q.velocity.full_pattern()
    if all(isinstance(v, Fraction) for v in xs + ys):
        # exact path: catches cos = +-1 without the arccos floor
        xc = [v - Fraction(sum(xs), n) for v in xs]
        yc = [v - Fraction(sum(ys), n) for v in ys]
        dot = sum(xc[w[j]] * yc[j] for j in range(n))
        nx2 = sum(v * v for v in xc)
        ny2 = sum(v * v for v in yc)
        if nx2 == 0 or ny2 == 0:
            raise HingeLabError("zero velocity has no sky direction")
        if dot * dot == nx2 * ny2:
            return 0.0 if dot > 0 else math.pi
        c = math.copysign(
            math.sqrt(float(dot * dot / (nx2 * ny2))), float(dot)
        )
        return math.acos(max(-1.0, min(1.0, c)))
    x = np.array(_centered_pattern(p.velocity))
    y = np.array(_centered_pattern(q.velocity))
    return core.stable_angle(x[list(w)], y)


# ---------------------------------------------------------------------------
# the n = 3 incidence graph model

@dataclass(frozen=True)
class IncidenceGraph:
    """Lines and planes of R^3 with incidence edges of length pi/3.

    The finite sample stands in for the full building graph.  Pairs
    drawn from ``core_lines`` and ``planes`` are distance-faithful: the
    derived intersection lines are kept as chain witnesses, so shortest
    paths between core vertices realize the true building distance.
    """

    lines: tuple               # all sampled lines (core first)
    planes: tuple              # spans of core line pairs
    edges: frozenset           # pairs (line_index, plane_index)
    core_count: int

    EDGE_LENGTH = math.pi / 3.0

    @property
    def core_lines(self) -> tuple:
        return self.lines[: self.core_count]

    def vertex(self, sub: Subspace):
        if sub.dim == 1:
            return ("line", self.lines.index(sub))
        if sub.dim == 2:
            return ("plane", self.planes.index(sub))
        raise HingeLabError("graph vertices are lines and planes")

    def _adjacency(self):
        adj: dict = {}
        for (ln, p) in self.edges:
            adj.setdefault(("line", ln), []).append(("plane", p))
            adj.setdefault(("plane", p), []).append(("line", ln))
        return adj

    def hops(self, a, b) -> int:
        if a == b:
            return 0
        adj = self._adjacency()
        seen = {a}
        queue = deque([(a, 0)])
        while queue:
            v, dist = queue.popleft()
            for nb in adj.get(v, ()):
                if nb == b:
                    return dist + 1
                if nb not in seen:
                    seen.add(nb)
                    queue.append((nb, dist + 1))
        raise HingeLabError("graph is disconnected on these vertices")

    def distance(self, a: Subspace, b: Subspace) -> float:
        return self.hops(self.vertex(a), self.vertex(b)) * self.EDGE_LENGTH

    def sky_point(self, sub: Subspace) -> SkyPoint:
        one, zero = Fraction(1), Fraction(0)
        mu = (zero,) if sub.dim == 1 else (one,)
        return SkyPoint(VelocityPoint(mu, 3), Flag(3, [sub]))

    def to_dot(self) -> str:
        out = ["graph incidence {"]
        for i in range(len(self.lines)):
            out.append(f'  l{i} [label="line {i}"];')
        for j in range(len(self.planes)):
            out.append(f'  p{j} [label="plane {j}"];')
        for (i, j) in sorted(self.edges):
            out.append(f"  l{i} -- p{j};")
        out.append("}")
        return "\n".join(out)


def n3_incidence_graph(lines: Sequence[Sequence] | None = None,
                       seed: int = 0, n_lines: int = 6) -> IncidenceGraph:
    """A finite rational sample of the n = 3 building graph.

    Planes are the spans of all core line pairs; intersections of plane
    pairs are appended as witness lines.  Between core lines and planes
    every building distance (0, 1, 2, 3 hops) is then realized by a
    path inside the sample: spans connect core lines, intersections
    connect planes, and a plane's two spanning lines bridge the
    non-incident line-plane cases.
    """
    import random

    rng = random.Random(seed)
    sample: list[Subspace] = []
    if lines is not None:
        for v in lines:
            sample.append(subspace_span([tuple(core.as_exact(x) for x in v)],
                                        EXACT, ambient=3))
    else:
        while len(sample) < n_lines:
            v = tuple(Fraction(rng.randint(-4, 4)) for _ in range(3))
            if all(x == 0 for x in v):
                continue
            s = subspace_span([v], EXACT, ambient=3)
            if s not in sample:
                sample.append(s)
    core_count = len(sample)
    planes: list[Subspace] = []
    for i in range(core_count):
        for j in range(i + 1, core_count):
            s = core.subspace_sum(sample[i], sample[j])
            if s.dim == 2 and s not in planes:
                planes.append(s)
    all_lines = list(sample)
    for i in range(len(planes)):
        for j in range(i + 1, len(planes)):
            s = core.intersect(planes[i], planes[j])
            if s.dim == 1 and s not in all_lines:
                all_lines.append(s)
    edges = set()
    for li, line in enumerate(all_lines):
        for pj, plane in enumerate(planes):
            if plane.contains(line):
                edges.add((li, pj))
    return IncidenceGraph(tuple(all_lines), tuple(planes), frozenset(edges),
                          core_count)


def chain_infimum_on_graph(graph: IncidenceGraph, a: Subspace,
                           b: Subspace) -> float:
    """Shortest-chain distance on the sampled incidence graph."""
    return graph.distance(a, b)


# ---------------------------------------------------------------------------
# chambers and simplex intersections

def apartment_chambers(frame: Matrix, tol: float = DEFAULT_TOL) -> list[Flag]:
    """The n! chambers cut out by an orthogonal frame."""
    if not frame.is_orthogonal(tol):
        raise HingeLabError("apartment_chambers requires an orthogonal frame")
    lines = [tuple(frame.column(j)) for j in range(frame.cols)]
    return Apartment(lines).chambers()


@dataclass(frozen=True)
class SimplexFace:
    """A face of the velocity simplex: patterns breaking exactly at the
    listed indices (1-based cumulative dimensions)."""

    n: int
    breaks: tuple

    @property
    def dimension(self) -> int:
        return len(self.breaks) - 1


def simplex_intersection(l1: Flag, l2: Flag) -> SimplexFace | None:
    """Joint face of two chambers: None when no flag subspaces agree."""
    if not (l1.is_complete and l2.is_complete):
        raise HingeLabError("simplex_intersection needs complete flags")
    if l1.ambient != l2.ambient:
        raise DimensionError("flag ambients differ")
    agree = tuple(
        j for j in range(1, l1.ambient)
        if l1.subspace_of_dim(j) == l2.subspace_of_dim(j)
    )
    if not agree:
        return None
    return SimplexFace(l1.ambient, agree)
