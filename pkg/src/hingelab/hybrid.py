"""Hybrid boundary points: velocity data paired with Satake hinge data.

A hybrid limit input is an orthogonal frame together with polynomial
exponent sequences.  The Satake half groups indices whose exponent
differences stay constant (those blocks keep an exact limit relation);
the velocity half takes exact ratio limits.  Folding the per-index
ratio limits through the block sizes gives the Dynkin-Olshanetsky data;
pairing the hinge with the full recursive velocity limit gives the
Karpelevich compactification point.

The per-index ratio limits are always constant on the hinge blocks.
They need not drop strictly across consecutive blocks: exponents
(j^2 + j, j^2, 0) produce a three-component hinge whose top two blocks
share the ratio limit 1, so only the weak pattern is asserted here and
tied values are exactly what the geodesic-limit criterion rules out.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import core, satake, sky, velocity
from .core import DEFAULT_TOL, EXACT, Matrix, Subspace
from .errors import DimensionError, HingeLabError
from .hinges import CartanPath, Hinge, cartan_limit, validate_hinge
from .relations import relation_from_vectors
from .satake import SpdPoint, is_positive_hinge, spd_cartan_limit
from .sky import Flag, GeodesicFromBase, SkyPoint
from .velocity import (
    KarpelevichPoint,
    PolySequence,
    RationalPoly,
    VelocityPoint,
    karpelevich_limit,
    ratio_limit,
)


@dataclass(frozen=True)
class DynkinOlshanetskyPoint:
    """A positive hinge plus a velocity-simplex point on its blocks.

    ``mu`` lists one value per hinge component, from 1 down to 0,
    nonincreasing; ``gammas`` caches dim Im(P_j), the cumulative block
    sizes that unfold mu back to a per-index pattern.
    """

    hinge: Hinge
    mu: tuple
    gammas: tuple

    def __post_init__(self):
        if len(self.mu) != self.hinge.length:
            raise DimensionError("one velocity value per hinge component")
        if len(self.gammas) != self.hinge.length:
            raise DimensionError("one cumulative dimension per component")
        if self.mu[0] != 1 or self.mu[-1] != 0:
            raise HingeLabError("block velocities run from 1 to 0")
        if any(self.mu[i] < self.mu[i + 1] for i in range(len(self.mu) - 1)):
            raise HingeLabError("block velocities must be nonincreasing")
        expected = tuple(self.hinge.parts(j).image.dim
                         for j in range(self.hinge.length))
        if self.gammas != expected:
            raise HingeLabError("cumulative dimensions disagree with the hinge")

    @property
    def n(self) -> int:
        return self.hinge.n

    def unfolded_tau(self) -> tuple:
        """Per-index pattern: mu_j repeated over its block."""
        out = []
        prev = 0
        for m, g in zip(self.mu, self.gammas):
            out.extend([m] * (g - prev))
            prev = g
        return tuple(out)

    def is_strict(self) -> bool:
        return all(self.mu[i] > self.mu[i + 1]
                   for i in range(len(self.mu) - 1))


@dataclass(frozen=True)
class KarpelevichCompactificationPoint:
    """A positive hinge paired with a Karpelevich point on its blocks."""

    hinge: Hinge
    kpoint: KarpelevichPoint

    def __post_init__(self):
        k, l = self.kpoint.tree.interval
        if l - k + 1 != self.hinge.length:
            raise HingeLabError(
                "velocity polyhedron interval must index the hinge blocks"
            )

    def do_point(self) -> DynkinOlshanetskyPoint:
        """Forget the tree refinement: project to the DO boundary."""
        root = self.kpoint.tree.interval
        if self.kpoint.tree.is_irreducible(root):
            raise HingeLabError("interior velocity data has no DO projection")
        values = self.kpoint.root_velocity()
        gammas = tuple(self.hinge.parts(j).image.dim
                       for j in range(self.hinge.length))
        return DynkinOlshanetskyPoint(self.hinge, tuple(values), gammas)


@dataclass(frozen=True)
class SkyProjectionData:
    """Decreasing kernel flag plus the unfolded velocity pattern."""

    n: int
    kernel_flag: tuple         # Ker(P_1) > Ker(P_2) > ..., trivial end dropped
    taus: tuple

    def to_sky_point(self) -> SkyPoint:
        """The (velocity, flag) point: images (= kernel complements for
        symmetric relations) at the strict velocity breaks."""
        taus = self.taus
        n = self.n
        velocity = VelocityPoint(tuple(taus[1:-1]), n)
        ends = velocity.block_ends()
        subs = []
        for e in ends[:-1]:
            match = [k for k in self.kernel_flag if k.dim == n - e]
            if not match:
                raise HingeLabError("kernel flag misses a velocity break")
            subs.append(core.orthocomplement(match[0]))
        return SkyPoint(velocity, Flag(n, subs))


class HybridPath:
    """An orthogonal frame with polynomial exponents, the hybrid input."""

    __slots__ = ("frame", "exponents")

    def __init__(self, frame: Matrix, exponents: PolySequence,
                 tol: float = DEFAULT_TOL):
        if not frame.is_orthogonal(tol):
            raise HingeLabError("hybrid paths need an orthogonal frame")
        if exponents.size != frame.rows:
            raise DimensionError("one exponent polynomial per dimension")
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "exponents", exponents)

    def __setattr__(self, *_):
        raise AttributeError("HybridPath is immutable")

    @property
    def n(self) -> int:
        return self.frame.rows

    def value_at(self, j) -> SpdPoint:
        import math

        import numpy as np

        vals = [math.exp(float(v)) for v in self.exponents.values_at(j)]
        u = self.frame.to_numpy()
        return SpdPoint(Matrix.from_numpy(u @ np.diag(vals) @ u.T),
                        check=False)

    def satake_blocks(self) -> list[tuple]:
        """Maximal index blocks with constant exponent differences."""
        polys = self.exponents.polys
        blocks: list[list[int]] = [[0]]
        for i in range(1, len(polys)):
            if (polys[blocks[-1][0]] - polys[i]).is_constant:
                blocks[-1].append(i)
            else:
                blocks.append([i])
        return [tuple(b) for b in blocks]

    def satake_hinge(self, tol: float = DEFAULT_TOL) -> Hinge:
        """Hinge limit; within-block constant offsets survive in the
        component relations as exponential weights.

        Nonzero offsets have irrational weights e^c, so those inputs
        drop to the float backend even for an exact frame.
        """
        blocks = self.satake_blocks()
        offsets = [
            [(self.exponents.polys[j] - self.exponents.polys[block[0]])
             .constant_value() for j in block]
            for block in blocks
        ]
        weighted = any(any(c != 0 for c in block) for block in offsets)
        u = self.frame
        backend = u.backend
        if weighted and backend == EXACT:
            u = u.to_float()
            backend = u.backend
        n = self.n
        comps = []
        for block, offs in zip(blocks, offsets):
            rows = []
            for jdx in range(n):
                src = tuple(u.column(jdx))     # (U^T)^{-1} = U
                tgt = tuple(u.column(jdx))
                if jdx in block:
                    weight = _exp_weight(offs[block.index(jdx)], backend)
                    rows.append(src + tuple(weight * x for x in tgt))
                elif jdx < block[0]:
                    rows.append((_zero(n, backend)) + tgt)
                else:
                    rows.append(src + _zero(n, backend))
            comps.append(relation_from_vectors(n, rows, backend, tol=tol))
        h = validate_hinge(comps, tol)
        if not is_positive_hinge(h, tol):
            raise HingeLabError("hybrid limit produced a non-positive hinge")
        return h


def _zero(n: int, backend: str) -> tuple:
    return (Fraction(0),) * n if backend == EXACT else (0.0,) * n


def _exp_weight(c: Fraction, backend: str):
    """e^c as a scalar of the right backend.

    Nonzero rational c has an irrational exponential, so exact frames
    with nonzero within-block offsets fall back to float relations.
    """
    import math

    if c == 0:
        return Fraction(1) if backend == EXACT else 1.0
    if backend == EXACT:
        raise HingeLabError(
            "within-block constant offsets need the float backend; "
            "their exponential weights are irrational"
        )
    return math.exp(float(c))


def do_limit(path: HybridPath,
             tol: float = DEFAULT_TOL) -> DynkinOlshanetskyPoint | SpdPoint:
    """Hybrid limit: Satake hinge plus folded velocity values.

    Bounded exponent sequences stay interior and return the SPD limit
    point.  Otherwise the per-index ratio limits are constant on each
    hinge block (asserted) and fold into one value per block.
    """
    seq = path.exponents
    if seq.is_bounded():
        j0 = _eventual_index(seq)
        return path.value_at(j0)
    h = path.satake_hinge(tol)
    gap = seq.top_gap()
    base = seq.polys[-1]
    taus = [ratio_limit(p - base, gap) for p in seq.polys]
    blocks = path.satake_blocks()
    mu = []
    for block in blocks:
        vals = {taus[i] for i in block}
        if len(vals) != 1:
            raise HingeLabError(
                "ratio limits must be constant on hinge blocks"
            )
        mu.append(vals.pop())
    gammas = tuple(h.parts(j).image.dim for j in range(h.length))
    assert gammas == tuple(
        block[-1] + 1 for block in blocks
    ), "image dimensions must accumulate the block sizes"
    return DynkinOlshanetskyPoint(h, tuple(mu), gammas)


def _eventual_index(seq: PolySequence) -> int:
    """An index past which all pairwise orderings have settled."""
    return max(4 * seq.size, 16)


def do_project_to_sky(p: DynkinOlshanetskyPoint) -> SkyProjectionData:
    """Kernel flag plus unfolded velocity pattern (the sky projection)."""
    if p.hinge.length < 2:
        raise HingeLabError("interior points do not project to the sky")
    kernels = [p.hinge.parts(j).kernel for j in range(p.hinge.length)]
    flag = tuple(k for k in kernels if k.dim > 0)
    return SkyProjectionData(p.n, flag, p.unfolded_tau())


def geodesic_do_limit(g: GeodesicFromBase,
                      tol: float = DEFAULT_TOL) -> DynkinOlshanetskyPoint:
    """The DO limit of a geodesic from the base point.

    The hinge blocks are the equal-exponent groups and the velocity
    values their ratios to the top exponent, which are strictly
    decreasing by construction.
    """
    h = spd_cartan_limit(g.frame, list(g.exponents), tol)
    top = g.exponents[0]
    mu = []
    seen = []
    for x in g.exponents:
        if not seen or seen[-1] != x:
            seen.append(x)
            mu.append(x / top if isinstance(x, Fraction) else float(x) / top)
    gammas = tuple(h.parts(j).image.dim for j in range(h.length))
    return DynkinOlshanetskyPoint(h, tuple(mu), gammas)


def is_geodesic_limit(p: DynkinOlshanetskyPoint) -> bool:
    """Strictly decreasing block velocities characterize geodesic limits."""
    return p.is_strict()


def karpelevich_limit_point(frame: Matrix, seq: PolySequence,
                            tol: float = DEFAULT_TOL
                            ) -> KarpelevichCompactificationPoint | SpdPoint:
    """Pair the Satake hinge with the block-level Karpelevich limit.

    The velocity recursion runs on one representative polynomial per
    hinge block; within-block differences are constant, so the choice
    of representative shifts cone values by constants that the additive
    normalization removes.
    """
    path = HybridPath(frame, seq, tol)
    if seq.is_bounded():
        return path.value_at(_eventual_index(seq))
    h = path.satake_hinge(tol)
    blocks = path.satake_blocks()
    reps = [seq.polys[block[0]] for block in blocks]
    block_seq = PolySequence(1, len(blocks), reps)
    kp = karpelevich_limit(block_seq)
    return KarpelevichCompactificationPoint(h, kp)
