"""Velocity compactifications: the simplex, tree-partitions, Karpelevich limits.

Sequences of log-eigenvalue collections are modeled as tuples of
polynomials in the sequence index with rational coefficients.  For that
class every ratio limit exists and is rational, so the velocity simplex
limit, the recursive Karpelevich limit and the face combinatorics are
all exact.

A tree-partition of the integer interval {k..l} is a laminar family of
subintervals containing the root in which every member is either
irreducible (no member strictly inside) or exactly tiled by its maximal
proper members.  Faces of the Karpelevich velocity polyhedron are
indexed by tree-partitions: irreducible members contribute a cone
factor, reducible members an open-simplex factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .core import as_exact
from .errors import DimensionError, HingeLabError

# ---------------------------------------------------------------------------
# rational polynomials in the sequence index

class RationalPoly:
    """Polynomial in j with Fraction coefficients, ascending order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        cs = [as_exact(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, *_):
        raise AttributeError("RationalPoly is immutable")

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def constant_value(self) -> Fraction:
        if not self.is_constant:
            raise HingeLabError("polynomial is not constant")
        return self.coeffs[0] if self.coeffs else Fraction(0)

    def __call__(self, j) -> Fraction:
        j = Fraction(j) if isinstance(j, float) else as_exact(j)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * j + c
        return acc

    def __add__(self, other: "RationalPoly") -> "RationalPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return RationalPoly(
            [x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)]
        )

    def __sub__(self, other: "RationalPoly") -> "RationalPoly":
        return self + RationalPoly([-c for c in other.coeffs])

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"RationalPoly({list(self.coeffs)})"

    def eventually_positive(self) -> bool:
        return (not self.is_zero) and self.leading > 0

    def eventually_nonnegative(self) -> bool:
        return self.is_zero or self.leading > 0


def ratio_limit(num: RationalPoly, den: RationalPoly) -> Fraction:
    """lim num(j)/den(j) for den -> +oo, exact."""
    if den.degree < 1 or den.leading <= 0:
        raise HingeLabError("ratio limit needs an unbounded positive denominator")
    if num.degree < den.degree:
        return Fraction(0)
    if num.degree > den.degree:
        raise HingeLabError("ratio limit diverges")
    return num.leading / den.leading


# ---------------------------------------------------------------------------
# log spectra and the velocity simplex

@dataclass(frozen=True)
class LogSpectrum:
    """Nonincreasing log-eigenvalues, canonicalized so the last entry is 0."""

    values: tuple

    @staticmethod
    def of(values: Sequence) -> "LogSpectrum":
        vals = list(values)
        if any(vals[i] < vals[i + 1] for i in range(len(vals) - 1)):
            raise HingeLabError("log spectrum must be nonincreasing")
        last = vals[-1]
        return LogSpectrum(tuple(v - last for v in vals))

    @property
    def n(self) -> int:
        return len(self.values)


class VelocityPoint:
    """A point 1 >= mu_2 >= ... >= mu_{n-1} >= 0 of the velocity simplex.

    The implied endpoints mu_1 = 1 and mu_n = 0 are not stored; the full
    pattern (1, mu_2, ..., mu_{n-1}, 0) drives the block structure.
    """

    __slots__ = ("mu", "n")

    def __init__(self, mu: Sequence, n: int | None = None):
        mu = tuple(mu)
        if n is None:
            n = len(mu) + 2
        if len(mu) != n - 2:
            raise DimensionError("velocity point needs n-2 interior values")
        one, zero = _like_one_zero(mu)
        chain = (one,) + mu + (zero,)
        if any(chain[i] < chain[i + 1] for i in range(len(chain) - 1)):
            raise HingeLabError("velocity coordinates must be a chain in [0,1]")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "n", n)

    def __setattr__(self, *_):
        raise AttributeError("VelocityPoint is immutable")

    def full_pattern(self) -> tuple:
        one, zero = _like_one_zero(self.mu)
        return (one,) + self.mu + (zero,)

    def blocks(self) -> list[tuple]:
        """Maximal equal-value runs of the full pattern: (value, size)."""
        out: list[list] = []
        for v in self.full_pattern():
            if out and out[-1][0] == v:
                out[-1][1] += 1
            else:
                out.append([v, 1])
        return [(v, s) for v, s in out]

    def block_ends(self) -> tuple:
        """Cumulative block sizes; the last entry equals n."""
        ends = []
        acc = 0
        for _, size in self.blocks():
            acc += size
            ends.append(acc)
        return tuple(ends)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, VelocityPoint)
            and self.n == other.n
            and self.mu == other.mu
        )

    def __hash__(self):
        return hash((self.n, self.mu))

    def __repr__(self):
        return f"VelocityPoint(n={self.n}, mu={list(self.mu)})"


def _like_one_zero(values: Sequence):
    if any(isinstance(v, float) for v in values):
        return 1.0, 0.0
    return Fraction(1), Fraction(0)


def lambda_map(spd, tol: float = 1e-9) -> LogSpectrum:
    """Descending logs of the eigenvalues of an SPD point, last entry 0."""
    import math

    from . import core as _core

    values, _ = _core.eigensym(spd.matrix.to_float(), tol)
    if values[-1] <= 0:
        raise HingeLabError("input is not positive definite")
    logs = [math.log(v) for v in values]
    return LogSpectrum.of(logs)


def simplex_project(spectrum: LogSpectrum) -> VelocityPoint:
    """mu_i = lambda_i / lambda_1 on the normalized spectrum."""
    vals = spectrum.values
    n = len(vals)
    if n < 2 or vals[0] == vals[-1]:
        raise HingeLabError("projection undefined at the cone origin")
    top = vals[0]
    return VelocityPoint(tuple(v / top for v in vals[1:-1]), n)


# ---------------------------------------------------------------------------
# polynomial sequences

class PolySequence:
    """Eventually nonincreasing polynomials indexed by an integer interval."""

    __slots__ = ("k", "l", "polys")

    def __init__(self, k: int, l: int, polys: Sequence[RationalPoly]):
        if k > l:
            raise DimensionError("empty index interval")
        if len(polys) != l - k + 1:
            raise DimensionError("one polynomial per index required")
        polys = tuple(
            p if isinstance(p, RationalPoly) else RationalPoly(p) for p in polys
        )
        for i in range(len(polys) - 1):
            diff = polys[i] - polys[i + 1]
            if not diff.eventually_nonnegative():
                raise HingeLabError(
                    f"sequence is not eventually nonincreasing at index {k + i}"
                )
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "polys", polys)

    def __setattr__(self, *_):
        raise AttributeError("PolySequence is immutable")

    @property
    def size(self) -> int:
        return self.l - self.k + 1

    def poly(self, index: int) -> RationalPoly:
        return self.polys[index - self.k]

    def restrict(self, a: int, b: int) -> "PolySequence":
        if not (self.k <= a <= b <= self.l):
            raise DimensionError("restriction outside the interval")
        return PolySequence(a, b, self.polys[a - self.k: b - self.k + 1])

    def values_at(self, j) -> tuple:
        return tuple(p(j) for p in self.polys)

    def shifted_by(self, q: RationalPoly) -> "PolySequence":
        return PolySequence(self.k, self.l, [p + q for p in self.polys])

    def top_gap(self) -> RationalPoly:
        """p_k - p_l, the width polynomial of the interval."""
        return self.polys[0] - self.polys[-1]

    def is_bounded(self) -> bool:
        """True when all differences are constant (interior limit)."""
        return self.top_gap().is_constant

    def __repr__(self):
        return f"PolySequence({self.k}..{self.l})"


def simple_velocity_limit(seq: PolySequence) -> VelocityPoint | None:
    """Limit in the velocity simplex, or None for bounded sequences."""
    gap = seq.top_gap()
    if gap.is_constant:
        return None
    base = seq.polys[-1]
    mus = [ratio_limit(p - base, gap) for p in seq.polys[1:-1]]
    return VelocityPoint(tuple(mus), seq.size)


# ---------------------------------------------------------------------------
# tree-partitions

class TreePartition:
    """A laminar family of subintervals of {k..l} satisfying a)-d)."""

    __slots__ = ("k", "l", "members")

    def __init__(self, k: int, l: int, members: Sequence[tuple]):
        members = frozenset((int(a), int(b)) for a, b in members)
        _validate_tree(k, l, members)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "members", members)

    def __setattr__(self, *_):
        raise AttributeError("TreePartition is immutable")

    @property
    def interval(self) -> tuple:
        return (self.k, self.l)

    def children(self, member: tuple) -> list[tuple]:
        """Maximal members strictly inside; the canonical decomposition."""
        a, b = member
        inside = [m for m in self.members
                  if m != member and a <= m[0] and m[1] <= b]
        maximal = [m for m in inside
                   if not any(o != m and o[0] <= m[0] and m[1] <= o[1]
                              for o in inside)]
        return sorted(maximal)

    def is_irreducible(self, member: tuple) -> bool:
        return not self.children(member)

    def reducible_members(self) -> list[tuple]:
        return sorted(m for m in self.members if not self.is_irreducible(m))

    def irreducible_members(self) -> list[tuple]:
        return sorted(m for m in self.members if self.is_irreducible(m))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TreePartition)
            and self.interval == other.interval
            and self.members == other.members
        )

    def __hash__(self):
        return hash((self.interval, self.members))

    def __repr__(self):
        return f"TreePartition({self.k}..{self.l}, {sorted(self.members)})"


def _validate_tree(k: int, l: int, members: frozenset):
    if (k, l) not in members:
        raise HingeLabError("tree-partition must contain the root interval")
    for a, b in members:
        if not (k <= a <= b <= l):
            raise HingeLabError("member outside the root interval")
    mlist = sorted(members)
    for m1, m2 in itertools.combinations(mlist, 2):
        a1, b1 = m1
        a2, b2 = m2
        disjoint = b1 < a2 or b2 < a1
        nested = (a1 <= a2 and b2 <= b1) or (a2 <= a1 and b1 <= b2)
        if not (disjoint or nested):
            raise HingeLabError("members must be laminar")
    for member in mlist:
        a, b = member
        inside = [m for m in mlist
                  if m != member and a <= m[0] and m[1] <= b]
        if not inside:
            continue
        maximal = [m for m in inside
                   if not any(o != m and o[0] <= m[0] and m[1] <= o[1]
                              for o in inside)]
        maximal.sort()
        if len(maximal) < 2:
            raise HingeLabError(
                "reducible member needs at least two decomposition parts"
            )
        cursor = a
        for ca, cb in maximal:
            if ca != cursor:
                raise HingeLabError(
                    "children fail to tile their reducible member"
                )
            cursor = cb + 1
        if cursor != b + 1:
            raise HingeLabError("children fail to tile their reducible member")


def trivial_tree(k: int, l: int) -> TreePartition:
    return TreePartition(k, l, [(k, l)])


def _compositions(length: int):
    """Compositions of a length into at least two positive parts."""
    for cuts in range(1, length):
        for positions in itertools.combinations(range(1, length), cuts):
            parts = []
            prev = 0
            for p in positions:
                parts.append(p - prev)
                prev = p
            parts.append(length - prev)
            yield parts


@lru_cache(maxsize=None)
def _enumerate_shapes(length: int) -> tuple:
    """All tree-partition shapes on a length-m interval, as offset tuples."""
    shapes = [frozenset({(0, length - 1)})]
    for parts in _compositions(length):
        starts = []
        acc = 0
        for p in parts:
            starts.append(acc)
            acc += p
        child_choices = [_enumerate_shapes(p) for p in parts]
        for combo in itertools.product(*child_choices):
            members = {(0, length - 1)}
            for start, sub in zip(starts, combo):
                members |= {(start + a, start + b) for a, b in sub}
            shapes.append(frozenset(members))
    return tuple(shapes)


def enumerate_tree_partitions(k: int, l: int) -> list[TreePartition]:
    """Exhaustive, duplicate-free enumeration of TP(k, l)."""
    if k > l:
        raise DimensionError("empty interval")
    out = []
    seen = set()
    for shape in _enumerate_shapes(l - k + 1):
        members = frozenset((k + a, k + b) for a, b in shape)
        if members not in seen:
            seen.add(members)
            out.append(TreePartition(k, l, members))
    return sorted(out, key=lambda t: (len(t.members), sorted(t.members)))


def tree_leq(a: TreePartition, b: TreePartition) -> bool:
    """The canonical order: a > b iff every member of a is a member of b.

    tree_leq(a, b) is a <= b in that order, i.e. b's members form a
    subset of a's.
    """
    if a.interval != b.interval:
        raise DimensionError("tree-partitions over different intervals")
    return b.members <= a.members


def maximal_tree(k: int, l: int) -> TreePartition:
    """The unique maximal element {I_{k,l}} of the canonical order."""
    return trivial_tree(k, l)


# ---------------------------------------------------------------------------
# Karpelevich points and limits

@dataclass(frozen=True)
class KarpelevichPoint:
    """A point of the Karpelevich velocity polyhedron K(k, l).

    ``cone_values[J]`` is the exact nonincreasing tuple (normalized to
    end at 0) attached to an irreducible member J of the tree (empty
    for singletons); ``simplex_values[J]`` is the strictly decreasing
    tuple of per-child values, from 1 down to 0, attached to a reducible
    member J.
    """

    tree: TreePartition
    cone_values: Mapping
    simplex_values: Mapping

    def __post_init__(self):
        cone = dict(self.cone_values)
        simp = dict(self.simplex_values)
        for member in self.tree.members:
            if self.tree.is_irreducible(member):
                size = member[1] - member[0] + 1
                vals = tuple(cone.get(member, ()))
                if size == 1:
                    if vals:
                        raise HingeLabError("singleton members carry no data")
                    continue
                if len(vals) != size:
                    raise HingeLabError("cone value count mismatch")
                if any(vals[i] < vals[i + 1] for i in range(size - 1)):
                    raise HingeLabError("cone values must be nonincreasing")
                if vals[-1] != 0:
                    raise HingeLabError("cone values are normalized to end at 0")
            else:
                children = self.tree.children(member)
                vals = tuple(simp.get(member, ()))
                if len(vals) != len(children):
                    raise HingeLabError("simplex value count mismatch")
                if vals[0] != 1 or vals[-1] != 0:
                    raise HingeLabError("simplex values run from 1 to 0")
                if any(vals[i] <= vals[i + 1] for i in range(len(vals) - 1)):
                    raise HingeLabError(
                        "simplex values must decrease strictly"
                    )
        object.__setattr__(self, "cone_values",
                           {m: tuple(v) for m, v in cone.items()})
        object.__setattr__(self, "simplex_values",
                           {m: tuple(v) for m, v in simp.items()})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, KarpelevichPoint)
            and self.tree == other.tree
            and self.cone_values == other.cone_values
            and self.simplex_values == other.simplex_values
        )

    def __hash__(self):
        return hash(self.tree)

    def root_velocity(self) -> tuple:
        """The unfolded per-index velocity limit at the root level."""
        root = self.tree.interval
        if self.tree.is_irreducible(root):
            raise HingeLabError("interior point has no root velocity")
        out = []
        for value, (a, b) in zip(self.simplex_values[root],
                                 self.tree.children(root)):
            out.extend([value] * (b - a + 1))
        return tuple(out)

    def is_interior(self) -> bool:
        return self.tree.is_irreducible(self.tree.interval)


def karpelevich_limit(seq: PolySequence) -> KarpelevichPoint:
    """The exact limit of a polynomial sequence in K(k, l).

    Two-step recursion: the simplex limit of the whole interval splits
    it into maximal equal-velocity blocks, and each block recurses on
    its own subsequence.  Bounded (constant-difference) intervals stay
    irreducible and keep their cone value.
    """
    members: set[tuple] = set()
    cone: dict = {}
    simp: dict = {}
    _karpelevich_recurse(seq, members, cone, simp)
    tree = TreePartition(seq.k, seq.l, members)
    return KarpelevichPoint(tree, cone, simp)


def _karpelevich_recurse(seq: PolySequence, members: set, cone: dict,
                         simp: dict):
    me = (seq.k, seq.l)
    members.add(me)
    if seq.size == 1:
        return
    if seq.is_bounded():
        base = seq.polys[-1]
        diffs = tuple((p - base).constant_value() for p in seq.polys)
        cone[me] = diffs
        return
    gap = seq.top_gap()
    base = seq.polys[-1]
    mus = [ratio_limit(p - base, gap) for p in seq.polys]
    blocks: list[list] = []
    for i, mu in enumerate(mus):
        if blocks and blocks[-1][0] == mu:
            blocks[-1][1].append(i)
        else:
            blocks.append([mu, [i]])
    simp[me] = tuple(mu for mu, _ in blocks)
    for _, idxs in blocks:
        a, b = seq.k + idxs[0], seq.k + idxs[-1]
        _karpelevich_recurse(seq.restrict(a, b), members, cone, simp)


# ---------------------------------------------------------------------------
# faces of the polyhedron

@dataclass(frozen=True)
class FaceFactor:
    interval: tuple
    kind: str           # "cone" | "simplex"
    dimension: int


@dataclass(frozen=True)
class FaceDescriptor:
    tree: TreePartition
    factors: tuple

    @property
    def dimension(self) -> int:
        return sum(f.dimension for f in self.factors)


def face_of(tree: TreePartition) -> FaceDescriptor:
    """The face F(a): cone factors for irreducible members, open-simplex
    factors for reducible ones."""
    factors = []
    for member in sorted(tree.members):
        a, b = member
        if tree.is_irreducible(member):
            factors.append(FaceFactor(member, "cone", b - a))
        else:
            s = len(tree.children(member))
            factors.append(FaceFactor(member, "simplex", s - 2))
    return FaceDescriptor(tree, tuple(factors))


def face_closure_leq(a: TreePartition, b: TreePartition) -> bool:
    """True when F(a) lies in the closure of F(b)."""
    return tree_leq(a, b)


# ---------------------------------------------------------------------------
# sequences inside a boundary face

class FaceSequence:
    """A sequence of points of one face F(a), with polynomial components.

    Components are PolySequences: an irreducible member carries its
    cone-valued sequence directly; a reducible member with children
    C_1, ..., C_s carries a PolySequence on s slots whose simplex
    projection gives the member's open-simplex values at each index.
    Polynomial simplex-valued sequences would otherwise be eventually
    constant, so the projection encoding is what keeps limits exact.
    """

    def __init__(self, tree: TreePartition, components: Mapping):
        comps = {}
        for member in tree.members:
            size = member[1] - member[0] + 1
            if tree.is_irreducible(member):
                if size == 1:
                    if member in components:
                        raise HingeLabError("singleton members carry no data")
                    continue
                seq = components[member]
                if (seq.k, seq.l) != member:
                    raise DimensionError("component interval mismatch")
                comps[member] = seq
            else:
                children = tree.children(member)
                seq = components[member]
                if seq.size != len(children):
                    raise DimensionError(
                        "reducible component needs one slot per child"
                    )
                if seq.top_gap().is_constant:
                    raise HingeLabError(
                        "reducible component must separate strictly; "
                        "its projection must stay in the open simplex"
                    )
                comps[member] = seq
        self.tree = tree
        self.components = comps

    def point_at(self, j) -> KarpelevichPoint:
        """The concrete Karpelevich point at index j."""
        cone = {}
        simp = {}
        for member, seq in self.components.items():
            vals = seq.values_at(j)
            if self.tree.is_irreducible(member):
                cone[member] = tuple(v - vals[-1] for v in vals)
            else:
                width = vals[0] - vals[-1]
                if width <= 0:
                    raise HingeLabError(
                        f"component at {member} left the open simplex at j={j}"
                    )
                simp[member] = tuple((v - vals[-1]) / width for v in vals)
        return KarpelevichPoint(self.tree, cone, simp)


def boundary_face_sequence_limit(points: FaceSequence,
                                 target: KarpelevichPoint | None = None
                                 ) -> KarpelevichPoint:
    """Limit of a face sequence in the closure of its face.

    First the root component converges in the closed simplex; its limit
    groups the root's children into coarser segments, each carrying the
    induced tree and induced component sequences, which recurse.  When
    ``target`` is given the computed limit is checked against it.
    """
    limit = _face_limit(points.tree, points.components)
    if not face_closure_leq(limit.tree, points.tree):
        raise HingeLabError("limit left the closure of the face")
    if target is not None and limit != target:
        raise HingeLabError("face sequence limit differs from the target")
    return limit


def _face_limit(tree: TreePartition, components: Mapping) -> KarpelevichPoint:
    root = tree.interval
    k, l = root
    if tree.is_irreducible(root):
        if root[1] == root[0]:
            return KarpelevichPoint(trivial_tree(k, l), {}, {})
        return karpelevich_limit(components[root])
    children = tree.children(root)
    seq = components[root]                      # block-level PolySequence
    base = seq.polys[-1]
    gap = seq.top_gap()
    if gap.is_constant:
        raise HingeLabError("face sequence left the open simplex")
    u = [ratio_limit(p - base, gap) for p in seq.polys]
    # group consecutive children with equal limit values
    segments: list[list] = []
    for child, val in zip(children, u):
        if segments and segments[-1][0] == val:
            segments[-1][1].append(child)
        else:
            segments.append([val, [child]])
    members: set[tuple] = {root}
    cone: dict = {}
    simp: dict = {(k, l): tuple(val for val, _ in segments)}
    for pos, (val, seg_children) in enumerate(segments):
        seg = (seg_children[0][0], seg_children[-1][1])
        if len(seg_children) == 1:
            child = seg_children[0]
            sub = _subtree_limit(tree, components, child)
        else:
            # a new reducible member whose children are the tied blocks
            idxs = [children.index(c) for c in seg_children]
            sub_seq = PolySequence(
                seg[0], seg[0] + len(seg_children) - 1,
                [seq.polys[i] for i in idxs],
            )
            sub_members = {seg} | {
                m for m in tree.members
                if seg[0] <= m[0] and m[1] <= seg[1] and m != seg
            }
            sub_comps = {
                m: components[m] for m in sub_members
                if m in components and m != seg
            }
            sub_comps[seg] = sub_seq
            sub_tree = TreePartition(seg[0], seg[1], sub_members)
            sub = _face_limit(sub_tree, sub_comps)
        members |= sub.tree.members
        cone.update(sub.cone_values)
        simp.update(sub.simplex_values)
    return KarpelevichPoint(TreePartition(k, l, members), cone, simp)


def _subtree_limit(tree: TreePartition, components: Mapping,
                   member: tuple) -> KarpelevichPoint:
    sub_members = {m for m in tree.members
                   if member[0] <= m[0] and m[1] <= member[1]}
    sub_tree = TreePartition(member[0], member[1], sub_members)
    sub_comps = {m: components[m] for m in sub_members if m in components}
    return _face_limit(sub_tree, sub_comps)
