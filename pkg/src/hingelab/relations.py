"""Linear relations R^n => R^n as n-dimensional subspaces of R^2n.

A relation is stored as a subspace of R^(2n) whose first n coordinates
are the source and last n the target.  The four derived subspaces
(kernel, image, domain, indefiniteness) come from coordinate-ordered row
reduction; rank satisfies

    rk = dim Dom - dim Ker = dim Im - dim Indef
       = dim P - dim Ker - dim Indef

and all three expressions are asserted on every computation.

Symmetry means the relation is Lagrangian for {(v,v');(w,w')} =
<v,w'> - <w,v'>; nonnegativity means [(v,w);(v,w)] = 2<v,w> >= 0 on the
relation, tested by exact signature on the exact backend and by
eigenvalues of the restricted Gram matrix on the float backend.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import core
from .core import (
    DEFAULT_TOL,
    EXACT,
    FLOAT,
    Matrix,
    Subspace,
    rref,
    subspace_span,
    symmetric_signature,
)
from .errors import (
    DimensionError,
    HingeLabError,
    NotSymmetricError,
)


class LinearRelation:
    """An n-dimensional (or intermediate) subspace of R^n + R^n."""

    __slots__ = ("n", "space")

    def __init__(self, n: int, space: Subspace):
        if space.ambient != 2 * n:
            raise DimensionError("relation space must live in R^(2n)")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "space", space)

    def __setattr__(self, *_):
        raise AttributeError("LinearRelation is immutable")

    @property
    def backend(self) -> str:
        return self.space.backend

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def is_grassmannian(self) -> bool:
        """True when dim equals n, i.e. the relation is a Gr_n point."""
        return self.space.dim == self.n

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LinearRelation)
            and self.n == other.n
            and self.space == other.space
        )

    def __hash__(self):
        return hash((self.n, self.space))

    def __repr__(self):
        return f"LinearRelation(n={self.n}, dim={self.dim}, {self.backend})"


@dataclass(frozen=True)
class RelationParts:
    kernel: Subspace
    image: Subspace
    domain: Subspace
    indef: Subspace
    rank: int


@dataclass(frozen=True)
class QuadraticFormOnQuotient:
    """The induced form on Dom/Ker in a chosen complement basis.

    ``basis`` spans a complement of ``modulo`` (Ker) inside ``base``
    (Dom); ``gram`` is the matrix of the form in that basis.  The
    normalization makes graph(A) yield A itself on the full quotient,
    i.e. there is no factor 2 relative to [(v,w);(v,w)] = 2<v,w>.
    """

    base: Subspace
    modulo: Subspace
    basis: tuple
    gram: Matrix | None

    @property
    def dim(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class InducedOperator:
    """The invertible operator Dom/Ker -> Im/Indef in explicit bases."""

    domain_basis: tuple
    image_basis: tuple
    matrix: Matrix | None


def graph(a: Matrix) -> LinearRelation:
    """The graph {(v, A v)} of a square matrix as a relation."""
    if not a.is_square:
        raise DimensionError("graph needs a square matrix")
    n = a.rows
    ident = Matrix.identity(n, a.backend)
    rows = [tuple(ident.row(j)) + tuple(a.column(j)) for j in range(n)]
    return LinearRelation(n, subspace_span(rows, a.backend, ambient=2 * n))


def relation_from_vectors(n: int, vectors: Sequence[Sequence],
                          backend: str | None = None,
                          tol: float = DEFAULT_TOL) -> LinearRelation:
    return LinearRelation(
        n, subspace_span(vectors, backend, tol=tol, ambient=2 * n)
    )


def _halves(row, n):
    return tuple(row[:n]), tuple(row[n:])


def relation_parts(p: LinearRelation, tol: float = DEFAULT_TOL) -> RelationParts:
    """Kernel, image, domain, indefiniteness and rank of a relation."""
    n = p.n
    basis = p.space.basis
    v_parts = [row[:n] for row in basis]
    w_parts = [row[n:] for row in basis]
    domain = subspace_span(v_parts, p.backend, tol=tol, ambient=n)
    image = subspace_span(w_parts, p.backend, tol=tol, ambient=n)
    if p.backend == EXACT:
        # pivots scanned over the W half first: rows whose pivot falls in
        # the V half have zero W part, so their V parts span the kernel
        reordered = [row[n:] + row[:n] for row in basis]
        red, pivots = rref(reordered, 2 * n)
        kernel = subspace_span(
            [red[i][n:] for i, c in enumerate(pivots) if c >= n],
            EXACT, ambient=n,
        )
        red2, pivots2 = rref(basis, 2 * n)
        indef = subspace_span(
            [red2[i][n:] for i, c in enumerate(pivots2) if c >= n],
            EXACT, ambient=n,
        )
    else:
        coord_v = _coordinate_half(n, first=True)
        coord_w = _coordinate_half(n, first=False)
        kernel = _project_half(core.intersect(p.space, coord_v, tol=tol), n,
                               first=True, tol=tol)
        indef = _project_half(core.intersect(p.space, coord_w, tol=tol), n,
                              first=False, tol=tol)
    rank = domain.dim - kernel.dim
    if rank != image.dim - indef.dim or (
        rank != p.dim - kernel.dim - indef.dim
    ):
        raise HingeLabError("rank expressions disagree: malformed relation")
    return RelationParts(kernel, image, domain, indef, rank)


def _coordinate_half(n: int, first: bool) -> Subspace:
    ident = Matrix.identity(n, FLOAT)
    zero = (0.0,) * n
    rows = [
        (tuple(ident.row(j)) + zero) if first else (zero + tuple(ident.row(j)))
        for j in range(n)
    ]
    return subspace_span(rows, FLOAT, ambient=2 * n)


def _project_half(s: Subspace, n: int, first: bool,
                  tol: float = DEFAULT_TOL) -> Subspace:
    rows = [row[:n] if first else row[n:] for row in s.basis]
    return subspace_span(rows, s.backend, tol=tol, ambient=n)


def scale(lam, p: LinearRelation) -> LinearRelation:
    """The R*-action: (v,w) in P iff (v, lam w) in lam.P."""
    if p.backend == EXACT:
        lam = core.as_exact(lam)
    else:
        lam = float(lam)
    if lam == 0:
        raise HingeLabError("scale requires a nonzero scalar")
    n = p.n
    rows = [row[:n] + tuple(lam * x for x in row[n:]) for row in p.space.basis]
    return relation_from_vectors(n, rows, p.backend)


def skew_pairing(x: Sequence, y: Sequence, n: int):
    """{(v,v');(w,w')} = <v,w'> - <w,v'>."""
    v, vp = x[:n], x[n:]
    w, wp = y[:n], y[n:]
    return sum(a * b for a, b in zip(v, wp)) - sum(a * b for a, b in zip(w, vp))


def sym_pairing(x: Sequence, y: Sequence, n: int):
    """[(v,w);(v',w')] = <v,w'> + <v',w>."""
    v, w = x[:n], x[n:]
    vp, wp = y[:n], y[n:]
    return sum(a * b for a, b in zip(v, wp)) + sum(a * b for a, b in zip(vp, w))


def is_symmetric_relation(p: LinearRelation, tol: float = DEFAULT_TOL) -> bool:
    """Maximal isotropy for the skew form; dim n plus isotropic suffices."""
    if p.dim != p.n:
        return False
    basis = p.space.basis
    if p.backend == EXACT:
        return all(
            skew_pairing(basis[i], basis[j], p.n) == 0
            for i in range(len(basis))
            for j in range(i + 1)
        )
    scale_ = max(1.0, max((abs(x) for row in basis for x in row), default=1.0))
    return all(
        abs(skew_pairing(basis[i], basis[j], p.n)) <= tol * scale_
        for i in range(len(basis))
        for j in range(i + 1)
    )


def is_nonnegative_relation(p: LinearRelation, tol: float = DEFAULT_TOL) -> bool:
    """Nonnegativity of [x;x] = 2<v,w> on the relation."""
    basis = p.space.basis
    if not basis:
        return True
    gram = [
        [sym_pairing(basis[i], basis[j], p.n) for j in range(len(basis))]
        for i in range(len(basis))
    ]
    if p.backend == EXACT:
        _, minus, _ = symmetric_signature(gram)
        return minus == 0
    values, _ = core.eigensym(Matrix(gram, FLOAT))
    bound = tol * max(1.0, max(abs(v) for v in values))
    return all(v >= -bound for v in values)


def classify(p: LinearRelation, tol: float = DEFAULT_TOL) -> dict:
    return {
        "is_symmetric": is_symmetric_relation(p, tol),
        "is_nonnegative": is_nonnegative_relation(p, tol),
    }


def _complement_in(base: Subspace, sub: Subspace) -> list[tuple]:
    """Canonical complement basis of ``sub`` inside ``base``.

    Exact backend: base's canonical rows filtered so they extend sub's
    span one at a time.  Float backend: directions of base orthogonal to
    sub.
    """
    if base.backend == EXACT:
        chosen: list[tuple] = []
        current = list(sub.basis)
        dim = sub.dim
        for row in base.basis:
            red, _ = rref(current + [row], base.ambient)
            if len(red) > dim:
                chosen.append(row)
                current = list(red)
                dim += 1
        return chosen
    if sub.is_zero:
        return list(base.basis)
    comp = core.intersect(base, core.orthocomplement(sub))
    return list(comp.basis)


def orthogonal_complement_in(base: Subspace, sub: Subspace,
                             tol: float = DEFAULT_TOL) -> list[tuple]:
    """Canonical basis of base cap sub^perp (a complement of sub in base)."""
    if sub.is_zero:
        return list(base.basis)
    comp = core.intersect(base, core.orthocomplement(sub, tol), tol)
    return list(comp.basis)


def _solve_target(p: LinearRelation, u: Sequence) -> tuple:
    """Some w with (u, w) in P, for u in Dom(P)."""
    n = p.n
    basis = p.space.basis
    if p.backend == EXACT:
        # solve c . B_V = u by row reducing [B_V | B_W] as an augmented system
        cols = [[row[j] for row in basis] for j in range(n)]
        m = [list(col) + [u[j]] for j, col in enumerate(cols)]  # n x (d+1)
        red, pivots = rref(m, len(basis) + 1)
        if len(basis) in pivots:
            raise HingeLabError("vector outside the domain")
        coeff = [Fraction(0)] * len(basis)
        for i, c in enumerate(pivots):
            coeff[c] = red[i][len(basis)]
        return tuple(
            sum(coeff[k] * basis[k][n + j] for k in range(len(basis)))
            for j in range(n)
        )
    bv = np.array([[float(x) for x in row[:n]] for row in basis]).T
    uu = np.array([float(x) for x in u])
    coeff, *_ = np.linalg.lstsq(bv, uu, rcond=None)
    bw = np.array([[float(x) for x in row[n:]] for row in basis]).T
    return tuple(float(x) for x in bw @ coeff)


def quadratic_form(p: LinearRelation,
                   tol: float = DEFAULT_TOL) -> QuadraticFormOnQuotient:
    """The symmetric form q_P on Dom/Ker of a symmetric relation.

    The complement basis is the canonical one inside Dom orthogonal to
    Ker; for symmetric relations it also spans Im modulo Indef, which is
    what makes the flag-and-forms reconstruction exact.
    """
    if not is_symmetric_relation(p, tol):
        raise NotSymmetricError("quadratic_form needs a symmetric relation")
    parts = relation_parts(p, tol)
    comp = orthogonal_complement_in(parts.domain, parts.kernel, tol)
    if not comp:
        return QuadraticFormOnQuotient(parts.domain, parts.kernel, (), None)
    targets = [_solve_target(p, u) for u in comp]
    gram = Matrix(
        [
            [sum(a * b for a, b in zip(u, w)) for w in targets]
            for u in comp
        ],
        p.backend,
    )
    return QuadraticFormOnQuotient(parts.domain, parts.kernel, tuple(comp), gram)


def induced_operator(p: LinearRelation,
                     tol: float = DEFAULT_TOL) -> InducedOperator:
    """[P]: Dom/Ker -> Im/Indef in complement bases of both quotients."""
    parts = relation_parts(p, tol)
    dom_basis = _complement_in(parts.domain, parts.kernel)
    im_basis = _complement_in(parts.image, parts.indef)
    if not dom_basis:
        return InducedOperator((), tuple(im_basis), None)
    targets = [_solve_target(p, u) for u in dom_basis]
    # express each target in the image complement, modulo Indef
    n = p.n
    columns = []
    mix = list(im_basis) + list(parts.indef.basis)
    for w in targets:
        if p.backend == EXACT:
            m = [[mix[k][j] for k in range(len(mix))] + [w[j]] for j in range(n)]
            red, pivots = rref(m, len(mix) + 1)
            if len(mix) in pivots:
                raise HingeLabError("target outside Im(P)")
            coeff = [Fraction(0)] * len(mix)
            for i, c in enumerate(pivots):
                coeff[c] = red[i][len(mix)]
        else:
            a = np.array([[float(mix[k][j]) for k in range(len(mix))]
                          for j in range(n)])
            coeff, *_ = np.linalg.lstsq(a, np.array([float(x) for x in w]),
                                        rcond=None)
        columns.append([coeff[k] for k in range(len(im_basis))])
    matrix = Matrix([[columns[j][i] for j in range(len(dom_basis))]
                     for i in range(len(im_basis))], p.backend)
    return InducedOperator(tuple(dom_basis), tuple(im_basis), matrix)


# ---------------------------------------------------------------------------
# canonical representative for the R*-quotient

def canonical_rescaled(p: LinearRelation,
                       tol: float = DEFAULT_TOL) -> LinearRelation:
    """Canonical representative of the orbit R*.P.

    On the RREF basis of the relation, entries in the target half of
    source-pivot rows scale linearly with lambda; the first such nonzero
    entry is normalized to 1.  Rank-0 relations are fixed points and are
    returned unchanged.
    """
    n = p.n
    if p.backend == EXACT:
        red, pivots = rref(p.space.basis, 2 * n)
        for i, c in enumerate(pivots):
            if c >= n:
                continue
            for j in range(n, 2 * n):
                if red[i][j] != 0:
                    return scale(1 / red[i][j], p)
        return p
    red, pivots = _float_rref(p.space.basis, 2 * n, tol)
    for i, c in enumerate(pivots):
        if c >= n:
            continue
        for j in range(n, 2 * n):
            if abs(red[i][j]) > math_sqrt_tol(tol):
                return scale(1.0 / red[i][j], p)
    return p


def math_sqrt_tol(tol: float) -> float:
    return tol ** 0.5


def _float_rref(rows, ncols: int, tol: float):
    m = np.array([[float(x) for x in r] for r in rows], dtype=float)
    if m.size == 0:
        return [], []
    norms = np.linalg.norm(m, axis=1)
    m = m[norms > 0] / norms[norms > 0, None]
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= m.shape[0]:
            break
        lead = r + int(np.argmax(np.abs(m[r:, c])))
        if abs(m[lead, c]) <= tol:
            continue
        m[[r, lead]] = m[[lead, r]]
        m[r] /= m[r, c]
        for i in range(m.shape[0]):
            if i != r:
                m[i] -= m[i, c] * m[r]
        pivots.append(c)
        r += 1
    return [tuple(row) for row in m[:r]], pivots


def relations_close(p: LinearRelation, q: LinearRelation,
                    tol: float = 1e-6) -> bool:
    """Projective (R*-quotient) closeness of two relations.

    Both are canonically rescaled and compared by principal angles on
    the float backend.
    """
    if p.n != q.n:
        return False
    a = canonical_rescaled(p).space.to_float()
    b = canonical_rescaled(q).space.to_float()
    if a.dim != b.dim:
        return False
    if a.dim == 0:
        return True
    return max(core.principal_angles(a, b)) <= tol
