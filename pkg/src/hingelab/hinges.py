"""Hinges: chains of positive-rank relations and their limit calculus.

A hinge (P_1, ..., P_k) is a chain of rank-positive relations with
Ker(P_j) = Dom(P_{j+1}) and Im(P_j) = Indef(P_{j+1}), anchored by
Indef(P_1) = 0 and Ker(P_k) = 0.  Hinges are the limits, in the
R*-quotient of the Grassmannian, of one-parameter families of invertible
matrices; here those families are closed-form Cartan paths

    A(t) = g1 . diag(e^{l_1 t}, ..., e^{l_n t}) . g2,   t -> +oo,

whose limits are computed exactly.  The admissible set interleaves the
hinge components with the rank-0 fixed points Q_j = Ker(P_j) + Im(P_j).

Note on chain length: each step of the domain chain R^n = Dom(P_1)
strictly contains Ker(P_1) = Dom(P_2) and so on down to Ker(P_k) = 0,
which forces k <= n; length n occurs exactly when every rank is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import core, relations
from .core import (
    DEFAULT_TOL,
    EXACT,
    FLOAT,
    Matrix,
    Subspace,
    subspace_span,
)
from .errors import (
    ClusteringAmbiguityError,
    DimensionError,
    HingeConditionError,
    HingeLabError,
    SingularMatrixError,
)
from .relations import LinearRelation, relation_parts


class Hinge:
    """A validated hinge; construct through validate_hinge."""

    __slots__ = ("n", "components", "_parts")

    def __init__(self, n: int, components: tuple, parts: tuple):
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "_parts", parts)

    def __setattr__(self, *_):
        raise AttributeError("Hinge is immutable")

    @property
    def length(self) -> int:
        return len(self.components)

    @property
    def backend(self) -> str:
        return self.components[0].backend

    def parts(self, j: int):
        """Cached RelationParts of component j."""
        return self._parts[j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hinge):
            return NotImplemented
        if self.n != other.n or self.length != other.length:
            return False
        return all(
            relations.canonical_rescaled(p) == relations.canonical_rescaled(q)
            for p, q in zip(self.components, other.components)
        )

    def __hash__(self):
        return hash((self.n, self.length))

    def __repr__(self):
        return f"Hinge(n={self.n}, k={self.length}, {self.backend})"


@dataclass(frozen=True)
class AdmissibleSet:
    """Alternating list Q_0, P_1, Q_1, ..., P_k, Q_k of relations."""

    n: int
    elements: tuple

    @property
    def size(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class HingeViolation:
    condition: str
    detail: str


class CartanPath:
    """The family A(t) = g1 diag(e^{l_i t}) g2 with nonincreasing l."""

    __slots__ = ("g1", "exponents", "g2", "n")

    def __init__(self, g1: Matrix, exponents: Sequence, g2: Matrix):
        if not (g1.is_square and g2.is_square and g1.rows == g2.rows):
            raise DimensionError("frames must be square of equal size")
        n = g1.rows
        if len(exponents) != n:
            raise DimensionError("exponent count must match matrix size")
        if g1.backend == EXACT:
            exps = tuple(core.as_exact(x) for x in exponents)
            if g1.det() == 0 or g2.det() == 0:
                raise SingularMatrixError("path frames must be invertible")
        else:
            exps = tuple(float(x) for x in exponents)
            if abs(g1.det()) < 1e-12 or abs(g2.det()) < 1e-12:
                raise SingularMatrixError("path frames must be invertible")
        if any(exps[i] < exps[i + 1] for i in range(n - 1)):
            raise HingeLabError("exponents must be nonincreasing")
        object.__setattr__(self, "g1", g1)
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "g2", g2)
        object.__setattr__(self, "n", n)

    def __setattr__(self, *_):
        raise AttributeError("CartanPath is immutable")

    def blocks(self) -> list[tuple]:
        """Maximal constant blocks of the exponents: (value, [indices])."""
        out: list[tuple] = []
        for i, lam in enumerate(self.exponents):
            if out and out[-1][0] == lam:
                out[-1][1].append(i)
            else:
                out.append((lam, [i]))
        return [(lam, tuple(idx)) for lam, idx in out]

    def matrix_at(self, t: float, rescale=None) -> np.ndarray:
        """Float value of A(t), optionally rescaled by e^{-c t}."""
        lam = np.array([float(x) for x in self.exponents])
        shift = 0.0 if rescale is None else float(rescale)
        diag = np.exp((lam - shift) * t)
        return self.g1.to_numpy() @ np.diag(diag) @ self.g2.to_numpy()


# ---------------------------------------------------------------------------
# validation

def hinge_report(candidate: Sequence[LinearRelation],
                 tol: float = DEFAULT_TOL) -> HingeViolation | None:
    """First violated hinge condition, or None when valid."""
    if not candidate:
        return HingeViolation("0", "empty chain")
    n = candidate[0].n
    if any(p.n != n for p in candidate):
        return HingeViolation("0", "components disagree on n")
    if any(p.dim != n for p in candidate):
        return HingeViolation("0", "component is not a Gr_n point")
    parts = [relation_parts(p, tol) for p in candidate]
    for j, pj in enumerate(parts):
        if pj.rank <= 0:
            return HingeViolation("0", f"component {j + 1} has rank 0")
    for j in range(len(candidate) - 1):
        if parts[j].kernel != parts[j + 1].domain:
            return HingeViolation(
                "1", f"Ker(P_{j + 1}) != Dom(P_{j + 2})"
            )
        if parts[j].image != parts[j + 1].indef:
            return HingeViolation(
                "1", f"Im(P_{j + 1}) != Indef(P_{j + 2})"
            )
    if parts[0].indef.dim != 0:
        return HingeViolation("2", "Indef(P_1) != 0")
    if parts[-1].kernel.dim != 0:
        return HingeViolation("2", "Ker(P_k) != 0")
    return None


def validate_hinge(candidate: Sequence[LinearRelation],
                   tol: float = DEFAULT_TOL) -> Hinge:
    """Validate conditions 0/1/2 and return the hinge.

    Raises HingeConditionError naming the failed condition otherwise.
    """
    violation = hinge_report(candidate, tol)
    if violation is not None:
        raise HingeConditionError(violation.condition + "°",
                                  violation.detail)
    parts = tuple(relation_parts(p, tol) for p in candidate)
    return Hinge(candidate[0].n, tuple(candidate), parts)


def admissible_set(h: Hinge) -> AdmissibleSet:
    """The full limit set Q_0, P_1, Q_1, ..., P_k, Q_k."""
    n = h.n
    backend = h.backend
    elements: list[LinearRelation] = []
    zero_vec = (Fraction(0),) * n if backend == EXACT else (0.0,) * n
    ident = Matrix.identity(n, backend)
    q0_rows = [tuple(ident.row(j)) + zero_vec for j in range(n)]
    elements.append(relations.relation_from_vectors(n, q0_rows, backend))
    for j, p in enumerate(h.components):
        elements.append(p)
        parts = h.parts(j)
        rows = [row + zero_vec for row in parts.kernel.basis]
        rows += [zero_vec + row for row in parts.image.basis]
        elements.append(relations.relation_from_vectors(n, rows, backend))
    return AdmissibleSet(n, tuple(elements))


# ---------------------------------------------------------------------------
# closed form limits of Cartan paths

def cartan_limit(path: CartanPath, tol: float = DEFAULT_TOL) -> Hinge:
    """The hinge limit of A(t) = g1 e^{At} g2 as t -> +oo.

    For the block of exponent value c the component collects, in the
    diagonalizing coordinates u = g2 v, the directions

        (g2^{-1} e_j, g1 e_j)  when l_j = c   (carried across),
        (g2^{-1} e_j, 0)       when l_j < c   (crushed to the kernel),
        (0, g1 e_j)            when l_j > c   (blown to the indefiniteness).
    """
    n = path.n
    backend = path.g1.backend
    g2inv = path.g2.inverse()
    zero = (Fraction(0),) * n if backend == EXACT else (0.0,) * n
    comps = []
    for c, _ in path.blocks():
        rows = []
        for j in range(n):
            src = tuple(g2inv.column(j))
            tgt = tuple(path.g1.column(j))
            if path.exponents[j] == c:
                rows.append(src + tgt)
            elif path.exponents[j] < c:
                rows.append(src + zero)
            else:
                rows.append(zero + tgt)
        comps.append(relations.relation_from_vectors(n, rows, backend, tol=tol))
    return validate_hinge(comps, tol)


# ---------------------------------------------------------------------------
# sampled-curve Hausdorff check

def _graph_subspace(a: np.ndarray) -> Subspace:
    n = a.shape[0]
    rows = np.hstack([np.eye(n), a.T])
    return subspace_span([tuple(map(float, r)) for r in rows], FLOAT,
                         ambient=2 * n)


def _relation_float_space(p: LinearRelation) -> Subspace:
    return p.space.to_float()


def hausdorff_distance(xs: Sequence[Subspace], ys: Sequence[Subspace]) -> float:
    """Hausdorff distance between finite subsets of the Grassmannian."""
    if not xs or not ys:
        raise HingeLabError("Hausdorff distance needs nonempty samples")
    d = core.subspace_distance

    def one_sided(src, dst):
        return max(min(d(a, b) for b in dst) for a in src)

    return max(one_sided(xs, ys), one_sided(ys, xs))


def curve_hausdorff(h: Hinge, path: CartanPath, t_samples: Sequence[float],
                    s_samples: Sequence[float]) -> float:
    """Sampled Hausdorff distance between sigma(A(t)) and gamma(h).

    sigma(A(t)) is sampled at the rescalings s e^{-c_i t} around each
    exponent block plus the gap midpoints and the two endpoint fixed
    points; gamma(h) at the same scalings s of each component plus the
    Q_j.  With several t values the largest per-t distance is returned,
    so single-element t_samples recover the per-time distance.
    """
    if not t_samples or not s_samples:
        raise HingeLabError("sample lists must be nonempty")
    if h.n != path.n:
        raise DimensionError("hinge and path dimensions differ")
    n = path.n
    adm = admissible_set(h)
    gamma: list[Subspace] = [_relation_float_space(q)
                             for q in adm.elements[::2]]  # the Q_j
    for p in h.components:
        fp = p.space.to_float()
        for s in s_samples:
            rows = [row[:n] + tuple(float(s) * x for x in row[n:])
                    for row in fp.basis]
            gamma.append(subspace_span(rows, FLOAT, ambient=2 * n))
    blocks = path.blocks()
    worst = 0.0
    source_limit = _graph_limit_endpoint(n, source=True)
    target_limit = _graph_limit_endpoint(n, source=False)
    for t in t_samples:
        sigma: list[Subspace] = [source_limit, target_limit]
        for c, _ in blocks:
            base = path.matrix_at(float(t), rescale=c)
            for s in s_samples:
                sigma.append(_graph_subspace(float(s) * base))
        for i in range(len(blocks) - 1):
            mid = (float(blocks[i][0]) + float(blocks[i + 1][0])) / 2.0
            sigma.append(_graph_subspace(path.matrix_at(float(t), rescale=mid)))
        worst = max(worst, hausdorff_distance(sigma, gamma))
    return worst


def _graph_limit_endpoint(n: int, source: bool) -> Subspace:
    rows = np.hstack([np.eye(n), np.zeros((n, n))]) if source else \
        np.hstack([np.zeros((n, n)), np.eye(n)])
    return subspace_span([tuple(map(float, r)) for r in rows], FLOAT,
                         ambient=2 * n)


# ---------------------------------------------------------------------------
# numeric front end

@dataclass(frozen=True)
class NumericHingeEstimate:
    hinge: Hinge
    exponents: tuple
    residual: float


def numeric_hinge_estimate(samples: Sequence[Matrix], tol: float = 1e-6,
                           gap_threshold: float | None = None) -> NumericHingeEstimate:
    """Fit a Cartan-path model to sampled invertible matrices.

    Log singular values are regressed against the log of the 1-based
    sample index; slopes are clustered by a gap threshold (default
    0.5 (max slope - min slope) / n) into exponent blocks.  Within-block
    spread above tol is reported as a clustering ambiguity rather than
    guessed.  The fitted model reuses the last sample's SVD frames and
    singular-value offsets, so constant samples reproduce graph(A).
    """
    if len(samples) < 3:
        raise HingeLabError("need at least 3 samples")
    mats = [m.to_numpy() for m in samples]
    n = mats[0].shape[0]
    if any(m.shape != (n, n) for m in mats):
        raise DimensionError("samples must share one square shape")
    logs = []
    for j, m in enumerate(mats):
        sv = np.linalg.svd(m, compute_uv=False)
        if sv[-1] <= 1e-300 or sv[-1] <= 1e-14 * sv[0]:
            raise SingularMatrixError(f"sample {j + 1} is rank deficient")
        logs.append(np.log(sv))
    logs = np.array(logs)                      # (m, n)
    ts = np.log(np.arange(1, len(mats) + 1, dtype=float))
    tbar = ts.mean()
    denom = float(np.sum((ts - tbar) ** 2))
    if denom == 0.0:
        raise HingeLabError("degenerate sample times")
    slopes = (ts - tbar) @ (logs - logs.mean(axis=0)) / denom   # per sv index
    spread = float(slopes.max() - slopes.min())
    if gap_threshold is None:
        gap_threshold = 0.5 * spread / n
    # gaps below tol are noise, never block boundaries
    effective_gap = max(gap_threshold, tol)
    order = np.argsort(-slopes, kind="stable")
    sorted_slopes = slopes[order]
    groups: list[list[int]] = [[0]]
    for i in range(1, n):
        if sorted_slopes[i - 1] - sorted_slopes[i] > effective_gap:
            groups.append([i])
        else:
            groups[-1].append(i)
    for grp in groups:
        if sorted_slopes[grp[0]] - sorted_slopes[grp[-1]] > effective_gap:
            raise ClusteringAmbiguityError(
                "within-block slope spread exceeds tolerance; "
                "growth rates are not clearly clustered"
            )
    centers = [float(np.mean([sorted_slopes[i] for i in grp])) for grp in groups]
    block_of = np.empty(n, dtype=int)
    for b, grp in enumerate(groups):
        for i in grp:
            block_of[order[i]] = b
    # model frames from the last sample; constants absorb within-block offsets
    u, sv, vt = np.linalg.svd(mats[-1])
    t_last = float(len(mats))
    consts = sv / np.power(t_last, [centers[block_of[i]] for i in range(n)])
    g1 = Matrix.from_numpy(u)
    g2 = Matrix.from_numpy(np.diag(consts) @ vt)
    exponents = [centers[block_of[i]] for i in range(n)]
    pathlike = CartanPath(g1, exponents, g2)
    residual = 0.0
    for j, m in enumerate(mats):
        fitted = pathlike.matrix_at(math.log(j + 1))
        residual = max(
            residual,
            float(np.abs(fitted - m).max() / max(1.0, np.abs(m).max())),
        )
    return NumericHingeEstimate(cartan_limit(pathlike), tuple(exponents),
                                residual)


def hinges_close(a: Hinge, b: Hinge, tol: float = 1e-6) -> bool:
    """Componentwise projective closeness, for float/exact cross checks."""
    if a.n != b.n or a.length != b.length:
        return False
    return all(
        relations.relations_close(p, q, tol)
        for p, q in zip(a.components, b.components)
    )
