"""The SPD model of SL(n,R)/SO(n) and its hinge-boundary data.

Interior points are symmetric positive definite matrices up to a
positive multiplier, acted on by g: A -> g A g^t.  Boundary points are
hinges all of whose components are symmetric nonnegative relations;
equivalently a flag of proper subspaces together with a positive
definite form on each successive quotient.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import core, relations
from .core import (
    DEFAULT_TOL,
    EXACT,
    FLOAT,
    Matrix,
    Subspace,
    symmetric_signature,
)
from .errors import DimensionError, HingeLabError, NotSymmetricError
from .hinges import CartanPath, Hinge, cartan_limit, validate_hinge
from .relations import (
    LinearRelation,
    QuadraticFormOnQuotient,
    classify,
    quadratic_form,
)


class SpdPoint:
    """A symmetric positive definite matrix up to positive multiplier.

    The exact matrix is kept untouched; the unit-determinant
    representative divides by det^(1/n), which is usually irrational,
    so it is exposed as a float matrix alongside the stored one.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix: Matrix, tol: float = DEFAULT_TOL,
                 check: bool = True):
        # check=False is for values positive definite by construction
        # whose smallest eigenvalue drowns in float noise (huge condition)
        if check:
            if not matrix.is_symmetric(tol):
                raise NotSymmetricError("SPD point needs a symmetric matrix")
            if matrix.backend == EXACT:
                plus, minus, zero = symmetric_signature(matrix.data)
                if minus or zero:
                    raise HingeLabError("matrix is not positive definite")
            else:
                values, _ = core.eigensym(matrix, tol)
                if values[-1] <= tol * max(1.0, abs(values[0])):
                    raise HingeLabError("matrix is not positive definite")
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, *_):
        raise AttributeError("SpdPoint is immutable")

    @property
    def n(self) -> int:
        return self.matrix.rows

    def det_scale(self) -> float:
        """det(A)^(1/n), the normalizing multiplier."""
        return float(self.matrix.det()) ** (1.0 / self.n)

    def unit_det_matrix(self) -> Matrix:
        """Float representative with determinant 1."""
        a = self.matrix.to_numpy() / self.det_scale()
        return Matrix.from_numpy(a)

    def act(self, g: Matrix) -> "SpdPoint":
        """The symmetric-space action g: A -> g A g^t."""
        return SpdPoint(g @ self.matrix @ g.transpose())

    def projectively_equal(self, other: "SpdPoint",
                           tol: float = DEFAULT_TOL) -> bool:
        if self.n != other.n:
            return False
        a = self.unit_det_matrix().to_numpy()
        b = other.unit_det_matrix().to_numpy()
        import numpy as np

        return bool(np.abs(a - b).max() <= tol * max(1.0, np.abs(a).max()))

    def __repr__(self):
        return f"SpdPoint(n={self.n}, {self.matrix.backend})"


@dataclass(frozen=True)
class SatakeBoundaryPoint:
    """Flag 0 < V_1 < ... < V_s < R^n plus positive forms on the quotients.

    ``forms[j]`` lives on the quotient of the j-th domain step; there
    are s+1 of them for a hinge of length s+1 (the count of proper flag
    subspaces is hinge length minus one).
    """

    n: int
    flag: tuple            # increasing proper subspaces
    forms: tuple           # QuadraticFormOnQuotient per hinge component

    @property
    def steps(self) -> int:
        return len(self.flag)


def spd_cartan_limit(base: Matrix, exponents: Sequence,
                     tol: float = DEFAULT_TOL) -> Hinge:
    """Hinge limit of the SPD path U diag(e^{l t}) U^t.

    The frame must be orthogonal; every component of the limit is then a
    symmetric nonnegative relation.
    """
    if not base.is_orthogonal(tol):
        raise HingeLabError("spd_cartan_limit requires an orthogonal frame")
    path = CartanPath(base, exponents, base.transpose())
    h = cartan_limit(path, tol)
    for j, p in enumerate(h.components):
        flags = classify(p, tol)
        if not (flags["is_symmetric"] and flags["is_nonnegative"]):
            raise HingeLabError(
                f"component {j + 1} of an SPD limit failed positivity"
            )
    return h


def is_positive_hinge(h: Hinge, tol: float = DEFAULT_TOL) -> bool:
    """True when every component is symmetric and nonnegative."""
    return all(
        (lambda f: f["is_symmetric"] and f["is_nonnegative"])(classify(p, tol))
        for p in h.components
    )


def hinge_to_flag_forms(h: Hinge, tol: float = DEFAULT_TOL) -> SatakeBoundaryPoint:
    """Flag-and-forms data of a positive hinge.

    The kernels Ker(P_1) > Ker(P_2) > ... > Ker(P_k) = 0 are reindexed
    increasingly with the trivial one dropped; the forms are the induced
    quadratic forms of the components, fastest block first.
    """
    if not is_positive_hinge(h, tol):
        raise HingeLabError("hinge_to_flag_forms needs a positive hinge")
    kernels = [h.parts(j).kernel for j in range(h.length)]
    flag = tuple(reversed([k for k in kernels if k.dim > 0]))
    forms = tuple(quadratic_form(p, tol) for p in h.components)
    return SatakeBoundaryPoint(h.n, flag, forms)


def flag_forms_to_hinge(point: SatakeBoundaryPoint,
                        tol: float = DEFAULT_TOL) -> Hinge:
    """Rebuild the positive hinge from flag-and-forms data.

    Component j has Dom = V_{s+1-j} (with V_{s+1} = R^n), Ker the next
    flag step down, Im = Ker^perp and Indef = Dom^perp.  On the shared
    complement C = Dom cap Ker^perp the form determines the induced
    operator through the metric Gram matrix, and the component is

        (Ker + 0)  +  (0 + Indef)  +  span{ (c_j, [P] c_j ) }.
    """
    n = point.n
    backend = point.flag[0].backend if point.flag else (
        point.forms[0].base.backend if point.forms else EXACT
    )
    chain = [core.full_subspace(n, backend)] + list(reversed(point.flag)) + [
        core.zero_subspace(n, backend)
    ]
    if len(point.forms) != len(chain) - 1:
        raise DimensionError("form count must be flag steps plus one")
    comps = []
    zero = (Fraction(0),) * n if backend == EXACT else (0.0,) * n
    for j in range(len(chain) - 1):
        dom, ker = chain[j], chain[j + 1]
        if not dom.contains(ker, tol):
            raise HingeLabError("flag subspaces fail to nest")
        form = point.forms[j]
        comp_basis = _basis_off_kernel(form.basis, dom, ker, n, backend, tol)
        operator = _operator_from_form(comp_basis, form.gram, backend)
        rows = [row + zero for row in ker.basis]
        indef = core.orthocomplement(dom, tol)
        rows += [zero + row for row in indef.basis]
        for i, c in enumerate(comp_basis):
            target = tuple(
                sum(operator[k][i] * comp_basis[k][m]
                    for k in range(len(comp_basis)))
                for m in range(n)
            )
            rows.append(tuple(c) + target)
        comps.append(relations.relation_from_vectors(n, rows, backend, tol=tol))
    return validate_hinge(comps, tol)


def _basis_off_kernel(basis: tuple, dom: Subspace, ker: Subspace, n: int,
                      backend: str, tol: float) -> tuple:
    """Project the form basis orthogonally off Ker.

    The induced form only sees the quotient, so representatives may be
    shifted by kernel vectors; the reconstruction needs them inside
    Dom cap Ker^perp so their span sits in Im modulo nothing.
    """
    if not basis:
        return ()
    if ker.is_zero:
        return tuple(tuple(v) for v in basis)
    kb = ker.basis
    d = len(kb)
    metric = Matrix(
        [[sum(a * b for a, b in zip(kb[i], kb[j])) for j in range(d)]
         for i in range(d)],
        backend,
    )
    minv = metric.inverse()
    out = []
    for v in basis:
        rhs = [sum(a * b for a, b in zip(v, kb[i])) for i in range(d)]
        coeff = [sum(minv.data[i][j] * rhs[j] for j in range(d))
                 for i in range(d)]
        out.append(tuple(
            v[m] - sum(coeff[i] * kb[i][m] for i in range(d))
            for m in range(n)
        ))
    return tuple(out)


def _operator_from_form(basis: tuple, gram: Matrix | None, backend: str):
    """Columns of [P] on the complement basis: solve G M = Q."""
    if gram is None or not basis:
        return []
    d = len(basis)
    metric = Matrix(
        [[sum(a * b for a, b in zip(basis[i], basis[j])) for j in range(d)]
         for i in range(d)],
        backend,
    )
    m = metric.inverse() @ gram
    return [[m.data[i][j] for j in range(d)] for i in range(d)]
