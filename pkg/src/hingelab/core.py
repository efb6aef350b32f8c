"""Exact-rational and float scalars, dense matrices and subspace arithmetic.

Scalars are plain Python values: ``fractions.Fraction`` on the exact
backend, ``float`` on the float backend.  Matrices and subspaces carry a
backend tag and refuse to mix backends silently.  All values are
immutable after construction and every operation is a pure function.

The float backend leans on numpy for SVD and array plumbing; the
symmetric eigenproblem is solved by cyclic Jacobi rotations and QR by
modified Gram-Schmidt with a positive-diagonal sign convention, which
keeps small-n results reproducible across platforms.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BackendMismatchError,
    DimensionError,
    HingeLabError,
    NotSymmetricError,
    SingularMatrixError,
)

EXACT = "exact"
FLOAT = "float"

#: Single tolerance knob for float rank decisions, overridable per call.
DEFAULT_TOL = 1e-9


# ---------------------------------------------------------------------------
# scalars

def scalar_backend(x) -> str:
    if isinstance(x, Fraction):
        return EXACT
    if isinstance(x, int):
        return EXACT
    if isinstance(x, float):
        return FLOAT
    raise HingeLabError(f"unsupported scalar type {type(x).__name__}")


def as_exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise BackendMismatchError(f"cannot interpret {x!r} as exact rational")


def vector_backend(vec: Sequence) -> str:
    kinds = {scalar_backend(x) for x in vec}
    if len(kinds) > 1:
        raise BackendMismatchError("mixed exact/float entries in one vector")
    return kinds.pop() if kinds else EXACT


def _coerce_row(vec: Sequence, backend: str) -> tuple:
    if backend == EXACT:
        return tuple(as_exact(x) for x in vec)
    return tuple(float(x) for x in vec)


# ---------------------------------------------------------------------------
# matrices

class Matrix:
    """Immutable dense matrix over one backend, row-major."""

    __slots__ = ("rows", "cols", "data", "backend")

    def __init__(self, data: Iterable[Sequence], backend: str | None = None):
        grid = [list(row) for row in data]
        if not grid or not grid[0]:
            raise DimensionError("matrix dimensions must be positive")
        ncols = len(grid[0])
        if any(len(r) != ncols for r in grid):
            raise DimensionError("ragged matrix rows")
        if backend is None:
            kinds = {vector_backend(r) for r in grid}
            if len(kinds) > 1:
                raise BackendMismatchError("mixed backends inside one matrix")
            backend = kinds.pop()
        object.__setattr__(self, "rows", len(grid))
        object.__setattr__(self, "cols", ncols)
        object.__setattr__(self, "backend", backend)
        object.__setattr__(
            self, "data", tuple(_coerce_row(r, backend) for r in grid)
        )

    def __setattr__(self, *_):
        raise AttributeError("Matrix is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def identity(n: int, backend: str = EXACT) -> "Matrix":
        one = Fraction(1) if backend == EXACT else 1.0
        zero = Fraction(0) if backend == EXACT else 0.0
        return Matrix(
            [[one if i == j else zero for j in range(n)] for i in range(n)],
            backend,
        )

    @staticmethod
    def diagonal(values: Sequence, backend: str | None = None) -> "Matrix":
        values = list(values)
        n = len(values)
        if backend is None:
            backend = vector_backend(values)
        zero = Fraction(0) if backend == EXACT else 0.0
        return Matrix(
            [[values[i] if i == j else zero for j in range(n)] for i in range(n)],
            backend,
        )

    @staticmethod
    def from_numpy(arr: np.ndarray) -> "Matrix":
        return Matrix([[float(x) for x in row] for row in np.atleast_2d(arr)], FLOAT)

    # -- views -------------------------------------------------------------

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.data], dtype=float)

    def to_float(self) -> "Matrix":
        if self.backend == FLOAT:
            return self
        return Matrix([[float(x) for x in row] for row in self.data], FLOAT)

    def row(self, i: int) -> tuple:
        return self.data[i]

    def column(self, j: int) -> tuple:
        return tuple(self.data[i][j] for i in range(self.rows))

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "Matrix"):
        if self.backend != other.backend:
            raise BackendMismatchError("matrix backends differ")

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.cols != other.rows:
            raise DimensionError("matmul shape mismatch")
        cols = [other.column(j) for j in range(other.cols)]
        return Matrix(
            [
                [sum(a * b for a, b in zip(row, col)) for col in cols]
                for row in self.data
            ],
            self.backend,
        )

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionError("shape mismatch")
        return Matrix(
            [
                [a + b for a, b in zip(r1, r2)]
                for r1, r2 in zip(self.data, other.data)
            ],
            self.backend,
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + other.scaled(-1 if self.backend == EXACT else -1.0)

    def scaled(self, c) -> "Matrix":
        return Matrix([[c * x for x in row] for row in self.data], self.backend)

    def transpose(self) -> "Matrix":
        return Matrix(
            [self.column(j) for j in range(self.cols)], self.backend
        )

    def apply(self, vec: Sequence) -> tuple:
        if len(vec) != self.cols:
            raise DimensionError("vector length mismatch")
        return tuple(sum(a * b for a, b in zip(row, vec)) for row in self.data)

    def det(self):
        if not self.is_square:
            raise DimensionError("determinant of non-square matrix")
        if self.backend == FLOAT:
            return float(np.linalg.det(self.to_numpy()))
        # fraction-free style Gauss elimination with exact pivots
        m = [list(r) for r in self.data]
        n = self.rows
        det = Fraction(1)
        for c in range(n):
            piv = next((r for r in range(c, n) if m[r][c] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != c:
                m[c], m[piv] = m[piv], m[c]
                det = -det
            det *= m[c][c]
            inv = 1 / m[c][c]
            for r in range(c + 1, n):
                f = m[r][c] * inv
                if f:
                    m[r] = [x - f * y for x, y in zip(m[r], m[c])]
        return det

    def inverse(self) -> "Matrix":
        if not self.is_square:
            raise DimensionError("inverse of non-square matrix")
        n = self.rows
        if self.backend == FLOAT:
            a = self.to_numpy()
            if abs(np.linalg.det(a)) < 1e-300:
                raise SingularMatrixError("singular float matrix")
            return Matrix.from_numpy(np.linalg.inv(a))
        m = [list(r) + [Fraction(int(i == j)) for j in range(n)]
             for i, r in enumerate(self.data)]
        for c in range(n):
            piv = next((r for r in range(c, n) if m[r][c] != 0), None)
            if piv is None:
                raise SingularMatrixError("singular exact matrix")
            m[c], m[piv] = m[piv], m[c]
            inv = 1 / m[c][c]
            m[c] = [x * inv for x in m[c]]
            for r in range(n):
                if r != c and m[r][c]:
                    f = m[r][c]
                    m[r] = [x - f * y for x, y in zip(m[r], m[c])]
        return Matrix([row[n:] for row in m], EXACT)

    def is_symmetric(self, tol: float = DEFAULT_TOL) -> bool:
        if not self.is_square:
            return False
        if self.backend == EXACT:
            return all(
                self.data[i][j] == self.data[j][i]
                for i in range(self.rows)
                for j in range(i)
            )
        a = self.to_numpy()
        scale = max(1.0, float(np.abs(a).max()))
        return bool(np.abs(a - a.T).max() <= tol * scale)

    def is_orthogonal(self, tol: float = DEFAULT_TOL) -> bool:
        if not self.is_square:
            return False
        prod = self.transpose() @ self
        ident = Matrix.identity(self.rows, self.backend)
        if self.backend == EXACT:
            return prod.data == ident.data
        return bool(
            np.abs(prod.to_numpy() - np.eye(self.rows)).max() <= tol
        )

    # -- comparison / misc -------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Matrix)
            and self.backend == other.backend
            and self.data == other.data
        )

    def __hash__(self):
        return hash((self.backend, self.data))

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols}, {self.backend})"


# ---------------------------------------------------------------------------
# exact row reduction

def rref(rows: Sequence[Sequence[Fraction]], ncols: int):
    """Reduced row echelon form over the rationals.

    Returns (reduced nonzero rows, pivot column indices).  The output is
    the canonical basis of the row space: two spans of the same subspace
    reduce to identical rows.
    """
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return [tuple(row) for row in m[:r]], pivots


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[tuple]:
    """Canonical basis of {v : M v = 0} for exact M given by rows."""
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -red[i][f]
        basis.append(tuple(v))
    return basis


# ---------------------------------------------------------------------------
# subspaces

class Subspace:
    """A linear subspace of R^m with a cached canonical basis.

    Exact backend: the basis is the reduced row echelon form, unique per
    subspace, so equality is literal comparison.  Float backend: the
    basis is orthonormal (SVD), and equality means all principal angles
    fall below the tolerance.
    """

    __slots__ = ("ambient", "basis", "backend")

    def __init__(self, ambient: int, basis: Sequence[tuple], backend: str):
        if ambient <= 0:
            raise DimensionError("ambient dimension must be positive")
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "basis", tuple(basis))
        object.__setattr__(self, "backend", backend)

    def __setattr__(self, *_):
        raise AttributeError("Subspace is immutable")

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def is_zero(self) -> bool:
        return not self.basis

    def basis_matrix(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.basis],
                        dtype=float).reshape(self.dim, self.ambient)

    def to_float(self, tol: float = DEFAULT_TOL) -> "Subspace":
        if self.backend == FLOAT:
            return self
        return subspace_span(
            [[float(x) for x in row] for row in self.basis],
            FLOAT, tol=tol, ambient=self.ambient,
        )

    def contains_vector(self, vec: Sequence, tol: float = DEFAULT_TOL) -> bool:
        if len(vec) != self.ambient:
            raise DimensionError("vector/ambient mismatch")
        if self.backend == EXACT:
            combined, _ = rref(list(self.basis) + [tuple(as_exact(x) for x in vec)],
                               self.ambient)
            return len(combined) == self.dim
        v = np.array([float(x) for x in vec], dtype=float)
        norm = np.linalg.norm(v)
        if norm <= tol:
            return True
        if self.is_zero:
            return False
        q = self.basis_matrix()
        resid = v - q.T @ (q @ v)
        return bool(np.linalg.norm(resid) <= tol * max(1.0, norm))

    def contains(self, other: "Subspace", tol: float = DEFAULT_TOL) -> bool:
        self._check(other)
        return all(self.contains_vector(v, tol) for v in other.basis)

    def _check(self, other: "Subspace"):
        if self.ambient != other.ambient:
            raise DimensionError("ambient dimensions differ")
        if self.backend != other.backend:
            raise BackendMismatchError("subspace backends differ")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        if self.ambient != other.ambient or self.backend != other.backend:
            return False
        if self.backend == EXACT:
            return self.basis == other.basis
        if self.dim != other.dim:
            return False
        if self.dim == 0:
            return True
        angles = principal_angles(self, other)
        return max(angles) <= 1e-7

    def __hash__(self):
        if self.backend == EXACT:
            return hash((self.ambient, self.basis))
        return hash((self.ambient, self.dim, FLOAT))

    def __repr__(self):
        return f"Subspace(dim {self.dim} of R^{self.ambient}, {self.backend})"


def zero_subspace(ambient: int, backend: str = EXACT) -> Subspace:
    return Subspace(ambient, (), backend)


def full_subspace(ambient: int, backend: str = EXACT) -> Subspace:
    ident = Matrix.identity(ambient, backend)
    return Subspace(ambient, ident.data, backend)


def subspace_span(vectors: Sequence[Sequence], backend: str | None = None,
                  tol: float = DEFAULT_TOL, ambient: int | None = None) -> Subspace:
    """Span of the given vectors with canonical reduced basis.

    The float backend discards singular directions below tol (relative
    to the largest singular value).
    """
    vectors = [tuple(v) for v in vectors]
    if ambient is None:
        if not vectors:
            raise DimensionError("empty span needs an explicit ambient dimension")
        ambient = len(vectors[0])
    if any(len(v) != ambient for v in vectors):
        raise DimensionError("spanning vectors have mixed lengths")
    if backend is None:
        kinds = {vector_backend(v) for v in vectors}
        if len(kinds) > 1:
            raise BackendMismatchError("mixed backends among spanning vectors")
        backend = kinds.pop() if kinds else EXACT
    if backend == EXACT:
        rows = [tuple(as_exact(x) for x in v) for v in vectors]
        red, _ = rref(rows, ambient)
        return Subspace(ambient, red, EXACT)
    if not vectors:
        return Subspace(ambient, (), FLOAT)
    arr = np.array([[float(x) for x in v] for v in vectors], dtype=float)
    norms = np.linalg.norm(arr, axis=1)
    keep = norms > 0
    if not keep.any():
        return Subspace(ambient, (), FLOAT)
    arr = arr[keep] / norms[keep, None]
    _, s, vh = np.linalg.svd(arr, full_matrices=False)
    rank = int(np.sum(s > tol * s[0])) if s.size else 0
    return Subspace(ambient, tuple(tuple(map(float, row)) for row in vh[:rank]),
                    FLOAT)


def intersect(a: Subspace, b: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Intersection of two subspaces (Zassenhaus on the exact backend)."""
    a._check(b)
    m = a.ambient
    if a.backend == EXACT:
        zero = [Fraction(0)] * m
        block = [list(r) + list(r) for r in a.basis]
        block += [list(r) + zero for r in b.basis]
        red, pivots = rref(block, 2 * m)
        rows = []
        for i, p in enumerate(pivots):
            if p >= m:
                rows.append(red[i][m:])
        return subspace_span(rows, EXACT, ambient=m)
    if a.is_zero or b.is_zero:
        return zero_subspace(m, FLOAT)
    qa, qb = a.basis_matrix(), b.basis_matrix()
    u, s, _ = np.linalg.svd(qa @ qb.T)
    # common directions have cosine 1; tolerate tol in the angle
    keep = s >= 1.0 - tol
    vecs = (u.T[: s.size][keep] @ qa) if keep.any() else []
    return subspace_span(list(vecs), FLOAT, tol=tol, ambient=m)


def subspace_sum(a: Subspace, b: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Smallest subspace containing both arguments."""
    a._check(b)
    return subspace_span(list(a.basis) + list(b.basis), a.backend,
                         tol=tol, ambient=a.ambient)


def orthocomplement(a: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Orthogonal complement for the standard inner product sum(v_k w_k)."""
    if a.is_zero:
        return full_subspace(a.ambient, a.backend)
    if a.backend == EXACT:
        return subspace_span(nullspace(a.basis, a.ambient), EXACT,
                             ambient=a.ambient)
    q = a.basis_matrix()
    _, _, vh = np.linalg.svd(q, full_matrices=True)
    return subspace_span(list(vh[a.dim:]), FLOAT, tol=tol, ambient=a.ambient)


def principal_angles(a: Subspace, b: Subspace) -> list[float]:
    """Nondecreasing principal angles between two subspaces, in [0, pi/2].

    Cosines come from the SVD of the cross-Gram matrix; angles below
    pi/4 are recomputed from sines (Knyazev-Argentati) so that small
    angles keep full accuracy.
    """
    if a.ambient != b.ambient:
        raise DimensionError("ambient dimensions differ")
    if a.dim == 0 or b.dim == 0:
        return []
    fa = a if a.backend == FLOAT else a.to_float()
    fb = b if b.backend == FLOAT else b.to_float()
    qa, qb = fa.basis_matrix(), fb.basis_matrix()
    k = min(fa.dim, fb.dim)
    cosines = np.linalg.svd(qa @ qb.T, compute_uv=False)
    cosines = np.clip(cosines[:k], -1.0, 1.0)
    # sine route: project b off a, singular values are the sines ascending
    resid = qb - (qb @ qa.T) @ qa
    sines = np.sort(np.linalg.svd(resid, compute_uv=False))
    sines = np.clip(sines[:k], 0.0, 1.0)
    angles = []
    for i in range(k):
        c = cosines[i]          # descending
        s = sines[i]            # ascending, paired with the same angle
        angles.append(math.asin(s) if c * c > 0.5 else math.acos(c))
    return sorted(angles)


def subspace_distance(a: Subspace, b: Subspace) -> float:
    """Geodesic Grassmannian distance: l2 norm of the principal angles."""
    angles = principal_angles(a, b)
    return math.sqrt(sum(t * t for t in angles))


def stable_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle between two vectors, full precision at both 0 and pi.

    Kahan's formula 2 atan2(|u' - v'|, |u' + v'|) on the normalized
    vectors avoids the arccos precision floor near cos = +-1.
    """
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise HingeLabError("angle of a zero vector is undefined")
    uu = u / nu
    vv = v / nv
    return 2.0 * math.atan2(float(np.linalg.norm(uu - vv)),
                            float(np.linalg.norm(uu + vv)))


# ---------------------------------------------------------------------------
# symmetric eigenproblem (cyclic Jacobi) and QR (modified Gram-Schmidt)

def eigensym(m: Matrix, tol: float = DEFAULT_TOL):
    """Eigenvalues (descending) and orthogonal eigenbasis of a symmetric matrix.

    Returns (values, Q) with m = Q diag(values) Q^T.  Input symmetry is
    checked to tol; eigenvector signs are fixed so the largest-magnitude
    component of each column is positive.
    """
    if not m.is_symmetric(tol=max(tol, 1e-12)):
        raise NotSymmetricError("eigensym requires a symmetric matrix")
    a = m.to_numpy()
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, float(np.abs(a).max()))
    for _ in range(100):
        off = math.sqrt(float(np.sum(np.tril(a, -1) ** 2)))
        if off <= 1e-15 * scale * n:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    order = np.argsort(-np.diag(a), kind="stable")
    values = [float(a[i, i]) for i in order]
    basis = v[:, order]
    for j in range(n):
        col = basis[:, j]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0:
            basis[:, j] = -col
    return values, Matrix.from_numpy(basis)


def qr(m: Matrix):
    """QR factorization m = U B with U orthogonal, B upper triangular.

    Modified Gram-Schmidt with one re-orthogonalization pass; the sign
    convention (positive diagonal of B) makes the factorization unique.
    Raises SingularMatrixError on rank-deficient input.
    """
    if not m.is_square:
        raise DimensionError("qr requires a square matrix")
    a = m.to_numpy()
    n = a.shape[0]
    u = np.zeros((n, n))
    b = np.zeros((n, n))
    scale = max(1.0, float(np.abs(a).max()))
    for j in range(n):
        v = a[:, j].copy()
        for _ in range(2):
            for i in range(j):
                proj = float(u[:, i] @ v)
                b[i, j] += proj
                v -= proj * u[:, i]
        norm = float(np.linalg.norm(v))
        if norm <= 1e-13 * scale:
            raise SingularMatrixError("qr requires invertible input")
        b[j, j] = norm
        u[:, j] = v / norm
    return Matrix.from_numpy(u), Matrix.from_numpy(b)


# ---------------------------------------------------------------------------
# exact symmetric signature (for positivity tests without tolerances)

def symmetric_signature(gram: Sequence[Sequence[Fraction]]):
    """Signature (n_plus, n_minus, n_zero) of an exact symmetric matrix.

    Congruence diagonalization over Q; no tolerances involved.
    """
    m = [[as_exact(x) for x in row] for row in gram]
    n = len(m)
    if any(len(r) != n for r in m):
        raise DimensionError("signature needs a square matrix")
    if any(m[i][j] != m[j][i] for i in range(n) for j in range(i)):
        raise NotSymmetricError("signature needs a symmetric matrix")
    plus = minus = zero = 0
    idx = list(range(n))

    def clear(k_pos: int):
        nonlocal plus, minus
        k = idx[k_pos]
        d = m[k][k]
        if d > 0:
            plus += 1
        else:
            minus += 1
        rest = idx[:k_pos] + idx[k_pos + 1:]
        krow = {j: m[k][j] for j in rest}
        for i in rest:
            f = m[i][k] / d
            if f:
                for j in rest:
                    m[i][j] -= f * krow[j]
                m[i][k] = Fraction(0)
                m[k][i] = Fraction(0)
        idx.remove(k)

    while idx:
        k_pos = next((p for p, k in enumerate(idx) if m[k][k] != 0), None)
        if k_pos is not None:
            clear(k_pos)
            continue
        pair = next(
            ((p, q) for pi, p in enumerate(idx) for q in idx[pi + 1:]
             if m[p][q] != 0),
            None,
        )
        if pair is None:
            zero += len(idx)
            break
        p, q = pair
        # basis change e_p -> e_p + e_q makes the (p,p) entry nonzero
        for j in idx:
            m[p][j] = m[p][j] + m[q][j]
        for i in idx:
            m[i][p] = m[i][p] + m[i][q]
        clear(idx.index(p))
    return plus, minus, zero
