import random
from fractions import Fraction

import pytest

from hingelab.core import EXACT, Matrix, subspace_span


@pytest.fixture
def rng():
    return random.Random(20240517)


def random_fraction(rng, lo=-4, hi=4, den=3):
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


def random_matrix(rng, n, lo=-4, hi=4, den=3):
    return Matrix([[random_fraction(rng, lo, hi, den) for _ in range(n)]
                   for _ in range(n)])


def random_invertible(rng, n):
    while True:
        m = random_matrix(rng, n)
        if m.det() != 0:
            return m


def cayley_orthogonal(rng, n):
    """Random rational orthogonal matrix (I-S)(I+S)^-1, S skew."""
    while True:
        s = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                x = random_fraction(rng, -3, 3, 3)
                s[i][j] = x
                s[j][i] = -x
        sm = Matrix(s)
        ident = Matrix.identity(n)
        try:
            return (ident - sm) @ (ident + sm).inverse()
        except Exception:
            continue


def random_subspace(rng, ambient, dim=None):
    if dim is None:
        dim = rng.randint(0, ambient)
    rows = [[random_fraction(rng) for _ in range(ambient)] for _ in range(dim)]
    return subspace_span(rows, EXACT, ambient=ambient)


def nonincreasing_exponents(rng, n, hi=4, allow_ties=True):
    vals = sorted((rng.randint(0, hi) for _ in range(n)), reverse=True)
    if not allow_ties:
        while len(set(vals)) != n:
            vals = sorted(rng.sample(range(0, max(hi, n) + 2), n), reverse=True)
    return [Fraction(v) for v in vals]
