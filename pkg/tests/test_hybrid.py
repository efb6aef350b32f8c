import math
from fractions import Fraction as F

import pytest

from hingelab import core, hybrid, relations as rel, sky
from hingelab.core import Matrix, principal_angles
from hingelab.errors import HingeLabError
from hingelab.satake import SpdPoint
from hingelab.sky import GeodesicFromBase, sky_from_geodesic
from hingelab.velocity import PolySequence, RationalPoly as P

from conftest import cayley_orthogonal

I3 = Matrix.identity(3)


def poly_path(frame, polys):
    return hybrid.HybridPath(frame, PolySequence(1, len(polys), polys))


def test_do_limit_three_blocks():
    p = hybrid.do_limit(poly_path(I3, [P([0, 2]), P([0, 1]), P([0])]))
    assert p.hinge.length == 3
    assert p.mu == (F(1), F(1, 2), F(0))
    assert p.gammas == (1, 2, 3)
    assert p.unfolded_tau() == (F(1), F(1, 2), F(0))


def test_do_limit_tied_block_folds():
    p = hybrid.do_limit(poly_path(I3, [P([0, 1]), P([0, 1]), P([0])]))
    assert p.hinge.length == 2
    assert p.mu == (F(1), F(0))
    assert p.unfolded_tau() == (F(1), F(1), F(0))


def test_do_limit_bounded_is_interior():
    p = hybrid.do_limit(poly_path(I3, [P([2]), P([1]), P([0])]))
    assert isinstance(p, SpdPoint)


def test_do_limit_weak_pattern_counterexample():
    # (j^2 + j, j^2, 0): three hinge blocks but tied ratio limits
    p = hybrid.do_limit(poly_path(I3, [P([0, 1, 1]), P([0, 0, 1]), P([0])]))
    assert p.hinge.length == 3
    assert p.mu == (F(1), F(1), F(0))
    assert not hybrid.is_geodesic_limit(p)


def test_folding_consistency_random(rng):
    for _ in range(20):
        n = rng.randint(2, 5)
        blocks = []
        total = 0
        while total < n:
            size = rng.randint(1, n - total)
            blocks.append(size)
            total += size
        degree = len(blocks)
        polys = []
        for b, size in enumerate(blocks):
            lead = F(len(blocks) - b)
            deg = degree - b
            base = [F(0)] * deg + [lead]
            for _ in range(size):
                polys.append(P(base))
        polys[-1] = polys[-1] - polys[-1]  # normalize the tail to zero
        if len(blocks) == 1:
            continue
        # retie the last block's polynomials to the zero polynomial
        polys = polys[: n - blocks[-1]] + [P([0])] * blocks[-1]
        u = cayley_orthogonal(rng, n)
        p = hybrid.do_limit(
            hybrid.HybridPath(u, PolySequence(1, n, polys))
        )
        sizes = []
        prev = 0
        for g in p.gammas:
            sizes.append(g - prev)
            prev = g
        # unfolded pattern is constant on each block by construction
        tau = p.unfolded_tau()
        idx = 0
        for size, m in zip(sizes, p.mu):
            assert all(tau[idx + t] == m for t in range(size))
            idx += size


def test_do_project_to_sky_example():
    p = hybrid.do_limit(poly_path(I3, [P([0, 2]), P([0, 1]), P([0])]))
    data = hybrid.do_project_to_sky(p)
    assert [k.dim for k in data.kernel_flag] == [2, 1]
    assert data.kernel_flag[0] == core.subspace_span([[0, 1, 0], [0, 0, 1]],
                                                     ambient=3)
    assert data.kernel_flag[1] == core.subspace_span([[0, 0, 1]], ambient=3)
    assert data.taus == (F(1), F(1, 2), F(0))
    direct = sky_from_geodesic(GeodesicFromBase(I3, [F(2), F(1), F(0)]))
    point = data.to_sky_point()
    assert point.velocity == direct.velocity
    assert all(a == b for a, b in zip(point.flag.subspaces,
                                      direct.flag.subspaces))


def test_do_project_interior_guard():
    p = hybrid.do_limit(poly_path(I3, [P([0, 1]), P([0, 1]), P([0, 1])]))
    assert isinstance(p, SpdPoint)
    # single-component data is interior: the DO constructor rejects it
    # because the block velocities cannot run from 1 down to 0
    with pytest.raises(HingeLabError):
        hybrid.DynkinOlshanetskyPoint(
            hybrid.satake.spd_cartan_limit(I3, [0, 0, 0]), (F(1),), (3,)
        )


def test_do_projection_equivariance(rng):
    for _ in range(8):
        u = cayley_orthogonal(rng, 3)
        p = hybrid.do_limit(poly_path(u, [P([0, 2]), P([0, 1]), P([0])]))
        data = hybrid.do_project_to_sky(p)
        for kernel, dims in zip(data.kernel_flag, (2, 1)):
            expected = core.subspace_span(
                [tuple(u.column(i)) for i in range(3 - dims, 3)], ambient=3
            )
            assert kernel == expected


def test_geodesic_do_limit_strictness():
    g = GeodesicFromBase(I3, [F(2), F(1), F(0)])
    p = hybrid.geodesic_do_limit(g)
    assert hybrid.is_geodesic_limit(p)
    assert p.mu == (F(1), F(1, 2), F(0))
    g_tie = GeodesicFromBase(I3, [F(1), F(1), F(0)])
    p_tie = hybrid.geodesic_do_limit(g_tie)
    assert p_tie.mu == (F(1), F(0))
    assert hybrid.is_geodesic_limit(p_tie)
    g2 = GeodesicFromBase(Matrix.identity(2), [F(1), F(0)])
    assert hybrid.is_geodesic_limit(hybrid.geodesic_do_limit(g2))


def test_karpelevich_point_small_case():
    kp = hybrid.karpelevich_limit_point(
        Matrix.identity(2), PolySequence(1, 2, [P([0, 1]), P([0])])
    )
    assert kp.hinge.length == 2
    assert kp.kpoint.tree.members == frozenset({(1, 2), (1, 1), (2, 2)})
    do = kp.do_point()
    direct = hybrid.geodesic_do_limit(
        GeodesicFromBase(Matrix.identity(2), [F(1), F(0)])
    )
    assert do.mu == direct.mu and do.hinge == direct.hinge


def test_karpelevich_point_bounded_interior():
    out = hybrid.karpelevich_limit_point(
        I3, PolySequence(1, 3, [P([2]), P([1]), P([0])])
    )
    assert isinstance(out, SpdPoint)


def test_karpelevich_point_example_38_blocks():
    I8 = Matrix.identity(8)
    seq = PolySequence(1, 8, [
        P([0, 0, 0, 2]), P([0, 0, 0, 1]),
        P([2, 1, 1]), P([1, 1, 1]), P([0, 1, 1]),
        P([0, 2]), P([0, 1]), P([0]),
    ])
    kp = hybrid.karpelevich_limit_point(I8, seq)
    assert kp.hinge.length == 6      # blocks (1)(2)(345)(6)(7)(8)
    assert kp.kpoint.tree.members == frozenset(
        {(1, 6), (1, 1), (2, 2), (3, 6), (3, 3), (4, 6), (4, 4), (5, 5),
         (6, 6)}
    )
    assert kp.kpoint.simplex_values[(1, 6)] == (F(1), F(1, 2), F(0))
    assert kp.kpoint.simplex_values[(4, 6)] == (F(1), F(1, 2), F(0))
    # the weighted block keeps its offsets as form ratios e^2 : e : 1
    qf = rel.quadratic_form(kp.hinge.components[2])
    vals = sorted((qf.gram.data[i][i] for i in range(3)), reverse=True)
    assert abs(vals[0] / vals[2] - math.e ** 2) < 1e-9
    assert abs(vals[1] / vals[2] - math.e) < 1e-9


def test_projection_tower_on_geodesics(rng):
    # karpelevich point -> DO point -> sky point commutes with the
    # direct computations on geodesics
    for _ in range(8):
        u = cayley_orthogonal(rng, 3)
        seq = PolySequence(1, 3, [P([0, 3]), P([0, 1]), P([0])])
        kp = hybrid.karpelevich_limit_point(u, seq)
        do = kp.do_point()
        direct_do = hybrid.do_limit(hybrid.HybridPath(u, seq))
        assert do.mu == direct_do.mu and do.hinge == direct_do.hinge
        skypt = hybrid.do_project_to_sky(do).to_sky_point()
        geodesic = GeodesicFromBase(u, [F(3), F(1), F(0)])
        direct = sky_from_geodesic(geodesic)
        assert skypt.velocity == direct.velocity
        for a, b in zip(skypt.flag.subspaces, direct.flag.subspaces):
            assert a == b


def test_hybrid_finer_than_satake():
    # equal Satake limits, different velocity limits
    p1 = hybrid.do_limit(poly_path(I3, [P([0, 2]), P([0, 1]), P([0])]))
    p2 = hybrid.do_limit(poly_path(I3, [P([0, 3]), P([0, 1]), P([0])]))
    assert p1.hinge == p2.hinge
    assert p1.mu != p2.mu


def test_karpelevich_finer_than_do():
    # equal DO data, different velocity trees (n = 5 witness)
    I5 = Matrix.identity(5)
    seq_a = PolySequence(1, 5, [P([0, 0, 0, 1]), P([0, 0, 1]), P([0, 2]),
                                P([0, 1]), P([0])])
    seq_b = PolySequence(1, 5, [P([0, 0, 0, 1]), P([0, 0, 1]),
                                P([0, -1, 1]), P([0, 1]), P([0])])
    kp_a = hybrid.karpelevich_limit_point(I5, seq_a)
    kp_b = hybrid.karpelevich_limit_point(I5, seq_b)
    do_a, do_b = kp_a.do_point(), kp_b.do_point()
    assert do_a.hinge == do_b.hinge and do_a.mu == do_b.mu
    assert kp_a.kpoint.tree != kp_b.kpoint.tree
