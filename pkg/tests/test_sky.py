import math
from fractions import Fraction as F

import numpy as np
import pytest

from hingelab import core, sky
from hingelab.core import Matrix, principal_angles, subspace_span
from hingelab.errors import HingeLabError
from hingelab.velocity import VelocityPoint

from conftest import cayley_orthogonal, random_invertible


I2 = Matrix.identity(2)
I3 = Matrix.identity(3)


def line(*coords):
    return subspace_span([list(coords)], ambient=len(coords))


def test_flag_validation():
    with pytest.raises(HingeLabError):
        sky.Flag(3, [core.full_subspace(3)])
    with pytest.raises(HingeLabError):
        sky.Flag(3, [line(0, 1, 0), subspace_span([[1, 0, 0], [0, 0, 1]],
                                                  ambient=3)])


def test_flag_completion():
    f = sky.Flag(3, [line(1, 0, 0)])
    full = f.complete()
    assert full.is_complete
    assert full.subspaces[0] == f.subspaces[0]
    f4 = sky.Flag(4, [subspace_span([[1, 0, 0, 0], [0, 1, 0, 0]], ambient=4)])
    assert f4.complete().dims == (1, 2, 3)


def test_sky_from_geodesic_examples():
    p = sky.sky_from_geodesic(sky.GeodesicFromBase(I3, [1, 1, 0]))
    assert p.velocity.mu == (F(1),)
    assert p.flag.dims == (2,)
    assert p.flag.subspaces[0] == subspace_span([[1, 0, 0], [0, 1, 0]],
                                                ambient=3)
    p2 = sky.sky_from_geodesic(sky.GeodesicFromBase(I2, [1, 0]))
    assert p2.velocity.mu == () and p2.flag.dims == (1,)


def test_sky_from_geodesic_random_frame(rng):
    u = cayley_orthogonal(rng, 3)
    g = sky.GeodesicFromBase(u, [F(2), F(1), F(0)])
    p = sky.sky_from_geodesic(g)
    assert p.flag.is_complete
    # recompute the flag from scratch as images of coordinate subspaces
    for d in (1, 2):
        expected = subspace_span([tuple(u.column(i)) for i in range(d)],
                                 ambient=3)
        assert p.flag.subspace_of_dim(d) == expected


def test_sky_geodesic_roundtrip():
    g = sky.GeodesicFromBase(I3, [2, 1, 0])
    p = sky.sky_from_geodesic(g)
    p2 = sky.sky_from_geodesic(sky.geodesic_from_sky(p))
    assert p2.velocity == p.velocity
    for s1, s2 in zip(p2.flag.subspaces,
                      (s.to_float() for s in p.flag.subspaces)):
        assert max(principal_angles(s1, s2), default=0.0) < 1e-12


def test_connecting_limit_worked_example():
    lim = sky.connecting_geodesic_limit(
        Matrix([[1.0, 0.0], [1.0, 1.0]]), [1, 0]
    )
    expected = np.array([[1.0, -1.0], [1.0, 1.0]]) / math.sqrt(2.0)
    assert np.abs(lim.frame.to_numpy() - expected).max() < 1e-12


def test_connecting_limit_orthogonal_input():
    r = Matrix([[0.6, -0.8], [0.8, 0.6]])
    lim = sky.connecting_geodesic_limit(r, [1, 0])
    assert np.abs(lim.frame.to_numpy() - r.to_numpy()).max() < 1e-12


def test_connecting_limit_triangular_input():
    t = Matrix([[2.0, 1.0], [0.0, 3.0]])
    lim = sky.connecting_geodesic_limit(t, [1, 0])
    assert np.abs(lim.frame.to_numpy() - np.eye(2)).max() < 1e-12


def test_relative_position_basics():
    f = sky.coordinate_flag(3, (1, 2))
    assert sky.relative_position(f, f) == (0, 1, 2)
    f1 = sky.Flag(2, [line(1, 0)])
    f2 = sky.Flag(2, [line(0, 1)])
    assert sky.relative_position(f1, f2) == (1, 0)


def test_relative_position_generic_is_reversal():
    f = sky.coordinate_flag(3, (1, 2))
    g = sky.Flag(3, [line(1, 1, 1),
                     subspace_span([[1, 1, 1], [1, 2, 4]], ambient=3)])
    # dimension-table oracle: d_{ij} = dim(V_i cap W_j)
    table = {}
    for i in range(1, 3):
        for j in range(1, 3):
            table[i, j] = core.intersect(f.subspaces[i - 1],
                                         g.subspaces[j - 1]).dim
    assert table[1, 1] == 0 and table[2, 2] == 1
    assert sky.relative_position(f, g) == (2, 1, 0)


def test_common_apartment_cases(rng):
    f = sky.coordinate_flag(3, (1, 2))
    ap = sky.common_apartment(f, f)
    assert ap.n == 3
    rev = sky.Flag(3, [line(0, 0, 1),
                       subspace_span([[0, 0, 1], [0, 1, 0]], ambient=3)])
    ap2 = sky.common_apartment(f, rev)
    assert ap2.is_orthonormal()
    for _ in range(10):
        g1 = random_invertible(rng, 3)
        g2 = random_invertible(rng, 3)
        fa = sky.flag_of_matrix_columns(g1, (1, 2))
        fb = sky.flag_of_matrix_columns(g2, (1, 2))
        ap3 = sky.common_apartment(fa, fb)  # adaptedness asserted inside
        assert ap3.n == 3


def test_angle_at_base_examples():
    ga = sky.GeodesicFromBase(I3, [1, 0, 0])
    gb = sky.GeodesicFromBase(I3, [1, 1, 0])
    assert sky.angle_at_base(ga, ga) == 0.0
    assert abs(sky.angle_at_base(ga, gb) - math.pi / 3) < 1e-14
    rot = Matrix([[0.0, -1.0], [1.0, 0.0]])
    gc = sky.GeodesicFromBase(I2.to_float(), [1, 0])
    gd = sky.GeodesicFromBase(rot, [1, 0])
    assert abs(sky.angle_at_base(gc, gd) - math.pi) < 1e-14


def test_tits_distance_examples():
    ell = line(1, 2, 0)
    plane = subspace_span([[1, 2, 0], [0, 0, 1]], ambient=3)
    p = sky.SkyPoint(VelocityPoint((F(0),), 3), sky.Flag(3, [ell]))
    q = sky.SkyPoint(VelocityPoint((F(1),), 3), sky.Flag(3, [plane]))
    assert abs(sky.tits_distance(p, q) - math.pi / 3) < 1e-14
    assert sky.tits_distance(p, p) == 0.0
    off_plane = subspace_span([[0, 1, 0], [0, 0, 1]], ambient=3)
    r = sky.SkyPoint(VelocityPoint((F(1),), 3), sky.Flag(3, [off_plane]))
    assert abs(sky.tits_distance(p, r) - math.pi) < 1e-15


def test_tits_distance_symmetric_and_bounded(rng):
    graph = sky.n3_incidence_graph(seed=11, n_lines=5)
    verts = list(graph.core_lines) + list(graph.planes)
    for _ in range(40):
        a, b = rng.choice(verts), rng.choice(verts)
        pa, pb = graph.sky_point(a), graph.sky_point(b)
        d1 = sky.tits_distance(pa, pb)
        d2 = sky.tits_distance(pb, pa)
        assert abs(d1 - d2) < 1e-12
        assert -1e-15 <= d1 <= math.pi + 1e-15
        if a == b:
            assert d1 == 0.0


def test_tits_matches_angle_at_base_same_flag():
    flag = sky.coordinate_flag(4, (1, 2, 3))
    va = VelocityPoint((F(3, 4), F(1, 4)), 4)
    vb = VelocityPoint((F(1, 2), F(1, 4)), 4)
    pa, pb = sky.SkyPoint(va, flag), sky.SkyPoint(vb, flag)
    d = sky.tits_distance(pa, pb)
    a = sky.angle_at_base(pa, pb)
    assert abs(d - a) < 1e-12


def test_incidence_graph_distances():
    graph = sky.n3_incidence_graph(seed=3)
    ell = graph.core_lines[0]
    incident = next(p for p in graph.planes if p.contains(ell))
    assert abs(graph.distance(ell, incident) - math.pi / 3) < 1e-15
    other_line = graph.core_lines[1]
    assert abs(graph.distance(ell, other_line) - 2 * math.pi / 3) < 1e-15
    non_incident = next(p for p in graph.planes if not p.contains(ell))
    assert abs(graph.distance(ell, non_incident) - math.pi) < 1e-15
    assert sky.chain_infimum_on_graph(graph, ell, incident) == graph.distance(
        ell, incident
    )


def test_incidence_graph_matches_apartment_formula(rng):
    graph = sky.n3_incidence_graph(seed=3)
    verts = list(graph.core_lines) + list(graph.planes)
    pairs = [(a, b) for a in verts for b in verts]
    rng.shuffle(pairs)
    for a, b in pairs[:120]:
        d_graph = graph.distance(a, b)
        d_formula = sky.tits_distance(graph.sky_point(a), graph.sky_point(b))
        assert abs(d_graph - d_formula) < 1e-9


def test_graph_dot_export():
    graph = sky.n3_incidence_graph(seed=1, n_lines=3)
    dot = graph.to_dot()
    assert dot.startswith("graph incidence {") and dot.endswith("}")


def test_apartment_chambers_count():
    chambers = sky.apartment_chambers(I3.to_float())
    assert len(chambers) == 6
    chambers4 = sky.apartment_chambers(Matrix.identity(4).to_float())
    assert len(chambers4) == 24


def test_apartment_circle_length():
    total = 0.0
    for ch in sky.apartment_chambers(I3.to_float()):
        v1 = sky.SkyPoint(VelocityPoint((F(1),), 3),
                          sky.Flag(3, [ch.subspaces[1]]))
        v0 = sky.SkyPoint(VelocityPoint((F(0),), 3),
                          sky.Flag(3, [ch.subspaces[0]]))
        total += sky.angle_at_base(sky.geodesic_from_sky(v1),
                                   sky.geodesic_from_sky(v0))
    assert abs(total - 2 * math.pi) < 1e-9


def test_simplex_intersection_cases():
    L = sky.coordinate_flag(3, (1, 2))
    assert sky.simplex_intersection(L, L).breaks == (1, 2)
    Lp = sky.Flag(3, [line(0, 1, 0),
                      subspace_span([[1, 0, 0], [0, 1, 0]], ambient=3)])
    assert sky.simplex_intersection(L, Lp).breaks == (2,)
    Lq = sky.Flag(3, [line(0, 1, 0),
                      subspace_span([[0, 1, 0], [0, 0, 1]], ambient=3)])
    assert sky.simplex_intersection(L, Lq) is None


def test_chamber_interiors_disjoint(rng):
    # distinct chambers of one apartment meet in a proper face or not at all
    u = cayley_orthogonal(rng, 3)
    chambers = sky.apartment_chambers(u.to_float())
    for i in range(len(chambers)):
        for j in range(i + 1, len(chambers)):
            face = sky.simplex_intersection(chambers[i], chambers[j])
            if face is not None:
                assert len(face.breaks) < 2


def test_equivariance_of_velocity_and_flag(rng):
    # D(g.gamma) = D(gamma) and F(g.gamma) = g.F(gamma)
    for _ in range(10):
        u = cayley_orthogonal(rng, 3)
        lam = [F(2), F(1), F(0)]
        g = random_invertible(rng, 3)
        base = sky.sky_from_geodesic(sky.GeodesicFromBase(u, lam))
        moved = sky.connecting_geodesic_limit((g @ u).to_float(),
                                              [2.0, 1.0, 0.0])
        moved_point = sky.sky_from_geodesic(moved)
        assert moved_point.velocity.mu == base.velocity.mu  # D invariant
        for d in (1, 2):
            expected = subspace_span(
                [tuple((g @ u).column(i)) for i in range(d)], ambient=3
            ).to_float()
            got = moved_point.flag.subspace_of_dim(d)
            assert max(principal_angles(got, expected)) < 1e-9
