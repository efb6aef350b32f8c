import itertools
import math
from fractions import Fraction as F

import pytest

from hingelab import velocity as vel
from hingelab.core import Matrix
from hingelab.errors import DimensionError, HingeLabError
from hingelab.satake import SpdPoint
from hingelab.velocity import (
    FaceSequence,
    KarpelevichPoint,
    LogSpectrum,
    PolySequence,
    RationalPoly as P,
    TreePartition,
    VelocityPoint,
    boundary_face_sequence_limit,
    enumerate_tree_partitions,
    face_closure_leq,
    face_of,
    karpelevich_limit,
    lambda_map,
    simple_velocity_limit,
    simplex_project,
    tree_leq,
    trivial_tree,
)


def ex38_sequence():
    return PolySequence(1, 8, [
        P([0, 0, 0, 2]), P([0, 0, 0, 1]),
        P([2, 1, 1]), P([1, 1, 1]), P([0, 1, 1]),
        P([0, 2]), P([0, 1]), P([0]),
    ])


# ---------------------------------------------------------------------------
# lambda map and the simplex

def test_lambda_map_exact_logs():
    a = SpdPoint(Matrix.diagonal(
        [math.e ** 2, math.e, 1.0], backend="float"
    ))
    spec = lambda_map(a)
    assert max(abs(v - w) for v, w in zip(spec.values, (2, 1, 0))) < 1e-12


def test_lambda_map_identity():
    spec = lambda_map(SpdPoint(Matrix.identity(3).to_float()))
    assert max(abs(v) for v in spec.values) < 1e-12


def test_lambda_map_conjugation_invariant():
    import numpy as np

    rng = np.random.default_rng(5)
    a = rng.normal(size=(2, 2))
    q, _ = np.linalg.qr(a)
    m = q @ np.diag([math.e ** 3, 1.0]) @ q.T
    spec = lambda_map(SpdPoint(Matrix.from_numpy(0.5 * (m + m.T))))
    assert abs(spec.values[0] - 3.0) < 1e-9
    assert spec.values[-1] == 0.0


def test_simplex_project_examples():
    assert simplex_project(LogSpectrum.of([F(2), F(1), F(0)])).mu == (F(1, 2),)
    assert simplex_project(LogSpectrum.of([F(1), F(1), F(0)])).mu == (F(1),)
    assert simplex_project(LogSpectrum.of([F(1), F(0), F(0)])).mu == (F(0),)


def test_simplex_project_rejects_origin():
    with pytest.raises(HingeLabError):
        simplex_project(LogSpectrum.of([F(1), F(1), F(1)]))


def test_simple_velocity_limit_examples():
    seq = PolySequence(1, 3, [P([0, 0, 0, 2]), P([0, 0, 0, 1]), P([0])])
    assert simple_velocity_limit(seq).mu == (F(1, 2),)
    seq2 = PolySequence(1, 3, [P([0, 1]), P([0, 1]), P([0])])
    assert simple_velocity_limit(seq2).mu == (F(1),)
    assert simple_velocity_limit(
        PolySequence(1, 3, [P([5]), P([3]), P([0])])
    ) is None


def test_poly_sequence_validates_order():
    with pytest.raises(HingeLabError):
        PolySequence(1, 2, [P([0]), P([0, 1])])   # 0 then j: increasing


# ---------------------------------------------------------------------------
# tree partitions

def test_tree_counts():
    assert len(enumerate_tree_partitions(1, 1)) == 1
    assert len(enumerate_tree_partitions(4, 5)) == 2
    assert len(enumerate_tree_partitions(1, 3)) == 6


def test_tree_counts_monotone():
    counts = [len(enumerate_tree_partitions(1, m)) for m in range(1, 6)]
    assert all(counts[i] < counts[i + 1] for i in range(len(counts) - 1))


def brute_force_count(k, l):
    intervals = [(a, b) for a in range(k, l + 1) for b in range(a, l + 1)]
    others = [iv for iv in intervals if iv != (k, l)]
    count = 0
    for r in range(len(others) + 1):
        for sub in itertools.combinations(others, r):
            try:
                TreePartition(k, l, frozenset(sub) | {(k, l)})
                count += 1
            except HingeLabError:
                pass
    return count


def test_tree_count_brute_force_oracle():
    assert brute_force_count(1, 2) == 2
    assert brute_force_count(1, 3) == 6
    assert len(enumerate_tree_partitions(1, 4)) == brute_force_count(1, 4)


def test_tree_validation_rejects_non_tiling():
    with pytest.raises(HingeLabError):
        TreePartition(1, 3, [(1, 3), (1, 1)])
    with pytest.raises(HingeLabError):
        TreePartition(1, 3, [(1, 3), (1, 2), (2, 3)])   # not laminar


def test_tree_order():
    trees = enumerate_tree_partitions(1, 3)
    top = trivial_tree(1, 3)
    for t in trees:
        assert tree_leq(t, top)
    assert vel.maximal_tree(1, 3) == top


# ---------------------------------------------------------------------------
# karpelevich limits

def test_example_38_tree_and_values():
    kp = karpelevich_limit(ex38_sequence())
    assert kp.tree.members == frozenset(
        {(1, 8), (1, 1), (2, 2), (3, 8), (3, 5), (6, 8),
         (6, 6), (7, 7), (8, 8)}
    )
    assert kp.simplex_values[(1, 8)] == (F(1), F(1, 2), F(0))
    assert kp.simplex_values[(3, 8)] == (F(1), F(0))
    assert kp.cone_values[(3, 5)] == (F(2), F(1), F(0))
    assert kp.simplex_values[(6, 8)] == (F(1), F(1, 2), F(0))
    assert kp.root_velocity() == (
        F(1), F(1, 2), F(0), F(0), F(0), F(0), F(0), F(0)
    )


def test_karpelevich_deterministic():
    assert karpelevich_limit(ex38_sequence()) == karpelevich_limit(
        ex38_sequence()
    )


def test_karpelevich_additive_invariance():
    shift = P([7, 3, 1])
    kp = karpelevich_limit(ex38_sequence())
    assert karpelevich_limit(ex38_sequence().shifted_by(shift)) == kp


def test_karpelevich_interior():
    kp = karpelevich_limit(
        PolySequence(1, 3, [P([2, 1]), P([1, 1]), P([0, 1])])
    )
    assert kp.is_interior()
    assert kp.cone_values[(1, 3)] == (F(2), F(1), F(0))


def test_karpelevich_nested():
    kp = karpelevich_limit(PolySequence(1, 3, [P([0, 0, 1]), P([0, 1]), P([0])]))
    assert kp.tree.members == frozenset(
        {(1, 3), (1, 1), (2, 3), (2, 2), (3, 3)}
    )
    assert kp.simplex_values[(1, 3)] == (F(1), F(0))
    assert kp.simplex_values[(2, 3)] == (F(1), F(0))


def test_root_velocity_matches_simple_limit(rng):
    for _ in range(20):
        n = rng.randint(2, 6)
        polys = []
        for i in range(n):
            deg = rng.randint(0, 3)
            coeffs = [F(rng.randint(0, 3)) for _ in range(deg)] + [
                F(rng.randint(1, 4))
            ]
            polys.append(P(coeffs))
        polys.sort(key=lambda p: (p.degree, p.leading), reverse=True)
        polys[-1] = P([0])
        try:
            seq = PolySequence(1, n, polys)
        except HingeLabError:
            continue
        simple = simple_velocity_limit(seq)
        kp = karpelevich_limit(seq)
        if simple is None:
            assert kp.is_interior()
        else:
            full = (F(1),) + simple.mu + (F(0),)
            assert kp.root_velocity() == full


# ---------------------------------------------------------------------------
# faces

def test_face_of_trivial_tree():
    f = face_of(trivial_tree(1, 4))
    assert len(f.factors) == 1
    assert f.factors[0].kind == "cone"
    assert f.dimension == 3


def test_face_of_minimal_trees():
    trees = enumerate_tree_partitions(1, 3)
    minimal = [t for t in trees if len(t.members) == 5]
    assert minimal and all(face_of(t).dimension == 0 for t in minimal)


def test_interval_pair_polyhedron_is_segment():
    trees = enumerate_tree_partitions(4, 5)
    dims = sorted(face_of(t).dimension for t in trees)
    assert dims == [0, 1]
    point = next(t for t in trees if len(t.members) == 3)
    half_line = next(t for t in trees if len(t.members) == 1)
    assert face_closure_leq(point, half_line)
    assert not face_closure_leq(half_line, point)


def test_face_dimension_census():
    # open faces of the closed simplex on m slots: the partitions with s
    # parts number C(m-1, s-1) and sum to 2^(m-1) - 1
    for m in range(2, 7):
        counts = {}
        for cuts in range(1, m):
            for pos in itertools.combinations(range(1, m), cuts):
                counts[cuts + 1] = counts.get(cuts + 1, 0) + 1
        assert all(counts[s] == math.comb(m - 1, s - 1) for s in counts)
        assert sum(counts.values()) == 2 ** (m - 1) - 1


def test_velocity_point_in_unique_open_face(rng):
    for _ in range(20):
        n = rng.randint(3, 6)
        mu = sorted(
            (F(rng.randint(0, 4), 4) for _ in range(n - 2)), reverse=True
        )
        v = VelocityPoint(tuple(mu), n)
        blocks = v.blocks()
        # the membership pattern determines the face uniquely
        assert sum(size for _, size in blocks) == n
        values = [val for val, _ in blocks]
        assert values[0] == 1 and values[-1] == 0
        assert all(values[i] > values[i + 1] for i in range(len(values) - 1))


# ---------------------------------------------------------------------------
# boundary face sequences

def test_face_sequence_constant():
    fs = FaceSequence(
        trivial_tree(1, 3),
        {(1, 3): PolySequence(1, 3, [P([2]), P([1]), P([0])])},
    )
    lim = boundary_face_sequence_limit(fs)
    assert lim.is_interior()
    assert lim.cone_values[(1, 3)] == (F(2), F(1), F(0))


def test_face_sequence_half_line_to_endpoint():
    fs = FaceSequence(
        trivial_tree(4, 5),
        {(4, 5): PolySequence(4, 5, [P([0, 1]), P([0])])},
    )
    lim = boundary_face_sequence_limit(fs)
    assert lim.tree.members == frozenset({(4, 5), (4, 4), (5, 5)})
    assert lim.simplex_values[(4, 5)] == (F(1), F(0))


def test_face_sequence_root_face_matches_karpelevich():
    seq = ex38_sequence()
    fs = FaceSequence(trivial_tree(1, 8), {(1, 8): seq})
    assert boundary_face_sequence_limit(fs) == karpelevich_limit(seq)


def test_face_sequence_tie_forms_new_member():
    # root children (1,1), (2,2), (3,4); the root component's second and
    # third values tie in the limit, creating the member (2,4)
    tree = TreePartition(1, 4, [(1, 4), (1, 1), (2, 2), (3, 4), (3, 3),
                                (4, 4)])
    comps = {
        (1, 4): PolySequence(1, 3, [P([0, 0, 1]), P([0, 1]), P([0])]),
        (3, 4): PolySequence(1, 2, [P([0, 3]), P([0])]),
    }
    fs = FaceSequence(tree, comps)
    pt = fs.point_at(10)
    assert pt.simplex_values[(1, 4)] == (F(1), F(1, 10), F(0))
    lim = boundary_face_sequence_limit(fs)
    assert (2, 4) in lim.tree.members
    assert lim.simplex_values[(1, 4)] == (F(1), F(0))
    assert lim.simplex_values[(2, 4)] == (F(1), F(0))
    assert lim.simplex_values[(3, 4)] == (F(1), F(0))
    assert face_closure_leq(lim.tree, tree)


def test_face_sequence_target_check():
    seq = ex38_sequence()
    fs = FaceSequence(trivial_tree(1, 8), {(1, 8): seq})
    target = karpelevich_limit(seq)
    assert boundary_face_sequence_limit(fs, target=target) == target
    wrong = karpelevich_limit(
        PolySequence(1, 8, [P([0, i]) for i in range(8, 0, -1)] [:7] + [P([0])])
    )
    with pytest.raises(HingeLabError):
        boundary_face_sequence_limit(fs, target=wrong)


def test_karpelevich_point_validation():
    tree = trivial_tree(1, 2)
    with pytest.raises(HingeLabError):
        KarpelevichPoint(tree, {(1, 2): (F(1), F(1))}, {})   # not ending at 0
    full = TreePartition(1, 2, [(1, 2), (1, 1), (2, 2)])
    with pytest.raises(HingeLabError):
        KarpelevichPoint(full, {}, {(1, 2): (F(1), F(1))})   # must reach 0
    KarpelevichPoint(full, {}, {(1, 2): (F(1), F(0))})
