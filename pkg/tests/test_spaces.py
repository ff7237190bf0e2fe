"""Space descriptors: norms, duals, extreme points, constraints, nets."""

import itertools
import math

import numpy as np
import pytest

from fbllab import (
    ComputationError,
    DimensionMismatchError,
    Functional,
    Space,
    ValidationError,
    direct_sum,
    space_from_dict,
    sphere_net,
    summing_constraint,
    summing_constraint_detail,
)
from fbllab.spaces import make_constraint_batch


def hexagon():
    return Space.polytope(
        [[math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)] for k in range(6)]
    )


# -- construction and validation ---------------------------------------


def test_lp_rejects_bad_exponent():
    with pytest.raises(ValidationError):
        Space.lp(2, 0.5)


def test_weighted_l1_rejects_nonpositive_weights():
    with pytest.raises(ValidationError):
        Space.weighted_l1([1.0, 0.0])


def test_polytope_rejects_asymmetric_vertices():
    with pytest.raises(ValidationError):
        Space.polytope([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])


def test_polytope_rejects_rank_deficient_vertices():
    with pytest.raises(ValidationError):
        Space.polytope([[1.0, 0.0], [-1.0, 0.0]])


def test_dimension_mismatch_raises():
    sp = Space.lp(3, 2.0)
    with pytest.raises(DimensionMismatchError):
        sp.norm([1.0, 2.0])


# -- primal norms -------------------------------------------------------


def test_lp_norms_fixed_vectors():
    x = np.array([3.0, -4.0])
    assert Space.lp(2, 1.0).norm(x) == 7.0
    assert Space.lp(2, 2.0).norm(x) == 5.0
    assert Space.lp(2, math.inf).norm(x) == 4.0


def test_weighted_l1_norm():
    sp = Space.weighted_l1([0.5, 0.25])
    assert sp.norm([2.0, -4.0]) == pytest.approx(2.0)


def test_hexagon_gauge_on_vertices_and_interior():
    sp = hexagon()
    V = np.asarray(sp.vertex_array)
    assert sp.norm(V[0]) == pytest.approx(1.0, abs=1e-9)
    assert sp.norm(0.5 * V[1]) == pytest.approx(0.5, abs=1e-9)
    # midpoint of an edge is on the boundary too
    assert sp.norm(0.5 * (V[0] + V[1])) == pytest.approx(1.0, abs=1e-9)


def test_direct_sum_norms():
    ds = direct_sum([Space.lp(2, 1.0), Space.lp(2, 1.0)], math.inf)
    x = np.array([1.0, 0.0, 0.0, 1.0])
    assert ds.norm(x) == pytest.approx(1.0)
    ds1 = direct_sum([Space.lp(2, 1.0), Space.lp(2, 1.0)], 1.0)
    assert ds1.norm(x) == pytest.approx(2.0)


# -- dual norms ----------------------------------------------------------


def test_lp_dual_is_conjugate():
    f = np.array([3.0, -4.0])
    assert Space.lp(2, 1.0).dual_norm(f) == 4.0
    assert Space.lp(2, 2.0).dual_norm(f) == 5.0
    assert Space.lp(2, math.inf).dual_norm(f) == 7.0


def test_weighted_dual_norm_matches_vertex_enumeration():
    sp = Space.weighted_l1([0.5, 0.5])
    f = np.array([0.5, 0.25])
    # independent spelling: max of <f, v> over the primal extreme points
    V = sp.vertices()
    assert sp.dual_norm(f) == pytest.approx(np.abs(V @ f).max())
    assert sp.dual_norm(f) == pytest.approx(1.0)


def test_polytope_dual_norm_and_polar():
    sp = hexagon()
    assert sp.dual_norm([1.0, 0.0]) == pytest.approx(1.0, abs=1e-9)
    polar = sp.dual_vertices()
    assert len(polar) == 6
    # every polar vertex norms the primal ball to exactly 1
    vals = np.abs(polar @ np.asarray(sp.vertex_array).T).max(axis=1)
    assert np.allclose(vals, 1.0, atol=1e-9)


def test_direct_sum_dual_norm():
    ds = direct_sum([Space.lp(2, 1.0), Space.lp(2, 1.0)], math.inf)
    assert ds.dual_norm([1.0, 0.0, 0.0, 1.0]) == pytest.approx(2.0)


def test_dual_norm_dominates_sampled_sup_and_attained():
    rng = np.random.default_rng(3)
    for sp in (Space.lp(3, 2.0), Space.weighted_l1([1.0, 2.0, 0.5]), hexagon()):
        for _ in range(5):
            f = rng.standard_normal(sp.dim)
            d = sp.dual_norm(f)
            x = sp.norming_point(f)
            assert sp.norm(x) <= 1 + 1e-9
            assert float(f @ x) == pytest.approx(d, rel=1e-9)
            sample = sp.sphere_sample(rng, 200)
            assert (sample @ f).max() <= d + 1e-9


# -- extreme points -------------------------------------------------------


def test_vertices_l1_and_weighted():
    sp = Space.lp(2, 1.0)
    V = sp.vertices()
    assert sorted(map(tuple, V)) == sorted(
        [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
    )
    w = Space.weighted_l1([0.5, 0.25])
    Vw = w.vertices()
    assert np.allclose(np.abs(Vw).max(axis=0), [2.0, 4.0])


def test_dual_vertices_of_linf_and_l1():
    assert len(Space.lp(3, math.inf).dual_vertices()) == 6
    assert len(Space.lp(3, 1.0).dual_vertices()) == 8


def test_l2_has_no_vertex_list():
    assert Space.lp(3, 2.0).vertices() is None
    assert Space.lp(3, 2.0).dual_vertices() is None


def test_direct_sum_vertices_product_count():
    ds = direct_sum([Space.lp(2, 1.0), Space.lp(2, 1.0)], math.inf)
    assert len(ds.vertices()) == 16


def test_landmarks_live_on_dual_sphere():
    for sp in (Space.lp(3, 1.0), Space.weighted_l1([0.5, 1.0]), hexagon()):
        P = sp.landmarks()
        assert np.abs(sp.dual_norm_batch(P) - 1.0).max() <= 1e-9
        ones = np.ones(sp.dim) / sp.dual_norm(np.ones(sp.dim))
        assert min(np.abs(P - ones).sum(axis=1)) <= 1e-9


# -- summing constraint ---------------------------------------------------


def test_summing_constraint_basis_pairs():
    X = np.eye(2)
    assert summing_constraint(Space.lp(2, 1.0), X) == pytest.approx(1.0)
    assert summing_constraint(Space.lp(2, 2.0), X) == pytest.approx(math.sqrt(2.0))
    assert summing_constraint(Space.lp(2, math.inf), X) == pytest.approx(2.0)


def test_summing_constraint_p2_spectral():
    sp = Space.lp(3, 2.0)
    val, mode = summing_constraint_detail(sp, np.eye(3)[:2], p=2.0)
    assert mode == "spectral"
    assert val == pytest.approx(1.0)


def test_constraint_modes_are_exact_where_expected():
    assert make_constraint_batch(Space.lp(2, 1.0), 2, 1.0)[0] in ("signs", "vertices")
    assert make_constraint_batch(Space.lp(2, 2.0), 2, 1.0)[0] == "signs"
    assert make_constraint_batch(Space.lp(3, 2.0), 2, 2.0)[0] == "spectral"
    # no vertex list, p not 1, not the spectral case: only the heuristic is left
    assert make_constraint_batch(Space.lp(3, 1.5), 2, 1.5)[0] == "heuristic"


def test_sign_enumeration_agrees_with_chosen_evaluator():
    # two independent spellings of the same supremum for p = 1
    rng = np.random.default_rng(11)
    for sp in (Space.lp(2, 1.0), Space.lp(3, 1.0), Space.weighted_l1([0.5, 1.0, 2.0])):
        for k in (1, 2, 3, 4):
            X = sp.dual_sphere_sample(rng, k)
            got = summing_constraint(sp, X, p=1.0)
            best = 0.0
            for signs in itertools.product((-1.0, 1.0), repeat=k):
                best = max(best, sp.dual_norm(np.asarray(signs) @ X))
            assert got == pytest.approx(best, rel=1e-12)


def test_heuristic_constraint_is_a_lower_bound():
    sp = Space.lp(3, 1.5)
    rng = np.random.default_rng(5)
    X = sp.dual_sphere_sample(rng, 2)
    val, mode = summing_constraint_detail(sp, X, p=1.5)
    assert mode == "heuristic"
    # any primal point certifies from below
    probes = sp.sphere_sample(rng, 2000)
    lower = ((np.abs(probes @ X.T)) ** 1.5).sum(axis=1).max()
    assert val >= lower - 1e-9


def test_constraint_rejects_bad_exponent():
    with pytest.raises(ValidationError):
        summing_constraint(Space.lp(2, 1.0), np.eye(2), p=0.5)


# -- nets -----------------------------------------------------------------


def test_net_dim1_is_two_points():
    net = sphere_net(Space.lp(1, 2.0), 0.3)
    assert sorted(map(tuple, net)) == [(-1.0,), (1.0,)]


def test_net_l1_box_grid_size_and_coverage():
    sp = Space.lp(2, 1.0)
    net = sphere_net(sp, 0.5)
    assert len(net) <= 16
    assert np.abs(sp.dual_norm_batch(net) - 1.0).max() <= 1e-9


def test_net_l2_angular_size():
    sp = Space.lp(2, 2.0)
    net = sphere_net(sp, 0.1)
    assert len(net) <= 63
    # fresh coverage audit, independent of the internal check
    rng = np.random.default_rng(99)
    S = sp.dual_sphere_sample(rng, 3000)
    d = np.linalg.norm(S[:, None, :] - net[None, :, :], axis=-1)
    assert d.min(axis=1).max() <= 0.1 * (1 + 1e-9)


def test_net_dim3_greedy_coverage():
    sp = Space.lp(3, 2.0)
    net = sphere_net(sp, 0.5, seed=1)
    rng = np.random.default_rng(7)
    S = sp.dual_sphere_sample(rng, 2000)
    d = np.linalg.norm(S[:, None, :] - net[None, :, :], axis=-1)
    assert d.min(axis=1).max() <= 0.5 * (1 + 1e-9)


def test_net_is_cached():
    sp = Space.lp(2, 2.0)
    assert sphere_net(sp, 0.25) is sphere_net(sp, 0.25)


def test_net_rejects_bad_delta():
    with pytest.raises(ValidationError):
        sphere_net(Space.lp(2, 2.0), 1.5)


# -- descriptors and functionals -----------------------------------------


def test_space_from_dict_round_trip():
    for sp in (
        Space.lp(3, 2.0),
        Space.lp(2, math.inf),
        Space.weighted_l1([0.5, 0.25]),
        hexagon(),
        direct_sum([Space.lp(2, 1.0), Space.lp(1, 2.0)], 1.0),
    ):
        again = space_from_dict(sp.describe())
        assert again.key() == sp.key()


def test_space_from_dict_rejects_unknown_kind():
    with pytest.raises(ValidationError):
        space_from_dict({"kind": "banana", "dim": 2})


def test_functional_call_and_immutability():
    sp = Space.lp(2, 1.0)
    f = Functional(sp, np.array([1.0, 2.0]))
    assert f([3.0, 1.0]) == pytest.approx(5.0)
    assert f.dual_norm == pytest.approx(2.0)
    with pytest.raises(ValueError):
        f.coords[0] = 9.0
