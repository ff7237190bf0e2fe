"""Acceptance gate: ten numbered criteria, one PASS/FAIL line each.

Each test computes its verdict first, prints exactly one line of the form
``PASS criterion N <name>: <detail>``, then asserts.  Runtime caps are part
of the criteria and are asserted alongside the numeric checks.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from fbllab import (
    Budget,
    DirectedFamily,
    DyadicModel,
    GPhiFn,
    MaxFn,
    Space,
    absval,
    c0_summing_demo,
    combine_direct_sum,
    cover_upper_bound,
    delta,
    directify,
    fbl_norm,
    fbl_norm_k,
    g_phi,
    g_phi_norm,
    join,
    l1_dyadic_family,
    l1_limit_check,
    lambda_probe,
    lipschitz_estimate,
    meet,
    oracle_norm_net,
    random_expression,
    strong_nakano_report,
)

L1_2 = Space.lp(2, 1.0)
L2_2 = Space.lp(2, 2.0)


def report(num, name, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} criterion {num} {name}: {detail}")


@pytest.fixture(scope="module")
def expression_corpus():
    """20 expressions of depth <= 3 over the two reference planes."""
    corpus = []
    for si, sp in enumerate((L1_2, L2_2)):
        rng = np.random.default_rng(100 + si)
        for _ in range(10):
            f = random_expression(sp, rng, max_depth=3)
            corpus.append((sp, f))
    return corpus


def test_criterion_1_evaluation_isometry():
    t0 = time.perf_counter()
    budget = Budget(starts=8, iters=300, seed=0)
    worst = 0.0
    for si, sp in enumerate(
        (Space.lp(3, 1.0), Space.lp(3, 2.0), Space.lp(3, math.inf))
    ):
        rng = np.random.default_rng(200 + si)
        for _ in range(100):
            x = rng.standard_normal(3) * rng.uniform(0.1, 10.0)
            v, _ = fbl_norm_k(sp, delta(sp, x), 1, budget=budget)
            worst = max(worst, abs(v - sp.norm(x)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 10.0
    report(1, "evaluation isometry", ok, f"worst gap {worst:.3e} over 300 points in {elapsed:.1f}s")
    assert worst <= 1e-6
    assert elapsed < 10.0


def test_criterion_2_oracle_equivalence(expression_corpus):
    t0 = time.perf_counter()
    budget = Budget(starts=24, iters=600, seed=0)
    eta = 0.05
    worst, worst_tol = 0.0, math.inf
    for sp, f in expression_corpus:
        lip = lipschitz_estimate(sp, f)
        tol = 2.0 * eta * lip
        for k in (1, 2):
            v, _ = fbl_norm_k(sp, f, k, budget=budget)
            o = oracle_norm_net(sp, f, k, eta=eta)
            gap = abs(v - o)
            if gap / tol > worst / max(worst_tol, 1e-300):
                worst, worst_tol = gap, tol
            assert gap <= tol, (gap, tol)
    elapsed = time.perf_counter() - t0
    ok = elapsed < 120.0
    report(
        2,
        "oracle equivalence",
        ok,
        f"worst gap {worst:.3e} (allowed {worst_tol:.3e}) over 20 expressions in {elapsed:.1f}s",
    )
    assert elapsed < 120.0


def test_criterion_3_hand_derived_norms():
    budget = Budget(starts=16, iters=400, seed=0)
    e = np.eye(2)
    vj, _ = fbl_norm_k(
        L1_2, join(absval(delta(L1_2, e[0])), absval(delta(L1_2, e[1]))), 2, budget=budget
    )
    vm, _ = fbl_norm_k(
        L1_2, meet(absval(delta(L1_2, e[0])), absval(delta(L1_2, e[1]))), 2, budget=budget
    )
    ok = abs(vj - 2.0) <= 1e-3 and abs(vm - 1.0) <= 1e-3
    report(3, "hand-derived norms", ok, f"join {vj:.6f} (want 2), meet {vm:.6f} (want 1)")
    assert abs(vj - 2.0) <= 1e-3
    assert abs(vm - 1.0) <= 1e-3


def test_criterion_4_k_monotonicity_and_probe(expression_corpus):
    budget = Budget(starts=16, iters=300, seed=0)
    worst_drop = 0.0
    for sp, f in expression_corpus:
        vals = [fbl_norm_k(sp, f, k, budget=budget)[0] for k in (1, 2, 3, 4)]
        for a, b in zip(vals, vals[1:]):
            worst_drop = max(worst_drop, a - b)
        probe = lambda_probe(sp, f, [1, 2, 3, 4], budget=budget)
        ratios = [r.ratio for r in probe.rows]
        assert all(r >= 1.0 - 1e-12 for r in ratios)
        for a, b in zip(ratios, ratios[1:]):
            assert b <= a + 1e-12
    ok = worst_drop <= 1e-9
    report(4, "k-monotonicity and probe sanity", ok, f"worst decrease {worst_drop:.3e}")
    assert worst_drop <= 1e-9


def test_criterion_5_coefficient_function_suite():
    t0 = time.perf_counter()
    budget = Budget(starts=16, iters=300, seed=0)
    rng = np.random.default_rng(500)
    worst_norm, worst_fbl, worst_prop = 0.0, 0.0, 0.0
    for i in range(50):
        n = int(rng.integers(2, 4))
        p = 1.0 if i % 2 == 0 else 2.0
        sp = Space.lp(n, 1.0)
        phi = rng.uniform(-1.0, 1.0, size=n)
        phi[np.abs(phi) < 0.1] = 0.25
        # closed-form norm identity, any sign pattern
        expected = float(np.abs(phi).sum() ** (1.0 / p))
        worst_norm = max(worst_norm, abs(g_phi_norm(sp, phi, p=p) - expected))
        # search agreement on the plane or 3-space
        est = fbl_norm(sp, GPhiFn(sp, phi, p), p=p, k_max=4, budget=budget)
        worst_fbl = max(worst_fbl, abs(est.value - expected))
        # maximality properties of the positive-coefficient counterpart:
        # nonnegativity, dependence on moduli only, monotonicity in moduli
        g = GPhiFn(sp, np.abs(phi), p)
        F = sp.dual_sphere_sample(rng, 1000)
        gv = g.eval_batch(np.abs(F))
        worst_prop = max(worst_prop, float(-g.eval_batch(F).min()))
        worst_prop = max(worst_prop, float(np.abs(g.eval_batch(F) - gv).max()))
        shrink = g.eval_batch(np.abs(F) * rng.uniform(0.0, 1.0, size=F.shape))
        worst_prop = max(worst_prop, float((shrink - gv).max()))
    elapsed = time.perf_counter() - t0
    ok = worst_norm <= 1e-12 and worst_fbl <= 5e-3 and worst_prop <= 1e-9 and elapsed < 180.0
    report(
        5,
        "coefficient-function suite",
        ok,
        f"norm gap {worst_norm:.1e}, search gap {worst_fbl:.1e}, "
        f"property gap {worst_prop:.1e} over 50 draws in {elapsed:.1f}s",
    )
    assert worst_norm <= 1e-12
    assert worst_fbl <= 5e-3
    assert worst_prop <= 1e-9
    assert elapsed < 180.0


def nested_mask_family(sp, psi, seed, p):
    rng = np.random.default_rng(seed)
    order = rng.permutation(sp.dim)
    members, mask = [], np.zeros(sp.dim)
    for i in order:
        mask = mask.copy()
        mask[i] = 1.0
        members.append(GPhiFn(sp, psi * mask, p))
    return DirectedFamily.from_members(members)


def test_criterion_6_strong_nakano_on_l1():
    t0 = time.perf_counter()
    worst_ratio, worst_sum, worst_dom = 0.0, 0.0, 0.0
    for s in range(10):
        sp = Space.lp(2 if s < 5 else 3, 1.0)
        p = 1.0 if s % 2 == 0 else 2.0
        rng = np.random.default_rng(600 + s)
        psi = rng.uniform(0.2, 1.0, size=sp.dim)
        psi = psi / psi.sum()  # sup member norm is exactly 1 for either p
        fam = nested_mask_family(sp, psi, 600 + s, p)
        rep = strong_nakano_report(sp, fam, method="maximal", p=p, seed=s)
        phi = np.asarray(rep.phi)
        worst_ratio = max(worst_ratio, abs(rep.ratio - 1.0))
        worst_sum = max(worst_sum, float(phi.sum()) - 1.0)
        h = MaxFn(tuple(fam))
        g = GPhiFn(sp, phi, p)
        F = sp.dual_sphere_sample(np.random.default_rng(6000 + s), 10_000)
        worst_dom = max(worst_dom, float((h.eval_batch(F) - g.eval_batch(F)).max()))
    elapsed = time.perf_counter() - t0
    ok = (
        worst_ratio <= 1e-3
        and worst_sum <= 1e-3
        and worst_dom <= 1e-6
        and elapsed < 300.0
    )
    report(
        6,
        "strong Nakano ratio",
        ok,
        f"worst |ratio-1| {worst_ratio:.1e}, coefficient excess {worst_sum:.1e}, "
        f"domination gap {worst_dom:.1e} over 10 families in {elapsed:.1f}s",
    )
    assert worst_ratio <= 1e-3
    assert worst_sum <= 1e-3
    assert worst_dom <= 1e-6
    assert elapsed < 300.0


def test_criterion_7_cover_construction():
    t0 = time.perf_counter()
    budget = Budget(starts=24, iters=500, seed=0)
    worst_ratio, worst_dom = 0.0, 0.0
    for s in range(10):
        sp = L2_2 if s < 5 else L1_2
        rng = np.random.default_rng(700 + s)
        members = [random_expression(sp, rng, max_depth=2, nonneg=True) for _ in range(3)]
        fam = directify(members, seed=s)
        f = MaxFn(tuple(fam))
        res = cover_upper_bound(sp, f, k=2, eps=0.1, seed=s, budget=budget)
        assert res.cover_value <= 1.1 * res.base_value + 1e-6
        worst_ratio = max(worst_ratio, res.ratio)
        F = sp.dual_sphere_sample(np.random.default_rng(7000 + s), 4000)
        worst_dom = max(worst_dom, float((f.eval_batch(F) - res.g.eval_batch(F)).max()))
    elapsed = time.perf_counter() - t0
    ok = worst_ratio <= 1.1 + 1e-9 and worst_dom <= 1e-9 and elapsed < 300.0
    report(
        7,
        "cover construction",
        ok,
        f"worst ratio {worst_ratio:.4f} (cap 1.1), domination gap {worst_dom:.1e} "
        f"over 10 families in {elapsed:.1f}s",
    )
    assert worst_ratio <= 1.1 + 1e-9
    assert worst_dom <= 1e-9
    assert elapsed < 300.0


def test_criterion_8_block_average_witness():
    t0 = time.perf_counter()
    budget = Budget(starts=16, iters=400, seed=0)
    md = DyadicModel(4)
    lo, hi = math.inf, 0.0
    for n in range(1, 5):
        v, _ = fbl_norm_k(md.space, md.f(n), 4, budget=budget)
        lo, hi = min(lo, v), max(hi, v)
    fam = l1_dyadic_family(md)  # raises if not increasing on samples
    rng = np.random.default_rng(800)
    checks_ok = True
    for _ in range(20):
        level = int(rng.integers(0, md.m + 1))
        vals = [
            Fraction(int(rng.integers(-8, 9)), int(rng.integers(1, 7)))
            for _ in range(2**level)
        ]
        checks_ok = checks_ok and l1_limit_check(md.m, level, vals).ok
    elapsed = time.perf_counter() - t0
    ok = 0.995 <= lo and hi <= 1.0 + 1e-9 and checks_ok and len(fam) == 4 and elapsed < 120.0
    report(
        8,
        "block-average witness",
        ok,
        f"norms in [{lo:.6f}, {hi:.6f}], 20 exact stabilization checks, "
        f"family of {len(fam)} in {elapsed:.1f}s",
    )
    assert 0.995 <= lo
    assert hi <= 1.0 + 1e-9
    assert checks_ok
    assert elapsed < 120.0


def test_criterion_9_direct_sum_combination():
    worst_excess = -math.inf
    for s in range(5):
        rng = np.random.default_rng(900 + s)
        reports = []
        for _ in range(2):
            a, b = rng.uniform(0.5, 2.0, size=2)
            members = [g_phi(L1_2, [a, 0.0]), g_phi(L1_2, [0.0, b])]
            reports.append(
                strong_nakano_report(L1_2, members, method="maximal", p=1.0, seed=s)
            )
        out = combine_direct_sum(reports, p=1.0)
        assert out["invariant_ok"]
        worst_excess = max(
            worst_excess, out["combined_ratio"] - out["max_component_ratio"]
        )
    ok = worst_excess <= 1e-3
    report(
        9,
        "direct-sum combination",
        ok,
        f"worst combined-minus-max ratio {worst_excess:.3e} over 5 instances",
    )
    assert worst_excess <= 1e-3


def test_criterion_10_stated_limits_and_tail_profile():
    tails_ok = True
    for N in range(1, 11):
        demo = c0_summing_demo(N)
        tails_ok = tails_ok and demo.tail_all_ones and demo.sup_norm == 1
        tails_ok = tails_ok and demo.member_norms == tuple([1] * N)
    ok = tails_ok
    report(
        10,
        "desk-scale limits",
        ok,
        "not reproducible here: the universal truncation constant and its "
        "certificate-length sequence (non-constructive), the infinite-dimensional "
        "contradiction arguments, and the nonseparable sup-norm example; "
        "substituted by criteria 2, 4, 7, 8 and this exact all-ones tail profile "
        f"for N <= 10 (exact: {tails_ok})",
    )
    assert tails_ok
