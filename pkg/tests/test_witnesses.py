"""Finite witnesses: dyadic block families and sup-norm running indicators."""

from fractions import Fraction

import numpy as np
import pytest

from fbllab import (
    Budget,
    DyadicModel,
    ValidationError,
    c0_summing_demo,
    fbl_norm_k,
    l1_dyadic_family,
    l1_limit_check,
)

SMALL = Budget(starts=16, iters=400, seed=0)


# -- dyadic model ------------------------------------------------------------


def test_model_geometry():
    md = DyadicModel(3)
    assert md.dim == 8
    assert md.space.norm(np.ones(8)) == pytest.approx(1.0)
    assert md.block(1, 1) == slice(4, 8)
    y = md.y(2, 1)
    assert y.tolist() == [0, 0, 1, 1, 0, 0, 0, 0]
    assert md.space.norm(y) == pytest.approx(0.25)


def test_model_validation():
    with pytest.raises(ValidationError):
        DyadicModel(0)
    with pytest.raises(ValidationError):
        DyadicModel(9)
    md = DyadicModel(2)
    with pytest.raises(ValidationError):
        md.block(3, 0)
    with pytest.raises(ValidationError):
        md.block(1, 2)


def test_corner_values_and_rademacher():
    md = DyadicModel(3)
    corner = md.corner()
    for n in range(1, 4):
        assert md.f(n)(corner) == pytest.approx(1.0, abs=1e-12)
    # alternating signs cancel every level-1 block sum
    assert md.f(1)(md.rademacher(3)) == pytest.approx(0.0, abs=1e-12)
    # but cell-level evaluation sees every cell with full weight
    assert md.f(3)(md.rademacher(3)) == pytest.approx(8.0, abs=1e-12)


def test_member_norms_are_one():
    md = DyadicModel(2)
    for n in (1, 2):
        v, cert = fbl_norm_k(md.space, md.f(n), 1, budget=SMALL)
        assert 0.995 <= v <= 1.0 + 1e-9
        assert cert.exact


def test_family_is_directed():
    fam = l1_dyadic_family(DyadicModel(4))
    assert len(fam) == 4


# -- exact limit checks ---------------------------------------------------------


def test_limit_check_worked_example():
    # two block constants 3/4 and -1/2, constancy from level 1 on
    check = l1_limit_check(3, 1, (Fraction(3, 4), Fraction(-1, 2)))
    assert check.values[0] == Fraction(1)  # |sum y| = |4(3/4) + 4(-1/2)| = 1
    assert check.values[1] == check.integral == Fraction(5)
    assert check.values == (Fraction(1), Fraction(5), Fraction(5), Fraction(5))
    assert check.ok
    d = check.to_json()
    assert d["values"] == ["1", "5", "5", "5"]
    assert d["flags"] == {"values": "exact", "integral": "exact"}


def test_limit_check_deeper_constancy():
    vals = (Fraction(11, 2), Fraction(-1, 2), Fraction(2), Fraction(2))
    check = l1_limit_check(4, 2, vals)
    # below the constancy level cancellation can only shrink the value
    assert check.increasing
    assert check.integral == 4 * (Fraction(11, 2) + Fraction(1, 2) + 4)
    assert check.values[2] == check.values[3] == check.values[4] == check.integral
    assert check.ok


def test_limit_check_accepts_plain_numbers():
    check = l1_limit_check(2, 0, [7])
    assert check.integral == Fraction(28)
    assert check.ok


def test_limit_check_strictly_below_level():
    # opposite blocks: f_0 sees full cancellation, f_1 on sees the integral
    check = l1_limit_check(3, 1, (1, -1))
    assert check.values[0] == Fraction(0)
    assert check.values[1] == check.integral == Fraction(8)
    assert check.ok


def test_limit_check_validation():
    with pytest.raises(ValidationError):
        l1_limit_check(0, 0, [1])
    with pytest.raises(ValidationError):
        l1_limit_check(17, 0, [1])
    with pytest.raises(ValidationError):
        l1_limit_check(3, 4, [1])
    with pytest.raises(ValidationError):
        l1_limit_check(3, 1, [1, 2, 3])


# -- sup-norm indicators ---------------------------------------------------------


def test_c0_demo_exact_facts():
    demo = c0_summing_demo(10)
    assert demo.member_norms == tuple([1] * 10)
    assert demo.sup_profile == tuple([1] * 10)
    assert demo.sup_norm == 1
    assert demo.tail_all_ones
    # in the finite model the top member itself dominates the family
    assert demo.dominating_member_exists
    assert demo.label == "finite diagnostic"
    assert "text only" in demo.note
    d = demo.to_json()
    assert d["flags"] == {"member_norms": "exact", "sup_norm": "exact"}


def test_c0_demo_edge_and_validation():
    demo = c0_summing_demo(1)
    assert demo.sup_profile == (1,)
    assert demo.tail_all_ones
    with pytest.raises(ValidationError):
        c0_summing_demo(0)
