"""Finite witnesses of two limit phenomena.

* DyadicModel: over the weighted space of 2^m dyadic cells (weight 2^-m
  each), the block-average functions f_n = sum_j |delta at block j of level
  n| form an increasing family with every norm equal to 1, witnessed at the
  balanced corner of the dual ball.  Evaluations at block-constant rational
  points reduce to exact integrals of step functions, so the stabilization
  of the family can be checked in integer arithmetic.

* c0_summing_demo: in R^N with the sup norm, the running-indicator vectors
  s_n all have norm 1 and their coordinatewise least upper bound is the
  all-ones vector, again of norm 1, for every N.  The point of the
  diagnostic is the tail profile: it is identically 1 and never decays,
  which is the finite shadow of the fact that no vanishing-at-infinity
  element can dominate the whole family.  That infinite statement itself is
  not reproducible at any finite N and is recorded as a note, not a number.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .homfun import DirectedFamily, LatticeExpr, absval, add, delta
from .spaces import Space


def _fold(terms):
    while len(terms) > 1:
        nxt = [add(terms[i], terms[i + 1]) for i in range(0, len(terms) - 1, 2)]
        if len(terms) % 2:
            nxt.append(terms[-1])
        terms = nxt
    return terms[0]


class DyadicModel:
    """m dyadic levels; dimension 2^m with cell weight 2^-m."""

    def __init__(self, m: int):
        if not (1 <= m <= 8):
            raise ValidationError(f"levels must satisfy 1 <= m <= 8, got {m}")
        self.m = int(m)
        self.dim = 2**self.m
        self.space = Space.weighted_l1(np.full(self.dim, 2.0**-self.m))

    def block(self, n: int, j: int) -> slice:
        if not (0 <= n <= self.m):
            raise ValidationError(f"level must satisfy 0 <= n <= {self.m}, got {n}")
        if not (0 <= j < 2**n):
            raise ValidationError(f"block index must satisfy 0 <= j < {2 ** n}, got {j}")
        size = 2 ** (self.m - n)
        return slice(j * size, (j + 1) * size)

    def y(self, n: int, j: int) -> np.ndarray:
        """Indicator of block j at level n; primal norm 2^-n."""
        v = np.zeros(self.dim)
        v[self.block(n, j)] = 1.0
        return v

    def rademacher(self, n: int) -> np.ndarray:
        """Alternating block signs at level n; kills the balanced corner."""
        v = np.zeros(self.dim)
        for j in range(2**n):
            v[self.block(n, j)] = -1.0 if j % 2 else 1.0
        return v

    def f(self, n: int) -> LatticeExpr:
        """Sum over level-n blocks of |delta at the block indicator|."""
        terms = [absval(delta(self.space, self.y(n, j))) for j in range(2**n)]
        return _fold(terms)

    def corner(self) -> np.ndarray:
        """The balanced dual corner 2^-m (1, ..., 1); every f_n equals 1 there."""
        return np.full(self.dim, 2.0**-self.m)


def l1_dyadic_family(model: DyadicModel, seed: int = 0) -> DirectedFamily:
    """f_1 <= f_2 <= ... <= f_m as a verified directed family."""
    members = [model.f(n) for n in range(1, model.m + 1)]
    return DirectedFamily.from_members(members, seed=seed)


@dataclass(frozen=True)
class LimitCheck:
    """Exact evaluation of the family at one block-constant rational point."""

    level: int
    values: tuple  # Fraction f_j(y*) for j = 0..m
    integral: Fraction
    increasing: bool
    equal_from_level: bool

    @property
    def ok(self) -> bool:
        return self.increasing and self.equal_from_level

    def to_json(self):
        return {
            "level": self.level,
            "values": [str(v) for v in self.values],
            "integral": str(self.integral),
            "increasing": self.increasing,
            "equal_from_level": self.equal_from_level,
            "ok": self.ok,
            "flags": {"values": "exact", "integral": "exact"},
        }


def l1_limit_check(m: int, level: int, values) -> LimitCheck:
    """Exact rational check of the stabilization identity.

    values are the 2^level constants of a block-constant dual point y*.  For
    every j the evaluation f_j(y*) is the sum of absolute block sums; it is
    nondecreasing in j and, from j = level on, equals the exact integral of
    the step function with heights 2^m y*_i on cells of length 2^-m."""
    if not (1 <= m <= 16):
        raise ValidationError(f"levels must satisfy 1 <= m <= 16, got {m}")
    if not (0 <= level <= m):
        raise ValidationError(f"constancy level must satisfy 0 <= level <= {m}, got {level}")
    vals = [Fraction(v) for v in values]
    if len(vals) != 2**level:
        raise ValidationError(f"expected {2 ** level} block constants, got {len(vals)}")
    reps = 2 ** (m - level)
    y = [v for v in vals for _ in range(reps)]
    integral = sum((abs(v) for v in y), Fraction(0)) * Fraction(1, 1)
    # integral of |h|, h piecewise 2^m y_i on cells of length 2^-m:
    # sum_i 2^-m * |2^m y_i| = sum_i |y_i|
    fj = []
    for j in range(m + 1):
        size = 2 ** (m - j)
        total = Fraction(0)
        for b in range(2**j):
            total += abs(sum(y[b * size : (b + 1) * size], Fraction(0)))
        fj.append(total)
    increasing = all(fj[j] <= fj[j + 1] for j in range(m))
    equal_from = all(fj[j] == integral for j in range(level, m + 1))
    return LimitCheck(
        level=level,
        values=tuple(fj),
        integral=integral,
        increasing=increasing,
        equal_from_level=equal_from,
    )


@dataclass(frozen=True)
class C0Demo:
    """Sup-norm running indicators: everything is exact integer arithmetic."""

    N: int
    member_norms: tuple
    sup_profile: tuple
    sup_norm: int
    tail_all_ones: bool
    dominating_member_exists: bool
    label: str
    note: str

    def to_json(self):
        return {
            "N": self.N,
            "member_norms": list(self.member_norms),
            "sup_profile": list(self.sup_profile),
            "sup_norm": self.sup_norm,
            "tail_all_ones": self.tail_all_ones,
            "dominating_member_exists": self.dominating_member_exists,
            "label": self.label,
            "note": self.note,
            "flags": {"member_norms": "exact", "sup_norm": "exact"},
        }


def c0_summing_demo(N: int) -> C0Demo:
    """Running indicators s_n = e_1 + ... + e_n in R^N with the sup norm.

    Every member has norm exactly 1; the coordinatewise least upper bound is
    the all-ones vector, also of norm 1.  The interesting part is what does
    not shrink: the upper bound's tail profile is 1 in every coordinate, at
    every N.  Inside the finite model the bound is itself a member (s_N), so
    the demo is labeled a finite diagnostic; the statement that no limit
    object with vanishing tail exists is about the infinite situation and is
    recorded only as text."""
    if N < 1:
        raise ValidationError(f"N must be >= 1, got {N}")
    s = [[1 if i < n else 0 for i in range(N)] for n in range(1, N + 1)]
    profile = [max(row[i] for row in s) for i in range(N)]
    member_norms = tuple(max(row) for row in s)
    return C0Demo(
        N=N,
        member_norms=member_norms,
        sup_profile=tuple(profile),
        sup_norm=max(profile),
        tail_all_ones=all(v == 1 for v in profile),
        dominating_member_exists=s[-1] == profile,
        label="finite diagnostic",
        note=(
            "At every finite N the coordinatewise least upper bound is the "
            "all-ones vector: norm 1, tail identically 1.  The infinite "
            "assertion, that no element with vanishing tail can dominate the "
            "whole family, concerns the limit N -> infinity and is not a "
            "finitely checkable quantity; it is reported here as text only."
        ),
    )
