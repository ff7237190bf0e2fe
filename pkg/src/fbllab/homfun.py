"""Positively homogeneous functions on the dual of a Space.

The lattice expressions generated by evaluation functionals delta_x live
here, together with the generic HomFn protocol that the norm machinery
consumes: anything with a space and a vectorized eval over stacks of dual
vectors.  Expression trees are immutable and are never simplified; the
string form follows the problem-file grammar

    delta [coords] | abs(e) | join(e,e) | meet(e,e) | add(e,e) | scale(c,e)
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from ._util import mix_seed
from .errors import DimensionMismatchError, ValidationError
from .spaces import Space

INCREASING_TOL = 1e-12
VALIDATION_COUNT = 512


class HomFn:
    """Base for positively homogeneous real functions on E*."""

    space: Space

    def eval_batch(self, F: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, f) -> float:
        f = np.asarray(f, dtype=float)
        if f.ndim != 1:
            raise ValidationError("__call__ takes one dual vector; use eval_batch for stacks")
        return float(self.eval_batch(f[None, :])[0])

    def exact_norm(self, p: float):
        """Closed-form free-lattice norm when one is known, else None."""
        return None


def evaluate(fn: HomFn, functional) -> float:
    """Evaluate a homogeneous function at one dual vector."""
    coords = getattr(functional, "coords", functional)
    return fn(coords)


# ----------------------------------------------------------------------
# lattice expression trees
# ----------------------------------------------------------------------


class LatticeExpr(HomFn):
    """Expression node; subclasses fix the kind.  Trees are immutable."""

    def children(self):
        return ()

    def __repr__(self):
        return to_string(self)


class Generator(LatticeExpr):
    def __init__(self, space: Space, x):
        self.space = space
        x = np.asarray(x, dtype=float)
        space._check_dim(x)
        x = x.copy()
        x.setflags(write=False)
        self.x = x

    def eval_batch(self, F):
        return F @ self.x

    def exact_norm(self, p: float):
        # the generator embedding is isometric for every p
        return self.space.norm(self.x)


class Scale(LatticeExpr):
    def __init__(self, c: float, child: LatticeExpr):
        self.space = child.space
        self.c = float(c)
        self.child = child

    def children(self):
        return (self.child,)

    def eval_batch(self, F):
        return self.c * self.child.eval_batch(F)

    def exact_norm(self, p: float):
        base = self.child.exact_norm(p)
        return None if base is None else abs(self.c) * base


class Abs(LatticeExpr):
    def __init__(self, child: LatticeExpr):
        self.space = child.space
        self.child = child

    def children(self):
        return (self.child,)

    def eval_batch(self, F):
        return np.abs(self.child.eval_batch(F))

    def exact_norm(self, p: float):
        # |f| has the same norm as f in any Banach lattice
        return self.child.exact_norm(p)


class _Binary(LatticeExpr):
    def __init__(self, left: LatticeExpr, right: LatticeExpr):
        if left.space.key() != right.space.key():
            raise DimensionMismatchError("operands live on different spaces")
        self.space = left.space
        self.left = left
        self.right = right

    def children(self):
        return (self.left, self.right)


class Sum(_Binary):
    def eval_batch(self, F):
        return self.left.eval_batch(F) + self.right.eval_batch(F)


class Join(_Binary):
    def eval_batch(self, F):
        return np.maximum(self.left.eval_batch(F), self.right.eval_batch(F))


class Meet(_Binary):
    def eval_batch(self, F):
        return np.minimum(self.left.eval_batch(F), self.right.eval_batch(F))


def delta(space: Space, x) -> Generator:
    """Evaluation functional delta_x as a lattice generator."""
    return Generator(space, x)


def absval(e: LatticeExpr) -> Abs:
    return Abs(e)


def add(a: LatticeExpr, b: LatticeExpr) -> Sum:
    return Sum(a, b)


def scale(c: float, e: LatticeExpr) -> Scale:
    return Scale(c, e)


def join(a: HomFn, b: HomFn):
    if isinstance(a, LatticeExpr) and isinstance(b, LatticeExpr):
        return Join(a, b)
    return MaxFn([a, b])


def meet(a: LatticeExpr, b: LatticeExpr) -> Meet:
    return Meet(a, b)


def to_string(e: LatticeExpr) -> str:
    if isinstance(e, Generator):
        inner = ", ".join(repr(float(v)) for v in e.x)
        return f"delta [{inner}]"
    if isinstance(e, Scale):
        return f"scale({e.c!r}, {to_string(e.child)})"
    if isinstance(e, Abs):
        return f"abs({to_string(e.child)})"
    if isinstance(e, Sum):
        return f"add({to_string(e.left)}, {to_string(e.right)})"
    if isinstance(e, Join):
        return f"join({to_string(e.left)}, {to_string(e.right)})"
    if isinstance(e, Meet):
        return f"meet({to_string(e.left)}, {to_string(e.right)})"
    raise ValidationError(f"not a lattice expression: {e!r}")


# ----------------------------------------------------------------------
# generic wrappers
# ----------------------------------------------------------------------


class MaxFn(HomFn):
    """Pointwise maximum of finitely many homogeneous functions."""

    def __init__(self, members):
        members = list(members)
        if not members:
            raise ValidationError("pointwise maximum of an empty family")
        self.space = members[0].space
        for m in members:
            if m.space.key() != self.space.key():
                raise DimensionMismatchError("family members live on different spaces")
        self.members = tuple(members)

    def eval_batch(self, F):
        out = self.members[0].eval_batch(F)
        for m in self.members[1:]:
            out = np.maximum(out, m.eval_batch(F))
        return out


class ScaledFn(HomFn):
    def __init__(self, c: float, base: HomFn):
        self.space = base.space
        self.c = float(c)
        self.base = base

    def eval_batch(self, F):
        return self.c * self.base.eval_batch(F)

    def exact_norm(self, p: float):
        b = self.base.exact_norm(p)
        return None if b is None else abs(self.c) * b


class FunctionFn(HomFn):
    """Wrap an arbitrary vectorized callable declared homogeneous by the caller."""

    def __init__(self, space: Space, fn, label: str = "custom"):
        self.space = space
        self.fn = fn
        self.label = label

    def eval_batch(self, F):
        return np.asarray(self.fn(F), dtype=float)


class ZeroFn(HomFn):
    def __init__(self, space: Space):
        self.space = space

    def eval_batch(self, F):
        return np.zeros(len(F))

    def exact_norm(self, p: float):
        return 0.0


# ----------------------------------------------------------------------
# directed families
# ----------------------------------------------------------------------


def validation_functionals(space: Space, seed: int = 0, count: int = VALIDATION_COUNT) -> np.ndarray:
    """Seeded dual-sphere sample plus all +-basis functionals, normalized."""
    rng = np.random.default_rng(mix_seed(seed, 31))
    basis = np.vstack([np.eye(space.dim), -np.eye(space.dim)])
    basis = basis / space.dual_norm_batch(basis)[:, None]
    return np.vstack([space.dual_sphere_sample(rng, count), basis])


@dataclass(frozen=True)
class DirectedFamily:
    """Finite family verified nondecreasing on a validation sample."""

    space: Space
    members: tuple

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @classmethod
    def from_members(cls, members, seed: int = 0, tol: float = INCREASING_TOL) -> "DirectedFamily":
        members = tuple(members)
        if not members:
            raise ValidationError("a directed family needs at least one member")
        space = members[0].space
        F = validation_functionals(space, seed)
        prev = members[0].eval_batch(F)
        worst = 0.0
        for m in members[1:]:
            cur = m.eval_batch(F)
            gap = float((prev - cur).max())
            worst = max(worst, gap)
            prev = cur
        if worst > tol:
            raise ValidationError(
                f"family is not nondecreasing on the validation sample (worst gap {worst:.3e})"
            )
        return cls(space=space, members=members)


def directify(items, seed: int = 0) -> DirectedFamily:
    """Running joins a_1, a_1 v a_2, ... of an arbitrary finite list."""
    items = list(items)
    if not items:
        raise ValidationError("directify of an empty list")
    running = [items[0]]
    for it in items[1:]:
        running.append(join(running[-1], it))
    return DirectedFamily.from_members(running, seed=seed)


def pointwise_sup(family: DirectedFamily, seed: int = 0) -> HomFn:
    """Pointwise supremum of a finite directed family, with a boundedness check."""
    sup = MaxFn(family.members)
    F = validation_functionals(family.space, seed)
    vals = sup.eval_batch(F)
    if not np.all(np.isfinite(vals)):
        raise ValidationError("unbounded values detected in the pointwise supremum")
    return sup


# ----------------------------------------------------------------------
# expression parsing
# ----------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<name>[A-Za-z_]+)|(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(?P<punct>[\[\](),]))"
)


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ValidationError(f"bad character in expression at offset {pos}: {text[pos:pos+10]!r}")
        if m.group("name"):
            out.append(("name", m.group("name"), pos))
        elif m.group("num"):
            out.append(("num", float(m.group("num")), pos))
        else:
            out.append(("punct", m.group("punct"), pos))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, space: Space, tokens):
        self.space = space
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("eof", None, -1)

    def take(self, kind, value=None):
        t = self.peek()
        if t[0] != kind or (value is not None and t[1] != value):
            raise ValidationError(f"expected {value or kind} at offset {t[2]}, got {t[1]!r}")
        self.i += 1
        return t

    def expr(self) -> LatticeExpr:
        kind, val, pos = self.peek()
        if kind != "name":
            raise ValidationError(f"expected an expression at offset {pos}, got {val!r}")
        self.i += 1
        if val == "delta":
            self.take("punct", "[")
            coords = []
            while True:
                coords.append(self.take("num")[1])
                if self.peek()[1] == ",":
                    self.take("punct", ",")
                else:
                    break
            self.take("punct", "]")
            return Generator(self.space, coords)
        if val == "abs":
            self.take("punct", "(")
            inner = self.expr()
            self.take("punct", ")")
            return Abs(inner)
        if val in ("join", "meet", "add"):
            self.take("punct", "(")
            a = self.expr()
            self.take("punct", ",")
            b = self.expr()
            self.take("punct", ")")
            return {"join": Join, "meet": Meet, "add": Sum}[val](a, b)
        if val == "scale":
            self.take("punct", "(")
            c = self.take("num")[1]
            self.take("punct", ",")
            inner = self.expr()
            self.take("punct", ")")
            return Scale(c, inner)
        raise ValidationError(f"unknown operation {val!r} at offset {pos}")


def parse_expr(space: Space, text: str) -> LatticeExpr:
    parser = _Parser(space, _tokenize(text))
    e = parser.expr()
    trailing = parser.peek()
    if trailing[0] != "eof":
        raise ValidationError(f"trailing input at offset {trailing[2]}: {trailing[1]!r}")
    return e


# ----------------------------------------------------------------------
# corpus generation and sampled regularity
# ----------------------------------------------------------------------


def random_expression(space: Space, rng, max_depth: int = 3, nonneg: bool = False) -> LatticeExpr:
    """Seeded random expression tree; resampled until it is not numerically zero."""

    def leaf():
        g = rng.standard_normal(space.dim)
        target = rng.uniform(0.5, 2.0)
        nrm = space.norm(g)
        gen = Generator(space, g * (target / nrm if nrm > 0 else 1.0))
        return Abs(gen) if nonneg else gen

    def build(depth):
        if depth <= 0 or rng.random() < 0.25:
            return leaf()
        ops = ["join", "add", "scale", "abs"] if nonneg else [
            "join", "meet", "add", "scale", "abs"
        ]
        op = ops[rng.integers(len(ops))]
        if op == "abs":
            return Abs(build(depth - 1))
        if op == "scale":
            c = rng.uniform(0.25, 2.0)
            if not nonneg and rng.random() < 0.5:
                c = -c
            return Scale(c, build(depth - 1))
        cls = {"join": Join, "meet": Meet, "add": Sum}[op]
        return cls(build(depth - 1), build(depth - 1))

    probe = validation_functionals(space, seed=int(rng.integers(2**31)), count=64)
    for _ in range(50):
        e = build(max_depth)
        if np.abs(e.eval_batch(probe)).max() > 0.05:
            return e
    raise ValidationError("could not draw a numerically nonzero expression")


def lipschitz_estimate(space: Space, fn: HomFn, seed: int = 0, samples: int = 1024) -> float:
    """Sampled difference-quotient bound on the dual sphere, with safety factor."""
    rng = np.random.default_rng(mix_seed(seed, 47))
    U = space.dual_sphere_sample(rng, samples)
    V = U + 0.02 * rng.standard_normal(U.shape)
    V = V / space.dual_norm_batch(V)[:, None]
    W = U[rng.permutation(samples)]
    best = 0.0
    for A, B in ((U, V), (U, W)):
        d = space.dual_norm_batch(A - B)
        ok = d > 1e-12
        if ok.any():
            q = np.abs(fn.eval_batch(A[ok]) - fn.eval_batch(B[ok])) / d[ok]
            best = max(best, float(q.max()))
    return 1.2 * best + 1e-12
