"""Finite-dimensional normed spaces with computable primal and dual norms.

A Space is one of four descriptors:

* ``lp``          -- R^n with the p-norm, p in [1, inf]
* ``weighted_l1`` -- R^n with sum_i w_i |x_i|, w_i > 0
* ``polytope``    -- R^n with the Minkowski gauge of a symmetric spanning
                     vertex list (gauge evaluated by linear programming)
* ``direct_sum``  -- l_p-sum of component spaces

Everything downstream (certificate norms, covers, majorants) only ever talks
to a space through: the primal norm, the dual norm, extreme points of the
primal/dual ball when they exist, sphere samples, and delta-nets of the dual
sphere.  All norm evaluations are batch-vectorized; the gauge LP is the one
exception and only runs at API boundaries.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ._util import mix_seed
from .errors import (
    ComputationError,
    DimensionMismatchError,
    ValidationError,
)

_NET_CACHE: dict = {}
_SIGN_CACHE: dict = {}
_DUAL_VERTEX_CACHE: dict = {}

GAUGE_TOL = 1e-9
SPHERE_TOL = 1e-9


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1.0)


def _pnorm_rows(F: np.ndarray, p: float) -> np.ndarray:
    if p == math.inf:
        return np.abs(F).max(axis=-1)
    if p == 1:
        return np.abs(F).sum(axis=-1)
    if p == 2:
        return np.sqrt((F * F).sum(axis=-1))
    return (np.abs(F) ** p).sum(axis=-1) ** (1.0 / p)


class Space:
    """One normed space.  Construct through the classmethods."""

    def __init__(self, kind, dim, p=None, weights=None, vertices=None, components=None):
        self.kind = kind
        self.dim = int(dim)
        self.p = p
        self.weights = weights
        self.vertex_array = vertices
        self.components = components
        if self.dim < 1:
            raise ValidationError(f"dimension must be >= 1, got {dim}")

    # -- constructors --------------------------------------------------

    @classmethod
    def lp(cls, dim: int, p: float) -> "Space":
        p = float(p)
        if not (p >= 1.0):
            raise ValidationError(f"p-norm exponent must satisfy p >= 1, got {p}")
        return cls("lp", dim, p=p)

    @classmethod
    def weighted_l1(cls, weights) -> "Space":
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or len(w) < 1:
            raise ValidationError("weights must be a nonempty 1-d sequence")
        if not np.all(w > 0):
            raise ValidationError("weighted_l1 weights must be strictly positive")
        w = w.copy()
        w.setflags(write=False)
        return cls("weighted_l1", len(w), weights=w)

    @classmethod
    def polytope(cls, vertices) -> "Space":
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] < 2:
            raise ValidationError("polytope needs a 2-d array with >= 2 vertices")
        n = V.shape[1]
        # symmetric: every vertex must have its negation in the list
        keys = {tuple(np.round(v, 12)) for v in V}
        for v in V:
            if tuple(np.round(-v, 12)) not in keys:
                raise ValidationError("polytope vertex list is not symmetric")
        if np.linalg.matrix_rank(V) < n:
            raise ValidationError("polytope vertex list does not span R^n (gauge infinite)")
        V = V.copy()
        V.setflags(write=False)
        return cls("polytope", n, vertices=V)

    @classmethod
    def direct_sum(cls, components, p: float) -> "Space":
        p = float(p)
        if not (p >= 1.0):
            raise ValidationError(f"direct-sum exponent must satisfy p >= 1, got {p}")
        comps = tuple(components)
        if len(comps) < 1:
            raise ValidationError("direct_sum needs at least one component")
        for c in comps:
            if not isinstance(c, Space):
                raise ValidationError("direct_sum components must be Space instances")
        dim = sum(c.dim for c in comps)
        return cls("direct_sum", dim, p=p, components=comps)

    # -- identity ------------------------------------------------------

    def key(self):
        if self.kind == "lp":
            return ("lp", self.dim, float(self.p))
        if self.kind == "weighted_l1":
            return ("weighted_l1", tuple(np.round(self.weights, 14)))
        if self.kind == "polytope":
            return ("polytope", tuple(map(tuple, np.round(self.vertex_array, 14))))
        return ("direct_sum", float(self.p), tuple(c.key() for c in self.components))

    def __repr__(self):
        if self.kind == "lp":
            return f"Space.lp({self.dim}, p={self.p})"
        if self.kind == "weighted_l1":
            return f"Space.weighted_l1({list(np.round(self.weights, 6))})"
        if self.kind == "polytope":
            return f"Space.polytope(<{len(self.vertex_array)} vertices, dim {self.dim}>)"
        return f"Space.direct_sum({list(self.components)}, p={self.p})"

    def describe(self) -> dict:
        d = {"kind": self.kind, "dim": self.dim}
        if self.kind == "lp":
            d["p"] = "inf" if self.p == math.inf else self.p
        elif self.kind == "weighted_l1":
            d["weights"] = list(self.weights)
        elif self.kind == "polytope":
            d["vertices"] = [list(v) for v in self.vertex_array]
        else:
            d["p"] = "inf" if self.p == math.inf else self.p
            d["components"] = [c.describe() for c in self.components]
        return d

    def component_slices(self):
        out, start = [], 0
        for c in self.components:
            out.append(slice(start, start + c.dim))
            start += c.dim
        return out

    def _check_dim(self, arr: np.ndarray):
        if arr.shape[-1] != self.dim:
            raise DimensionMismatchError(
                f"expected vectors of length {self.dim}, got {arr.shape[-1]}"
            )

    # -- primal norm ---------------------------------------------------

    def norm(self, x) -> float:
        x = np.asarray(x, dtype=float)
        self._check_dim(x)
        return float(self.norm_batch(x[None, :])[0])

    def norm_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        self._check_dim(X)
        if self.kind == "lp":
            return _pnorm_rows(X, self.p)
        if self.kind == "weighted_l1":
            return np.abs(X) @ self.weights
        if self.kind == "polytope":
            return np.array([self._gauge(x) for x in X])
        parts = np.stack(
            [c.norm_batch(X[:, sl]) for c, sl in zip(self.components, self.component_slices())],
            axis=-1,
        )
        return _pnorm_rows(parts, self.p)

    def _gauge(self, x: np.ndarray) -> float:
        # min sum(lam) s.t. V^T lam = x, lam >= 0; finite because V spans
        V = self.vertex_array
        res = linprog(
            np.ones(len(V)),
            A_eq=V.T,
            b_eq=x,
            bounds=[(0, None)] * len(V),
            method="highs",
        )
        if not res.success:
            raise ComputationError(f"gauge LP failed: {res.message}")
        return float(res.fun)

    # -- dual norm -----------------------------------------------------

    def dual_norm(self, f) -> float:
        f = np.asarray(f, dtype=float)
        self._check_dim(f)
        return float(self.dual_norm_batch(f[None, :])[0])

    def dual_norm_batch(self, F: np.ndarray) -> np.ndarray:
        F = np.asarray(F, dtype=float)
        self._check_dim(F)
        if self.kind == "lp":
            return _pnorm_rows(F, conjugate_exponent(self.p))
        if self.kind == "weighted_l1":
            # dual of sum w|x| is the weighted sup max |f_i| / w_i
            return (np.abs(F) / self.weights).max(axis=-1)
        if self.kind == "polytope":
            return np.abs(F @ self.vertex_array.T).max(axis=-1)
        parts = np.stack(
            [
                c.dual_norm_batch(F[:, sl])
                for c, sl in zip(self.components, self.component_slices())
            ],
            axis=-1,
        )
        return _pnorm_rows(parts, conjugate_exponent(self.p))

    # -- extreme points ------------------------------------------------

    def vertices(self, max_count: int = 4096):
        """Extreme points of the primal unit ball, or None when not finite."""
        n = self.dim
        if self.kind == "lp":
            if self.p == 1:
                return np.vstack([np.eye(n), -np.eye(n)])
            if self.p == math.inf:
                if 2**n > max_count:
                    return None
                return np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
            return None
        if self.kind == "weighted_l1":
            E = np.vstack([np.eye(n), -np.eye(n)])
            return E / np.tile(self.weights, 2)[:, None]
        if self.kind == "polytope":
            return self.vertex_array
        if self.p == 1:
            out = []
            for c, sl in zip(self.components, self.component_slices()):
                cv = c.vertices(max_count)
                if cv is None:
                    return None
                block = np.zeros((len(cv), n))
                block[:, sl] = cv
                out.append(block)
            V = np.vstack(out)
            return V if len(V) <= max_count else None
        if self.p == math.inf:
            lists = []
            total = 1
            for c in self.components:
                cv = c.vertices(max_count)
                if cv is None:
                    return None
                lists.append(cv)
                total *= len(cv)
                if total > max_count:
                    return None
            V = np.zeros((total, n))
            for rows, parts in zip(V, itertools.product(*lists)):
                rows[:] = np.concatenate(parts)
            return V
        return None

    def dual_vertices(self, max_count: int = 4096):
        """Extreme points of the dual unit ball, or None."""
        ck = (self.key(), max_count)
        if ck in _DUAL_VERTEX_CACHE:
            return _DUAL_VERTEX_CACHE[ck]
        out = self._dual_vertices(max_count)
        _DUAL_VERTEX_CACHE[ck] = out
        return out

    def _dual_vertices(self, max_count):
        n = self.dim
        if self.kind == "lp":
            if self.p == 1:
                if 2**n > max_count:
                    return None
                return np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
            if self.p == math.inf:
                return np.vstack([np.eye(n), -np.eye(n)])
            return None
        if self.kind == "weighted_l1":
            if 2**n > max_count:
                return None
            S = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
            return S * self.weights
        if self.kind == "polytope":
            return self._polar_vertices()
        if self.p == math.inf:
            # dual is the l1-sum of duals: union of embedded extreme points
            out = []
            for c, sl in zip(self.components, self.component_slices()):
                dv = c.dual_vertices(max_count)
                if dv is None:
                    return None
                block = np.zeros((len(dv), n))
                block[:, sl] = dv
                out.append(block)
            V = np.vstack(out)
            return V if len(V) <= max_count else None
        if self.p == 1:
            # dual is the sup-sum of duals: products of component extremes
            lists = []
            total = 1
            for c in self.components:
                dv = c.dual_vertices(max_count)
                if dv is None:
                    return None
                lists.append(dv)
                total *= len(dv)
                if total > max_count:
                    return None
            V = np.zeros((total, n))
            for rows, parts in zip(V, itertools.product(*lists)):
                rows[:] = np.concatenate(parts)
            return V
        return None

    def _polar_vertices(self):
        V = self.vertex_array
        if self.dim == 1:
            c = np.abs(V).max()
            return np.array([[1.0 / c], [-1.0 / c]])
        try:
            from scipy.spatial import ConvexHull

            hull = ConvexHull(V)
        except Exception:
            return None
        eqs = hull.equations  # rows [a, b] with a.x + b <= 0 on the hull
        out = []
        for row in eqs:
            a, b = row[:-1], row[-1]
            if b >= -1e-12:
                return None  # origin not strictly interior; give up
            out.append(a / (-b))
        out = np.unique(np.round(np.array(out), 12), axis=0)
        return out

    # -- designated points ----------------------------------------------

    def landmarks(self, max_count: int = 64, seed: int = 0) -> np.ndarray:
        """Deterministic dual-sphere points used as optimizer anchors.

        Always contains the normalized +-basis functionals and the
        normalized +-all-ones functional; dual-ball extreme points are
        appended when the list is small, a seeded sample of them otherwise.
        """
        n = self.dim
        pts = []
        eye = np.eye(n)
        for i in range(n):
            pts.append(eye[i])
            pts.append(-eye[i])
        ones = np.ones(n)
        pts.append(ones)
        pts.append(-ones)
        P = np.array(pts)
        P = P / self.dual_norm_batch(P)[:, None]
        dv = self.dual_vertices(max_count=max_count)
        if dv is not None:
            P = np.vstack([P, dv])
        elif self.kind in ("lp", "weighted_l1") and self.dim > 2:
            # corner sample keeps box-like duals well seeded in high dim
            rng = np.random.default_rng(mix_seed(seed, n, 17))
            S = rng.choice((-1.0, 1.0), size=(max_count // 2, n))
            S = S / self.dual_norm_batch(S)[:, None]
            P = np.vstack([P, S])
        P = np.unique(np.round(P, 12), axis=0)
        if len(P) > max_count:
            P = P[:max_count]
        return P

    def sphere_sample(self, rng, size: int) -> np.ndarray:
        """Seeded sample of the primal unit sphere (full support, not uniform)."""
        Z = rng.standard_normal((size, self.dim))
        norms = self.norm_batch(Z)
        norms[norms == 0] = 1.0
        return Z / norms[:, None]

    def dual_sphere_sample(self, rng, size: int) -> np.ndarray:
        Z = rng.standard_normal((size, self.dim))
        norms = self.dual_norm_batch(Z)
        norms[norms == 0] = 1.0
        return Z / norms[:, None]

    def norming_point(self, f) -> np.ndarray:
        """x in the unit ball with <f, x> = dual_norm(f), up to roundoff."""
        f = np.asarray(f, dtype=float)
        self._check_dim(f)
        if not np.any(f):
            return np.zeros(self.dim)
        if self.kind == "lp":
            return _lp_norming(f, self.p)
        if self.kind == "weighted_l1":
            i = int(np.argmax(np.abs(f) / self.weights))
            x = np.zeros(self.dim)
            x[i] = np.sign(f[i]) / self.weights[i]
            return x
        if self.kind == "polytope":
            vals = self.vertex_array @ f
            i = int(np.argmax(np.abs(vals)))
            return np.sign(vals[i]) * self.vertex_array[i]
        duals = np.array(
            [c.dual_norm(f[sl]) for c, sl in zip(self.components, self.component_slices())]
        )
        lam = _lp_norming(duals, self.p)
        out = np.zeros(self.dim)
        for lam_i, c, sl in zip(lam, self.components, self.component_slices()):
            if np.any(f[sl]):
                out[sl] = lam_i * c.norming_point(f[sl])
        return out


def _lp_norming(f: np.ndarray, p: float) -> np.ndarray:
    if p == 1:
        i = int(np.argmax(np.abs(f)))
        x = np.zeros(len(f))
        x[i] = np.sign(f[i])
        return x
    if p == math.inf:
        s = np.sign(f)
        s[s == 0] = 1.0
        return s
    q = conjugate_exponent(p)
    x = np.sign(f) * np.abs(f) ** (q - 1.0)
    nrm = _pnorm_rows(x[None, :], p)[0]
    return x / nrm if nrm > 0 else x


@dataclass(frozen=True)
class Functional:
    """One dual vector pinned to its space."""

    space: Space
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1:
            raise ValidationError("functional coordinates must be a 1-d sequence")
        self.space._check_dim(c)
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __call__(self, x) -> float:
        return float(np.dot(self.coords, np.asarray(x, dtype=float)))

    @property
    def dual_norm(self) -> float:
        return self.space.dual_norm(self.coords)


def as_matrix(space: Space, functionals) -> np.ndarray:
    """Coerce a tuple of functionals (Functional | array-like | matrix) to (k, n)."""
    if isinstance(functionals, np.ndarray) and functionals.ndim == 2:
        X = np.asarray(functionals, dtype=float)
    else:
        rows = []
        for f in functionals:
            rows.append(f.coords if isinstance(f, Functional) else np.asarray(f, dtype=float))
        X = np.array(rows, dtype=float)
    if X.ndim != 2:
        raise ValidationError("expected a nonempty tuple of functionals")
    space._check_dim(X)
    return X


def primal_norm(space: Space, x) -> float:
    return space.norm(x)


def dual_norm(space: Space, f) -> float:
    return space.dual_norm(f)


# ----------------------------------------------------------------------
# summing constraint: sup over the unit ball of sum_i |x_i*(x)|^p
# ----------------------------------------------------------------------

K_EXACT_DEFAULT = 16


def _sign_patterns(k: int) -> np.ndarray:
    if k not in _SIGN_CACHE:
        # first sign fixed: the objective is even under global sign flip
        pats = np.array(list(itertools.product((-1.0, 1.0), repeat=k - 1)))
        if k == 1:
            S = np.ones((1, 1))
        else:
            S = np.hstack([np.ones((len(pats), 1)), pats])
        _SIGN_CACHE[k] = S
    return _SIGN_CACHE[k]


def make_constraint_batch(space: Space, k: int, p: float, k_exact: int = K_EXACT_DEFAULT):
    """Pick the cheapest exact evaluator for the summing constraint.

    Returns (mode, fn) with fn mapping a stack of tuples (B, k, n) to the
    constraint values (B,).  mode is one of "signs", "vertices", "spectral",
    "heuristic"; only the last is not exact.
    """
    V = space.vertices()
    sign_cost = 2 ** (k - 1) if (p == 1 and k <= k_exact) else None
    vert_cost = len(V) if V is not None else None

    if sign_cost is not None and (vert_cost is None or sign_cost <= vert_cost):
        S = _sign_patterns(k)

        def fn_signs(X):
            B = X.shape[0]
            G = np.einsum("sk,bkn->bsn", S, X).reshape(B * len(S), -1)
            d = space.dual_norm_batch(G).reshape(B, len(S))
            return d.max(axis=1)

        return "signs", fn_signs

    if vert_cost is not None:

        def fn_vertices(X):
            A = np.abs(np.einsum("bkn,mn->bkm", X, V))
            if p != 1:
                A = A**p
            return A.sum(axis=1).max(axis=1)

        return "vertices", fn_vertices

    if p == 2 and space.kind == "lp" and space.p == 2:

        def fn_spectral(X):
            s = np.linalg.svd(X, compute_uv=False)
            return s[:, 0] ** 2

        return "spectral", fn_spectral

    def fn_heuristic(X):
        return _heuristic_sup_batch(space, X, p)

    return "heuristic", fn_heuristic


def _heuristic_sup_batch(space: Space, X: np.ndarray, p: float, seed: int = 0) -> np.ndarray:
    """Multi-start projected pattern ascent for sup_x sum_i |x_i*(x)|^p.

    A certified lower bound of the true supremum; callers flag it heuristic.
    """
    B, k, n = X.shape
    rng = np.random.default_rng(mix_seed(seed, B, k, n))
    starts = [np.eye(n), -np.eye(n), np.ones((1, n)), -np.ones((1, n))]
    starts.append(rng.standard_normal((4, n)))
    P = np.vstack(starts)
    nrm = space.norm_batch(P)
    nrm[nrm == 0] = 1.0
    P = P / nrm[:, None]  # (R, n) shared start points on the primal sphere
    R = len(P)

    def value(xs):  # xs (B, R, n) -> (B, R)
        return (np.abs(np.einsum("bkn,brn->bkr", X, xs)) ** p).sum(axis=1)

    xs = np.broadcast_to(P, (B, R, n)).copy()
    best = value(xs)
    step = np.full((B, R), 0.25)
    for _ in range(80):
        if not (step >= 1e-4).any():
            break
        improved = np.zeros((B, R), dtype=bool)
        for j in range(n):
            for sgn in (1.0, -1.0):
                cand = xs.copy()
                cand[:, :, j] += sgn * step
                cn = space.norm_batch(cand.reshape(B * R, n)).reshape(B, R)
                cn[cn == 0] = 1.0
                cand = cand / cn[:, :, None]
                v = value(cand)
                gain = v > best + 1e-15
                xs[gain] = cand[gain]
                best[gain] = v[gain]
                improved |= gain
        step[~improved] *= 0.5
    return best.max(axis=1)


def summing_constraint_detail(space: Space, functionals, p: float = 1.0, k_exact: int = K_EXACT_DEFAULT):
    X = as_matrix(space, functionals)
    if not (p >= 1.0):
        raise ValidationError(f"summing exponent must satisfy p >= 1, got {p}")
    mode, fn = make_constraint_batch(space, X.shape[0], p, k_exact)
    return float(fn(X[None])[0]), mode


def summing_constraint(space: Space, functionals, p: float = 1.0, k_exact: int = K_EXACT_DEFAULT) -> float:
    return summing_constraint_detail(space, functionals, p, k_exact)[0]


# ----------------------------------------------------------------------
# dual-sphere nets
# ----------------------------------------------------------------------


def sphere_net(space: Space, delta: float, seed: int = 0, verify_samples: int = 10_000) -> np.ndarray:
    """delta-net of the dual unit sphere in the dual-norm metric.

    Construction is per descriptor (face grids on box duals, angular grids in
    2d, greedy farthest-point insertion otherwise); coverage is then verified
    a posteriori on a dense seeded sphere sample and the call fails rather
    than return an unverified net.
    """
    if not (0 < delta <= 1):
        raise ValidationError(f"net resolution must lie in (0, 1], got {delta}")
    ck = (space.key(), round(float(delta), 14), seed, verify_samples)
    if ck in _NET_CACHE:
        return _NET_CACHE[ck]

    n = space.dim
    if n == 1:
        c = space.dual_norm(np.ones(1))
        net = np.array([[1.0 / c], [-1.0 / c]])
    elif space.kind == "lp" and space.p == 1:
        net = _box_face_grid(np.ones(n), delta)
    elif space.kind == "weighted_l1":
        net = _box_face_grid(np.asarray(space.weights, dtype=float), delta)
    elif n == 2:
        net = _angle_net(space, delta, seed, verify_samples)
    else:
        net = _greedy_net(space, delta, seed, verify_samples)

    _assert_on_sphere(space, net)
    if not _coverage_ok(space, net, delta, seed, verify_samples):
        raise ComputationError(
            f"net construction failed the coverage check at delta={delta}"
        )
    net = net.copy()
    net.setflags(write=False)
    _NET_CACHE[ck] = net
    return net


def _box_face_grid(halfwidths: np.ndarray, delta: float) -> np.ndarray:
    """Grid on each face of the box {|f_i| <= h_i}; spacing <= delta per axis
    in the face metric max |df_j| / h_j, so coverage radius is delta/2."""
    n = len(halfwidths)
    m = int(math.ceil(2.0 / delta))
    axes = [np.linspace(-h, h, m + 1) for h in halfwidths]
    pts = {}
    for i in range(n):
        free = [axes[j] for j in range(n) if j != i]
        for sgn in (1.0, -1.0):
            for combo in itertools.product(*free):
                v = np.empty(n)
                v[i] = sgn * halfwidths[i]
                idx = 0
                for j in range(n):
                    if j != i:
                        v[j] = combo[idx]
                        idx += 1
                pts[tuple(np.round(v, 12))] = v
    return np.array(list(pts.values()))


def _angle_net(space: Space, delta: float, seed: int, verify_samples: int) -> np.ndarray:
    M = max(4, int(math.ceil(2 * math.pi / delta)))
    for _ in range(22):
        theta = np.arange(M) * (2 * math.pi / M)
        P = np.column_stack([np.cos(theta), np.sin(theta)])
        P = P / space.dual_norm_batch(P)[:, None]
        if _coverage_ok(space, P, delta, seed, verify_samples):
            return P
        M *= 2
    raise ComputationError("2d angular net failed to converge")


def _greedy_net(space: Space, delta: float, seed: int, verify_samples: int) -> np.ndarray:
    rng = np.random.default_rng(mix_seed(seed, 101))
    base_size = max(20_000, 2 * verify_samples)
    for attempt in range(3):
        base = np.vstack(
            [space.dual_sphere_sample(rng, base_size), space.landmarks(seed=seed)]
        )
        sel = [base[len(base) - 1]]
        dist = space.dual_norm_batch(base - sel[0])
        target = 0.8 * delta
        while dist.max() > target:
            i = int(np.argmax(dist))
            sel.append(base[i])
            dist = np.minimum(dist, space.dual_norm_batch(base - base[i]))
        net = np.array(sel)
        if _coverage_ok(space, net, delta, seed, verify_samples):
            return net
        base_size *= 4
    raise ComputationError("greedy net failed the coverage check after densification")


def _assert_on_sphere(space: Space, net: np.ndarray):
    err = np.abs(space.dual_norm_batch(net) - 1.0).max()
    if err > SPHERE_TOL:
        raise ComputationError(f"net points drifted off the dual sphere by {err:.2e}")


def _coverage_ok(space: Space, net: np.ndarray, delta: float, seed: int, verify_samples: int) -> bool:
    rng = np.random.default_rng(mix_seed(seed, 202))
    samples = np.vstack(
        [space.dual_sphere_sample(rng, verify_samples), space.landmarks(seed=seed)]
    )
    tol = delta * (1 + 1e-9) + 1e-12
    chunk = max(1, int(2**22 // max(len(net), 1)))
    for lo in range(0, len(samples), chunk):
        S = samples[lo : lo + chunk]
        diff = S[:, None, :] - net[None, :, :]
        d = space.dual_norm_batch(diff.reshape(-1, space.dim)).reshape(len(S), len(net))
        if d.min(axis=1).max() > tol:
            return False
    return True


# ----------------------------------------------------------------------


def direct_sum(spaces, p: float) -> Space:
    return Space.direct_sum(spaces, p)


def space_from_dict(d: dict) -> Space:
    """Build a Space from the structured problem-file descriptor."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ValidationError("space descriptor must be a mapping with a 'kind' field")
    kind = d["kind"]
    if kind == "lp":
        p = d.get("p", 2)
        if isinstance(p, str):
            if p.lower() not in ("inf", "infinity"):
                raise ValidationError(f"unrecognized p value {p!r}")
            p = math.inf
        return Space.lp(int(d["dim"]), float(p))
    if kind == "weighted_l1":
        return Space.weighted_l1(d["weights"])
    if kind == "polytope":
        return Space.polytope(d["vertices"])
    if kind == "direct_sum":
        p = d.get("p", 1)
        if isinstance(p, str):
            p = math.inf if p.lower() in ("inf", "infinity") else float(p)
        comps = [space_from_dict(c) for c in d.get("components", [])]
        return Space.direct_sum(comps, float(p))
    raise ValidationError(f"unknown space kind {kind!r}")
