"""Nakano-type upper bounds: explicit majorants for suprema of families.

Two constructions bound a pointwise supremum h = sup_i f_i from above.

* cover_upper_bound: a sup of cap bumps.  Heights come from values of h on a
  fine pool, caps sit on a delta-net of the dual sphere, and delta is chosen
  so the certified norm of the cover stays within (1 + eps) of the norm of h.
  Works for any nonnegative continuous positively-homogeneous h.

* maximal_majorant: over an l1-type base the functions

      g_phi(x*) = (sum_a phi_a |x*_a|^p)^(1/p),   phi_a >= 0

  are exactly the norm-attaining monotone building blocks, and the smallest
  g_phi >= h is a linear program in phi.  The LP value never exceeds the
  p-th power of the free-lattice norm of h (every dual-feasible multiplier
  vector turns into a feasible certificate tuple), so for a normalized h the
  reported ratio cannot drift above 1 by more than solver tolerance.

Both paths report the same shape: the bound, the sup of member norms, and
their ratio, which is the empirical strong-Nakano constant of the family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from ._util import mix_seed
from .errors import ComputationError, ValidationError
from .fblnorm import Budget, DEFAULT_BUDGET, fbl_norm_k
from .homfun import (
    DirectedFamily,
    HomFn,
    MaxFn,
    ZeroFn,
    absval,
    add,
    delta as delta_fn,
    lipschitz_estimate,
    scale,
)
from .spaces import Space, sphere_net


# ----------------------------------------------------------------------
# g_phi building blocks
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class PhiVector:
    """Coefficients of a g_phi bound; tail_sum is norm^p mass already dropped."""

    coeffs: np.ndarray
    p: float = 1.0
    tail_sum: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)


def _l1_weights(space: Space) -> np.ndarray:
    """Per-coordinate weights w with ||x|| = sum w_a |x_a|, or raise."""
    if space.kind == "lp" and space.p == 1:
        return np.ones(space.dim)
    if space.kind == "weighted_l1":
        return np.asarray(space.weights, dtype=float)
    raise ValidationError(
        "g_phi norms and maximal majorants are implemented over l1-type bases "
        f"(got kind {space.kind!r})"
    )


class GPhiFn(HomFn):
    """x* -> |sum_a phi_a |x*_a|^p|^(1/p); closed-form norm over l1 bases."""

    def __init__(self, space: Space, coeffs, p: float = 1.0):
        self.space = space
        c = np.asarray(coeffs, dtype=float)
        space._check_dim(c)
        self.coeffs = c
        self.p = float(p)

    def eval_batch(self, F: np.ndarray) -> np.ndarray:
        F = np.asarray(F, dtype=float)
        t = (np.abs(F) ** self.p) @ self.coeffs
        return np.abs(t) ** (1.0 / self.p)

    def exact_norm(self, p: float) -> Optional[float]:
        if p != self.p:
            return None
        try:
            w = _l1_weights(self.space)
        except ValidationError:
            return None
        return float((np.abs(self.coeffs) * w**self.p).sum() ** (1.0 / self.p))

    def __repr__(self):
        return f"GPhiFn(p={self.p}, coeffs={np.round(self.coeffs, 6)})"


def g_phi(space: Space, coeffs, p: float = 1.0) -> GPhiFn:
    return GPhiFn(space, coeffs, p)


def g_phi_norm(space: Space, coeffs, p: float = 1.0) -> float:
    """(sum_a |phi_a| w_a^p)^(1/p); exact over l1-type bases for any sign of phi."""
    w = _l1_weights(space)
    c = np.asarray(coeffs, dtype=float)
    return float((np.abs(c) * w**p).sum() ** (1.0 / p))


# ----------------------------------------------------------------------
# truncation
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedGPhi:
    kept: PhiVector
    fn: HomFn
    tail_norm: float
    indices: tuple

    def to_json(self):
        return {
            "indices": list(self.indices),
            "coeffs": [float(c) for c in self.kept.coeffs],
            "tail_norm": self.tail_norm,
            "flags": {"tail_norm": "exact"},
        }


def _fold_add(terms):
    # balanced fold keeps expression depth logarithmic
    while len(terms) > 1:
        nxt = [add(terms[i], terms[i + 1]) for i in range(0, len(terms) - 1, 2)]
        if len(terms) % 2:
            nxt.append(terms[-1])
        terms = nxt
    return terms[0]


def truncate_g_phi(space: Space, phi, keep: int, p: float = 1.0) -> TruncatedGPhi:
    """Keep the `keep` largest coefficients by weighted mass; the tail norm
    (sum of dropped |phi_a| w_a^p, plus mass already outside)^(1/p) bounds
    the norm of the difference because |g_phi - g_kept| <= g_dropped
    pointwise.  With p = 1 the kept part is returned as a lattice expression
    over the generators; other exponents have no power node in the expression
    grammar, so the kept part stays a dedicated function object."""
    if isinstance(phi, PhiVector):
        coeffs, p, carried = phi.coeffs, phi.p, phi.tail_sum
    else:
        coeffs, carried = np.asarray(phi, dtype=float), 0.0
    space._check_dim(coeffs)
    if keep < 0:
        raise ValidationError("keep must be >= 0")
    w = _l1_weights(space)
    mass = np.abs(coeffs) * w**p
    order = np.argsort(-mass, kind="stable")
    kept_idx = tuple(sorted(int(i) for i in order[:keep]))
    mask = np.zeros(space.dim, dtype=bool)
    mask[list(kept_idx)] = True
    kept_coeffs = np.where(mask, coeffs, 0.0)
    tail = float(mass[~mask].sum() + carried)
    kept = PhiVector(coeffs=kept_coeffs, p=p, tail_sum=tail)
    if p == 1.0:
        terms = []
        eye = np.eye(space.dim)
        for a in kept_idx:
            if coeffs[a] != 0.0:
                terms.append(scale(float(coeffs[a]), absval(delta_fn(space, eye[a]))))
        fn = absval(_fold_add(terms)) if terms else ZeroFn(space)
    else:
        fn = GPhiFn(space, kept_coeffs, p)
    return TruncatedGPhi(kept=kept, fn=fn, tail_norm=float(tail ** (1.0 / p)) if tail > 0 else 0.0, indices=kept_idx)


# ----------------------------------------------------------------------
# cap covers
# ----------------------------------------------------------------------


class CoverFn(HomFn):
    """Positively-homogeneous sup of cap bumps.

    Each center c_i on the dual sphere carries a plateau of height M_i on the
    delta-cap around it, decaying linearly to zero at dual distance 2 delta.
    """

    def __init__(self, space: Space, centers: np.ndarray, heights: np.ndarray, delta: float):
        self.space = space
        self.centers = np.asarray(centers, dtype=float)
        self.heights = np.asarray(heights, dtype=float)
        self.delta = float(delta)
        if len(self.centers) != len(self.heights):
            raise ValidationError("one height per center required")
        if np.any(self.heights < 0):
            raise ValidationError("cap heights must be nonnegative")

    def eval_batch(self, F: np.ndarray) -> np.ndarray:
        F = np.asarray(F, dtype=float)
        r = self.space.dual_norm_batch(F)
        out = np.zeros(len(F))
        alive = r > 0
        if not alive.any():
            return out
        X = F[alive] / r[alive, None]
        m, n = self.centers.shape
        vals = np.empty(len(X))
        chunk = max(1, int(2**21 // max(m, 1)))
        for lo in range(0, len(X), chunk):
            S = X[lo : lo + chunk]
            diff = S[:, None, :] - self.centers[None, :, :]
            d = self.space.dual_norm_batch(diff.reshape(-1, n)).reshape(len(S), m)
            w = np.clip((2.0 * self.delta - d) / self.delta, 0.0, 1.0)
            vals[lo : lo + chunk] = (w * self.heights).max(axis=1)
        out[alive] = r[alive] * vals
        return out

    def __repr__(self):
        return f"CoverFn(<{len(self.centers)} caps>, delta={self.delta:.4g})"


@dataclass(frozen=True)
class CoverResult:
    g: HomFn
    delta: float
    base_value: float
    cover_value: float
    retries: int
    centers: int

    @property
    def ratio(self) -> float:
        return self.cover_value / self.base_value if self.base_value > 0 else 1.0

    def to_json(self):
        return {
            "delta": self.delta,
            "base_value": self.base_value,
            "cover_value": self.cover_value,
            "ratio": self.ratio,
            "retries": self.retries,
            "centers": self.centers,
            "flags": {
                "base_value": "heuristic-lower-bound",
                "cover_value": "heuristic-lower-bound",
                "domination": "verified-on-samples",
            },
        }


def _build_cover(space: Space, f: HomFn, delta: float, lip: float, seed: int):
    centers = sphere_net(space, delta, seed=seed)
    if space.dim <= 2:
        pool = sphere_net(space, max(delta / 8.0, 1e-4), seed=seed)
        margin = 1.5 * lip * (delta / 8.0)
    else:
        rng = np.random.default_rng(mix_seed(seed, 23))
        pool = np.vstack([space.dual_sphere_sample(rng, 20_000), space.landmarks(seed=seed)])
        margin = 0.75 * lip * delta
    fvals = f.eval_batch(pool)
    m = len(centers)
    heights = np.full(m, -np.inf)
    chunk = max(1, int(2**22 // max(m, 1)))
    for lo in range(0, len(pool), chunk):
        P = pool[lo : lo + chunk]
        diff = P[:, None, :] - centers[None, :, :]
        d = space.dual_norm_batch(diff.reshape(-1, space.dim)).reshape(len(P), m)
        inside = d <= 2.0 * delta
        contrib = np.where(inside, fvals[lo : lo + chunk, None], -np.inf)
        heights = np.maximum(heights, contrib.max(axis=0))
    empty = ~np.isfinite(heights)
    if empty.any():
        heights[empty] = f.eval_batch(centers[empty])
    heights = np.maximum(heights + margin, 0.0)
    return CoverFn(space, centers, heights, delta)


def cover_upper_bound(
    space: Space,
    f: HomFn,
    k: int = 2,
    eps: float = 0.1,
    p: float = 1.0,
    seed: int = 0,
    budget: Budget = DEFAULT_BUDGET,
    verify_samples: int = 10_000,
    max_retries: int = 3,
) -> CoverResult:
    """Build g >= f with certified norm at level k within (1 + eps) of f's.

    delta solves F (4 k delta + 1) + k delta + k margin <= (1 + eps) F for
    the norm estimate F, then the cover is verified: domination is checked
    on a dense seeded sample and the norm condition is re-measured; on
    failure delta is halved, a few times, before giving up loudly."""
    if eps <= 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    rng = np.random.default_rng(mix_seed(seed, 11))
    probes = np.vstack([space.dual_sphere_sample(rng, 2048), space.landmarks(seed=seed)])
    fp = f.eval_batch(probes)
    if fp.min() < -1e-9:
        raise ValidationError(
            f"cover construction needs a nonnegative function; sampled min {fp.min():.3e}"
        )
    F, _cert = fbl_norm_k(space, f, k, p=p, budget=budget)
    if F <= 1e-12:
        if np.abs(fp).max() > 1e-9:
            raise ComputationError("norm estimate vanished but the function does not")
        return CoverResult(g=ZeroFn(space), delta=0.0, base_value=0.0, cover_value=0.0, retries=0, centers=0)
    lip = lipschitz_estimate(space, f, seed=seed)
    c_m = 0.1875 if space.dim <= 2 else 0.75
    delta = eps * F / (k * (4.0 * F + 1.0 + c_m * lip))
    delta = float(min(max(delta, 1e-3), 0.4))
    last_err = None
    for attempt in range(max_retries + 1):
        try:
            g = _build_cover(space, f, delta, lip, seed)
        except ComputationError as e:
            last_err = e
            delta /= 2.0
            continue
        rng2 = np.random.default_rng(mix_seed(seed, 13, attempt))
        S = np.vstack([space.dual_sphere_sample(rng2, verify_samples), probes])
        gap = float((g.eval_batch(S) - f.eval_batch(S)).min())
        if gap < -1e-9:
            last_err = ComputationError(f"cover failed to dominate the function (gap {gap:.3e})")
            delta /= 2.0
            continue
        G, _ = fbl_norm_k(space, g, k, p=p, budget=budget)
        if G <= (1.0 + eps) * F + 1e-9:
            return CoverResult(
                g=g,
                delta=delta,
                base_value=float(F),
                cover_value=float(G),
                retries=attempt,
                centers=len(g.centers),
            )
        last_err = ComputationError(
            f"cover norm {G:.6g} exceeds (1 + eps) * {F:.6g} at delta {delta:.3g}"
        )
        delta /= 2.0
    raise last_err


# ----------------------------------------------------------------------
# maximal majorants over l1-type bases
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class MajorantResult:
    phi: PhiVector
    g: GPhiFn
    lp_value: float  # sum of transformed coefficients = bound_norm^p
    bound_norm: float
    rounds: int

    def to_json(self):
        return {
            "phi": [float(c) for c in self.phi.coeffs],
            "lp_value": self.lp_value,
            "bound_norm": self.bound_norm,
            "rounds": self.rounds,
            "flags": {"bound_norm": "exact", "domination": "verified-on-samples"},
        }


def _check_monotone_in_abs(space: Space, h: HomFn, seed: int, tol: float = 1e-7):
    """The majorant argument needs h(x*) = h(|x*|) nondecreasing in |x*|."""
    rng = np.random.default_rng(mix_seed(seed, 31))
    V = np.abs(space.dual_sphere_sample(rng, 256))
    hv = h.eval_batch(V)
    scalef = 1.0 + np.abs(hv)
    if hv.min() < -1e-9:
        raise ValidationError(f"majorant needs a nonnegative function; sampled min {hv.min():.3e}")
    signs = rng.choice((-1.0, 1.0), size=V.shape)
    gap_sign = np.abs(h.eval_batch(signs * V) - hv) / scalef
    i = int(np.argmax(gap_sign))
    if gap_sign[i] > tol:
        raise ValidationError(
            "majorant needs a function of |x*| only; sign flip changed the value by "
            f"{gap_sign[i]:.3e} at {np.round(V[i], 6)}"
        )
    U = V * rng.uniform(0.0, 1.0, size=V.shape)
    gap_mono = (h.eval_batch(U) - hv) / scalef
    j = int(np.argmax(gap_mono))
    if gap_mono[j] > tol:
        raise ValidationError(
            "majorant needs monotonicity in |x*|; shrinking a point raised the value by "
            f"{gap_mono[j]:.3e} at {np.round(V[j], 6)}"
        )


def _positive_directions(n: int, rng, count: int) -> np.ndarray:
    """Nonnegative direction vectors normalized to max = 1; includes the
    basis, the ones corner, and binary masks so kinks at coordinate
    boundaries are always constrained."""
    blocks = [np.eye(n), np.ones((1, n))]
    masks = rng.integers(0, 2, size=(min(count // 4, 256), n)).astype(float)
    masks = masks[masks.sum(axis=1) > 0]
    blocks.append(masks)
    raw = np.abs(rng.standard_normal((count, n)))
    blocks.append(raw)
    U = np.vstack(blocks)
    U = U / U.max(axis=1)[:, None]
    return np.unique(np.round(U, 12), axis=0)


def maximal_majorant(
    space: Space,
    h: HomFn,
    p: float = 1.0,
    seed: int = 0,
    directions: int = 2048,
    rounds: int = 5,
    tol: float = 1e-7,
) -> MajorantResult:
    """Smallest g_phi >= h over an l1-type base, solved as an LP in phi.

    Constraints <phi, u> >= H(u) with H(u) = h(u^(1/p))^p are collected on
    nonnegative directions; monotonicity of h extends domination from those
    to everything.  Violations found on a fresh validation set are cut back
    in (a few rounds) before the run fails.  The minimized total sum is also
    bounded by the p-th power of the free-lattice norm of h, since every
    dual multiplier vector converts into a feasible certificate tuple."""
    if not (1.0 <= p < math.inf):
        raise ValidationError(f"majorant exponent must be finite with p >= 1, got {p}")
    w = _l1_weights(space)
    _check_monotone_in_abs(space, h, seed, tol)
    n = space.dim
    rng = np.random.default_rng(mix_seed(seed, 37))

    def H(U: np.ndarray) -> np.ndarray:
        # value of h^p in transformed coordinates; w folds the weighted case
        # onto the plain one via the diagonal isometry
        return np.maximum(h.eval_batch((U ** (1.0 / p)) * w), 0.0) ** p

    U = _positive_directions(n, rng, directions)
    HU = H(U)
    scale_h = HU.max()
    if scale_h <= 1e-14:
        phi = PhiVector(coeffs=np.zeros(n), p=p)
        return MajorantResult(phi=phi, g=GPhiFn(space, phi.coeffs, p), lp_value=0.0, bound_norm=0.0, rounds=0)

    keep = HU > 1e-14 * scale_h
    rows = U[keep] / HU[keep][:, None]

    V = _positive_directions(n, rng, 2 * directions)
    HV = H(V)

    used_rounds = 0
    phi_t = None
    for used_rounds in range(1, rounds + 1):
        res = linprog(
            np.ones(n),
            A_ub=-rows,
            b_ub=-np.ones(len(rows)),
            bounds=[(0, None)] * n,
            method="highs",
        )
        if not res.success:
            raise ComputationError(f"majorant LP failed: {res.message}")
        phi_t = res.x
        slack = V @ phi_t - HV
        bad = slack < -tol * (1.0 + HV)
        if not bad.any():
            break
        worst = np.argsort(slack / (1.0 + HV), kind="stable")[:64]
        worst = worst[bad[worst]]
        rows = np.vstack([rows, V[worst] / HV[worst][:, None]])
    else:
        raise ComputationError("majorant validation kept failing after cutting-plane rounds")

    phi_t = np.maximum(phi_t, 0.0)
    phi_space = phi_t / w**p  # back through the diagonal isometry
    g = GPhiFn(space, phi_space, p)
    lp_value = float(phi_t.sum())
    return MajorantResult(
        phi=PhiVector(coeffs=phi_space, p=p),
        g=g,
        lp_value=lp_value,
        bound_norm=float(lp_value ** (1.0 / p)),
        rounds=used_rounds,
    )


# ----------------------------------------------------------------------
# family reports
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class NakanoReport:
    method: str
    sup_member_norm: float
    bound_norm: float
    ratio: float
    delta_used: Optional[float]
    phi: Optional[tuple]

    def to_json(self):
        return {
            "method": self.method,
            "sup_member_norm": self.sup_member_norm,
            "bound_norm": self.bound_norm,
            "ratio": self.ratio,
            "delta_used": self.delta_used,
            "phi": list(self.phi) if self.phi is not None else None,
        }


def _members_of(family) -> tuple:
    if isinstance(family, DirectedFamily):
        return tuple(family.members)
    members = tuple(family)
    if not members:
        raise ValidationError("need at least one family member")
    return members


def strong_nakano_report(
    space: Space,
    family,
    method: str = "maximal",
    p: float = 1.0,
    k: int = 2,
    eps: float = 0.1,
    seed: int = 0,
    budget: Budget = DEFAULT_BUDGET,
) -> NakanoReport:
    """Empirical strong-Nakano constant of a family: the certified norm of an
    explicit upper bound of sup_i f_i divided by the sup of member norms.

    method "maximal" uses the LP majorant and exact member norms when the
    members expose them; method "cover" compares level-k certificate values
    of the cover against level-k member values, so both sides of the ratio
    are the same kind of quantity."""
    members = _members_of(family)
    h = MaxFn(members)
    if method == "maximal":
        exact = [m.exact_norm(p) for m in members]
        if all(v is not None for v in exact):
            L = max(exact)
        else:
            L = max(fbl_norm_k(space, m, k, p=p, budget=budget)[0] for m in members)
        res = maximal_majorant(space, h, p=p, seed=seed)
        if L <= 0:
            raise ValidationError("family of zero functions has no meaningful ratio")
        return NakanoReport(
            method="maximal",
            sup_member_norm=float(L),
            bound_norm=res.bound_norm,
            ratio=float(res.bound_norm / L),
            delta_used=None,
            phi=tuple(float(c) for c in res.phi.coeffs),
        )
    if method == "cover":
        L = max(fbl_norm_k(space, m, k, p=p, budget=budget)[0] for m in members)
        if L <= 0:
            raise ValidationError("family of zero functions has no meaningful ratio")
        cov = cover_upper_bound(space, h, k=k, eps=eps, p=p, seed=seed, budget=budget)
        return NakanoReport(
            method="cover",
            sup_member_norm=float(L),
            bound_norm=float(cov.cover_value),
            ratio=float(cov.cover_value / L),
            delta_used=float(cov.delta),
            phi=None,
        )
    raise ValidationError(f"unknown method {method!r}; use 'maximal' or 'cover'")


def combine_direct_sum(reports, p: float) -> dict:
    """Combine per-component reports by p-power arithmetic on the pair of
    certified quantities.  The combined ratio never exceeds the worst
    component ratio; nothing here constructs a lattice over the sum space."""
    if not reports:
        raise ValidationError("need at least one component report")
    if not (p >= 1.0):
        raise ValidationError(f"combining exponent must satisfy p >= 1, got {p}")
    sups = np.array([r.sup_member_norm for r in reports])
    bounds = np.array([r.bound_norm for r in reports])
    if p == math.inf:
        sup_c, bound_c = sups.max(), bounds.max()
    else:
        sup_c = (sups**p).sum() ** (1.0 / p)
        bound_c = (bounds**p).sum() ** (1.0 / p)
    ratios = [float(r.ratio) for r in reports]
    combined = float(bound_c / sup_c) if sup_c > 0 else 1.0
    return {
        "p": "inf" if p == math.inf else p,
        "component_ratios": ratios,
        "combined_sup": float(sup_c),
        "combined_bound": float(bound_c),
        "combined_ratio": combined,
        "max_component_ratio": max(ratios),
        "invariant_ok": bool(combined <= max(ratios) + 1e-12),
    }
