"""Certified lower bounds for free-lattice norms via summing certificates.

The truncated norm at level k is the best value of a certificate: a k-tuple
of dual vectors scored by

    value = (sum_i |f(x_i*)|^p)^(1/p) / constraint^(1/p),
    constraint = sup over the unit ball of sum_i |x_i*(x)|^p.

Whenever the constraint evaluator is exact (sign enumeration, ball vertices,
or the spectral case) every reported value is a true lower bound of the norm,
so the search can only err downward.  The optimizer is a lockstep multi-start
coordinate pattern search: all starts advance together through vectorized
polls, each start halves its own step on a failed poll, and every stage k' < k
feeds its best certificate (padded with a zero functional) into the starts of
the next stage.  That warm-start threading is what makes the reported values
exactly nondecreasing in k.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from ._util import mix_seed, thread_count
from .errors import BudgetExceededError, ComputationError, ValidationError
from .homfun import HomFn
from .spaces import (
    Functional,
    K_EXACT_DEFAULT,
    Space,
    as_matrix,
    make_constraint_batch,
    sphere_net,
    summing_constraint_detail,
)


@dataclass(frozen=True)
class Budget:
    """Optimizer settings; the defaults are the documented ones."""

    starts: int = 64
    iters: int = 2000
    seed: int = 0
    k_exact: int = K_EXACT_DEFAULT
    step_init: float = 0.25
    step_min: float = 1e-7
    prescan: int = 512
    net_eta: float = 0.35

    def to_json(self):
        return {
            "starts": self.starts,
            "iters": self.iters,
            "seed": self.seed,
            "k_exact": self.k_exact,
        }


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True)
class Certificate:
    """A feasible tuple with its constraint and objective values."""

    space: Space
    p: float
    matrix: np.ndarray  # (k, n) rows are the functionals
    constraint: float
    objective: float
    value: float
    constraint_mode: str

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    @property
    def functionals(self):
        return [Functional(self.space, row) for row in self.matrix]

    @property
    def exact(self) -> bool:
        return self.constraint_mode != "heuristic"

    def normalized(self) -> "Certificate":
        """Rescale so the constraint equals 1; the value is scale-invariant."""
        if self.constraint <= 0:
            return self
        s = self.constraint ** (1.0 / self.p)
        return Certificate(
            space=self.space,
            p=self.p,
            matrix=self.matrix / s,
            constraint=1.0,
            objective=self.objective / s,
            value=self.value,
            constraint_mode=self.constraint_mode,
        )

    def to_json(self):
        return {
            "value": self.value,
            "k": self.k,
            "p": self.p,
            "certificate": [list(map(float, row)) for row in self.matrix],
            "constraint": self.constraint,
            "objective": self.objective,
            "flags": {
                "value": "heuristic-lower-bound",
                "constraint": "heuristic" if not self.exact else "exact",
                "objective": "exact",
            },
        }


def _make_ratio(space: Space, f: HomFn, p: float, k: int, budget: Budget):
    mode, cfn = make_constraint_batch(space, k, p, budget.k_exact)

    def ratio(X: np.ndarray) -> np.ndarray:
        B = X.shape[0]
        vals = f.eval_batch(X.reshape(B * k, -1)).reshape(B, k)
        obj = (np.abs(vals) ** p).sum(axis=1)
        con = cfn(X)
        out = np.zeros(B)
        ok = con > 1e-250
        out[ok] = (obj[ok] / con[ok]) ** (1.0 / p)
        return out

    return mode, cfn, ratio


def _start_pool(space: Space, budget: Budget) -> np.ndarray:
    pts = [space.landmarks(64, seed=budget.seed)]
    if space.dim <= 3:
        pts.append(sphere_net(space, budget.net_eta, seed=budget.seed))
    return np.unique(np.round(np.vstack(pts), 12), axis=0)


def _make_starts(space, f, p, k, budget, ratio, carry) -> np.ndarray:
    n = space.dim
    rng = np.random.default_rng(mix_seed(budget.seed, k, 5))
    pool = _start_pool(space, budget)
    starts = []
    if carry is not None:
        pad = np.zeros((k - carry.shape[0], n))
        starts.append(np.vstack([carry, pad]))
    # prescan: score random pool tuples, keep the best handful as anchors
    T = budget.prescan
    idx = rng.integers(len(pool), size=(T, k))
    cand = pool[idx]
    vals = ratio(cand)
    order = np.argsort(-vals, kind="stable")[:8]
    for i in order:
        starts.append(cand[i])
    # deterministic landmark cycling
    for s in range(16):
        rows = pool[(s + 17 * np.arange(k)) % len(pool)]
        starts.append(rows.copy())
    while len(starts) < budget.starts:
        starts.append(space.dual_sphere_sample(rng, k))
    X = np.array(starts[: budget.starts])
    return X


def _normalize_tuples(X: np.ndarray, cfn, p: float) -> np.ndarray:
    con = cfn(X)
    scale = np.ones(len(X))
    ok = con > 1e-250
    scale[ok] = con[ok] ** (1.0 / p)
    return X / scale[:, None, None]


def _pattern_search(space, f, p, X0, cfn, ratio, budget):
    """Lockstep poll loop; returns (best value, best tuple)."""
    B, k, n = X0.shape
    X = _normalize_tuples(X0, cfn, p)
    val = ratio(X)
    step = np.full(B, budget.step_init)
    M = 2 * k * n
    D = np.zeros((M, k, n))
    flat = D.reshape(M, k * n)
    flat[np.arange(0, M, 2), np.arange(k * n)] = 1.0
    flat[np.arange(1, M, 2), np.arange(k * n)] = -1.0

    for _ in range(budget.iters):
        act = np.flatnonzero(step >= budget.step_min)
        if len(act) == 0:
            break
        Xa = X[act]
        cand = Xa[:, None, :, :] + step[act, None, None, None] * D[None, :, :, :]
        v = ratio(cand.reshape(len(act) * M, k, n)).reshape(len(act), M)
        best = v.max(axis=1)
        arg = v.argmax(axis=1)
        gain = best > val[act] * (1 + 1e-12) + 1e-15
        moved = act[gain]
        if len(moved):
            chosen = cand[gain, arg[gain]]
            chosen = _normalize_tuples(chosen, cfn, p)
            X[moved] = chosen
            val[moved] = ratio(chosen)
        stuck = act[~gain]
        step[stuck] *= 0.5

    i = int(np.argmax(val))
    return float(val[i]), X[i]


def _stage_once(space, f, p, k, budget, carry):
    mode, cfn, ratio = _make_ratio(space, f, p, k, budget)
    X0 = _make_starts(space, f, p, k, budget, ratio, carry)
    value, X = _pattern_search(space, f, p, X0, cfn, ratio, budget)
    return value, X, mode


def _stage_list(k: int):
    ks = list(range(1, min(k, 8) + 1))
    j = 16
    while ks[-1] < k:
        ks.append(min(j, k))
        j *= 2
    return ks


def _certificate(space, f, p, X, budget) -> Certificate:
    con, mode = summing_constraint_detail(space, X, p, budget.k_exact)
    vals = f.eval_batch(X)
    obj = float(((np.abs(vals) ** p).sum()) ** (1.0 / p))
    value = obj / con ** (1.0 / p) if con > 0 else 0.0
    return Certificate(
        space=space,
        p=p,
        matrix=X.copy(),
        constraint=float(con),
        objective=obj,
        value=float(value),
        constraint_mode=mode,
    )


def fbl_norm_k(space: Space, f: HomFn, k: int, p: float = 1.0, budget: Budget = DEFAULT_BUDGET):
    """Best certificate value at level k: a certified lower bound of the
    truncated free-lattice norm (certified whenever the constraint mode is
    exact).  Returns (value, Certificate)."""
    if k < 1:
        raise ValidationError(f"certificate length must be >= 1, got {k}")
    if not (p >= 1.0):
        raise ValidationError(f"norm exponent must satisfy p >= 1, got {p}")
    carry, best_val, best_X = None, 0.0, None
    for kk in _stage_list(k):
        value, X, _mode = _stage_once(space, f, p, kk, budget, carry)
        carry = X
        if value >= best_val or best_X is None:
            best_val, best_X = value, X
    if best_X.shape[0] < k:
        best_X = np.vstack([best_X, np.zeros((k - best_X.shape[0], space.dim))])
    cert = _certificate(space, f, p, best_X, budget)
    return cert.value, cert


@dataclass(frozen=True)
class NormEscalation:
    value: float
    k_used: int
    plateaued: bool
    certificate: Certificate
    stages: tuple  # (k, value) pairs

    def to_json(self):
        d = self.certificate.to_json()
        d.update(
            {
                "value": self.value,
                "k": self.k_used,
                "plateaued": self.plateaued,
                "stages": [list(s) for s in self.stages],
            }
        )
        return d


def fbl_norm(
    space: Space,
    f: HomFn,
    p: float = 1.0,
    eps: float = 0.01,
    k_max: int = 8,
    budget: Budget = DEFAULT_BUDGET,
) -> NormEscalation:
    """k-escalation with a doubling schedule 1, 2, 4, ... up to k_max.

    Stops once the relative increase stays below eps for two consecutive
    steps; reports the start of the plateau.  Hitting the ceiling without a
    plateau is reported, not fatal.
    """
    ks = [1]
    while ks[-1] * 2 <= k_max:
        ks.append(ks[-1] * 2)
    carry = None
    values, mats = [], []
    small = 0
    used = len(ks)
    for i, kk in enumerate(ks):
        value, X, _mode = _stage_once(space, f, p, kk, budget, carry)
        carry = X
        values.append(value)
        mats.append(X)
        if i > 0:
            rel = (values[i] - values[i - 1]) / max(values[i], 1e-300)
            small = small + 1 if rel < eps else 0
            if small >= 2:
                used = i + 1
                break
    values = values[:used]
    ks = ks[:used]
    plateaued = small >= 2
    k_used = ks[max(0, len(ks) - 1 - (2 if plateaued else 0))]
    cert = _certificate(space, f, p, mats[used - 1], budget)
    return NormEscalation(
        value=float(values[-1]),
        k_used=int(k_used),
        plateaued=plateaued,
        certificate=cert,
        stages=tuple((int(a), float(b)) for a, b in zip(ks, values)),
    )


@dataclass(frozen=True)
class ProbeRow:
    k: int
    value: float
    ratio: float  # value at the largest probed k over value at this k


@dataclass(frozen=True)
class ProbeResult:
    rows: tuple
    certificate: Certificate

    def to_json(self):
        return {
            "table": [{"k": r.k, "value": r.value, "ratio": r.ratio} for r in self.rows],
            "flags": {"value": "heuristic-lower-bound", "ratio": "heuristic-lower-bound"},
        }


def lambda_probe(
    space: Space, f: HomFn, k_list, p: float = 1.0, budget: Budget = DEFAULT_BUDGET
) -> ProbeResult:
    """Table of truncated norms over k_list with ratios against the largest k.

    Warm starts make the values nondecreasing in k, so the ratios are >= 1
    and nonincreasing.  Nothing here extracts the non-constructive constants
    of the finite-tuple argument; the table is the empirical stand-in.
    """
    k_list = list(k_list)
    if k_list != sorted(set(k_list)) or any(k < 1 for k in k_list):
        raise ValidationError("k_list must be strictly increasing positive integers")
    carry = None
    values, mats = [], []
    for kk in k_list:
        value, X, _mode = _stage_once(space, f, p, kk, budget, carry)
        carry = X
        values.append(value)
        mats.append(X)
    vmax = values[-1]
    rows = []
    for kk, v in zip(k_list, values):
        ratio = 1.0 if vmax <= 0 else vmax / v if v > 0 else math.inf
        rows.append(ProbeRow(k=int(kk), value=float(v), ratio=float(ratio)))
    cert = _certificate(space, f, p, mats[-1], budget)
    return ProbeResult(rows=tuple(rows), certificate=cert)


# ----------------------------------------------------------------------
# net-enumeration oracle
# ----------------------------------------------------------------------


def oracle_norm_net(
    space: Space,
    f: HomFn,
    k: int,
    eta: float,
    p: float = 1.0,
    seed: int = 0,
    max_tuples: int = 500_000,
    k_exact: int = K_EXACT_DEFAULT,
) -> float:
    """Exhaustive certificate search over all k-tuples (with repetition) from
    a dual-sphere eta-net.  Independent of the pattern-search path; feasible
    only at desk scale and fails explicitly beyond the tuple budget."""
    net = sphere_net(space, eta, seed=seed)
    m = len(net)
    count = math.comb(m + k - 1, k)
    if count > max_tuples:
        raise BudgetExceededError(
            f"oracle enumeration needs {count} tuples (> {max_tuples}); shrink k or grow eta"
        )
    mode, cfn = make_constraint_batch(space, k, p, k_exact)

    def ratio(X):
        B = X.shape[0]
        vals = f.eval_batch(X.reshape(B * k, -1)).reshape(B, k)
        obj = (np.abs(vals) ** p).sum(axis=1)
        con = cfn(X)
        out = np.zeros(B)
        ok = con > 1e-250
        out[ok] = (obj[ok] / con[ok]) ** (1.0 / p)
        return out

    combos = itertools.combinations_with_replacement(range(m), k)
    chunks = []
    while True:
        block = list(itertools.islice(combos, 8192))
        if not block:
            break
        chunks.append(np.array(block, dtype=int))

    def score(chunk):
        return float(ratio(net[chunk]).max())

    nt = thread_count()
    if nt > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=nt) as ex:
            best = max(ex.map(score, chunks), default=0.0)
    else:
        best = max((score(c) for c in chunks), default=0.0)
    return float(best)


# ----------------------------------------------------------------------
# certificate sparsification
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SparsifiedCertificate:
    """Short subtuple with scalars mu achieving the two summing conditions.

    At the reported level C both conditions are tight by rescaling:
    the constraint of (mu_k x_k*) equals 1/C and sum_k w_k mu_k equals C.
    """

    parent: Certificate
    sigma: tuple
    mu: np.ndarray
    weights: np.ndarray
    achieved: float
    constraint_value: float
    weighted_sum: float
    grid: tuple = field(default=())

    def to_json(self):
        return {
            "sigma": list(self.sigma),
            "mu": [float(v) for v in self.mu],
            "achieved": self.achieved,
            "constraint_value": self.constraint_value,
            "weighted_sum": self.weighted_sum,
            "grid": [{"C": c, "achieved": ok} for c, ok in self.grid],
            "flags": {
                "achieved": "heuristic-lower-bound",
                "constraint_value": "exact",
                "weighted_sum": "exact",
            },
        }


def _mu_lp(w_sel: np.ndarray, rows_sel: np.ndarray):
    """max sum w mu s.t. rows^T mu <= 1, mu >= 0; rows_sel is (|sigma|, R)."""
    res = linprog(
        -w_sel,
        A_ub=rows_sel.T,
        b_ub=np.ones(rows_sel.shape[1]),
        bounds=[(0, None)] * len(w_sel),
        method="highs",
    )
    if not res.success:
        raise ComputationError(f"mu subproblem failed: {res.message}")
    return float(-res.fun), res.x


def sparsify_certificate(
    space: Space,
    f: HomFn,
    cert: Certificate,
    target: int,
    C_grid=(0.25, 0.5, 0.75, 0.9, 1.0),
    seed: int = 0,
    samples: int = 2048,
) -> SparsifiedCertificate:
    """Search for a subset sigma (|sigma| <= target) and scalars mu >= 0 with

        summing_constraint({mu_k x_k*}) <= 1/C  and  sum_k w_k mu_k >= C,

    where w_k = |f(x_k* / a)| and a is the parent objective.  Greedy seeding
    by descending weight, pairwise exchanges, LP for mu at fixed sigma; the
    best C for a subset is sqrt of the LP value, so the grid just records
    which requested levels were reached."""
    if cert.p != 1:
        raise ValidationError("sparsification implements the exponent-1 summing argument only")
    if abs(cert.constraint - 1.0) > 1e-6:
        raise ValidationError("certificate must be normalized (constraint = 1) before sparsifying")
    a = cert.objective
    if a <= 0:
        raise ValidationError("cannot sparsify a certificate with zero objective")
    X = cert.matrix
    k = X.shape[0]
    target = min(target, k)
    if target < 1:
        raise ValidationError("target size must be >= 1")
    w = np.abs(f.eval_batch(X / a))

    V = space.vertices()
    if V is not None:
        rows = np.abs(X @ V.T)  # (k, m): exact support of the constraint
    else:
        rng = np.random.default_rng(mix_seed(seed, 71))
        n = space.dim
        anchors = np.vstack([np.eye(n), -np.eye(n), np.ones((1, n)), -np.ones((1, n))])
        P = np.vstack([space.sphere_sample(rng, samples), anchors])
        nrm = space.norm_batch(P)
        P = P[nrm > 0] / nrm[nrm > 0, None]
        rows = np.abs(X @ P.T)

    order = np.argsort(-w, kind="stable")
    sigma = sorted(order[:target].tolist())

    def score(sig):
        val, mu = _mu_lp(w[sig], rows[sig])
        return val, mu

    best_val, best_mu = score(sigma)
    for _ in range(60):
        improved = False
        candidates = []
        outside = [i for i in range(k) if i not in sigma]
        for pos, out_idx in enumerate(sigma):
            for in_idx in outside:
                trial = sorted(sigma[:pos] + sigma[pos + 1 :] + [in_idx])
                val, mu = score(trial)
                candidates.append((val, trial, mu))
        if candidates:
            candidates.sort(key=lambda t: (-t[0], t[1]))
            val, trial, mu = candidates[0]
            if val > best_val + 1e-12:
                sigma, best_val, best_mu = trial, val, mu
                improved = True
        if not improved:
            break

    mu = np.asarray(best_mu, dtype=float)
    weighted = float(w[sigma] @ mu)
    scaled = mu[:, None] * X[sigma]
    s, _mode = summing_constraint_detail(space, scaled, p=1.0, k_exact=K_EXACT_DEFAULT)
    if weighted <= 0 or s <= 0:
        achieved = 0.0
        mu_report = mu
        con_val = s
        wsum = weighted
    else:
        achieved = math.sqrt(weighted / s)
        mu_report = mu / (s * achieved)
        con_val = s / (s * achieved)  # = 1 / achieved, by linear scaling
        wsum = weighted / (s * achieved)  # = achieved
    grid = tuple((float(c), bool(c <= achieved + 1e-12)) for c in C_grid)
    return SparsifiedCertificate(
        parent=cert,
        sigma=tuple(int(i) for i in sigma),
        mu=mu_report,
        weights=w[sigma],
        achieved=float(achieved),
        constraint_value=float(con_val),
        weighted_sum=float(wsum),
        grid=grid,
    )
