"""Command-line entry points.

Space shorthands: ``l1:2``, ``l2:3``, ``linf:4``, ``lp:1.5:3``,
``wl1:0.5,0.25,0.25``; a JSON object (inline or a path to a .json file)
selects the structured descriptor form, which is also the only way to spell
direct sums.

Every command prints a tab-delimited table to stdout; ``--out`` additionally
writes a JSON record with sorted keys, a ``generated_at`` stamp, the space
descriptor, the optimizer settings, and per-number method flags (exact,
oracle, or heuristic-lower-bound).  The oracle path honors the thread-count
environment variable named in the README.  Exit codes: 0 success, 1 failed
selftest, 2 rejected input, 3 computation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from ._util import dump_json
from .errors import ComputationError, ValidationError
from .fblnorm import Budget, fbl_norm, fbl_norm_k, lambda_probe, oracle_norm_net
from .homfun import absval, delta, directify, join, parse_expr, to_string
from .nakano import (
    GPhiFn,
    cover_upper_bound,
    g_phi_norm,
    maximal_majorant,
    strong_nakano_report,
    truncate_g_phi,
)
from .spaces import Space, space_from_dict, sphere_net
from .witnesses import DyadicModel, c0_summing_demo, l1_dyadic_family, l1_limit_check
from . import reporting


# ----------------------------------------------------------------------
# input parsing
# ----------------------------------------------------------------------


def parse_space(text: str) -> Space:
    text = text.strip()
    if text.startswith("{"):
        return space_from_dict(json.loads(text))
    if text.endswith(".json"):
        if not os.path.exists(text):
            raise ValidationError(f"space file not found: {text}")
        with open(text) as fh:
            return space_from_dict(json.load(fh))
    head, _, rest = text.partition(":")
    try:
        if head == "l1":
            return Space.lp(int(rest), 1.0)
        if head == "l2":
            return Space.lp(int(rest), 2.0)
        if head == "linf":
            return Space.lp(int(rest), math.inf)
        if head == "lp":
            pval, _, dim = rest.partition(":")
            p = math.inf if pval.lower() in ("inf", "infinity") else float(pval)
            return Space.lp(int(dim), p)
        if head == "wl1":
            return Space.weighted_l1([float(v) for v in rest.split(",")])
    except (ValueError, TypeError) as e:
        raise ValidationError(f"bad space shorthand {text!r}: {e}") from None
    raise ValidationError(
        f"unrecognized space {text!r}; use l1:N, l2:N, linf:N, lp:P:N, wl1:w1,w2,... or a JSON descriptor"
    )


def _budget(args) -> Budget:
    return Budget(starts=args.starts, iters=args.iters, seed=args.seed)


def _floats(text: str):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as e:
        raise ValidationError(f"bad numeric list {text!r}: {e}") from None


# ----------------------------------------------------------------------
# output plumbing
# ----------------------------------------------------------------------


def _emit(args, command: str, result: dict, rows, space=None, budget=None, csv_header=None):
    for row in rows:
        print("\t".join(str(c) for c in row))
    if getattr(args, "csv", None):
        reporting.write_csv(args.csv, csv_header or ["key", "value"], rows)
    if getattr(args, "out", None):
        payload = {
            "command": command,
            "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "space": space.describe() if space is not None else None,
            "optimizer": budget.to_json() if budget is not None else None,
            "result": result,
        }
        with open(args.out, "w") as fh:
            fh.write(dump_json(payload))
            fh.write("\n")


def _cert_rows(result: dict):
    rows = []
    for key in ("value", "k", "constraint", "objective", "plateaued"):
        if key in result:
            rows.append((key, result[key]))
    for i, row in enumerate(result.get("certificate", [])):
        rows.append((f"x*_{i}", ", ".join(f"{v:.9g}" for v in row)))
    return rows


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------


def cmd_norm(args) -> int:
    space = parse_space(args.space)
    f = parse_expr(space, args.expr)
    budget = _budget(args)
    if args.k:
        value, cert = fbl_norm_k(space, f, args.k, p=args.p, budget=budget)
        result = cert.to_json()
        k_for_oracle = args.k
    else:
        esc = fbl_norm(space, f, p=args.p, eps=args.eps if args.eps is not None else 0.01, budget=budget)
        result = esc.to_json()
        k_for_oracle = esc.k_used
    if args.oracle is not None:
        ov = oracle_norm_net(space, f, k=k_for_oracle, eta=args.oracle, p=args.p, seed=args.seed)
        result["oracle"] = {"value": ov, "eta": args.oracle, "k": k_for_oracle, "flags": {"value": "oracle"}}
    rows = _cert_rows(result)
    if "oracle" in result:
        rows.append(("oracle_value", result["oracle"]["value"]))
    _emit(args, "norm", result, rows, space, budget)
    return 0


def cmd_bound(args) -> int:
    space = parse_space(args.space)
    f = parse_expr(space, args.expr)
    budget = _budget(args)
    eps = args.eps if args.eps is not None else 0.1
    cov = cover_upper_bound(space, f, k=args.k or 2, eps=eps, p=args.p, seed=args.seed, budget=budget)
    result = cov.to_json()
    rows = [(k, result[k]) for k in ("base_value", "cover_value", "ratio", "delta", "centers", "retries")]
    _emit(args, "bound", result, rows, space, budget)
    return 0


def cmd_maximal(args) -> int:
    space = parse_space(args.space)
    f = parse_expr(space, args.expr)
    res = maximal_majorant(space, f, p=args.p, seed=args.seed)
    result = res.to_json()
    rows = [("bound_norm", res.bound_norm), ("lp_value", res.lp_value), ("rounds", res.rounds)]
    rows += [(f"phi_{a}", float(c)) for a, c in enumerate(res.phi.coeffs)]
    _emit(args, "maximal", result, rows, space)
    return 0


def cmd_probe(args) -> int:
    space = parse_space(args.space)
    f = parse_expr(space, args.expr)
    budget = _budget(args)
    k_list = [int(v) for v in args.k_list.split(",")]
    probe = lambda_probe(space, f, k_list, p=args.p, budget=budget)
    result = probe.to_json()
    rows = [("k", "value", "ratio")] + [(r.k, r.value, r.ratio) for r in probe.rows]
    _emit(args, "probe-lambda", result, rows, space, budget, csv_header=["k", "value", "ratio"])
    return 0


def cmd_gphi(args) -> int:
    space = parse_space(args.space)
    coeffs = _floats(args.phi)
    norm = g_phi_norm(space, coeffs, p=args.p)
    result = {
        "phi": coeffs,
        "p": args.p,
        "norm": norm,
        "flags": {"norm": "exact"},
    }
    rows = [("norm", norm)]
    if args.keep is not None:
        trunc = truncate_g_phi(space, np.asarray(coeffs), keep=args.keep, p=args.p)
        result["truncation"] = trunc.to_json()
        result["truncation"]["expression"] = (
            to_string(trunc.fn) if args.p == 1.0 else repr(trunc.fn)
        )
        rows.append(("tail_norm", trunc.tail_norm))
        rows.append(("kept", ", ".join(map(str, trunc.indices))))
        rows.append(("expression", result["truncation"]["expression"]))
    _emit(args, "gphi", result, rows, space)
    return 0


def cmd_witness(args) -> int:
    if args.model == "c0":
        demo = c0_summing_demo(args.n)
        result = demo.to_json()
        rows = [
            ("N", demo.N),
            ("sup_norm", demo.sup_norm),
            ("tail_all_ones", demo.tail_all_ones),
            ("label", demo.label),
        ]
        _emit(args, "witness", result, rows)
        return 0
    model = DyadicModel(args.m)
    budget = Budget(starts=16, iters=400, seed=args.seed)
    corner = model.corner()
    corner_vals = [float(model.f(n)(corner)) for n in range(0, model.m + 1)]
    check = l1_limit_check(model.m, 1, (Fraction(3, 4), Fraction(-1, 2)))
    norm1, _ = fbl_norm_k(model.space, model.f(1), 1, p=1.0, budget=budget)
    result = {
        "m": model.m,
        "dim": model.dim,
        "corner_values": corner_vals,
        "limit_check": check.to_json(),
        "member_norm_at_k1": {"value": norm1, "flags": {"value": "heuristic-lower-bound"}},
    }
    rows = [("m", model.m), ("dim", model.dim), ("norm_f1_k1", norm1)]
    rows += [(f"f_{n}(corner)", v) for n, v in enumerate(corner_vals)]
    rows += [("limit_check_ok", check.ok)]
    _emit(args, "witness", result, rows, model.space, budget)
    return 0


def cmd_selftest(args) -> int:
    checks = []
    budget = Budget(starts=16, iters=400, seed=0)

    def record(name, ok, detail=""):
        checks.append({"name": name, "ok": bool(ok), "detail": detail})
        print(f"{'PASS' if ok else 'FAIL'}\t{name}" + (f"\t{detail}" if detail else ""))

    rng = np.random.default_rng(7)
    sp2 = Space.lp(2, 1.0)
    sp3 = Space.lp(3, 2.0)
    x = rng.standard_normal(3)
    v, _ = fbl_norm_k(sp3, delta(sp3, x), 1, p=1.0, budget=budget)
    record("evaluation-norm-isometry", abs(v - sp3.norm(x)) <= 1e-6, f"{v:.9f} vs {sp3.norm(x):.9f}")

    e = np.eye(2)
    f = join(absval(delta(sp2, e[0])), absval(delta(sp2, e[1])))
    v2, _ = fbl_norm_k(sp2, f, 2, p=1.0, budget=budget)
    record("join-of-generators", abs(v2 - 2.0) <= 1e-3, f"{v2:.6f}")

    try:
        net = sphere_net(Space.lp(2, 2.0), 0.2)
        record("net-coverage", True, f"{len(net)} points")
    except ComputationError as exc:
        record("net-coverage", False, str(exc))

    psi = np.array([0.25, 0.75])
    res = maximal_majorant(sp2, GPhiFn(sp2, psi, 1.0), p=1.0, seed=0)
    record("majorant-recovery", np.abs(res.phi.coeffs - psi).max() <= 1e-6, str(res.phi.coeffs))

    check = l1_limit_check(2, 1, (Fraction(1, 2), Fraction(1, 2)))
    record("dyadic-limit-exact", check.ok)

    demo = c0_summing_demo(5)
    record("sup-norm-tail", demo.tail_all_ones and demo.sup_norm == 1)

    ok = all(c["ok"] for c in checks)
    result = {"checks": checks, "ok": ok}
    if getattr(args, "out", None):
        _emit(args, "selftest", result, [], None, None)
    return 0 if ok else 1


def _run_problem(prob: dict, seed: int) -> dict:
    if not isinstance(prob, dict) or "task" not in prob:
        raise ValidationError("each problem must be a mapping with a 'task' field")
    task = prob["task"]
    budget = Budget(
        starts=int(prob.get("starts", 64)),
        iters=int(prob.get("iters", 2000)),
        seed=int(prob.get("seed", seed)),
    )
    p = float(prob.get("p", 1.0))
    sp_desc = prob.get("space")
    space = space_from_dict(sp_desc) if isinstance(sp_desc, dict) else parse_space(str(sp_desc))
    out: dict = {"task": task}
    if task == "norm":
        f = parse_expr(space, prob["expr"])
        if prob.get("k"):
            _, cert = fbl_norm_k(space, f, int(prob["k"]), p=p, budget=budget)
            out["result"] = cert.to_json()
        else:
            out["result"] = fbl_norm(space, f, p=p, eps=float(prob.get("eps", 0.01)), budget=budget).to_json()
    elif task == "bound":
        f = parse_expr(space, prob["expr"])
        cov = cover_upper_bound(
            space, f, k=int(prob.get("k", 2)), eps=float(prob.get("eps", 0.1)), p=p,
            seed=budget.seed, budget=budget,
        )
        out["result"] = cov.to_json()
    elif task == "maximal":
        f = parse_expr(space, prob["expr"])
        out["result"] = maximal_majorant(space, f, p=p, seed=budget.seed).to_json()
    elif task == "probe-lambda":
        f = parse_expr(space, prob["expr"])
        out["result"] = lambda_probe(space, f, [int(v) for v in prob["k_list"]], p=p, budget=budget).to_json()
    elif task == "gphi":
        coeffs = [float(v) for v in prob["phi"]]
        out["result"] = {"phi": coeffs, "norm": g_phi_norm(space, coeffs, p=p), "flags": {"norm": "exact"}}
    else:
        raise ValidationError(f"unknown task {task!r} in problem file")
    return out


def cmd_run(args) -> int:
    with open(args.problem) as fh:
        doc = json.load(fh)
    problems = doc["problems"] if isinstance(doc, dict) and "problems" in doc else [doc]
    results = [_run_problem(prob, args.seed) for prob in problems]
    rows = []
    for i, res in enumerate(results):
        headline = res["result"].get("value", res["result"].get("bound_norm", res["result"].get("norm", "")))
        rows.append((i, res["task"], headline))
    _emit(args, "run", {"problems": results}, rows, None, None, csv_header=["index", "task", "value"])
    return 0


def cmd_report(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    budget = Budget(starts=16, iters=400, seed=args.seed)
    artifacts = []

    def path(name):
        artifacts.append(name)
        return os.path.join(args.out_dir, name)

    # 1. truncation probe on the standard join example
    sp2 = Space.lp(2, 1.0)
    e = np.eye(2)
    f = join(absval(delta(sp2, e[0])), absval(delta(sp2, e[1])))
    probe = lambda_probe(sp2, f, [1, 2, 3, 4], p=1.0, budget=budget)
    probe_rows = [(r.k, r.value, r.ratio) for r in probe.rows]
    reporting.write_csv(path("probe.csv"), ["k", "value", "ratio"], probe_rows)
    reporting.fig_probe(path("probe.png"), probe_rows)

    # 2. a dual-sphere net
    spe = Space.lp(2, 2.0)
    net = sphere_net(spe, 0.15)
    reporting.write_csv(path("net.csv"), ["x", "y"], [(float(a), float(b)) for a, b in net])
    reporting.fig_net2d(path("net2d.png"), spe, net)

    # 3. majorant ratios for seeded directed families
    labels, ratios = [], []
    nak_rows = []
    for s in range(3):
        rng = np.random.default_rng(1000 + s)
        psi = rng.uniform(0.2, 1.0, size=2)
        psi = psi / psi.sum()
        members = directify(
            [GPhiFn(sp2, psi * np.array([1.0, 0.0]), 1.0), GPhiFn(sp2, psi, 1.0)], seed=s
        )
        rep = strong_nakano_report(sp2, members, method="maximal", p=1.0, seed=s, budget=budget)
        labels.append(f"family {s}")
        ratios.append(rep.ratio)
        nak_rows.append((s, rep.sup_member_norm, rep.bound_norm, rep.ratio))
    reporting.write_csv(path("nakano.csv"), ["family", "sup_member_norm", "bound_norm", "ratio"], nak_rows)
    reporting.fig_nakano(path("nakano.png"), labels, ratios)

    # 4. dyadic stabilization at a block-constant rational point
    check = l1_limit_check(3, 1, (Fraction(3, 4), Fraction(-1, 2)))
    levels = list(range(len(check.values)))
    values = [float(v) for v in check.values]
    reporting.write_csv(path("witness.csv"), ["level", "value"], list(zip(levels, values)))
    reporting.fig_witness(path("witness.png"), levels, values, float(check.integral))

    result = {
        "out_dir": args.out_dir,
        "artifacts": sorted(artifacts),
        "probe": probe.to_json(),
        "nakano": {"ratios": ratios},
        "witness": check.to_json(),
    }
    rows = [("artifact", a) for a in sorted(artifacts)]
    _emit(args, "report", result, rows, None, budget)
    return 0


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbl-lab",
        description="numerical laboratory for free Banach-lattice norms over finite-dimensional spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, space=True, expr=True, optimizer=True):
        if space:
            sp.add_argument("--space", "-s", required=True, help="space shorthand or JSON descriptor")
        if expr:
            sp.add_argument("--expr", "-e", required=True, help="lattice expression over generators")
        sp.add_argument("--p", type=float, default=1.0, help="convexity exponent (default 1)")
        sp.add_argument("--seed", type=int, default=0)
        if optimizer:
            sp.add_argument("--starts", type=int, default=64)
            sp.add_argument("--iters", type=int, default=2000)
        sp.add_argument("--out", help="write a JSON record here")
        sp.add_argument("--csv", help="write the table as CSV here")

    p_norm = sub.add_parser("norm", help="certificate value of an expression")
    common(p_norm)
    p_norm.add_argument("--k", type=int, default=0, help="certificate length; 0 = escalate with plateau detection")
    p_norm.add_argument("--eps", type=float, default=None, help="plateau threshold (escalation mode)")
    p_norm.add_argument("--oracle", type=float, default=None, metavar="ETA", help="also run the net-enumeration oracle at this resolution")
    p_norm.set_defaults(func=cmd_norm)

    p_bound = sub.add_parser("bound", help="cap-cover upper bound of an expression")
    common(p_bound)
    p_bound.add_argument("--k", type=int, default=2)
    p_bound.add_argument("--eps", type=float, default=None, help="relative slack (default 0.1)")
    p_bound.set_defaults(func=cmd_bound)

    p_max = sub.add_parser("maximal", help="LP majorant over an l1-type base")
    common(p_max, optimizer=False)
    p_max.set_defaults(func=cmd_maximal)

    p_probe = sub.add_parser("probe-lambda", help="truncation table over a list of k values")
    common(p_probe)
    p_probe.add_argument("--k-list", default="1,2,4,8", help="comma-separated k values")
    p_probe.set_defaults(func=cmd_probe)

    p_gphi = sub.add_parser("gphi", help="closed-form norm and truncation of a g_phi function")
    common(p_gphi, expr=False, optimizer=False)
    p_gphi.add_argument("--phi", required=True, help="comma-separated coefficients")
    p_gphi.add_argument("--keep", type=int, default=None, help="truncate to this many coefficients")
    p_gphi.set_defaults(func=cmd_gphi)

    p_wit = sub.add_parser("witness", help="finite witnesses: dyadic model or sup-norm indicators")
    p_wit.add_argument("--model", choices=("dyadic", "c0"), default="dyadic")
    p_wit.add_argument("--m", type=int, default=3, help="dyadic levels")
    p_wit.add_argument("--n", type=int, default=10, help="ambient dimension for the c0 model")
    p_wit.add_argument("--seed", type=int, default=0)
    p_wit.add_argument("--out")
    p_wit.add_argument("--csv")
    p_wit.set_defaults(func=cmd_witness)

    p_self = sub.add_parser("selftest", help="small built-in battery; exit 1 on failure")
    p_self.add_argument("--out")
    p_self.set_defaults(func=cmd_selftest)

    p_run = sub.add_parser("run", help="execute problems from a JSON file")
    p_run.add_argument("--problem", required=True, help="problem file (single object or {'problems': [...]})")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out")
    p_run.add_argument("--csv")
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("report", help="render the demo battery: figures plus delimited tables")
    p_rep.add_argument("--out-dir", required=True)
    p_rep.add_argument("--seed", type=int, default=0)
    p_rep.add_argument("--out")
    p_rep.add_argument("--csv")
    p_rep.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ComputationError as e:
        print(f"computation failed: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
