"""Command-line front end.

Every command prints one JSON document on stdout with ``--output json``
(the default) and sends diagnostics to stderr. Exit codes: 0 success or PASS,
2 input or capability error, 3 audit FAIL.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

from .audit import FAIL, audit_exact, audit_sampled
from .errors import LVPIRError, TooLargeError, TooManyQueriesError
from .model import CharMatrix, load_matrix, prior_s, rational_to_json
from .planner import (PlannerConfig, SchemePlan, column_rank, detect_groups, plan_best,
                      plan_grouping, solve_exhaustive)
from .privacy import DEFAULT_MAX_K, enumerate_valid_subsets
from .protocol import Database, measure_average_cost, simulate
from .rng import SplitMix64

log = logging.getLogger("lvpir")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FAIL = 3

SCHEMES = ("auto", "es", "group", "full")


@dataclass
class RunConfig:
    matrix_path: Optional[str] = None
    db_path: Optional[str] = None
    plan_path: Optional[str] = None
    scheme: str = "auto"
    seed: int = 0
    trials: int = 1000
    enum_cap: int = DEFAULT_MAX_K
    max_enum: int = 10**6
    alpha: float = 0.01
    threads: int = 1
    output: str = "json"

    @classmethod
    def from_args(cls, args) -> RunConfig:
        return cls(**{k: getattr(args, k) for k in cls.__dataclass_fields__ if hasattr(args, k)})


def bundled_matrix_path(name: str) -> Path:
    return Path(str(resources.files("lvpir") / "data" / name))


def _read_matrix(path: str) -> CharMatrix:
    p = Path(path)
    if not p.exists():
        for candidate in (path, path + ".mat"):
            bundled = bundled_matrix_path(candidate)
            if bundled.exists():
                p = bundled
                break
    return load_matrix(p)


def _make_plan(H: CharMatrix, cfg: RunConfig):
    if cfg.plan_path:
        with open(cfg.plan_path, encoding="utf-8") as fh:
            plan = SchemePlan.from_json(json.load(fh), K=H.K)
        if plan.K != H.K:
            raise LVPIRError(f"plan K={plan.K} does not match matrix K={H.K}")
        return plan, plan.cost()
    if cfg.scheme == "es":
        catalog = enumerate_valid_subsets(H, max_K=cfg.enum_cap, workers=cfg.threads)
        return solve_exhaustive(H, catalog)
    if cfg.scheme == "group":
        return plan_grouping(H)
    if cfg.scheme == "full":
        plan = SchemePlan.full(H.K)
        return plan, plan.cost()
    return plan_best(H, PlannerConfig(enum_cap=cfg.enum_cap, workers=cfg.threads))


def _emit(doc: dict, cfg: RunConfig, text_lines=None) -> None:
    if cfg.output == "json":
        json.dump(doc, sys.stdout, sort_keys=True)
        sys.stdout.write("\n")
    else:
        for line in text_lines or [f"{k}: {v}" for k, v in doc.items()]:
            print(line)


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def _plan_doc(plan, cost) -> dict:
    return {"plan": plan.to_json(), "cost": cost.to_json()}


def cmd_plan(cfg: RunConfig) -> int:
    H = _read_matrix(cfg.matrix_path)
    plan, cost = _make_plan(H, cfg)
    lines = [f"kind: {plan.kind}", f"average cost: {_frac(cost.average)} messages (K={H.K})"]
    if plan.kind == "partition":
        lines.append("blocks: " + " ".join(str(b.to_list()) for b in plan.blocks))
    elif plan.kind == "grouping":
        lines.append(f"groups: {[g.to_list() for g in plan.groups]} rho: {plan.rho} "
                     f"picks: {list(plan.picks)}")
    _emit(_plan_doc(plan, cost), cfg, lines)
    return EXIT_OK


def _run_audit(H, plan, cfg):
    try:
        return audit_exact(H, plan, max_enum=cfg.max_enum)
    except TooManyQueriesError as exc:
        log.warning("%s; falling back to the sampled audit", exc)
        return audit_sampled(H, plan, cfg.trials, SplitMix64(cfg.seed), alpha=cfg.alpha,
                             workers=cfg.threads)


def cmd_audit(cfg: RunConfig) -> int:
    H = _read_matrix(cfg.matrix_path)
    plan, cost = _make_plan(H, cfg)
    report = _run_audit(H, plan, cfg)
    doc = {"plan": plan.to_json(), "audit": report.to_json()}
    lines = [f"verdict: {report.verdict}", f"plan: {plan.dumps()}"]
    if hasattr(report, "max_tv_distance"):
        lines.append(f"max TV distance: {_frac(report.max_tv_distance)}")
        lines += [f"  q={r.query.to_list()} Pr={_frac(r.probability)} "
                  f"posterior={[_frac(p) for p in r.posterior]} "
                  f"{'ok' if r.exact_match else 'LEAK'}" for r in report.per_query[:50]]
    _emit(doc, cfg, lines)
    return EXIT_FAIL if report.verdict == FAIL else EXIT_OK


def cmd_simulate(cfg: RunConfig, transcripts: Optional[str] = None) -> int:
    if not cfg.db_path:
        raise LVPIRError("simulate needs --db")
    H = _read_matrix(cfg.matrix_path)
    db = Database.load(cfg.db_path)
    if db.K != H.K:
        raise LVPIRError(f"database K={db.K} does not match matrix K={H.K}")
    plan, cost = _make_plan(H, cfg)
    runs = simulate(db, plan, cfg.trials, SplitMix64(cfg.seed))
    if transcripts:
        with open(transcripts, "w", encoding="utf-8") as fh:
            for t in runs:
                fh.write(json.dumps(t.to_json(), sort_keys=True) + "\n")
    m = measure_average_cost(db, plan, cfg.trials, SplitMix64(cfg.seed))
    doc = {"plan": plan.to_json(), "cost": cost.to_json(), "L_bits": db.L_bits,
           "measurement": m.to_json(),
           "all_decoded": all(t.decoded == db.message(t.theta) for t in runs)}
    lines = [f"trials: {m.trials}", f"mean bits: {m.mean_bits:.3f} +/- {m.std_error:.3f}",
             f"expected bits: {_frac(m.expected_bits)}", f"decoded ok: {doc['all_decoded']}"]
    _emit(doc, cfg, lines)
    return EXIT_OK


def cmd_check_matrix(cfg: RunConfig) -> int:
    H = _read_matrix(cfg.matrix_path)
    groups = detect_groups(H)
    plan, _ = plan_grouping(H)
    rank = column_rank(H)
    doc = {"T": H.T, "K": H.K, "rank": rank, "full_column_rank": rank == H.K,
           "groups": [g.to_list() for g in groups], "group_sizes": [len(g) for g in groups],
           "rho": plan.rho, "prior": prior_s(H).to_json()}
    lines = [f"T={H.T} K={H.K} rank={rank}", f"group sizes: {doc['group_sizes']} rho: {plan.rho}",
             "prior: " + " ".join(_frac(p) for p in prior_s(H))]
    _emit(doc, cfg, lines)
    return EXIT_OK


def cmd_gen_db(K: int, L_bits: int, seed: int, out: str) -> int:
    Database.random(K, L_bits, seed).save(out)
    log.info("wrote %d messages of %d bits to %s", K, L_bits, out)
    return EXIT_OK


def cmd_report(cfg: RunConfig, out_dir: str) -> int:
    from .plotting import plot_costs, plot_posteriors

    H = _read_matrix(cfg.matrix_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plan, cost = _make_plan(H, cfg)
    audit = audit_exact(H, plan, max_enum=cfg.max_enum)
    costs = {}
    if H.K <= cfg.enum_cap:
        costs["exhaustive"] = solve_exhaustive(H, max_K=cfg.enum_cap)[1]
    costs["grouping"] = plan_grouping(H)[1]
    costs["full"] = SchemePlan.full(H.K).cost()
    plot_costs(costs, out / "cost.png", title=Path(cfg.matrix_path).stem)
    plot_posteriors(audit, out / "posterior.png")
    doc = {"plan": plan.to_json(), "cost": cost.to_json(), "audit": audit.to_json(),
           "scheme_costs": {k: rational_to_json(v.average) for k, v in costs.items()},
           "figures": [str(out / "cost.png"), str(out / "posterior.png")]}
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
    _emit(doc, cfg, [f"verdict: {audit.verdict}", f"wrote {out}/report.json, cost.png, posterior.png"])
    return EXIT_FAIL if audit.verdict == FAIL else EXIT_OK


def golden_checks() -> list[tuple[str, bool]]:
    """The three worked examples, checked exactly."""
    h1 = load_matrix(bundled_matrix_path("example1.mat"))
    h2 = load_matrix(bundled_matrix_path("example2.mat"))
    h3 = load_matrix(bundled_matrix_path("example3.mat"))
    F = Fraction
    p1, c1 = solve_exhaustive(h1)
    g2, gc2 = plan_grouping(h2)
    p3, c3 = solve_exhaustive(h3)
    return [
        ("example1 prior [1/2, 1/2]", prior_s(h1).probs == (F(1, 2), F(1, 2))),
        ("example1 blocks {1,2},{3}", [b.to_list() for b in p1.blocks] == [[1, 2], [3]]),
        ("example1 cost 5/3", c1.average == F(5, 3)),
        ("example2 groups {1..4},{5,6}", [g.to_list() for g in detect_groups(h2)] == [[1, 2, 3, 4], [5, 6]]),
        ("example2 rho 2, cost 3", g2.rho == 2 and gc2.average == 3),
        ("example2 grouping audit PASS over 12 queries",
         (lambda r: r.passed and len(r.per_query) == 12)(audit_exact(h2, g2))),
        ("example3 prior [1/5, 3/10, 1/2]", prior_s(h3).probs == (F(1, 5), F(3, 10), F(1, 2))),
        ("example3 ES blocks {1,2},{3,4}, cost 2",
         [b.to_list() for b in p3.blocks] == [[1, 2], [3, 4]] and c3.average == 2),
        ("example3 grouping cost 4", plan_grouping(h3)[1].average == 4),
    ]


def cmd_reproduce(cfg: RunConfig) -> int:
    checks = golden_checks()
    doc = {"checks": [{"name": n, "pass": ok} for n, ok in checks],
           "all_pass": all(ok for _, ok in checks)}
    _emit(doc, cfg, [f"{'PASS' if ok else 'FAIL'}  {n}" for n, ok in checks])
    return EXIT_OK if doc["all_pass"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lvpir", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, matrix=True):
        if matrix:
            p.add_argument("--matrix", dest="matrix_path", required=True,
                           help="matrix file (or bundled name: example1, example2, example3, fullrank)")
        p.add_argument("--output", choices=("json", "text"), default="json")
        p.add_argument("--threads", type=int, default=1)

    def planning(p):
        p.add_argument("--scheme", choices=SCHEMES, default="auto")
        p.add_argument("--plan", dest="plan_path", help="plan JSON file; overrides --scheme")
        p.add_argument("--enum-cap", type=int, default=DEFAULT_MAX_K)

    p = sub.add_parser("plan", help="compute a privacy-certified query plan")
    common(p)
    planning(p)

    p = sub.add_parser("audit", help="check that a plan leaks nothing about S")
    common(p)
    planning(p)
    p.add_argument("--max-enum", type=int, default=10**6)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.01)

    p = sub.add_parser("simulate", help="run retrievals against a database file")
    common(p)
    planning(p)
    p.add_argument("--db", dest="db_path", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transcripts", help="write one JSON transcript per line here")

    p = sub.add_parser("check-matrix", help="validate a matrix; report rank and groups")
    common(p)

    p = sub.add_parser("report", help="plan + exact audit, with figures")
    common(p)
    planning(p)
    p.add_argument("--max-enum", type=int, default=10**6)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("gen-db", help="write a random database file")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--L-bits", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("reproduce", help="run the worked-example golden checks")
    common(p, matrix=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s: %(message)s")
    cfg = RunConfig.from_args(args)
    try:
        if args.command == "plan":
            return cmd_plan(cfg)
        if args.command == "audit":
            return cmd_audit(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.transcripts)
        if args.command == "check-matrix":
            return cmd_check_matrix(cfg)
        if args.command == "report":
            return cmd_report(cfg, args.out_dir)
        if args.command == "gen-db":
            return cmd_gen_db(args.K, args.L_bits, args.seed, args.out)
        return cmd_reproduce(cfg)
    except TooLargeError as exc:
        print(f"error: {exc} (hint: --scheme group)", file=sys.stderr)
        return EXIT_INPUT
    except (LVPIRError, OSError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
