"""Command-line interface: ``epidemic-game <command> --config PATH``.

Exit codes: 0 ok, 1 property failure (failed verdict or lemma suite),
2 config error, 3 size cap exceeded, 4 model precondition (coordination).
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
from typing import Any

import numpy as np

from . import __version__
from .analysis import (
    HistoryFamily,
    check,
    collect_cases,
    effectiveness_threshold,
    grim_min_omega,
    node_min_omega,
)
from .config import build_reliability_inputs, build_scenario, canonicalize, digest, load
from .epidemic import PRNG_NAME, exact_non_delivery, monte_carlo_non_delivery, percolation_oracle
from .errors import ConfigError, NotCoordinated, RatioTooSmall, TooLarge, UnpunishableNode
from .game import Game
from .graph import (
    INF,
    DelayModelConfig,
    build_graph,
    compute_delays,
    is_redundant,
    lemma_paths_condition,
    supports_full_indirect,
)
from .strategy import PRIVATE, coordination_failure, mdel_or_inf
from .verification import SUITES, run_suites

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_PROPERTY, EXIT_CONFIG, EXIT_SIZE, EXIT_PRECONDITION = 0, 1, 2, 3, 4


def _clean(x: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, infinities to the string "inf"."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def report(command: str, cfg: dict | None, seed: int | None, results: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "scenario_digest": digest(cfg) if cfg is not None else None,
        "results": _clean(results),
        "provenance": {"tool": "epidemic-game", "version": __version__, "prng": PRNG_NAME, "seed": seed},
    }


def render_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(_clean(r))
    return buf.getvalue()


def _family(sc, cfg) -> HistoryFamily:
    a = cfg["analysis"]
    return HistoryFamily.standard(sc, depth=a["history_depth"], max_lag=a["max_lag"])


def _seed(args, cfg) -> int:
    if args.seed is not None:
        return args.seed
    return cfg["analysis"]["seed"] if cfg is not None else 42


# commands

def cmd_reliability(args, cfg):
    g, p = build_reliability_inputs(cfg)
    seed = _seed(args, cfg)
    if args.targets:
        try:
            targets = [int(t) for t in args.targets.split(",")]
        except ValueError:
            raise ConfigError(f"--targets: expected comma-separated node ids, got {args.targets!r}")
        for t in targets:
            if not 0 <= t < g.n:
                raise ConfigError(f"--targets: node {t} out of range")
    else:
        targets = cfg["analysis"]["targets"] or list(g.nodes)
    methods = [m for m in ("exact", "oracle") if getattr(args, m)]
    mc = None
    if args.mc is not None:
        if len(args.mc) > 2:
            raise ConfigError("--mc takes TRIALS [SEED]")
        mc = (int(args.mc[0]), int(args.mc[1]) if len(args.mc) == 2 else seed)
        seed = mc[1]
    if not methods and mc is None:
        methods = ["exact"]
    rows = []
    for t in targets:
        row: dict[str, Any] = {"target": t}
        vals = []
        if "exact" in methods:
            q = exact_non_delivery(g, p, {t})
            row["exact_q"], row["exact_reliability"] = q, 1 - q
            vals.append(q)
        if "oracle" in methods:
            q = percolation_oracle(g, p, {t})
            row["oracle_q"], row["oracle_reliability"] = q, 1 - q
            vals.append(q)
        if mc is not None:
            est = monte_carlo_non_delivery(g, p, {t}, mc[0], mc[1])
            row["mc_q"], row["mc_reliability"], row["mc_std_error"] = est.mean, 1 - est.mean, est.std_error
            row["mc_trials"] = est.trials
        if len(vals) > 1:
            row["max_abs_diff"] = max(vals) - min(vals)
        rows.append(row)
    return {"methods": methods + (["mc"] if mc else []), "rows": rows}, rows, seed, EXIT_OK


def cmd_check_topology(args, cfg):
    gs = cfg["graph"]
    try:
        g = build_graph([tuple(e) for e in gs["edges"]], gs["source_targets"], gs["nodes"])
        ov = {(o["observer"], o["accused"], o["victim"]): INF if o["delay"] == "inf" else o["delay"]
              for o in cfg["monitoring"]["overrides"]}
        delays = compute_delays(g, DelayModelConfig(cfg["monitoring"]["delay_model"], ov))
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"graph: {exc}") from exc
    edges = [{"edge": [i, j], "punishment_paths": lemma_paths_condition(g, i, j)} for i, j in g.edges()]
    nodes = [{"node": i, "supports_full_indirect": supports_full_indirect(g, i),
              "mdel": mdel_or_inf(g, delays, i)} for i in g.nodes]
    infinite = sum(1 for v in delays.table.values() if v == INF)
    results = {
        "edges": edges,
        "nodes": nodes,
        "is_redundant": is_redundant(g),
        "delays": {"model": cfg["monitoring"]["delay_model"], "max_finite": delays.max_finite(),
                   "infinite_entries": infinite, "entries": len(delays.table)},
    }
    rows = [{"kind": "edge", "id": f"{e['edge'][0]}->{e['edge'][1]}", "value": e["punishment_paths"]} for e in edges]
    rows += [{"kind": "node", "id": str(n["node"]), "value": n["supports_full_indirect"]} for n in nodes]
    return results, rows, None, EXIT_OK


def _build(cfg):
    try:
        return build_scenario(cfg)
    except UnpunishableNode as exc:
        raise NotCoordinated(str(exc), exc.triple) from exc


def cmd_check_equilibrium(args, cfg):
    if args.omega is not None:
        if not 0 < args.omega < 1:
            raise ConfigError("--omega must lie in (0, 1)")
        cfg = copy.deepcopy(cfg)
        cfg["utility"]["omega"] = [args.omega] * cfg["graph"]["nodes"]
    sc = _build(cfg)
    if sc.monitoring == PRIVATE:
        failure = coordination_failure(sc.durations, sc.delays, sc.graph)
        if failure is not None:
            raise NotCoordinated(f"durations do not enforce coordination; failing triple {list(failure)}", failure)
    game = Game(sc)
    fam = _family(sc, cfg)
    rep = check(sc, fam, tolerance=cfg["analysis"]["tolerance"], game=game)
    results = rep.to_dict()
    if args.solve_omega:
        cases = collect_cases(sc, fam, game)
        solved = {}
        for i in sc.graph.nodes:
            mine = [c for c in cases if c.deviator == i]
            entry = {"min_omega": node_min_omega(mine, sc.params.beta[i], sc.params.gamma[i],
                                                 cfg["analysis"]["tolerance"])}
            if sc.durations.is_grim and sc.graph.out_edges[i]:
                try:
                    entry["grim_min_omega"] = grim_min_omega(sc, i)
                except (RatioTooSmall, UnpunishableNode) as exc:
                    entry["grim_min_omega"] = None
                    entry["note"] = str(exc)
            solved[str(i)] = entry
        results["solved_omega"] = solved
    rows = [m.to_dict() for m in rep.margins]
    for r in rows:
        r["dropped"] = " ".join(map(str, r["dropped"]))
    code = EXIT_OK if rep.verdict == "pass" else EXIT_PROPERTY
    return results, rows, None, code


SWEEPABLE = ("p", "node_p", "source_p", "tau")


def _apply(cfg: dict, param: str, value: str) -> dict:
    c = copy.deepcopy(cfg)
    if param == "tau":
        c["strategy"]["tau"] = "grim" if value == "grim" else int(value)
        return canonicalize(c)
    v = float(value)
    if param in ("p", "node_p"):
        c["profile"]["node_probs"] = [[u, w, v] for u, w, _ in c["profile"]["node_probs"]]
    if param in ("p", "source_p"):
        c["profile"]["source_probs"] = [v if x > 0 or i in c["graph"]["source_targets"] else 0.0
                                        for i, x in enumerate(c["profile"]["source_probs"])]
    return canonicalize(c)


def cmd_effectiveness(args, cfg):
    points = [(None, None)]
    if args.sweep:
        if "=" not in args.sweep:
            raise ConfigError("--sweep: expected param=v1,v2,...")
        param, grid = args.sweep.split("=", 1)
        if param not in SWEEPABLE:
            raise ConfigError(f"--sweep: parameter must be one of {list(SWEEPABLE)}")
        points = [(param, v) for v in grid.split(",") if v]
        if not points:
            raise ConfigError("--sweep: empty grid")
    rows, details = [], []
    for param, value in points:
        try:
            c = cfg if param is None else _apply(cfg, param, value)
        except ValueError as exc:
            raise ConfigError(f"--sweep: {exc}") from exc
        sc = _build(c)
        eff = effectiveness_threshold(sc, _family(sc, c))
        d = eff.to_dict()
        row = {"param": param or "", "value": value or "", "folk": eff.folk, "threshold": eff.threshold,
               "sufficient": eff.sufficient, "sufficient_name": eff.sufficient_name or "",
               "necessary": eff.necessary, "sandwich_ok": eff.sandwich_ok}
        rows.append(row)
        details.append({"param": param, "value": value, **d})
    code = EXIT_OK if all(r["sandwich_ok"] for r in rows) else EXIT_PROPERTY
    return {"rows": details}, rows, None, code


def cmd_verify_lemmas(args, cfg):
    if args.cases < 0:
        raise ConfigError("--cases must be non-negative")
    seed = 42 if args.seed is None else args.seed
    names = args.suite or None
    if names:
        bad = sorted(set(names) - set(SUITES))
        if bad:
            raise ConfigError(f"--suite: unknown suite(s) {bad}")
    res = run_suites(seed, args.cases, expiry_slack=1 if args.inject_fault else 0, names=names)
    if args.cases == 0:
        print("warning: --cases 0 runs nothing; the pass is vacuous", file=sys.stderr)
    suites = [r.to_dict() for r in res]
    rows = [{"suite": r.name, "cases": r.cases, "failures": r.failures, "passed": r.passed} for r in res]
    ok = all(r.passed for r in res)
    return {"cases_per_suite": args.cases, "passed": ok, "suites": suites}, rows, seed, \
        EXIT_OK if ok else EXIT_PROPERTY


COMMANDS = {
    "reliability": cmd_reliability,
    "check-topology": cmd_check_topology,
    "check-equilibrium": cmd_check_equilibrium,
    "effectiveness": cmd_effectiveness,
    "verify-lemmas": cmd_verify_lemmas,
}


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="epidemic-game",
                                 description="Reliability and punishment-equilibrium analysis of epidemic dissemination.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="scenario JSON file")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--seed", type=_u64, help="unsigned 64-bit seed (overrides analysis.seed)")
        p.add_argument("--csv", action="store_true", help="emit a CSV table instead of the JSON report")

    p = sub.add_parser("reliability", help="non-delivery probability per target")
    common(p)
    p.add_argument("--targets", help="comma-separated node ids (default: every node)")
    p.add_argument("--exact", action="store_true", help="wave recursion (default)")
    p.add_argument("--oracle", action="store_true", help="brute-force edge percolation")
    p.add_argument("--mc", nargs="+", metavar="N", help="Monte Carlo: TRIALS [SEED]")

    p = sub.add_parser("check-topology", help="punishment-path, redundancy and delay checks")
    common(p)

    p = sub.add_parser("check-equilibrium", help="DC (public) or PDC (private) check on the history family")
    common(p)
    p.add_argument("--omega", type=float, help="override every node's discount factor")
    p.add_argument("--solve-omega", action="store_true", help="also report the least workable discount factors")

    p = sub.add_parser("effectiveness", help="empirical threshold ratio and bounds")
    common(p)
    p.add_argument("--sweep", help=f"param=v1,v2,... with param in {', '.join(SWEEPABLE)}")

    p = sub.add_parser("verify-lemmas", help="randomized property suites")
    common(p, config_required=False)
    p.add_argument("--cases", type=int, default=200, help="cases per suite (default 200)")
    p.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config) if args.config else None
        results, rows, seed, code = COMMANDS[args.command](args, cfg)
        if seed is None and cfg is not None:
            seed = _seed(args, cfg)
        text = render_csv(rows) if args.csv else render_json(report(args.command, cfg, seed, results))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TooLarge as exc:
        print(f"size cap: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except NotCoordinated as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
