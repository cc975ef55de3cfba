"""Acceptance criteria 1-9, one PASS/FAIL line each."""

import filecmp
import json
import math
import time
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from epidemic_game.analysis import (
    HistoryFamily,
    check,
    effectiveness_threshold,
    folk_upper_bound,
    grim_min_omega,
    collapse_regime,
)
from epidemic_game.cli import main
from epidemic_game.epidemic import exact_non_delivery
from epidemic_game.game import UtilityParams
from epidemic_game.graph import is_redundant, supports_full_indirect
from epidemic_game.strategy import GRIM
from epidemic_game.verification import SUITES, sandwich_cases

from conftest import complete_edges, private_scenario, public_scenario

CONFIGS = Path(__file__).resolve().parent.parent / "demos" / "configs"
SEED = 20261017


def rng_for(k):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([SEED, k])))


def timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def test_criterion_1_oracle_equivalence(criterion):
    res, secs = timed(lambda: SUITES["oracle_equivalence"](rng_for(1), 500, max_nodes=5))
    ok = res.cases == 500 and res.passed and secs <= 60
    criterion(1, ok, f"{res.cases} graphs, {res.failures} mismatches above 1e-12, {secs:.1f}s")
    assert ok, res.counterexample


def test_criterion_2_reliability_lemmas(criterion):
    res, secs = timed(lambda: SUITES["reliability_lemmas"](rng_for(2), 200, max_nodes=8))
    ok = res.cases == 200 and res.passed and secs <= 120
    criterion(2, ok, f"{res.cases} instances (n <= 8), {res.failures} failures, {secs:.1f}s")
    assert ok, res.counterexample


def test_criterion_3_defection_set_closed_forms(criterion):
    out = {name: SUITES[name](rng_for(3 + k), 200) for k, name in
           enumerate(("ds_public", "ds_private", "common_knowledge"))}
    ok = all(r.cases == 200 and r.passed for r in out.values())
    criterion(3, ok, ", ".join(f"{n} {r.cases - r.failures}/{r.cases}" for n, r in out.items()))
    assert ok, {n: r.counterexample for n, r in out.items()}


def test_criterion_4_coordinated_punishment_window(criterion):
    res = SUITES["coordination"](rng_for(6), 50)
    ok = res.cases == 50 and res.passed
    criterion(4, ok, f"{res.cases} private scenarios, {res.failures} with a stage off the exact 0/baseline pattern")
    assert ok, res.counterexample


def test_criterion_5_bound_sandwich(criterion):
    rows, rejected = [], 0
    for sc, eff, skip in sandwich_cases(rng_for(7), 30):
        rejected += skip
        lower = eff.threshold >= eff.folk * (1 - 1e-6)
        upper = eff.threshold <= eff.sufficient * (1 + 1e-6)
        rows.append((sc.monitoring, eff.sufficient_name, lower and upper, eff))
    ok = len(rows) == 30 and all(r[2] for r in rows)
    names = sorted({r[1] for r in rows})
    criterion(5, ok, f"{sum(r[2] for r in rows)}/{len(rows)} sandwiched ({', '.join(names)}); "
                     f"{rejected} private draws redrawn for lacking a finite c")
    assert ok, [(r[0], r[3].folk, r[3].threshold, r[3].sufficient) for r in rows if not r[2]]


def k5_direct(q_target, p=0.07):
    def q_of(ps):
        sc = public_scenario(complete_edges(5), range(5), p, ps, rs="direct", tau=3)
        return exact_non_delivery(sc.graph, sc.baseline, {0}) - q_target

    ps = brentq(q_of, 1e-6, 0.999, xtol=1e-14)
    return public_scenario(complete_edges(5), range(5), p, ps, rs="direct", tau=3)


def test_criterion_6_direct_reciprocity_collapse(criterion):
    t0 = time.perf_counter()
    thresholds = []
    for q in (0.3, 0.1, 0.03):
        sc = k5_direct(q)
        thresholds.append(effectiveness_threshold(sc, HistoryFamily.standard(sc)).threshold)
    secs = time.perf_counter() - t0
    regime = collapse_regime(k5_direct(0.03), 0, 1)
    ok = (regime and thresholds[2] > 0.8 / 0.03 and thresholds[0] < thresholds[1] < thresholds[2]
          and secs <= 300)
    criterion(6, ok, "thresholds at q* = 0.3, 0.1, 0.03: " + ", ".join(f"{t:.3f}" for t in thresholds)
              + f" (last must exceed {0.8 / 0.03:.2f}), {secs:.1f}s")
    assert ok


def test_criterion_7_reliability_collapse(criterion):
    edges = [(0, 1), (1, 0), (0, 2), (2, 0)]
    thresholds, folk = [], None
    for p in (0.8, 0.9, 0.95, 0.99):
        sc = private_scenario(edges, [0, 1, 2], p, p, tau=2, coordinated=False)
        eff = effectiveness_threshold(sc, HistoryFamily.standard(sc))
        thresholds.append(eff.threshold)
        folk = eff.folk
    g = sc.graph
    shape = is_redundant(g) and not supports_full_indirect(g, 0)
    ok = shape and all(a < b for a, b in zip(thresholds, thresholds[1:])) and thresholds[-1] > 10 * folk
    criterion(7, ok, "thresholds at p = 0.8, 0.9, 0.95, 0.99: " + ", ".join(f"{t:.3f}" for t in thresholds)
              + f"; folk at 0.99 = {folk:.2f}")
    assert ok


def test_criterion_8_grim_optimality(criterion):
    sc = public_scenario(complete_edges(4), range(4), 0.5, 0.5, tau=GRIM, beta=10.0)
    eff = effectiveness_threshold(sc, HistoryFamily.standard(sc))
    folk = folk_upper_bound(sc)
    rel = abs(eff.threshold - folk) / folk
    w = grim_min_omega(sc, 0)
    rep = check(sc.with_params(UtilityParams.uniform(4, 10.0, 1.0, w)), HistoryFamily.standard(sc))
    residual = min(m.margin for m in rep.margins)
    ok = rel <= 1e-3 and residual >= -1e-9
    criterion(8, ok, f"threshold {eff.threshold:.9f} vs folk {folk} (rel {rel:.1e}); "
                     f"margin at grim omega {w}: {residual:.2e}")
    assert ok


RUNS = [
    ["reliability", "--config", "diamond", "--exact", "--oracle"],
    ["reliability", "--config", "diamond", "--mc", "20000", "9"],
    ["reliability", "--config", "diamond", "--mc", "20000", "9", "--csv"],
    ["check-topology", "--config", "cycle_private"],
    ["check-equilibrium", "--config", "pair_direct", "--solve-omega"],
    ["check-equilibrium", "--config", "k4_private", "--csv"],
    ["effectiveness", "--config", "k4_grim"],
    ["effectiveness", "--config", "collapse_private", "--sweep", "p=0.8,0.9"],
    ["verify-lemmas", "--cases", "5", "--seed", "3"],
]


def test_criterion_9_determinism(criterion, tmp_path, capsys):
    same = 0
    for k, argv in enumerate(RUNS):
        argv = [str(CONFIGS / f"{a}.json") if i > 0 and argv[i - 1] == "--config" else a
                for i, a in enumerate(argv)]
        paths = []
        for rep in range(2):
            out = tmp_path / f"run{k}_{rep}.txt"
            main(argv + ["--out", str(out)])
            paths.append(out)
        capsys.readouterr()
        same += filecmp.cmp(*paths, shallow=False) and paths[0].stat().st_size > 0
    ok = same == len(RUNS)
    criterion(9, ok, f"{same}/{len(RUNS)} command runs byte-identical across two invocations")
    assert ok
    doc = json.loads((tmp_path / "run1_0.txt").read_text())
    assert doc["provenance"]["seed"] == 9 and not math.isnan(doc["results"]["rows"][0]["mc_q"])
