"""
Checking the equilibrium condition
==================================

Discounted gains of drop deviations, least discount factors and the
effectiveness threshold.
"""

# %%
import json
from pathlib import Path

from epidemic_game.analysis import HistoryFamily, check, effectiveness_threshold, min_omega
from epidemic_game.config import build_scenario, canonicalize
from epidemic_game.game import DropDeviation, UtilityParams

CONFIGS = Path(__file__).resolve().parent / "configs"


def scenario(name):
    return build_scenario(canonicalize(json.loads((CONFIGS / f"{name}.json").read_text())))


# %%
# Two nodes feeding each other under direct reciprocity.  Dropping the
# neighbour saves 0.5 per stage but costs reliability for three stages.
sc = scenario("pair_direct")
rep = check(sc, HistoryFamily.standard(sc))
print(rep.verdict, rep.worst)
low = sc.with_params(UtilityParams.uniform(2, 1.0))
print(check(low).verdict, check(low).worst)
print("least omega at beta = 10:", min_omega(sc, 0, DropDeviation(0, frozenset({1}))))

# %%
# Grim trigger with full indirect reciprocity on K4 reaches the folk bound.
k4 = scenario("k4_grim")
eff = effectiveness_threshold(k4)
print(f"threshold {eff.threshold:.6f}, folk {eff.folk}, sufficient {eff.sufficient}")
