"""
When punishments lose their bite
================================

Direct reciprocity on a dense graph, and uncoordinated private punishments
at high reliability, both push the threshold ratio up.
"""

# %%
from scipy.optimize import brentq

from epidemic_game.analysis import effectiveness_threshold
from epidemic_game.epidemic import ForwardProfile, exact_non_delivery
from epidemic_game.game import Scenario, UtilityParams
from epidemic_game.graph import build_graph, compute_delays
from epidemic_game.strategy import PRIVATE, PUBLIC, DurationPolicy, ReactionSetConfig

# %%
# Complete 5-node graph, p = 0.07, source probability tuned so that every
# node misses the message with probability q*.  The threshold tracks 1/q*.
k5 = build_graph([(i, j) for i in range(5) for j in range(5) if i != j], range(5))


def direct(ps):
    return Scenario(k5, ForwardProfile.uniform(k5, 0.07, ps), UtilityParams.uniform(5, 10.0), PUBLIC,
                    ReactionSetConfig("direct"), DurationPolicy(3))


for q in (0.3, 0.1, 0.03):
    ps = brentq(lambda x: exact_non_delivery(k5, direct(x).baseline, {0}) - q, 1e-6, 0.999)
    print(f"q* = {q}: threshold {effectiveness_threshold(direct(ps)).threshold:.3f}, 1/q* = {1 / q:.1f}")

# %%
# Node 0 relays between 1 and 2, which cannot reach each other around it.
# With one fixed tau the punishers' windows never overlap.
g = build_graph([(0, 1), (1, 0), (0, 2), (2, 0)], [0, 1, 2])
d = compute_delays(g)
for p in (0.8, 0.9, 0.95, 0.99):
    sc = Scenario(g, ForwardProfile.uniform(g, p, p), UtilityParams.uniform(3, 10.0), PRIVATE,
                  ReactionSetConfig(), DurationPolicy(2), d)
    eff = effectiveness_threshold(sc)
    print(f"p = {p}: threshold {eff.threshold:.3f}, folk {eff.folk:.2f}")
