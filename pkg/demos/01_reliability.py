"""
Reliability of a forwarding profile
===================================

Three ways to get the probability that a node never receives a message.
"""

# %%
# A diamond: the source feeds nodes 0 and 1 with probability 0.5, each of
# them forwards to node 2 with probability 0.5.
from epidemic_game.epidemic import (
    ForwardProfile,
    exact_non_delivery,
    monte_carlo_non_delivery,
    percolation_oracle,
    single_impact_ratio,
)
from epidemic_game.graph import build_graph

g = build_graph([(0, 2), (1, 2)], source_targets=[0, 1])
p = ForwardProfile.uniform(g, 0.5, 0.5)

# %%
# Each branch reaches node 2 with probability 0.25, so q = 0.75 ** 2.
print("wave recursion  ", exact_non_delivery(g, p, {2}))
print("edge percolation", percolation_oracle(g, p, {2}))
est = monte_carlo_non_delivery(g, p, {2}, trials=100_000, seed=7)
print(f"monte carlo      {est.mean:.4f} +/- {est.std_error:.4f}")

# %%
# Lowering one inbound probability raises q by at most (1 - p') / (1 - p).
pair = build_graph([(0, 1), (1, 0)], [0, 1])
pp = ForwardProfile.uniform(pair, 0.5, 0.5)
q, q_reduced = single_impact_ratio(pair, pp, 0, 1, 0.0)
print(f"q_0 = {q}, after 1 stops feeding 0: {q_reduced}, bound {q / 0.5}")
