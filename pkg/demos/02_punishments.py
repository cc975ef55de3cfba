"""
Defection sets and punishment windows
=====================================

How a single defection propagates through the defection sets under public
and private monitoring.
"""

# %%
from epidemic_game.graph import SOURCE, DelayModelConfig, build_graph, compute_delays
from epidemic_game.monitoring import SignalVerdict
from epidemic_game.strategy import (
    PUBLIC,
    DurationPolicy,
    PunishState,
    ReactionSetConfig,
    coordinated_durations,
    enforces_coordination,
    update_ds_public,
    zeroed_edges,
)

edges = [(i, j) for i in range(3) for j in range(3) if i != j]
g = build_graph(edges, [0, 1, 2])

# %%
# Public monitoring, full indirect reciprocity, tau = 3: node 0 drops node 1
# at stage 0.  The punished edges stay at probability 0 for stages 1..3.
rs, tau = ReactionSetConfig("full_indirect"), DurationPolicy(3)
state = PunishState(PUBLIC)
signal = SignalVerdict(tuple(g.edges()), frozenset({(0, 1)}))
for stage in range(5):
    state = update_ds_public(g, state, signal, rs, tau)
    signal = SignalVerdict(tuple(g.edges()), frozenset())
    print(f"after stage {stage}:", sorted(zeroed_edges(g, state)))

# %%
# Private monitoring: observers hear with delays.  Uniform durations leave the
# punishers' windows disjoint; coordinated durations end them together.
d = compute_delays(g, DelayModelConfig(overrides={(2, 0, 1): 2, (SOURCE, 0, 1): 1}))
print("uniform tau = 1 coordinated:", enforces_coordination(DurationPolicy(1), d, g))
policy = coordinated_durations(g, d, 3)
print("coordinated durations:", enforces_coordination(policy, d, g))
for k in (SOURCE, 1, 2):
    start = d(k, 0, 1) + 1
    end = d(k, 0, 1) + policy.duration(0, 1, k, 0)
    print(f"punisher {k}: stages {start}..{end}")
