import math

import pytest

from epidemic_game.epidemic import ForwardProfile
from epidemic_game.errors import ConfigError, UnpunishableNode
from epidemic_game.graph import SOURCE, DelayModelConfig, build_graph, compute_delays
from epidemic_game.monitoring import DefectionEvent, SignalVerdict, private_signal
from epidemic_game.strategy import (
    GRIM,
    PRIVATE,
    PUBLIC,
    DefectionRecord,
    DurationPolicy,
    PunishState,
    ReactionSetConfig,
    coordinated_durations,
    coordination_failure,
    enforces_coordination,
    mdel,
    threshold_profile,
    update_ds_private,
    update_ds_public,
    zeroed_edges,
)

from conftest import complete_edges


def quiet(g):
    return SignalVerdict(tuple(g.edges()), frozenset())


def defect(g, *edges):
    return SignalVerdict(tuple(g.edges()), frozenset(edges))


def k3_delays(extra=None):
    """K3 (all nodes fed) with delays giving mdel_0 = 2: d(2,0,1) = 2, d(s,0,1) = 1."""
    edges = complete_edges(3) + (extra or [])
    g = build_graph(edges, range(3), n=4 if extra else 3)
    over = {(2, 0, 1): 2, (SOURCE, 0, 1): 1}
    if extra:
        over[(3, 0, 1)] = 5
    return g, compute_delays(g, DelayModelConfig(overrides=over))


def test_reaction_sets():
    g = build_graph([(0, 1), (1, 2), (2, 0)], [0])
    assert ReactionSetConfig("direct").members(g, 0, 1) == {0, 1}
    assert ReactionSetConfig("full_indirect").members(g, 0, 1) == {0, 1, 2, SOURCE}
    custom = ReactionSetConfig("custom", {(1, 2): frozenset({0})})
    assert custom.members(g, 1, 2) == {0, 1, 2}
    assert custom.members(g, 0, 1) == {0, 1}
    with pytest.raises(ConfigError):
        ReactionSetConfig("everyone")


def test_durations_validate():
    assert DurationPolicy(GRIM).is_grim
    for bad in (0, 1.5):
        with pytest.raises(ConfigError):
            DurationPolicy(bad)


def test_public_empty_stays_empty():
    g = build_graph(complete_edges(3), range(3))
    s = update_ds_public(g, PunishState(PUBLIC), quiet(g), ReactionSetConfig(), DurationPolicy(3))
    assert s.is_empty()


def test_public_single_defect_lifecycle():
    g = build_graph(complete_edges(3), [0, 1])
    rs, tau = ReactionSetConfig("full_indirect"), DurationPolicy(3)
    members = rs.members(g, 0, 1)
    s = update_ds_public(g, PunishState(PUBLIC), defect(g, (0, 1)), rs, tau)
    for age in range(3):
        for h, p in g.holder_pairs():
            want = {DefectionRecord(0, 1, age)} if h in members and p in members else set()
            assert s.ds(h, p) == want
        s = update_ds_public(g, s, quiet(g), rs, tau)
    assert s.is_empty()


def test_public_grim_never_expires():
    g = build_graph([(0, 1), (1, 0)], [0, 1])
    rs, tau = ReactionSetConfig("direct"), DurationPolicy(GRIM)
    s = update_ds_public(g, PunishState(PUBLIC), defect(g, (0, 1)), rs, tau)
    for _ in range(100):
        s = update_ds_public(g, s, quiet(g), rs, tau)
    assert s.ds(1, 0) == {DefectionRecord(0, 1, 100)}


def delayed_setup(override3):
    """Holder 2 hears of (0,1) after one stage; its peer 3 after ``override3``."""
    g = build_graph([(0, 1), (0, 3), (1, 2), (2, 3)], [0, 1])
    d = compute_delays(g, DelayModelConfig(overrides={(3, 0, 1): override3}))
    return g, d


def run_private(g, d, tau, stages):
    log = [DefectionEvent(0, 0, 1)]
    s = PunishState(PRIVATE)
    out = []
    for t in range(stages):
        sigs = {h: private_signal(g, h, log, t, d) for h in (SOURCE, *g.nodes)}
        sigs = {h: x for h, x in sigs.items() if x.verdicts.defects}
        s = update_ds_private(g, s, sigs, d, tau)
        out.append(s)
    return out


def test_private_negative_age_waits_for_peer():
    g, d = delayed_setup(3)
    assert d(2, 0, 1) == 1 and d(3, 0, 1) == 3
    states = run_private(g, d, DurationPolicy(3), 6)
    assert states[0].ds(2, 3) == frozenset()
    assert states[1].ds(2, 3) == {DefectionRecord(0, 1, -2)}
    assert states[1].active(2, 3) == frozenset()
    assert states[2].active(2, 3) == frozenset()
    assert states[3].active(2, 3) == {DefectionRecord(0, 1, 0)}


def test_private_infinite_peer_suppressed():
    g, d = delayed_setup(math.inf)
    states = run_private(g, d, DurationPolicy(3), 6)
    assert all(s.ds(2, 3) == frozenset() for s in states)


def test_private_endpoints_active_at_once():
    g, d = delayed_setup(3)
    s = run_private(g, d, DurationPolicy(3), 1)[0]
    assert s.active(0, 1) == {DefectionRecord(0, 1, 0)}
    assert s.active(1, 0) == {DefectionRecord(0, 1, 0)}


def test_threshold_profile_examples():
    g = build_graph([(0, 1), (0, 2), (1, 2), (2, 0)], [0])
    base = ForwardProfile.uniform(g, 0.5, 0.5)
    assert threshold_profile(g, PunishState(PUBLIC), base) == base
    s = update_ds_public(g, PunishState(PUBLIC), defect(g, (0, 1)), ReactionSetConfig(), DurationPolicy(2))
    zero = zeroed_edges(g, s)
    # 2 is an in-neighbor of 0 and stops feeding it; so does the source
    assert (2, 0) in zero and (SOURCE, 0) in zero
    # 0 stops feeding the members of the reaction set it feeds
    assert (0, 1) in zero and (0, 2) in zero
    assert (1, 2) not in zero
    t = threshold_profile(g, s, base)
    assert t.prob(2, 0) == 0 and t.prob(1, 2) == 0.5


def test_mdel_and_unpunishable():
    g, d = k3_delays()
    assert mdel(g, d, 0) == 2
    cycle = build_graph([(0, 1), (1, 2), (2, 0)], [0])
    with pytest.raises(UnpunishableNode) as err:
        coordinated_durations(cycle, compute_delays(cycle), 2)
    assert err.value.triple is not None


def test_coordinated_durations_formula():
    g, d = k3_delays(extra=[(1, 3), (3, 2)])
    pol = coordinated_durations(g, d, 3)
    assert pol.per_pair[(0, 1, SOURCE, 1)] == 2 + 3 - 1
    assert pol.per_pair[(0, 1, 2, 1)] == 2 + 3 - 2
    # gap reaching mdel + tau: no reaction at all
    assert pol.per_pair[(0, 1, 3, 1)] == 0
    assert enforces_coordination(pol, d, g)


def test_coordinated_durations_zero_delays():
    g = build_graph(complete_edges(3), range(3))
    d = compute_delays(g, DelayModelConfig("zero"))
    pol = coordinated_durations(g, d, 4)
    assert set(pol.per_pair.values()) == {4}


def test_uniform_tau_disjoint_windows():
    g, d = k3_delays()
    pol = DurationPolicy(1)
    assert not enforces_coordination(pol, d, g)
    assert coordination_failure(pol, d, g) == (0, 1)
    assert coordination_failure(coordinated_durations(g, d, 1), d, g) is None
    # equal delays everywhere: any uniform tau overlaps
    pair = build_graph([(0, 1), (1, 0)], [0, 1])
    assert enforces_coordination(DurationPolicy(1), compute_delays(pair), pair)


def test_state_canonical_order_free():
    a = PunishState(PUBLIC, {(0, 1): frozenset({DefectionRecord(0, 1, 0)}), (1, 0): frozenset()})
    b = PunishState(PUBLIC, {(0, 1): frozenset({DefectionRecord(0, 1, 0)})})
    assert a.canonical() == b.canonical()
