import math


from epidemic_game.epidemic import ForwardProfile
from epidemic_game.graph import DelayModelConfig, build_graph, compute_delays
from epidemic_game.monitoring import (
    COOPERATE,
    DEFECT,
    DefectionEvent,
    defections,
    events_to_json,
    private_signal,
    public_signal,
)


def star():
    """0 feeds 1 and 3; 1 relays to 2; observer 3 hears about (0,1) after two hops."""
    g = build_graph([(0, 1), (0, 3), (1, 2), (2, 3)], [0])
    return g, compute_delays(g)


def test_public_signal_examples():
    g, _ = star()
    p = ForwardProfile.uniform(g, 0.5, 0.5)
    assert public_signal(g, p, p).all_cooperate()
    low = p.with_prob(0, 1, 0.4)
    sig = public_signal(g, p, low)
    assert sig.defects == {(0, 1)}
    assert sig[(0, 1)] == DEFECT and sig[(1, 2)] == COOPERATE
    zero = p.with_prob(0, 1, 0.0)
    assert public_signal(g, zero, zero)[(0, 1)] == COOPERATE
    assert defections(g, p, low, 4) == [DefectionEvent(4, 0, 1)]


def test_private_signal_delay_two():
    g, d = star()
    assert d(3, 0, 1) == 2
    log = [DefectionEvent(0, 0, 1)]
    seen = [private_signal(g, 3, log, t, d).verdicts[(0, 1)] for t in range(4)]
    assert seen == [COOPERATE, COOPERATE, DEFECT, COOPERATE]
    # the victim learns at once
    assert private_signal(g, 1, log, 0, d).verdicts[(0, 1)] == DEFECT


def test_private_signal_never_arrives():
    g, _ = star()
    d = compute_delays(g, DelayModelConfig(overrides={(3, 0, 1): math.inf}))
    log = [DefectionEvent(0, 0, 1)]
    assert all(private_signal(g, 3, log, t, d).verdicts.all_cooperate() for t in range(10))


def test_zero_delays_match_public():
    g, _ = star()
    d = compute_delays(g, DelayModelConfig("zero"))
    p = ForwardProfile.uniform(g, 0.5, 0.5)
    played = p.with_prob(0, 1, 0.0).with_prob(2, 3, 0.1)
    pub = public_signal(g, p, played)
    log = defections(g, p, played, 0)
    for k in g.nodes:
        if all(d(k, a, v) == 0 for a, v in pub.defects):
            assert private_signal(g, k, log, 0, d).verdicts == pub


def test_events_serialize_sorted():
    evs = [DefectionEvent(2, 1, 0), DefectionEvent(0, 3, 1)]
    assert events_to_json(evs) == [{"accused": 3, "victim": 1, "stage": 0},
                                   {"accused": 1, "victim": 0, "stage": 2}]
