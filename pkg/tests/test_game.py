import numpy as np
import pytest

from epidemic_game.errors import ConfigError, IllegalDeviation
from epidemic_game.game import (
    DropDeviation,
    Game,
    History,
    UtilityParams,
    discounted_difference,
    evolve,
    stage_utility,
)
from epidemic_game.graph import build_graph, compute_delays
from epidemic_game.monitoring import DefectionEvent
from epidemic_game.strategy import mdel

from conftest import complete_edges, private_scenario, public_scenario

# hand evaluation for the 2-node pair (deviator 0 drops 1, direct reaction sets, tau 3):
# stage 0: q stays 0.375 and 0 saves its cost 0.5, so u* - u' = 0.625*(beta-0.5) - 0.625*beta
# stages 1..3: 1 stops feeding 0 (q' = 0.5) and 0 feeds nobody (pbar' = 0)
PAIR_WEIGHTS = 0.9 + 0.81 + 0.729


def pair_margin(beta):
    stage0 = 0.625 * (beta - 0.5) - 0.625 * beta
    later = 0.625 * (beta - 0.5) - 0.5 * beta
    return stage0 + later * PAIR_WEIGHTS


def test_stage_utility_examples():
    params = UtilityParams.uniform(1, 2.0, 1.0)
    assert stage_utility(0.0, 1.0, params, 0) == 1.0
    assert stage_utility(0.3, 2.0, params, 0) == 0.0
    assert stage_utility(0.5625, 0.0, UtilityParams.uniform(1, 4.0), 0) == 1.75


def test_utility_params_validate():
    with pytest.raises(ConfigError):
        UtilityParams.uniform(2, -1.0)
    with pytest.raises(ConfigError):
        UtilityParams.uniform(2, 1.0, 0.0)
    with pytest.raises(ConfigError):
        UtilityParams.uniform(2, 1.0, 1.0, 1.0)


def test_no_deviation_is_stationary():
    sc = public_scenario(complete_edges(3), range(3), 0.5, 0.5)
    traj = evolve(sc, None, 5)
    assert traj.event_log == ()
    for st in traj.stages:
        assert np.array_equal(st.u, traj.stages[0].u)


def test_public_drop_all_punished_for_tau():
    sc = public_scenario(complete_edges(3), range(3), 0.5, 0.5, tau=2)
    traj = evolve(sc, DropDeviation(0, frozenset({1, 2})), 6)
    base = traj.stages[0]
    assert traj.event_log == (DefectionEvent(0, 0, 1), DefectionEvent(0, 0, 2))
    for r in (1, 2):
        assert traj.stages[r].q[0] == 1.0 and traj.stages[r].u[0] == 0.0
    star = evolve(sc, None, 6).stages[0]
    for r in (3, 4, 5):
        assert np.array_equal(traj.stages[r].u, star.u)
    assert base.pbar[0] == 0.0


def test_private_coordinated_zero_window():
    sc = private_scenario(complete_edges(3), range(3), 0.6, 0.5, tau=2)
    g = sc.graph
    game = Game(sc)
    m = int(mdel(g, sc.delays, 1))
    star = game.outcome(frozenset()).u[1]
    outs, _ = game.run(History(), m + 6, DropDeviation(1, frozenset({0})))
    for r in range(m + 1, m + 3):
        assert outs[r].u[1] == 0.0
    for r in range(m + 3, m + 6):
        assert outs[r].u[1] == star


def test_pair_discounted_difference():
    sc = public_scenario([(0, 1), (1, 0)], [0, 1], 0.5, 0.5, rs="direct", tau=3)
    dev = DropDeviation(0, frozenset({1}))
    assert abs(discounted_difference(sc, History(), dev) - pair_margin(10.0)) <= 1e-12
    assert abs(pair_margin(10.0) - 1.9740625) <= 1e-12
    low = sc.with_params(UtilityParams.uniform(2, 1.0))
    assert discounted_difference(low, History(), dev) < 0
    assert abs(discounted_difference(low, History(), dev) - pair_margin(1.0)) <= 1e-12


def test_margin_affine_in_beta():
    sc = public_scenario(complete_edges(4), range(4), 0.4, 0.3, tau=2)
    dev = DropDeviation(2, frozenset({0, 3}))
    vals = [discounted_difference(sc.with_params(UtilityParams.uniform(4, b)), History(), dev) for b in (1, 3, 5)]
    assert abs((vals[0] + vals[2]) / 2 - vals[1]) <= 1e-12
    assert vals[2] > vals[0]


def test_case_truncation_lengths():
    sc = public_scenario(complete_edges(3), range(3), 0.5, 0.5, tau=4)
    game = Game(sc)
    case = game.case(History(), 0, {1})
    assert len(case.dq) == 5 and not case.grim_tail
    grim = public_scenario(complete_edges(3), range(3), 0.5, 0.5, tau=float("inf"))
    case = Game(grim).case(History(), 0, {1})
    assert case.grim_tail and len(case.dq) == 2


def test_illegal_deviations():
    with pytest.raises(IllegalDeviation):
        DropDeviation(0, frozenset())
    sc = public_scenario(complete_edges(3), range(3), 0.5, 0.5, tau=3)
    game = Game(sc)
    h = game.history_from_seeds([(0, 1, (0,))], 1)
    # 0 is now punishing 1, so dropping 1 is not a deviation
    assert 1 not in game.legal_drops(h, 0)
    with pytest.raises(IllegalDeviation):
        game.run(h, 2, DropDeviation(0, frozenset({1})))


def test_trajectory_determinism():
    sc = public_scenario(complete_edges(4), range(4), 0.4, 0.3, tau=2)
    dev = DropDeviation(2, frozenset({0}))
    a, b = evolve(sc, dev, 5), evolve(sc, dev, 5)
    assert a.event_log == b.event_log
    assert all(np.array_equal(x.u, y.u) for x, y in zip(a.stages, b.stages))


def test_believed_history_private():
    g = build_graph([(0, 1), (0, 3), (1, 2), (2, 3)], [0, 1])
    d = compute_delays(g)
    assert d(3, 0, 1) == 2
    sc = private_scenario([(0, 1), (0, 3), (1, 2), (2, 3)], [0, 1], 0.5, 0.5, coordinated=False)
    game = Game(sc)
    h = History(2, (DefectionEvent(0, 0, 1),))
    assert game.believed_history(h, 3).events == ()
    assert game.believed_history(h, 2).events == h.events
    assert game.believed_history(History(3, h.events), 3).events == h.events
