import numpy as np
import pytest

from epidemic_game.epidemic import ForwardProfile
from epidemic_game.game import Scenario, UtilityParams
from epidemic_game.graph import build_graph, compute_delays
from epidemic_game.strategy import PRIVATE, PUBLIC, DurationPolicy, ReactionSetConfig, coordinated_durations


def complete_edges(n):
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def public_scenario(edges, sources, p, ps, rs="full_indirect", tau=3, beta=10.0, gamma=1.0, omega=0.9, n=None):
    g = build_graph(edges, sources, n)
    return Scenario(g, ForwardProfile.uniform(g, p, ps), UtilityParams.uniform(g.n, beta, gamma, omega),
                    PUBLIC, ReactionSetConfig(rs), DurationPolicy(tau))


def private_scenario(edges, sources, p, ps, tau=3, coordinated=True, beta=10.0, omega=0.9, n=None):
    g = build_graph(edges, sources, n)
    d = compute_delays(g)
    dur = coordinated_durations(g, d, tau) if coordinated else DurationPolicy(tau)
    return Scenario(g, ForwardProfile.uniform(g, p, ps), UtilityParams.uniform(g.n, beta, 1.0, omega),
                    PRIVATE, ReactionSetConfig("full_indirect"), dur, d, coordinated)


@pytest.fixture
def pair():
    """Two nodes feeding each other, both fed by the source; everything at 0.5."""
    return public_scenario([(0, 1), (1, 0)], [0, 1], 0.5, 0.5, rs="direct", tau=3)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([20261017])))


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion(capsys):
    """Record and print one PASS/FAIL line for an acceptance criterion."""

    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE[number] = line
        with capsys.disabled():
            print("\n" + line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
