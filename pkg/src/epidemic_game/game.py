"""Histories, stage utilities and discounted utility differences.

A history is its defection log plus its length.  ``Game`` binds a scenario
to caches (reliability per played profile, punishment state per history)
and evolves histories stage by stage under the punishing strategy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .epidemic import ForwardProfile, non_delivery_all
from .errors import ConfigError, IllegalDeviation
from .graph import INF, SOURCE, DelayMatrix, OverlayGraph
from .monitoring import DefectionEvent, SignalVerdict, private_signal
from .strategy import (
    PRIVATE,
    PUBLIC,
    DurationPolicy,
    PunishState,
    ReactionSetConfig,
    mdel,
    update_ds_private,
    update_ds_public,
    zeroed_edges,
)


@dataclass(frozen=True, eq=False)
class UtilityParams:
    """Per-node benefit beta, cost gamma and discount omega."""

    beta: np.ndarray
    gamma: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        for name in ("beta", "gamma", "omega"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if np.any(self.beta < 0):
            raise ConfigError("beta must be non-negative")
        if np.any(self.gamma <= 0):
            raise ConfigError("gamma must be positive")
        if np.any(self.omega <= 0) or np.any(self.omega >= 1):
            raise ConfigError("omega must lie in (0, 1)")

    @classmethod
    def uniform(cls, n: int, beta: float, gamma: float = 1.0, omega: float = 0.9) -> "UtilityParams":
        return cls(np.full(n, beta), np.full(n, gamma), np.full(n, omega))

    def replace(self, beta=None, gamma=None, omega=None) -> "UtilityParams":
        n = len(self.beta)

        def fill(x, old):
            return old if x is None else np.broadcast_to(np.asarray(x, dtype=float), (n,))

        return UtilityParams(fill(beta, self.beta), fill(gamma, self.gamma), fill(omega, self.omega))


@dataclass(frozen=True, eq=False)
class Scenario:
    graph: OverlayGraph
    baseline: ForwardProfile
    params: UtilityParams
    monitoring: str = PUBLIC
    rs: ReactionSetConfig = field(default_factory=ReactionSetConfig)
    durations: DurationPolicy = field(default_factory=lambda: DurationPolicy(3))
    delays: DelayMatrix | None = None
    coordinated: bool = False

    def __post_init__(self):
        self.baseline.validate(self.graph)
        if self.monitoring not in (PUBLIC, PRIVATE):
            raise ConfigError(f"unknown monitoring mode {self.monitoring!r}")
        if self.monitoring == PRIVATE and self.delays is None:
            raise ConfigError("private monitoring requires a delay matrix")
        if len(self.params.beta) != self.graph.n:
            raise ConfigError("utility parameters must cover every node")

    @property
    def tau(self) -> float:
        return self.durations.base_tau

    def with_params(self, params: UtilityParams) -> "Scenario":
        return Scenario(self.graph, self.baseline, params, self.monitoring, self.rs,
                        self.durations, self.delays, self.coordinated)


@dataclass(frozen=True)
class StageOutcome:
    profile: ForwardProfile
    q: np.ndarray
    pbar: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    stages: list[StageOutcome]
    event_log: tuple[DefectionEvent, ...]


@dataclass(frozen=True)
class DropDeviation:
    deviator: int
    dropped: frozenset[int]
    at_stage: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dropped", frozenset(self.dropped))
        if not self.dropped:
            raise IllegalDeviation("a drop deviation must drop at least one neighbor")


@dataclass(frozen=True, order=True)
class History:
    """A prefix: ``length`` stages played, with defections ``events``."""

    length: int = 0
    events: tuple[DefectionEvent, ...] = ()
    label: str = field(default="", compare=False)

    @property
    def key(self) -> tuple:
        return (self.length, self.events)


def stage_utility(q_i: float, pbar_i: float, params: UtilityParams, i: int) -> float:
    return (1.0 - q_i) * (params.beta[i] - params.gamma[i] * pbar_i)


@dataclass
class Case:
    """Per-stage reliability and cost of one deviator along both continuations."""

    history: History
    deviator: int
    dropped: frozenset[int]
    q_star: np.ndarray
    pbar_star: np.ndarray
    q_dev: np.ndarray
    pbar_dev: np.ndarray
    grim_tail: bool

    @property
    def dq(self) -> np.ndarray:
        return self.q_dev - self.q_star

    @property
    def cost(self) -> np.ndarray:
        return (1 - self.q_star) * self.pbar_star - (1 - self.q_dev) * self.pbar_dev

    def margin(self, beta: float, gamma: float, omega: float) -> float:
        return float(margins_on_grid([self], beta, gamma, np.array([omega]))[0, 0])


def margins_on_grid(cases: Sequence[Case], beta: float, gamma: float, omegas: np.ndarray) -> np.ndarray:
    """Margins of every case (rows) at every discount factor (columns).

    margin = sum_r omega^r (u*_r - u'_r), plus the closed-form geometric tail
    of the last (stationary) stage for grim durations.
    """
    omegas = np.asarray(omegas, dtype=float)
    out = np.empty((len(cases), len(omegas)))
    for c, case in enumerate(cases):
        d = beta * case.dq - gamma * case.cost
        R = len(d) - 1
        powers = omegas[None, :] ** np.arange(R + 1)[:, None]
        val = d @ powers
        if case.grim_tail:
            val = val + omegas ** (R + 1) / (1 - omegas) * d[R]
        out[c] = val
    return out


class Game:
    """A scenario with memoized reliability and punishment-state lookups."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        self.g = sc.graph
        self._q: dict[frozenset, np.ndarray] = {}
        self._states: dict[tuple, PunishState] = {}
        self._star: dict[tuple, list[StageOutcome]] = {}
        self._empty = PunishState(sc.monitoring, {})

    # reliability
    def q_for(self, zeroed: frozenset) -> np.ndarray:
        hit = self._q.get(zeroed)
        if hit is None:
            hit = non_delivery_all(self.g, self.sc.baseline.with_zeroed(zeroed))
            hit.flags.writeable = False
            self._q[zeroed] = hit
        return hit

    def outcome(self, zeroed: frozenset) -> StageOutcome:
        profile = self.sc.baseline.with_zeroed(zeroed)
        q = self.q_for(zeroed)
        pbar = profile.node_probs.sum(axis=1)
        p = self.sc.params
        u = (1.0 - q) * (p.beta - p.gamma * pbar)
        return StageOutcome(profile, q, pbar, u)

    # punishment state
    def signals_at(self, events: Iterable[DefectionEvent], stage: int):
        if self.sc.monitoring == PUBLIC:
            defects = frozenset((e.accused, e.victim) for e in events if e.stage == stage)
            return SignalVerdict(tuple(self.g.edges()), defects)
        d = self.sc.delays
        relevant = [e for e in events if e.stage <= stage]
        out = {}
        for h in (SOURCE, *range(self.g.n)):
            sig = private_signal(self.g, h, relevant, stage, d)
            if sig.verdicts.defects:
                out[h] = sig
        return out

    def advance(self, state: PunishState, events: Sequence[DefectionEvent], stage: int,
                expiry_slack: int = 0) -> PunishState:
        sig = self.signals_at(events, stage)
        if self.sc.monitoring == PUBLIC:
            return update_ds_public(self.g, state, sig, self.sc.rs, self.sc.durations, expiry_slack)
        return update_ds_private(self.g, state, sig, self.sc.delays, self.sc.durations, expiry_slack)

    def state_after(self, history: History) -> PunishState:
        key = history.key
        hit = self._states.get(key)
        if hit is not None:
            return hit
        if history.length == 0:
            state = self._empty
        else:
            prev = History(history.length - 1, tuple(e for e in history.events if e.stage < history.length - 1))
            state = self.advance(self.state_after(prev), history.events, history.length - 1)
        self._states[key] = state
        return state

    def legal_drops(self, history: History, i: int) -> tuple[int, ...]:
        """N_i[h]: out-neighbors with positive threshold after the history."""
        zero = zeroed_edges(self.g, self.state_after(history))
        return tuple(j for j in self.g.out_edges[i]
                     if (i, j) not in zero and self.sc.baseline.prob(i, j) > 0)

    def run(self, history: History, stages: int, deviation: DropDeviation | None = None):
        """Play ``stages`` stages after ``history``; the deviation, if any, is
        injected at the first of them.  Returns outcomes and the full log."""
        events = list(history.events)
        state = self.state_after(history)
        outs = []
        for r in range(stages):
            t = history.length + r
            zero = zeroed_edges(self.g, state)
            if r == 0 and deviation is not None:
                i = deviation.deviator
                legal = set(self.legal_drops(History(t, tuple(events)), i))
                bad = set(deviation.dropped) - legal
                if bad:
                    raise IllegalDeviation(
                        f"node {i} cannot drop {sorted(bad)}: threshold already 0 or not an out-neighbor")
                zero = zero | {(i, j) for j in deviation.dropped}
                events.extend(DefectionEvent(t, i, j) for j in sorted(deviation.dropped))
            outs.append(self.outcome(zero))
            state = self.advance(state, events, t)
        return outs, tuple(sorted(events))

    def star_run(self, history: History, stages: int) -> list[StageOutcome]:
        """Memoized continuation in which everybody follows the strategy."""
        key = (history.key, stages)
        hit = self._star.get(key)
        if hit is None:
            hit, _ = self.run(history, stages)
            self._star[key] = hit
        return hit

    def history_from_seeds(self, seeds: Iterable[tuple[int, int, Iterable[int]]], length: int,
                           label: str = "") -> History:
        """Prefix of ``length`` stages in which seed (stage, node, drops) deviations
        happen; drops toward neighbors already at threshold 0 are ignored."""
        by_stage: dict[int, list] = {}
        for stage, node, drops in seeds:
            by_stage.setdefault(stage, []).append((node, frozenset(drops)))
        h = History(0, (), label)
        for t in range(length):
            events = list(h.events)
            state = self.state_after(h)
            zero = zeroed_edges(self.g, state)
            for node, drops in by_stage.get(t, []):
                for j in sorted(drops):
                    if (node, j) not in zero and self.sc.baseline.prob(node, j) > 0:
                        events.append(DefectionEvent(t, node, j))
            h = History(t + 1, tuple(sorted(events)), label)
        return h

    def believed_history(self, history: History, i: int) -> History:
        """The history the observer ``i`` believes in: only defections it has seen."""
        if self.sc.monitoring == PUBLIC:
            return history
        d = self.sc.delays
        seen = tuple(e for e in history.events
                     if d(i, e.accused, e.victim) != INF
                     and e.stage + d(i, e.accused, e.victim) <= history.length - 1)
        return History(history.length, seen, history.label)

    def horizon(self, i: int) -> tuple[int, bool]:
        """Last stage (relative) whose difference can be non-zero, and whether
        a stationary grim tail follows it."""
        sc = self.sc
        if sc.monitoring == PUBLIC:
            if sc.durations.is_grim:
                return 1, True
            return int(sc.tau), False
        maxdel = sc.delays.max_finite()
        if sc.durations.is_grim:
            return maxdel + 1, True
        if sc.coordinated:
            return int(mdel(self.g, sc.delays, i) + sc.tau), False
        longest = max([sc.tau, *sc.durations.per_pair.values()])
        return int(maxdel + longest), False

    def case(self, history: History, i: int, dropped: Iterable[int]) -> Case:
        """Both continuations for deviator ``i`` dropping ``dropped`` after ``history``
        (the deviator's believed history under private monitoring)."""
        h = self.believed_history(history, i)
        R, grim = self.horizon(i)
        dev = DropDeviation(i, frozenset(dropped), h.length)
        star = self.star_run(h, R + 1)
        devo, _ = self.run(h, R + 1, dev)
        return Case(
            history, i, dev.dropped,
            np.array([o.q[i] for o in star]), np.array([o.pbar[i] for o in star]),
            np.array([o.q[i] for o in devo]), np.array([o.pbar[i] for o in devo]),
            grim,
        )


def evolve(sc: Scenario, deviation: DropDeviation | None, horizon: int) -> Trajectory:
    """``horizon`` stages from the empty history, with an optional deviation."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    game = Game(sc)
    if deviation is None or deviation.at_stage == 0:
        outs, log = game.run(History(), horizon, deviation)
        return Trajectory(outs, log)
    pre_len = min(deviation.at_stage, horizon)
    pre, _ = game.run(History(), pre_len)
    rest, log = game.run(History(pre_len, ()), horizon - pre_len, deviation) if pre_len < horizon else ([], ())
    return Trajectory(pre + rest, log)


def discounted_difference(sc: Scenario, h_seed: History, deviation: DropDeviation) -> float:
    """sum_r omega^r (u*_r - u'_r) for the deviation injected right after ``h_seed``."""
    i = deviation.deviator
    game = Game(sc)
    case = game.case(h_seed, i, deviation.dropped)
    return case.margin(sc.params.beta[i], sc.params.gamma[i], sc.params.omega[i])
