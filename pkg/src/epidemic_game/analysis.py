"""Equilibrium checks over a finite history family, bounds, and thresholds.

Every check reduces to ``Case`` objects: for a prefix, a deviator and a
drop set, the deviator's per-stage reliability and forwarding cost along the
strategy path and along the deviation path.  Margins are affine in
(beta, gamma) and polynomial in omega, so thresholds and minimum discount
factors come from cheap array evaluations once the cases exist.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .epidemic import exact_non_delivery
from .errors import NoBite, NotCoordinated, RatioTooSmall
from .game import Case, DropDeviation, Game, History, Scenario, margins_on_grid
from .graph import INF, lemma_paths_condition
from .strategy import PRIVATE, PUBLIC, coordination_failure, mdel, mdel_or_inf

MARGIN_TOL = 1e-9
REL_TOL = 1e-6
FULL_ENUMERATION_LIMIT = 12
OMEGA_GRID = np.concatenate([np.arange(1, 1000) / 1000.0, 1.0 - 10.0 ** -np.arange(4, 13)])

Seed = tuple[int, int, tuple[int, ...]]


@dataclass(frozen=True)
class HistoryFamily:
    """Prefixes to check: each entry is (seed deviations, prefix length, label).

    A seed ``(stage, node, drops)`` makes ``node`` drop ``drops`` at ``stage``.
    """

    seeds: tuple[tuple[tuple[Seed, ...], int, str], ...]

    @classmethod
    def empty_only(cls) -> "HistoryFamily":
        return cls((((), 0, "empty"),))

    @classmethod
    def standard(cls, sc: Scenario, depth: int = 2, max_lag: int = 5, aligned: bool = True) -> "HistoryFamily":
        g = sc.graph
        entries: list[tuple[tuple[Seed, ...], int, str]] = [((), 0, "empty")]
        lags = _seed_lags(sc, max_lag)
        senders = [k for k in g.nodes if g.out_edges[k]]
        if depth >= 1:
            for k in senders:
                outs = g.out_edges[k]
                drop_sets = [(j,) for j in outs]
                if len(outs) > 1:
                    drop_sets.append(tuple(outs))
                for drops in drop_sets:
                    for lag in range(1, lags + 1):
                        entries.append((((0, k, drops),), lag, f"{k} drops {list(drops)}, lag {lag}"))
        if depth >= 2:
            for k1, k2 in itertools.permutations(senders, 2):
                for off in (0, 1):
                    seeds = ((0, k1, g.out_edges[k1]), (off, k2, g.out_edges[k2]))
                    entries.append((seeds, off + 1, f"{k1} then {k2} drop all, offset {off}"))
        if aligned and senders:
            for i in g.nodes:
                others = tuple((0, k, g.out_edges[k]) for k in senders if k != i)
                if others:
                    entries.append((others, 1, f"all but {i} drop all"))
            entries.append((tuple((0, k, g.out_edges[k]) for k in senders), 1, "everyone drops all"))
        return cls(tuple(entries))

    def histories(self, game: Game) -> list[History]:
        seen = {}
        for seeds, length, label in self.seeds:
            h = game.history_from_seeds(seeds, length, label)
            seen.setdefault(h.key, h)
        return list(seen.values())


def _seed_lags(sc: Scenario, max_lag: int) -> int:
    tau = 2 if sc.durations.is_grim else int(sc.tau)
    if sc.monitoring == PUBLIC:
        return max(1, min(tau, max_lag))
    return max(1, min(sc.delays.max_finite() + tau, max_lag))


def drop_sets(legal: Sequence[int], out_degree: int) -> list[frozenset[int]]:
    """Non-empty subsets of the legal drops; singletons plus the full set for large degrees."""
    if not legal:
        return []
    if out_degree <= FULL_ENUMERATION_LIMIT:
        return [frozenset(c) for r in range(1, len(legal) + 1) for c in itertools.combinations(legal, r)]
    sets = [frozenset((j,)) for j in legal]
    if len(legal) > 1:
        sets.append(frozenset(legal))
    return sets


def collect_cases(sc: Scenario, family: HistoryFamily | None = None, game: Game | None = None,
                  nodes: Iterable[int] | None = None) -> list[Case]:
    game = game or Game(sc)
    family = family or HistoryFamily.standard(sc)
    nodes = list(sc.graph.nodes if nodes is None else nodes)
    cases: list[Case] = []
    seen = set()
    for h in family.histories(game):
        for i in nodes:
            hb = game.believed_history(h, i)
            legal = game.legal_drops(hb, i)
            for D in drop_sets(legal, len(sc.graph.out_edges[i])):
                key = (hb.key, i, D)
                if key in seen:
                    continue
                seen.add(key)
                c = game.case(hb, i, D)
                c.history = h
                cases.append(c)
    return cases


@dataclass
class MarginEntry:
    history: str
    deviator: int
    dropped: tuple[int, ...]
    margin: float

    def to_dict(self) -> dict:
        return {"history": self.history, "deviator": self.deviator,
                "dropped": list(self.dropped), "margin": self.margin}


@dataclass
class EquilibriumReport:
    verdict: str
    margins: list[MarginEntry]
    bounds: dict[str, float] = field(default_factory=dict)
    min_omega: dict[int, float | None] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def worst(self) -> MarginEntry | None:
        if not self.margins:
            return None
        return min(self.margins, key=lambda m: (m.margin, m.history, m.deviator, m.dropped))

    def to_dict(self) -> dict:
        w = self.worst
        return {
            "verdict": self.verdict,
            "min_margin": None if w is None else _jsonable(w.margin),
            "worst": None if w is None else w.to_dict(),
            "margins": [m.to_dict() for m in self.margins],
            "bounds": {k: _jsonable(v) for k, v in sorted(self.bounds.items())},
            "min_omega": {str(k): _jsonable(v) for k, v in sorted(self.min_omega.items())},
            "notes": sorted(self.notes),
        }


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        return "inf" if math.isinf(v) else float(v)
    return v


def _report(sc: Scenario, cases: list[Case], tolerance: float, notes: list[str], n_hist: int) -> EquilibriumReport:
    p = sc.params
    margins = []
    for c in cases:
        i = c.deviator
        m = c.margin(p.beta[i], p.gamma[i], p.omega[i])
        margins.append(MarginEntry(c.history.label, i, tuple(sorted(c.dropped)), m))
    if not margins:
        verdict = "pass"
        notes.append("no legal drop deviation in the family; pass is vacuous")
    else:
        verdict = "pass" if all(m.margin >= -tolerance for m in margins) else "fail"
    notes.append(f"verdict is pass/fail on a family of {n_hist} histories, not on every history")
    return EquilibriumReport(verdict, margins, notes=notes)


def dc_check(sc: Scenario, family: HistoryFamily | None = None, tolerance: float = MARGIN_TOL,
             game: Game | None = None) -> EquilibriumReport:
    """Public monitoring: every drop deviation after every family prefix must not pay."""
    if sc.monitoring != PUBLIC:
        raise ValueError("dc_check needs public monitoring")
    game = game or Game(sc)
    family = family or HistoryFamily.standard(sc)
    cases = collect_cases(sc, family, game)
    rep = _report(sc, cases, tolerance, [], len(family.histories(game)))
    rep.bounds["folk"] = folk_upper_bound(sc)
    if sc.rs.mode == "full_indirect" and not sc.durations.is_grim:
        val, c = indirect_sufficient(sc, family, game)
        rep.bounds["indirect_sufficient"] = val
        rep.notes.append(f"assumption constant c estimated on the family: {c:.6g}")
    if sc.rs.mode == "direct" and not sc.durations.is_grim:
        nec = direct_necessary_bounds(sc)
        if nec:
            rep.bounds["direct_necessary_max"] = max(nec.values())
    return rep


def pdc_check(sc: Scenario, family: HistoryFamily | None = None, tolerance: float = MARGIN_TOL,
              game: Game | None = None) -> EquilibriumReport:
    """Private monitoring with point-mass beliefs on the observed defections."""
    if sc.monitoring != PRIVATE:
        raise ValueError("pdc_check needs private monitoring")
    game = game or Game(sc)
    family = family or HistoryFamily.standard(sc)
    g = sc.graph
    notes = []
    for i in g.nodes:
        notes.append(f"mdel[{i}] = {_fmt(mdel_or_inf(g, sc.delays, i))}")
    failure = coordination_failure(sc.durations, sc.delays, g)
    notes.append(f"enforces coordination: {failure is None}"
                 + ("" if failure is None else f" (fails at {failure})"))
    for i, j in g.edges():
        if not lemma_paths_condition(g, i, j):
            notes.append(f"edge ({i},{j}) fails the punishment-path condition: "
                         f"no punishment can lower the reliability of {i}")
    cases = collect_cases(sc, family, game)
    rep = _report(sc, cases, tolerance, notes, len(family.histories(game)))
    rep.bounds["folk"] = folk_upper_bound(sc)
    if sc.coordinated and failure is None and not sc.durations.is_grim:
        val, simple, c = private_sufficient(sc, 0.0, family, game)
        rep.bounds["private_sufficient"] = val
        if simple is not None:
            rep.bounds["private_sufficient_simplified"] = simple
        rep.notes.append(f"assumption constant c estimated on the family: {_fmt(c)}; epsilon = 0")
    return rep


def _fmt(x: float) -> str:
    return "inf" if x == INF else f"{x:.6g}"


def check(sc: Scenario, family: HistoryFamily | None = None, **kw) -> EquilibriumReport:
    return dc_check(sc, family, **kw) if sc.monitoring == PUBLIC else pdc_check(sc, family, **kw)


# bounds

def folk_upper_bound(sc: Scenario) -> float:
    """max_i of the baseline forwarding sum; no punishing profile does better."""
    return float(sc.baseline.node_probs.sum(axis=1).max()) if sc.graph.n else 0.0


def necessary_ratio_formula(q_star: float, q_dev: float, p_ij: float, pbar: float, tau: float) -> float:
    if q_dev <= q_star:
        raise NoBite(f"punishment does not lower reliability (q'={q_dev} <= q*={q_star})")
    return pbar + p_ij / (q_dev - q_star) * (1.0 - q_dev + (1.0 - q_star) / tau)


def direct_necessary_ratio(sc: Scenario, i: int, j: int) -> float:
    """Least ratio at which node i does not gain from dropping j under direct reciprocity."""
    if sc.rs.mode != "direct":
        raise ValueError("direct_necessary_ratio needs direct reaction sets")
    if sc.durations.is_grim:
        raise ValueError("direct_necessary_ratio needs a finite tau")
    if not sc.graph.has_edge(i, j):
        raise ValueError(f"({i},{j}) is not an edge")
    g, p = sc.graph, sc.baseline
    q_star = exact_non_delivery(g, p, {i})
    q_dev = exact_non_delivery(g, p.with_zeroed([(j, i)]), {i}) if g.has_edge(j, i) else q_star
    return necessary_ratio_formula(q_star, q_dev, p.prob(i, j), p.pbar(i), sc.tau)


def direct_necessary_bounds(sc: Scenario) -> dict[tuple[int, int], float]:
    out = {}
    for i, j in sc.graph.edges():
        if sc.baseline.prob(i, j) <= 0:
            continue
        try:
            out[(i, j)] = direct_necessary_ratio(sc, i, j)
        except NoBite:
            out[(i, j)] = INF
    return out


def collapse_regime(sc: Scenario, i: int, j: int) -> bool:
    """Whether p + q* is small enough (<= 0.1) for the collapse approximation."""
    q_star = exact_non_delivery(sc.graph, sc.baseline, {i})
    return sc.baseline.prob(i, j) + q_star <= 0.1 + 1e-12


def _c_ratio(num: float, den: float) -> float | None:
    """(1-q_early)/(1-q_late), None when both vanish."""
    if num <= 0:
        return None
    if den <= 0:
        return INF
    return num / den


def indirect_sufficient(sc: Scenario, family: HistoryFamily | None = None,
                        game: Game | None = None) -> tuple[float, float]:
    """Sufficient ratio for full indirect reciprocity and the estimated constant c."""
    game = game or Game(sc)
    family = family or HistoryFamily.standard(sc)
    tau = sc.tau
    c = 1.0
    pmax = 0.0
    for h in family.histories(game):
        outs = game.star_run(h, 2)
        for i in sc.graph.nodes:
            pmax = max(pmax, outs[0].pbar[i])
            r = _c_ratio(1 - outs[0].q[i], 1 - outs[1].q[i])
            if r is not None:
                c = max(c, r)
    if sc.durations.is_grim:
        return pmax, c
    return pmax * (1.0 + c / tau), c


def indirect_sufficient_ratio(sc: Scenario, family: HistoryFamily | None = None) -> float:
    return indirect_sufficient(sc, family)[0]


def private_sufficient(sc: Scenario, epsilon: float = 0.0, family: HistoryFamily | None = None,
                       game: Game | None = None) -> tuple[float, float | None, float]:
    """Sufficient ratio under coordinated private punishments.

    Returns (bound, simplified bound or None, estimated c).  For node i and
    prefix h, with stages r <= mdel_i (exposure) and r' in mdel_i+1 ..
    mdel_i+tau (punished), the bound is
    max pbar_r'/A + (mdel_i+1) max pbar_r/(B-C) with A = 1 - eps(mdel+1)/((1-q_r')tau),
    B = tau/c and C = eps(mdel+1)/(1-q_r).  A non-positive denominator makes it
    unattainable (inf).  c is estimated over every family prefix; an infinite c
    means the assumption behind the bound fails and the bound is reported as inf.
    """
    g = sc.graph
    failure = coordination_failure(sc.durations, sc.delays, g)
    if sc.monitoring != PRIVATE or not sc.coordinated or failure is not None:
        raise NotCoordinated(f"durations do not enforce coordination (fails at {failure})", failure)
    game = game or Game(sc)
    family = family or HistoryFamily.standard(sc)
    tau = sc.tau
    rows = []
    c = 1.0
    for h in family.histories(game):
        for i in g.nodes:
            if not g.out_edges[i]:
                continue
            hb = game.believed_history(h, i)
            m = int(mdel(g, sc.delays, i))
            outs = game.star_run(hb, m + int(tau) + 1)
            q = np.array([o.q[i] for o in outs])
            pb = np.array([o.pbar[i] for o in outs])
            early, late = slice(0, m + 1), slice(m + 1, m + int(tau) + 1)
            rows.append((m, q, pb, early, late))
            for a in 1 - q[early]:
                for b in 1 - q[late]:
                    r = _c_ratio(a, b)
                    if r is not None:
                        c = max(c, r)
    if c == INF:
        return INF, None, c
    bound = 0.0
    pmax = 0.0
    for m, q, pb, early, late in rows:
        pmax = max(pmax, pb[0])
        if np.all(1 - q[early] <= 0):
            continue
        B = tau / c
        first = 0.0
        for qq, pp in zip(q[late], pb[late]):
            if 1 - qq <= 0:
                continue
            A = 1 - epsilon * (m + 1) / ((1 - qq) * tau)
            if A <= 0:
                return INF, None, c
            first = max(first, pp / A)
        second = 0.0
        for qq, pp in zip(q[early], pb[early]):
            if 1 - qq <= 0:
                continue
            Cc = epsilon * (m + 1) / (1 - qq)
            if B - Cc <= 0:
                return INF, None, c
            second = max(second, (m + 1) * pp / (B - Cc))
        bound = max(bound, first + second)
    mmax = max((mdel(g, sc.delays, i) for i in g.nodes if g.out_edges[i]), default=0)
    simple = pmax * (1 + c * (mmax + 1) / tau) if tau >= mmax + 1 else None
    return bound, simple, c


def private_sufficient_ratio(sc: Scenario, epsilon: float = 0.0, family: HistoryFamily | None = None) -> float:
    return private_sufficient(sc, epsilon, family)[0]


# discount factors

def _least_omega(f, grid: np.ndarray = OMEGA_GRID) -> float | None:
    """Least omega in (0,1) with f(omega) >= 0, by grid scan then bisection."""
    vals = np.array([f(w) for w in grid])
    ok = np.nonzero(vals >= 0)[0]
    if len(ok) == 0:
        return None
    k = ok[0]
    if k == 0:
        lo, hi = 0.0, grid[0]
        if f(1e-12) >= 0:
            return 0.0
    else:
        lo, hi = grid[k - 1], grid[k]
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return float(hi)


def min_omega_polynomial(d: np.ndarray, grim_tail: bool = False) -> float | None:
    """Least omega with sum_r omega^r d_r (+ grim tail) >= 0.

    Returns 0.0 for the degenerate case where the deviation never pays
    (no stage-0 gain), None when no omega in (0,1) works.
    """
    d = np.asarray(d, dtype=float)
    R = len(d) - 1

    def f(w):
        v = float(np.polyval(d[::-1], w))
        if grim_tail:
            v += w ** (R + 1) / (1 - w) * d[R]
        return v

    if d[0] >= 0:
        return 0.0
    if not grim_tail and R >= 1 and d[0] < 0 and np.all(d[1:] == d[1]):
        # constant punishment stages: (1-w) f(w) = w(a-b+c) - w^(R+1)(a-b) - c
        gain, cost = d[1], -d[0]
        if gain <= 0:
            return None
        w0 = ((gain + cost) / (gain * (R + 1))) ** (1.0 / R)
        if w0 >= 1:
            return None
        lo, hi = 0.0, w0
        while hi - lo > 1e-13:
            mid = 0.5 * (lo + hi)
            if f(mid) >= 0:
                hi = mid
            else:
                lo = mid
        return float(hi)
    return _least_omega(f)


def min_omega(sc: Scenario, i: int, deviation: DropDeviation, h: History | None = None) -> float | None:
    """Least discount factor that makes this one deviation unprofitable for ``i``."""
    game = Game(sc)
    case = game.case(h or History(), i, deviation.dropped)
    d = sc.params.beta[i] * case.dq - sc.params.gamma[i] * case.cost
    return min_omega_polynomial(d, case.grim_tail)


def node_min_omega(cases: Sequence[Case], beta: float, gamma: float,
                   tolerance: float = MARGIN_TOL) -> float | None:
    """Least omega at which every case of one node clears the tolerance."""
    if not cases:
        return 0.0

    def f(w):
        return float(margins_on_grid(cases, beta, gamma, np.array([w])).min()) + tolerance

    return _least_omega(f)


def grim_min_omega(sc: Scenario, i: int) -> float:
    """Closed-form patience needed under grim trigger: (gamma pbar / beta)^(1/mdel).

    With mdel = 0 (public monitoring) the exact requirement gamma pbar / beta
    is returned.  For mdel >= 1 this is the approximate closed form.
    """
    if not sc.durations.is_grim:
        raise ValueError("grim_min_omega needs grim durations")
    pbar = sc.baseline.pbar(i)
    beta, gamma = sc.params.beta[i], sc.params.gamma[i]
    if beta <= gamma * pbar:
        raise RatioTooSmall(f"beta {beta} must exceed gamma*pbar {gamma * pbar}")
    m = 0 if sc.monitoring == PUBLIC else mdel(sc.graph, sc.delays, i)
    ratio = gamma * pbar / beta
    return ratio if m == 0 else ratio ** (1.0 / m)


# effectiveness

class CaseStack:
    """Cases of one node stacked into zero-padded arrays for vectorized sums."""

    def __init__(self, cases: Sequence[Case]):
        R = max(len(c.dq) for c in cases)
        self.dq = np.zeros((len(cases), R))
        self.cost = np.zeros((len(cases), R))
        for k, c in enumerate(cases):
            self.dq[k, :len(c.dq)] = c.dq
            self.cost[k, :len(c.cost)] = c.cost
        self.last = np.array([len(c.dq) - 1 for c in cases])
        self.grim = np.array([c.grim_tail for c in cases])
        rows = np.arange(len(cases))
        self.dq_tail = np.where(self.grim, self.dq[rows, self.last], 0.0)
        self.cost_tail = np.where(self.grim, self.cost[rows, self.last], 0.0)

    def sums(self, omegas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Discounted reliability loss A and cost saving B, shape (cases, omegas)."""
        omegas = np.asarray(omegas, dtype=float)
        powers = omegas[None, :] ** np.arange(self.dq.shape[1])[:, None]
        tail = omegas[None, :] ** (self.last[:, None] + 1) / (1 - omegas[None, :])
        A = self.dq @ powers + tail * self.dq_tail[:, None]
        B = self.cost @ powers + tail * self.cost_tail[:, None]
        return A, B


def required_ratio(cases: Sequence[Case] | CaseStack, omegas: np.ndarray = OMEGA_GRID) -> np.ndarray:
    """Per omega, the least beta (gamma = 1) making every case's margin >= 0."""
    stack = cases if isinstance(cases, CaseStack) else CaseStack(cases)
    A, B = stack.sums(omegas)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(A > 1e-14, B / A, np.where(B <= 1e-12, -np.inf, np.inf))
    return r.max(axis=0)


def node_threshold(cases: Sequence[Case]) -> tuple[float, float | None]:
    """Least common ratio for one node and the discount factor achieving it."""
    if not cases:
        return 0.0, None
    cases = CaseStack(cases)
    need = required_ratio(cases)
    k = int(np.argmin(need))
    best, w_best = float(need[k]), float(OMEGA_GRID[k])
    if not math.isfinite(best):
        return max(best, 0.0), None
    # golden-section refinement inside the neighbouring grid cells
    lo = OMEGA_GRID[k - 1] if k > 0 else OMEGA_GRID[0] / 2
    hi = OMEGA_GRID[k + 1] if k + 1 < len(OMEGA_GRID) else OMEGA_GRID[k]
    phi = (math.sqrt(5) - 1) / 2

    def val(w):
        return float(required_ratio(cases, np.array([w]))[0])

    a, b = lo, hi
    for _ in range(80):
        x1, x2 = b - phi * (b - a), a + phi * (b - a)
        if val(x1) <= val(x2):
            b = x2
        else:
            a = x1
    w = 0.5 * (a + b)
    if val(w) < best:
        best, w_best = val(w), w
    return max(best, 0.0), w_best


def feasible(cases: Sequence[Case], ratio: float, tolerance: float = MARGIN_TOL) -> bool:
    """Whether some grid omega makes every case's margin >= -tolerance at ``ratio``."""
    if not cases:
        return True
    m = margins_on_grid(cases, ratio, 1.0, OMEGA_GRID)
    return bool(np.any(m.min(axis=0) >= -tolerance))


def bisect_threshold(cases: Sequence[Case], hi: float = 1.0, rel_tol: float = REL_TOL,
                     cap: float = 1e7) -> float:
    """Least feasible ratio by bisection (cross-check for ``node_threshold``)."""
    if feasible(cases, 0.0, 0.0):
        return 0.0
    while not feasible(cases, hi, 0.0):
        hi *= 2
        if hi > cap:
            return INF
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if feasible(cases, mid, 0.0):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class EffectivenessResult:
    threshold: float
    per_node: dict[int, float]
    best_omega: dict[int, float | None]
    folk: float
    sufficient: float | None
    sufficient_name: str | None
    necessary: float | None
    sandwich_ok: bool
    notes: list[str]

    def to_dict(self) -> dict:
        return {
            "threshold": _jsonable(self.threshold),
            "interval": [_jsonable(self.threshold), "inf"],
            "per_node": {str(k): _jsonable(v) for k, v in sorted(self.per_node.items())},
            "best_omega": {str(k): _jsonable(v) for k, v in sorted(self.best_omega.items())},
            "folk": _jsonable(self.folk),
            "sufficient": _jsonable(self.sufficient),
            "sufficient_name": self.sufficient_name,
            "necessary": _jsonable(self.necessary),
            "sandwich_ok": bool(self.sandwich_ok),
            "notes": sorted(self.notes),
        }


def effectiveness_threshold(sc: Scenario, family: HistoryFamily | None = None,
                            game: Game | None = None) -> EffectivenessResult:
    """Least uniform benefit-to-cost ratio (gamma = 1) at which every node has a
    discount factor making all family margins non-negative."""
    game = game or Game(sc)
    family = family or HistoryFamily.standard(sc)
    cases = collect_cases(sc, family, game)
    per_node, best_omega = {}, {}
    for i in sc.graph.nodes:
        mine = [c for c in cases if c.deviator == i]
        per_node[i], best_omega[i] = node_threshold(mine)
    v = max(per_node.values(), default=0.0)
    folk = folk_upper_bound(sc)
    notes = []
    sufficient, name, necessary = None, None, None
    if sc.monitoring == PUBLIC and sc.rs.mode == "full_indirect":
        sufficient, c = indirect_sufficient(sc, family, game)
        name = "grim_folk" if sc.durations.is_grim else "indirect_sufficient"
        notes.append(f"c = {_fmt(c)}")
    elif sc.monitoring == PRIVATE and sc.coordinated and not sc.durations.is_grim:
        try:
            sufficient, simple, c = private_sufficient(sc, 0.0, family, game)
            name = "private_sufficient"
            notes.append(f"c = {_fmt(c)}")
            if simple is not None:
                notes.append(f"simplified private bound {simple:.6g}")
        except NotCoordinated as exc:
            notes.append(str(exc))
    if sc.monitoring == PUBLIC and sc.rs.mode == "direct" and not sc.durations.is_grim:
        bounds = direct_necessary_bounds(sc)
        if bounds:
            necessary = max(bounds.values())
            approx = [e for e in bounds if collapse_regime(sc, *e)]
            if approx:
                notes.append(f"collapse regime p + q* <= 0.1 on edges {sorted(approx)} (approximate)")
    ok = v >= folk * (1 - REL_TOL)
    if sufficient is not None and math.isfinite(sufficient):
        ok = ok and v <= sufficient * (1 + REL_TOL)
    if necessary is not None and math.isfinite(necessary):
        ok = ok and v >= necessary * (1 - REL_TOL)
    return EffectivenessResult(v, per_node, best_omega, folk, sufficient, name, necessary, ok, notes)
