"""Defection-set state machines and threshold profiles of the punishing strategy.

Every holder ``h`` (a node or the source) keeps, for each peer ``p`` among
its out- and in-neighbors, a set of records ``(accused, victim, age)``.
Public mode inserts records for every pair of the reaction set at age 0.
Private mode inserts a record when the holder itself hears of the
defection, with a non-positive age that makes holder and peer activate it in
the same stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

from .epidemic import ForwardProfile
from .errors import ConfigError, UnpunishableNode
from .graph import INF, DelayMatrix, OverlayGraph
from .monitoring import PrivateSignal, SignalVerdict

GRIM = math.inf
PUBLIC = "public"
PRIVATE = "private"


class DefectionRecord(NamedTuple):
    accused: int
    victim: int
    age: float


@dataclass(frozen=True)
class ReactionSetConfig:
    """Who reacts when ``i`` defects from ``j``.

    ``direct``: only i and j.  ``full_indirect``: also every in-neighbor of
    i, and the source when it feeds i.  ``custom``: explicit sets, which
    always receive i and j.
    """

    mode: str = "full_indirect"
    custom_sets: Mapping[tuple[int, int], frozenset[int]] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("direct", "full_indirect", "custom"):
            raise ConfigError(f"unknown reaction mode {self.mode!r}")

    def members(self, g: OverlayGraph, i: int, j: int) -> frozenset[int]:
        if self.mode == "direct":
            return frozenset((i, j))
        if self.mode == "full_indirect":
            return frozenset((i, j, *g.punishers(i)))
        return frozenset((i, j, *self.custom_sets.get((i, j), ())))


@dataclass(frozen=True)
class DurationPolicy:
    """Punishment durations: ``base_tau`` unless ``per_pair`` names the
    (accused, victim, holder, peer) tuple."""

    base_tau: float
    per_pair: Mapping[tuple[int, int, int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.base_tau != GRIM and (self.base_tau < 1 or int(self.base_tau) != self.base_tau):
            raise ConfigError("tau must be a positive integer or GRIM")

    @property
    def is_grim(self) -> bool:
        return self.base_tau == GRIM

    def duration(self, accused: int, victim: int, holder: int, peer: int) -> float:
        return self.per_pair.get((accused, victim, holder, peer), self.base_tau)


@dataclass(frozen=True)
class PunishState:
    """DS_h[p] for every holder pair; absent pairs hold the empty set."""

    mode: str
    records: Mapping[tuple[int, int], frozenset[DefectionRecord]] = field(default_factory=dict)

    def ds(self, holder: int, peer: int) -> frozenset[DefectionRecord]:
        return self.records.get((holder, peer), frozenset())

    def active(self, holder: int, peer: int) -> frozenset[DefectionRecord]:
        return frozenset(r for r in self.ds(holder, peer) if r.age >= 0)

    def is_empty(self) -> bool:
        return not any(self.records.values())

    def canonical(self) -> tuple:
        return tuple(sorted((k, tuple(sorted(v))) for k, v in self.records.items() if v))


def update_ds_public(
    g: OverlayGraph,
    state: PunishState,
    signal: SignalVerdict,
    rs: ReactionSetConfig,
    tau: DurationPolicy,
    expiry_slack: int = 0,
) -> PunishState:
    """Age surviving records, drop those reaching tau, add age-0 records for
    every defect seen by a pair inside the reaction set."""
    limit = tau.base_tau + expiry_slack
    out: dict[tuple[int, int], set[DefectionRecord]] = {}
    for key, recs in state.records.items():
        kept = {DefectionRecord(a, v, r + 1) for a, v, r in recs if r + 1 < limit}
        if kept:
            out[key] = kept
    for k1, k2 in signal.defects:
        members = rs.members(g, k1, k2)
        for h in members:
            for p in g.peers(h):
                if p in members:
                    out.setdefault((h, p), set()).add(DefectionRecord(k1, k2, 0))
    return PunishState(PUBLIC, {k: frozenset(v) for k, v in out.items()})


def update_ds_private(
    g: OverlayGraph,
    state: PunishState,
    signals: Mapping[int, PrivateSignal],
    delays: DelayMatrix,
    tau: DurationPolicy,
    expiry_slack: int = 0,
) -> PunishState:
    """Private update: a holder inserts what it hears now, aged
    min(del_holder - del_peer, 0); peers that never hear are skipped."""
    out: dict[tuple[int, int], set[DefectionRecord]] = {}
    for key, recs in state.records.items():
        h, p = key
        kept = {
            DefectionRecord(a, v, r + 1)
            for a, v, r in recs
            if r + 1 < tau.duration(a, v, h, p) + expiry_slack
        }
        if kept:
            out[key] = kept
    for h, sig in signals.items():
        for k1, k2 in sig.verdicts.defects:
            dh = delays(h, k1, k2)
            for p in g.peers(h):
                dp = delays(p, k1, k2)
                if dp == INF:
                    continue
                age = min(dh - dp, 0)
                if age < tau.duration(k1, k2, h, p):
                    out.setdefault((h, p), set()).add(DefectionRecord(k1, k2, age))
    return PunishState(PRIVATE, {k: frozenset(v) for k, v in out.items()})


def edge_is_zeroed(records: Iterable[DefectionRecord], forwarder: int, receiver: int, mode: str) -> bool:
    """Threshold rule for p_forwarder[receiver] given one holder's set.

    Zero when the receiver is accused (it is being punished) or when the
    forwarder is accused: of anything in public mode, of dropping this
    receiver in private mode.
    """
    for a, v, r in records:
        if r < 0:
            continue
        if a == receiver:
            return True
        if a == forwarder and (mode == PUBLIC or v == receiver):
            return True
    return False


def zeroed_edges(g: OverlayGraph, state: PunishState) -> frozenset[tuple[int, int]]:
    """Forwarding edges (source edges included) whose threshold is 0."""
    out = set()
    for i, j in g.all_edges():
        recs = state.records.get((i, j))
        if recs and edge_is_zeroed(recs, i, j, state.mode):
            out.add((i, j))
    return frozenset(out)


def threshold_profile(g: OverlayGraph, state: PunishState, baseline: ForwardProfile) -> ForwardProfile:
    """Baseline probabilities with punished or self-punished edges set to 0."""
    return baseline.with_zeroed(zeroed_edges(g, state))


def peer_view_zeroed(g: OverlayGraph, state: PunishState, forwarder: int, receiver: int) -> bool:
    """p_forwarder[receiver] as computed by the receiver from its own set."""
    return edge_is_zeroed(state.ds(receiver, forwarder), forwarder, receiver, state.mode)


def mdel(g: OverlayGraph, delays: DelayMatrix, i: int) -> float:
    """Largest delay with which a punisher of ``i`` hears of a defection by ``i``.

    Raises UnpunishableNode when some punisher never hears.
    """
    worst = 0
    for j in g.out_edges[i]:
        for k in g.punishers(i):
            d = delays(k, i, j)
            if d == INF:
                raise UnpunishableNode(
                    f"punisher {k} never learns that {i} dropped {j}", triple=(k, i, j)
                )
            worst = max(worst, d)
    return worst


def mdel_or_inf(g: OverlayGraph, delays: DelayMatrix, i: int) -> float:
    try:
        return mdel(g, delays, i)
    except UnpunishableNode:
        return INF


def coordinated_durations(g: OverlayGraph, delays: DelayMatrix, tau: float) -> DurationPolicy:
    """Durations that make every reaction to a defection by i end at stage mdel_i + tau."""
    if tau != GRIM and tau < 1:
        raise ConfigError("tau must be at least 1")
    per: dict[tuple[int, int, int, int], float] = {}
    for i in range(g.n):
        if not g.out_edges[i]:
            continue
        m = mdel(g, delays, i)
        end = m + tau
        for j in g.out_edges[i]:
            for k, l in g.holder_pairs():
                dk = delays(k, i, j)
                dl = delays(l, i, j)
                if dk == INF or dl == INF:
                    continue
                gap = max(dk, dl)
                per[(i, j, k, l)] = end - gap if gap < end else 0
    return DurationPolicy(tau, per)


def coordination_failure(policy: DurationPolicy, delays: DelayMatrix, g: OverlayGraph):
    """First (i, j) whose punisher windows share no stage, or None."""
    for i in range(g.n):
        for j in g.out_edges[i]:
            lo, hi = 1, INF
            for k in g.punishers(i):
                d = delays(k, i, j)
                if d == INF:
                    return (k, i, j)
                lo = max(lo, d + 1)
                hi = min(hi, d + policy.duration(i, j, k, i))
            if lo > hi:
                return (i, j)
    return None


def enforces_coordination(policy: DurationPolicy, delays: DelayMatrix, g: OverlayGraph) -> bool:
    """Whether every set of punishers of a defection overlaps in some stage."""
    return coordination_failure(policy, delays, g) is None
