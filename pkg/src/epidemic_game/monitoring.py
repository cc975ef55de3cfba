"""Public and private defection signals.

A history is encoded by its append-only log of ``DefectionEvent``; signals
are derived from the log on demand.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .epidemic import ForwardProfile
from .graph import INF, DelayMatrix, OverlayGraph

COOPERATE = "cooperate"
DEFECT = "defect"


@dataclass(frozen=True, order=True)
class DefectionEvent:
    stage: int
    accused: int
    victim: int

    def to_dict(self) -> dict:
        return {"accused": self.accused, "victim": self.victim, "stage": self.stage}


@dataclass(frozen=True)
class SignalVerdict:
    """Per-edge verdicts, stored as the set of defecting edges."""

    edges: tuple[tuple[int, int], ...]
    defects: frozenset[tuple[int, int]]

    def __getitem__(self, edge: tuple[int, int]) -> str:
        if edge not in self._edge_set:
            raise KeyError(f"{edge} is not an edge")
        return DEFECT if edge in self.defects else COOPERATE

    @property
    def _edge_set(self) -> frozenset:
        return frozenset(self.edges)

    def all_cooperate(self) -> bool:
        return not self.defects


@dataclass(frozen=True)
class PrivateSignal:
    observer: int
    verdicts: SignalVerdict


def public_signal(g: OverlayGraph, thresholds: ForwardProfile, played: ForwardProfile) -> SignalVerdict:
    """Cooperate on (i, j) iff the played p_i'[j] reaches the threshold p_i[j]."""
    below = np.argwhere(played.node_probs < thresholds.node_probs)
    edges = tuple(g.edges())
    defects = frozenset((int(i), int(j)) for i, j in below if g.has_edge(int(i), int(j)))
    return SignalVerdict(edges, defects)


def private_signal(
    g: OverlayGraph,
    observer: int,
    event_log: Iterable[DefectionEvent],
    current_stage: int,
    delays: DelayMatrix,
) -> PrivateSignal:
    """Defects the observer learns about at ``current_stage``.

    An event (j, k, t) is seen exactly at t + del_observer[j, k], and never
    when that delay is infinite.
    """
    defects = set()
    for ev in event_log:
        d = delays(observer, ev.accused, ev.victim)
        if d != INF and ev.stage + d == current_stage:
            defects.add((ev.accused, ev.victim))
    return PrivateSignal(observer, SignalVerdict(tuple(g.edges()), frozenset(defects)))


def defections(g: OverlayGraph, thresholds: ForwardProfile, played: ForwardProfile, stage: int) -> list[DefectionEvent]:
    """Events for every edge played below its threshold."""
    sig = public_signal(g, thresholds, played)
    return [DefectionEvent(stage, i, j) for i, j in sorted(sig.defects)]


def events_to_json(events: Sequence[DefectionEvent]) -> list[dict]:
    return [e.to_dict() for e in sorted(events)]
