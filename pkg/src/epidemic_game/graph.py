"""Directed overlay with an external source, path queries and accusation delays.

Nodes are dense integers ``0..n-1``.  The source is the sentinel ``SOURCE``
(``-1``); it has out-edges only and never appears in ``out_edges`` or
``in_edges`` of a regular node.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

from .errors import (
    DisconnectedFromSource,
    DuplicateEdge,
    GraphError,
    InvalidOverride,
    NotAnEdge,
    SelfLoop,
)

SOURCE = -1
INF = math.inf


@dataclass(frozen=True)
class OverlayGraph:
    n: int
    out_edges: tuple[tuple[int, ...], ...]
    source_targets: frozenset[int]
    in_edges: tuple[tuple[int, ...], ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        ins = [[] for _ in range(self.n)]
        for i, outs in enumerate(self.out_edges):
            for j in outs:
                ins[j].append(i)
        object.__setattr__(self, "in_edges", tuple(tuple(sorted(x)) for x in ins))

    @property
    def nodes(self) -> range:
        return range(self.n)

    def successors(self, u: int) -> tuple[int, ...]:
        if u == SOURCE:
            return tuple(sorted(self.source_targets))
        return self.out_edges[u]

    def edges(self) -> list[tuple[int, int]]:
        """Regular node-to-node edges in lexicographic order."""
        return [(i, j) for i in range(self.n) for j in self.out_edges[i]]

    def all_edges(self) -> list[tuple[int, int]]:
        """Source edges first, then node edges."""
        return [(SOURCE, j) for j in sorted(self.source_targets)] + self.edges()

    def has_edge(self, i: int, j: int) -> bool:
        if i == SOURCE:
            return j in self.source_targets
        return 0 <= i < self.n and j in self.out_edges[i]

    def punishers(self, i: int) -> tuple[int, ...]:
        """In-neighbors of ``i`` plus the source when ``i`` is a source target."""
        extra = (SOURCE,) if i in self.source_targets else ()
        return extra + self.in_edges[i]

    def peers(self, holder: int) -> tuple[int, ...]:
        """Peers a holder tracks defection sets for: out- and in-neighbors."""
        if holder == SOURCE:
            return tuple(sorted(self.source_targets))
        ps = set(self.out_edges[holder]) | set(self.punishers(holder))
        return tuple(sorted(ps))

    def holder_pairs(self) -> list[tuple[int, int]]:
        return [(h, p) for h in (SOURCE, *range(self.n)) for p in self.peers(h)]


def build_graph(
    edge_list: Iterable[tuple[int, int]], source_targets: Iterable[int], n: int | None = None
) -> OverlayGraph:
    edge_list = [(int(u), int(v)) for u, v in edge_list]
    targets = frozenset(int(t) for t in source_targets)
    if not targets:
        raise GraphError("source_targets must be non-empty")
    if n is None:
        n = 1 + max([max(e) for e in edge_list] + list(targets))
    outs: list[list[int]] = [[] for _ in range(n)]
    for u, v in edge_list:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u},{v}) outside node range 0..{n - 1}")
        if u == v:
            raise SelfLoop(f"self-loop on node {u}")
        if v in outs[u]:
            raise DuplicateEdge(f"duplicate edge ({u},{v})")
        outs[u].append(v)
    for t in targets:
        if not 0 <= t < n:
            raise GraphError(f"source target {t} outside node range 0..{n - 1}")
    g = OverlayGraph(n, tuple(tuple(sorted(o)) for o in outs), targets)
    reach = _reachable(g, SOURCE, None)
    missing = [i for i in range(n) if i not in reach]
    if missing:
        raise DisconnectedFromSource(f"nodes unreachable from the source: {missing}")
    return g


def _reachable(g: OverlayGraph, start: int, avoid: int | None) -> dict[int, int]:
    """BFS hop counts from ``start`` in the graph with ``avoid`` removed."""
    if start == avoid:
        return {}
    dist = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in g.successors(u):
            if v != avoid and v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def path_exists_avoiding(g: OverlayGraph, frm: int, to: int, avoid: int | None = None) -> bool:
    """True iff a simple path ``frm`` to ``to`` exists that never touches ``avoid``."""
    if frm == to:
        raise GraphError("path_exists_avoiding requires frm != to")
    if to == avoid:
        return False
    return to in _reachable(g, frm, avoid)


@lru_cache(maxsize=4096)
def nodes_on_simple_paths(g: OverlayGraph, frm: int, to: int) -> frozenset[int]:
    """Every vertex lying on at least one simple directed path ``frm`` to ``to``."""
    found: set[int] = set()
    path: list[int] = [frm]
    onpath = {frm}

    def dfs(u: int) -> None:
        for v in g.successors(u):
            if v in onpath:
                continue
            if v == to:
                found.update(path)
                found.add(to)
                continue
            # prune branches that can no longer reach the target
            if not _reaches_avoiding_set(g, v, to, onpath):
                continue
            path.append(v)
            onpath.add(v)
            dfs(v)
            path.pop()
            onpath.discard(v)

    if frm == to:
        return frozenset({to})
    dfs(frm)
    return frozenset(found)


def _reaches_avoiding_set(g: OverlayGraph, start: int, to: int, blocked: set[int]) -> bool:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        if u == to:
            return True
        for v in g.successors(u):
            if v not in seen and v not in blocked:
                seen.add(v)
                queue.append(v)
    return False


def lemma_paths_condition(g: OverlayGraph, i: int, j: int) -> bool:
    """Whether punishing ``i`` for dropping ``j`` can lower i's reliability.

    True iff some node ``k != i`` lies on a simple source-to-``i`` path and is
    reachable from ``j`` without crossing ``i``.
    """
    if not g.has_edge(i, j) or i == SOURCE:
        raise NotAnEdge(f"({i},{j}) is not an edge")
    on_paths = nodes_on_simple_paths(g, SOURCE, i)
    for k in range(g.n):
        if k == i or k not in on_paths:
            continue
        if k == j or path_exists_avoiding(g, j, k, i):
            return True
    return False


def is_redundant(g: OverlayGraph) -> bool:
    """Every node keeps a source path after the removal of any other single node."""
    return all(
        path_exists_avoiding(g, SOURCE, i, j) for i in range(g.n) for j in range(g.n) if j != i
    )


def supports_full_indirect(g: OverlayGraph, i: int) -> bool:
    """Every out-neighbor of ``i`` reaches every in-neighbor of ``i`` without crossing ``i``."""
    return all(
        k == j or path_exists_avoiding(g, j, k, i) for j in g.out_edges[i] for k in g.in_edges[i]
    )


@dataclass(frozen=True)
class DelayModelConfig:
    """How accusation delays arise.

    ``hops``: shortest hop count from victim to observer avoiding the accused.
    ``zero``: every observer that the hop model reaches learns at once.
    Overrides map ``(observer, accused, victim)`` to a delay (``INF`` allowed).
    """

    model: str = "hops"
    overrides: Mapping[tuple[int, int, int], float] = field(default_factory=dict)


@dataclass(frozen=True)
class DelayMatrix:
    """del_k[i,j] for every edge (i,j) and every observer k, source included."""

    n: int
    table: Mapping[tuple[int, int, int], float]

    def __call__(self, observer: int, accused: int, victim: int) -> float:
        return self.table[(observer, accused, victim)]

    def max_finite(self) -> int:
        vals = [v for v in self.table.values() if v != INF]
        return int(max(vals)) if vals else 0


def compute_delays(g: OverlayGraph, model: DelayModelConfig | None = None) -> DelayMatrix:
    model = model or DelayModelConfig()
    if model.model not in ("hops", "zero"):
        raise GraphError(f"unknown delay model {model.model!r}")
    table: dict[tuple[int, int, int], float] = {}
    for i, j in g.edges():
        dist = _reachable(g, j, i)
        for k in range(g.n):
            d = dist.get(k, INF)
            if model.model == "zero" and d != INF:
                d = 0
            table[(k, i, j)] = d
        table[(i, i, j)] = 0
        table[(j, i, j)] = 0
    for (k, i, j), d in model.overrides.items():
        if not g.has_edge(i, j) or i == SOURCE:
            raise InvalidOverride(f"override ({k},{i},{j}) names a non-edge")
        if not (k == SOURCE or 0 <= k < g.n):
            raise InvalidOverride(f"override observer {k} out of range")
        d = INF if d == INF else int(d)
        if d != INF and d < 0:
            raise InvalidOverride(f"override ({k},{i},{j}) is negative")
        if k in (i, j) and d != 0:
            raise InvalidOverride(f"override ({k},{i},{j}) must be 0: endpoints learn instantly")
        if k != SOURCE:
            table[(k, i, j)] = d
    # the source hears an accusation through the targets it feeds that lead to the accused
    for i, j in g.edges():
        relays = [k for k in g.source_targets if k != i and path_exists_avoiding(g, k, i)]
        d = min((table[(k, i, j)] for k in relays), default=INF)
        table[(SOURCE, i, j)] = d
    for (k, i, j), d in model.overrides.items():
        if k == SOURCE:
            table[(k, i, j)] = INF if d == INF else int(d)
    return DelayMatrix(g.n, table)
