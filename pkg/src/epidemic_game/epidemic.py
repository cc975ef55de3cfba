"""Non-delivery probabilities of one dissemination stage.

Three independent routes to q (the probability that none of a target set
receives the message):

* ``exact_non_delivery``: the wave recursion over (already infected,
  newly infected) node sets, memoized on bitmasks;
* ``percolation_oracle``: brute-force enumeration of independent edge
  outcomes followed by plain reachability;
* ``monte_carlo_non_delivery``: seeded sampling of the same percolation.

``non_delivery_all`` runs the wave process forward once and returns q for
every node; the analyzer uses it because it needs all of them per profile.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidProfile, InvalidReduction, TooLarge
from .graph import SOURCE, OverlayGraph

EXACT_NODE_CAP = 14
ORACLE_EDGE_CAP = 22
MC_CHUNK = 4096
PRNG_NAME = f"numpy PCG64 seeded by SeedSequence([seed, chunk]) numpy-{np.__version__}"


@dataclass(frozen=True, eq=False)
class ForwardProfile:
    """One stage's forwarding probabilities: ``source_probs[i]`` and ``node_probs[i, j]``."""

    source_probs: np.ndarray
    node_probs: np.ndarray

    def __post_init__(self):
        sp = np.array(self.source_probs, dtype=float)
        npr = np.array(self.node_probs, dtype=float)
        sp.flags.writeable = False
        npr.flags.writeable = False
        object.__setattr__(self, "source_probs", sp)
        object.__setattr__(self, "node_probs", npr)

    @classmethod
    def uniform(cls, g: OverlayGraph, p: float, ps: float | None = None) -> "ForwardProfile":
        ps = p if ps is None else ps
        sp = np.zeros(g.n)
        npr = np.zeros((g.n, g.n))
        for t in g.source_targets:
            sp[t] = ps
        for i, j in g.edges():
            npr[i, j] = p
        return cls(sp, npr)

    @property
    def n(self) -> int:
        return len(self.source_probs)

    def prob(self, i: int, j: int) -> float:
        if i == SOURCE:
            return float(self.source_probs[j])
        return float(self.node_probs[i, j])

    def pbar(self, i: int) -> float:
        return float(self.node_probs[i].sum())

    def with_zeroed(self, edges: Iterable[tuple[int, int]]) -> "ForwardProfile":
        sp = self.source_probs.copy()
        npr = self.node_probs.copy()
        for i, j in edges:
            if i == SOURCE:
                sp[j] = 0.0
            else:
                npr[i, j] = 0.0
        return ForwardProfile(sp, npr)

    def with_prob(self, i: int, j: int, value: float) -> "ForwardProfile":
        sp = self.source_probs.copy()
        npr = self.node_probs.copy()
        if i == SOURCE:
            sp[j] = value
        else:
            npr[i, j] = value
        return ForwardProfile(sp, npr)

    def key(self) -> bytes:
        return self.source_probs.tobytes() + self.node_probs.tobytes()

    def __eq__(self, other):
        if not isinstance(other, ForwardProfile):
            return NotImplemented
        return bool(
            np.array_equal(self.source_probs, other.source_probs)
            and np.array_equal(self.node_probs, other.node_probs)
        )

    def __hash__(self):
        return hash(self.key())

    def validate(self, g: OverlayGraph, require_source: bool = True, certain_source: bool = False) -> None:
        """Check shapes, ranges and support; ``certain_source`` admits p_s = 1."""
        sp, npr = self.source_probs, self.node_probs
        if sp.shape != (g.n,) or npr.shape != (g.n, g.n):
            raise InvalidProfile(f"profile shape does not match a {g.n}-node graph")
        if certain_source:
            if np.any(sp < 0) or np.any(sp > 1):
                raise InvalidProfile("source probabilities must lie in [0, 1]")
        elif np.any(sp < 0) or np.any(sp >= 1):
            raise InvalidProfile("source probabilities must lie in [0, 1)")
        if np.any(npr < 0) or np.any(npr > 1):
            raise InvalidProfile("node probabilities must lie in [0, 1]")
        for i in range(g.n):
            if i not in g.source_targets and sp[i] != 0:
                raise InvalidProfile(f"source probability on non-edge (s,{i})")
            for j in range(g.n):
                if j not in g.out_edges[i] and npr[i, j] != 0:
                    raise InvalidProfile(f"probability on non-edge ({i},{j})")
        if require_source and not np.any(sp > 0):
            raise InvalidProfile("the source must forward to some node with positive probability")


def _bits(mask: int) -> list[int]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


def _subset_weights(free: list[int], miss: list[float]) -> list[tuple[int, float]]:
    """All infected subsets H of ``free`` with probability weight; zero weights dropped."""
    items = [(0, 1.0)]
    for k in free:
        m = miss[k]
        if m == 1.0:
            continue
        b = 1 << k
        if m == 0.0:
            items = [(h | b, w) for h, w in items]
            continue
        a = 1.0 - m
        items = [(h, w * m) for h, w in items] + [(h | b, w * a) for h, w in items]
    return items


def _inbound(p: ForwardProfile) -> list[list[tuple[int, float]]]:
    """Per node l, the list of (k, p_l[k]) with positive probability."""
    npr = p.node_probs
    return [[(int(k), float(npr[l, k])) for k in np.nonzero(npr[l])[0]] for l in range(p.n)]


def _miss(n: int, I: int, src: int, out: list, sp: list[float]) -> list[float]:
    """Per node k: probability that no member of wave I infects k."""
    miss = [1.0] * n
    if I & src:
        for k in range(n):
            miss[k] = 1.0 - sp[k]
    for l in _bits(I & (src - 1)):
        for k, pr in out[l]:
            miss[k] *= 1.0 - pr
    return miss


def exact_non_delivery(
    g: OverlayGraph, p: ForwardProfile, targets: Iterable[int], cap: int = EXACT_NODE_CAP
) -> float:
    """Probability that no node of ``targets`` receives the message (wave recursion).

    phi(U, I) is the probability that no target is ever infected given the
    infected set U and the wave I that forwards next.  Each step sums over
    the set H infected by I among the still-susceptible non-targets; the
    targets must all escape.  Branch weights are renormalized by their sum
    (which is 1 analytically) so boundary cases come out exact.
    """
    n = g.n
    if n > cap:
        raise TooLarge(f"exact mode supports at most {cap} nodes, graph has {n}")
    L = 0
    for t in targets:
        L |= 1 << int(t)
    if not L:
        raise ValueError("targets must be non-empty")
    src = 1 << n
    full = src - 1
    sp = [float(x) for x in p.source_probs]
    out = _inbound(p)
    memo: dict[tuple[int, int], float] = {}
    Lbits = _bits(L)

    def phi(U: int, I: int) -> float:
        if I == 0:
            return 1.0
        key = (U, I)
        hit = memo.get(key)
        if hit is not None:
            return hit
        miss = _miss(n, I, src, out, sp)
        qL = 1.0
        for k in Lbits:
            qL *= miss[k]
        if qL == 0.0:
            memo[key] = 0.0
            return 0.0
        total = 0.0
        norm = 0.0
        for H, w in _subset_weights(_bits(full & ~U & ~L), miss):
            total += w * (phi(U | H, H) if H else 1.0)
            norm += w
        val = qL * total / norm
        memo[key] = val
        return val

    return phi(src, src)


def non_delivery_all(g: OverlayGraph, p: ForwardProfile, cap: int = EXACT_NODE_CAP) -> np.ndarray:
    """q_i for every node from one forward pass over the wave process."""
    n = g.n
    if n > cap:
        raise TooLarge(f"exact mode supports at most {cap} nodes, graph has {n}")
    src = 1 << n
    full = src - 1
    sp = [float(x) for x in p.source_probs]
    out = _inbound(p)
    levels: list[dict[tuple[int, int], float]] = [dict() for _ in range(n + 1)]
    terminal: dict[int, float] = {}
    miss0 = _miss(n, src, src, out, sp)
    for H, w in _subset_weights(list(range(n)), miss0):
        if H == 0:
            terminal[0] = terminal.get(0, 0.0) + w
        else:
            lv = levels[H.bit_count()]
            lv[(H, H)] = lv.get((H, H), 0.0) + w
    for c in range(1, n + 1):
        for (U, I), pr in levels[c].items():
            miss = _miss(n, I, src, out, sp)
            for H, w in _subset_weights(_bits(full & ~U), miss):
                if H == 0:
                    terminal[U] = terminal.get(U, 0.0) + pr * w
                else:
                    V = U | H
                    lv = levels[V.bit_count()]
                    lv[(V, H)] = lv.get((V, H), 0.0) + pr * w
    miss_mass = [0.0] * n
    hit_mass = [0.0] * n
    for U, pr in terminal.items():
        for k in range(n):
            if U >> k & 1:
                hit_mass[k] += pr
            else:
                miss_mass[k] += pr
    q = np.empty(n)
    for k in range(n):
        q[k] = miss_mass[k] / (miss_mass[k] + hit_mass[k])
    return q


def _edge_arrays(g: OverlayGraph, p: ForwardProfile):
    edges = [(u if u != SOURCE else g.n, v, p.prob(u, v)) for u, v in g.all_edges()]
    return [e for e in edges if e[2] > 0.0]


def _propagate(n: int, edges, success: np.ndarray) -> np.ndarray:
    """Reachability from the source (column n) given per-edge success columns."""
    reach = np.zeros((success.shape[0], n + 1), dtype=bool)
    reach[:, n] = True
    for _ in range(n):
        before = reach.sum()
        for e, (u, v, _) in enumerate(edges):
            reach[:, v] |= reach[:, u] & success[:, e]
        if reach.sum() == before:
            break
    return reach


def percolation_oracle(
    g: OverlayGraph, p: ForwardProfile, targets: Iterable[int], cap: int = ORACLE_EDGE_CAP
) -> float:
    """Exact q by enumerating every outcome of the uncertain edges."""
    targets = sorted(set(int(t) for t in targets))
    edges = _edge_arrays(g, p)
    uncertain = [e for e, (_, _, pr) in enumerate(edges) if pr < 1.0]
    m = len(uncertain)
    if m > cap:
        raise TooLarge(f"oracle supports at most {cap} uncertain edges, profile has {m}")
    probs = np.array([edges[e][2] for e in uncertain])
    block = 1 << min(m, 16)
    parts = []
    for start in range(0, 1 << m, block):
        idx = np.arange(start, start + block, dtype=np.int64)
        bits = ((idx[:, None] >> np.arange(m)) & 1).astype(bool)
        success = np.ones((block, len(edges)), dtype=bool)
        success[:, uncertain] = bits
        weight = np.where(bits, probs, 1.0 - probs).prod(axis=1)
        reach = _propagate(g.n, edges, success)
        missed = ~reach[:, targets].any(axis=1)
        parts.append(float(weight[missed].sum()))
    return math.fsum(parts)


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    trials: int
    std_error: float
    seed: int


def _mc_chunk(args) -> int:
    g, edges, probs, targets, seed, chunk, size = args
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, chunk])))
    success = rng.random((size, len(edges))) < probs
    reach = _propagate(g.n, edges, success)
    return int((~reach[:, targets].any(axis=1)).sum())


def monte_carlo_non_delivery(
    g: OverlayGraph,
    p: ForwardProfile,
    targets: Iterable[int],
    trials: int,
    seed: int,
    workers: int = 1,
) -> MonteCarloEstimate:
    """Sampled q.  Trials are cut into fixed chunks with their own streams,
    so the estimate is bit-identical for any number of workers."""
    if trials < 1:
        raise ValueError("trials must be positive")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    targets = sorted(set(int(t) for t in targets))
    edges = _edge_arrays(g, p)
    probs = np.array([e[2] for e in edges])
    jobs = []
    for chunk, start in enumerate(range(0, trials, MC_CHUNK)):
        jobs.append((g, edges, probs, targets, seed, chunk, min(MC_CHUNK, trials - start)))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            counts = list(pool.map(_mc_chunk, jobs))
    else:
        counts = [_mc_chunk(j) for j in jobs]
    mean = sum(counts) / trials
    return MonteCarloEstimate(mean, trials, math.sqrt(mean * (1.0 - mean) / trials), seed)


def single_impact_ratio(
    g: OverlayGraph, p: ForwardProfile, i: int, j: int, reduced: float
) -> tuple[float, float]:
    """(q_i, q_i') where q_i' lowers only p_j[i] to ``reduced``.

    The bound q_i' <= q_i (1 - reduced) / (1 - p_j[i]) is asserted by callers.
    """
    if not g.has_edge(j, i):
        raise InvalidReduction(f"{j} is not an in-neighbor of {i}")
    cur = p.prob(j, i)
    if cur >= 1.0:
        raise InvalidReduction("p_j[i] must be below 1")
    if not 0.0 <= reduced < cur:
        raise InvalidReduction(f"reduced value {reduced} must lie in [0, {cur})")
    q = exact_non_delivery(g, p, {i})
    q2 = exact_non_delivery(g, p.with_prob(j, i, reduced), {i})
    return q, q2
