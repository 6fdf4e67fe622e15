"""Action costs and amortised efficiency comparison of two LTSs.

Comparison is an energy game on pairs of states. The challenger moves on
either side; the defender answers on the other side with a functionally
equivalent action padded by unobservable steps, ``u b v``. Credit moves by
``c(answer) - c(challenge)`` for a left challenge and by
``c(challenge) - c(answer)`` for a right one and may never go negative, so
a cheaper left-hand system accumulates credit. The minimal initial credit
for every pair is computed by monotone lifting from zero.
"""

from __future__ import annotations

import heapq
import math
import warnings
from collections import defaultdict, deque
from dataclasses import dataclass, field

from .actions import (CacheUpd, Evict, LocalRead, LocalWrite, LockAcq, LockRel,
                      PullRead, Reconf, RefRead, RefWrite, StoreRead, StoreUpd,
                      Tau, format_action, is_system, observable_key)
from .errors import ResourceLimit

__all__ = [
    "CostParams", "action_cost", "trace_cost", "weak_responses",
    "AmortisedVerdict", "amortised_compare", "BreakevenReport", "breakeven_report",
    "MORE_EFFICIENT", "NOT_MORE_EFFICIENT", "INCONCLUSIVE",
]

MORE_EFFICIENT = "more_efficient"
NOT_MORE_EFFICIENT = "not_more_efficient"
INCONCLUSIVE = "inconclusive"

DEFAULT_CREDIT_CAP = 10**6


@dataclass(frozen=True)
class CostParams:
    """Latencies in instruction cycles: cache hit, store/bus access, internal step, morph."""

    kappa: int = 1
    delta: int = 4
    theta: int = 1
    mu: int = 1000

    def __post_init__(self):
        if min(self.kappa, self.delta, self.theta, self.mu) < 0:
            raise ValueError("costs are natural numbers")
        if not self.kappa < self.delta:
            raise ValueError(f"cache access must be cheaper than store access "
                             f"(kappa={self.kappa}, delta={self.delta})")
        if self.mu < self.delta:
            raise ValueError(f"reconfiguration cost mu={self.mu} below delta={self.delta}")
        if self.mu < 10 * self.delta:
            warnings.warn(f"mu={self.mu} is not much larger than delta={self.delta}", stacklevel=3)


_DELTA = (RefRead, RefWrite, StoreRead, PullRead, StoreUpd, LockAcq, LockRel)


def action_cost(a, p: CostParams = CostParams()) -> int:
    if isinstance(a, (LocalRead, LocalWrite)):
        return p.kappa
    if isinstance(a, _DELTA):
        return p.delta
    if isinstance(a, Tau):
        return p.theta
    if isinstance(a, Evict):
        return 0
    if isinstance(a, CacheUpd):
        # Caches are per cluster, so src == dst is the intra-cluster case.
        return 0 if a.src == a.dst else p.delta
    if isinstance(a, Reconf):
        return p.mu
    raise TypeError(f"not an action: {a!r}")


def trace_cost(trace, p: CostParams = CostParams()) -> int:
    return sum(action_cost(item[0] if isinstance(item, tuple) else item, p) for item in trace)


class _Responder:
    """Cached defender responses in one LTS."""

    def __init__(self, lts, params, locks_observable, maximise):
        self.lts = lts
        self.params = params
        self.locks_observable = locks_observable
        self.maximise = maximise
        self._unobs = [
            [(t, action_cost(a, params)) for a, t in lts.out(s)
             if observable_key(a, locks_observable) is None]
            for s in range(len(lts))
        ]
        self._reach = {}
        self._resp = {}
        self._acyclic = _is_acyclic(self._unobs)

    def reach(self, s):
        """Best cost of a simple unobservable path from ``s`` to each state."""
        if s not in self._reach:
            if not self.maximise:
                self._reach[s] = self._dijkstra(s)
            elif self._acyclic:
                self._reach[s] = self._longest_dag(s)
            else:
                self._reach[s] = self._longest_simple(s)
        return self._reach[s]

    def _dijkstra(self, s):
        dist = {s: 0}
        heap = [(0, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for t, c in self._unobs[u]:
                if d + c < dist.get(t, math.inf):
                    dist[t] = d + c
                    heapq.heappush(heap, (d + c, t))
        return dist

    def _longest_dag(self, s):
        # Longest path from s to every t in an acyclic graph.
        order = []
        seen = set()
        stack = [(s, iter(self._unobs[s]))]
        seen.add(s)
        while stack:
            u, it = stack[-1]
            for t, _ in it:
                if t not in seen:
                    seen.add(t)
                    stack.append((t, iter(self._unobs[t])))
                    break
            else:
                order.append(u)
                stack.pop()
        best = {s: 0}
        for u in reversed(order):
            if u not in best:
                continue
            for t, c in self._unobs[u]:
                if best[u] + c > best.get(t, -1):
                    best[t] = best[u] + c
        return best

    def _longest_simple(self, s):
        best = {}
        on_path = {s}

        def dfs(u, d):
            if d > best.get(u, -1):
                best[u] = d
            for t, c in self._unobs[u]:
                if t not in on_path:
                    on_path.add(t)
                    dfs(t, d + c)
                    on_path.discard(t)

        dfs(s, 0)
        return best

    def responses(self, s, target):
        """End state -> best cost of ``u b v`` (``u v`` when ``target`` is None)."""
        memo_key = (s, target)
        if memo_key in self._resp:
            return self._resp[memo_key]
        better = max if self.maximise else min
        out = {}

        def offer(end, cost):
            out[end] = better(out[end], cost) if end in out else cost

        first = self.reach(s)
        if target is None:
            for mid, c1 in first.items():
                for end, c2 in self.reach(mid).items():
                    offer(end, c1 + c2)
        else:
            for mid, c1 in first.items():
                for a, t in self.lts.out(mid):
                    if observable_key(a, self.locks_observable) != target:
                        continue
                    cb = action_cost(a, self.params)
                    for end, c2 in self.reach(t).items():
                        offer(end, c1 + cb + c2)
        self._resp[memo_key] = out
        return out


def _is_acyclic(adj) -> bool:
    indeg = [0] * len(adj)
    for edges in adj:
        for t, _ in edges:
            indeg[t] += 1
    queue = deque(i for i, d in enumerate(indeg) if d == 0)
    seen = 0
    while queue:
        u = queue.popleft()
        seen += 1
        for t, _ in adj[u]:
            indeg[t] -= 1
            if indeg[t] == 0:
                queue.append(t)
    return seen == len(adj)


def weak_responses(lts, s: int, target, p: CostParams = CostParams(),
                   locks_observable: bool = True, maximise: bool = False) -> dict:
    """Weak answers from state ``s`` to a challenge of class ``target``.

    ``target`` is an observable key (see :func:`observable_key`) or None for
    the unobservable class. Returns end state id -> cheapest cost over paths
    ``u b v`` whose ``u`` and ``v`` are simple unobservable paths; with
    ``maximise`` the most expensive such path is reported instead.
    """
    return _Responder(lts, p, locks_observable, maximise).responses(s, target)


@dataclass
class AmortisedVerdict:
    result: str
    min_credit: int | None = None
    bound: int | None = None  # cap in force for an inconclusive verdict
    witness: dict | None = None  # challenger strategy for not_more_efficient
    pairs: int = 0

    def __post_init__(self):
        if (self.result == MORE_EFFICIENT) != (self.min_credit is not None):
            raise ValueError("min_credit is reported exactly for more_efficient verdicts")

    def __str__(self):
        if self.result == MORE_EFFICIENT:
            return f"more_efficient(min_credit={self.min_credit})"
        if self.result == INCONCLUSIVE:
            return f"inconclusive(bound={self.bound})"
        return NOT_MORE_EFFICIENT


@dataclass
class _Challenge:
    side: int  # 1: left system moves, 2: right system moves
    action: object
    target: int  # state id on the challenger's side
    answers: list = field(default_factory=list)  # [(pair, credit delta)]


class _Game:
    def __init__(self, lts1, lts2, params, locks_observable, max_pairs):
        # Left answers should be cheap, right answers expensive.
        self.left = _Responder(lts1, params, locks_observable, maximise=False)
        self.right = _Responder(lts2, params, locks_observable, maximise=True)
        self.lts1, self.lts2 = lts1, lts2
        self.params = params
        self.locks_observable = locks_observable
        self.start = (lts1.initial, lts2.initial)
        self.moves = {}
        self.preds = defaultdict(set)
        queue = deque([self.start])
        self.moves[self.start] = None
        while queue:
            pair = queue.popleft()
            self.moves[pair] = self._challenges(pair)
            for ch in self.moves[pair]:
                for nxt, _ in ch.answers:
                    self.preds[nxt].add(pair)
                    if nxt not in self.moves:
                        if len(self.moves) >= max_pairs:
                            raise ResourceLimit(f"more than {max_pairs} state pairs")
                        self.moves[nxt] = None
                        queue.append(nxt)
        n_nodes = len(self.moves) + sum(len(m) for m in self.moves.values())
        weights = [abs(w) for m in self.moves.values() for ch in m for _, w in ch.answers]
        # A finite minimal credit never exceeds (#game vertices) * (max |weight|).
        self.bound = n_nodes * max(weights + [1])

    def _challenges(self, pair):
        s1, s2 = pair
        out = []
        for a, t in self.lts1.out(s1):
            ca = action_cost(a, self.params)
            key = observable_key(a, self.locks_observable)
            answers = [((t, end), cost - ca)
                       for end, cost in self.right.responses(s2, key).items()]
            out.append(_Challenge(1, a, t, answers))
        for b, t in self.lts2.out(s2):
            cb = action_cost(b, self.params)
            key = observable_key(b, self.locks_observable)
            answers = [((end, t), cb - cost)
                       for end, cost in self.left.responses(s1, key).items()]
            out.append(_Challenge(2, b, t, answers))
        return out

    def solve(self, threshold, weighted=True):
        """Minimal credits, saturating at ``threshold + 1``. Also the challenger's choices."""
        top = threshold + 1
        need = dict.fromkeys(self.moves, 0)
        choice = {}
        queue = deque(self.moves)
        queued = set(self.moves)
        while queue:
            pair = queue.popleft()
            queued.discard(pair)
            best, best_ch = 0, None
            for ch in self.moves[pair]:
                v = top
                for p, w in ch.answers:
                    if need[p] < top:
                        v = min(v, need[p] - (w if weighted else 0))
                if v > best:
                    best, best_ch = min(v, top), ch
            if best > need[pair]:
                need[pair] = best
                choice[pair] = best_ch
                for pred in self.preds[pair]:
                    if pred not in queued:
                        queued.add(pred)
                        queue.append(pred)
        return need, choice


def _strategy(choice, need, top) -> dict:
    return {f"{p[0]},{p[1]}": {"side": ch.side, "action": format_action(ch.action), "to": ch.target}
            for p, ch in sorted(choice.items()) if need[p] >= top}


def amortised_compare(lts1, lts2, p: CostParams = CostParams(), credit_cap: int = DEFAULT_CREDIT_CAP,
                      locks_observable: bool = True, max_pairs: int = 10**6) -> AmortisedVerdict:
    """Is the initial state of ``lts1`` weakly amortised more efficient than that of ``lts2``?"""
    for lts in (lts1, lts2):
        if lts.truncated:
            raise ValueError("amortised comparison needs fully explored LTSs")
    game = _Game(lts1, lts2, p, locks_observable, max_pairs)
    threshold = min(credit_cap, game.bound)
    need, choice = game.solve(threshold)
    v0 = need[game.start]
    if v0 <= threshold:
        return AmortisedVerdict(MORE_EFFICIENT, v0, pairs=len(game.moves))
    if threshold == game.bound:
        # Past the bound no finite credit suffices.
        return AmortisedVerdict(NOT_MORE_EFFICIENT, witness=_strategy(choice, need, threshold + 1),
                                pairs=len(game.moves))
    qual, qchoice = game.solve(0, weighted=False)
    if qual[game.start] > 0:
        return AmortisedVerdict(NOT_MORE_EFFICIENT, witness=_strategy(qchoice, qual, 1),
                                pairs=len(game.moves))
    return AmortisedVerdict(INCONCLUSIVE, bound=credit_cap, pairs=len(game.moves))


@dataclass
class BreakevenReport:
    deferred_writes: int  # m
    write_credit: int  # m * (delta - kappa)
    cheap_op_savings: int
    flush_overhead: int
    trace_cost: int
    reference_cost: int
    net_credit: int
    breakeven_ops: int  # ceil(m * kappa / (delta - kappa))
    cache_hits: int
    clears_breakeven: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _reference_cost(a, p):
    if isinstance(a, Tau):
        return p.theta
    if observable_key(a) is not None:
        return p.delta
    return 0


def breakeven_report(trace, p: CostParams = CostParams()) -> BreakevenReport:
    """How far a concrete implementation trace is from paying for its write-backs.

    Every ``LocalWrite`` defers its store commit and so earns ``delta - kappa``;
    the report compares the cache hits the trace performs against the number
    needed to cover the flushes of those ``m`` writes.
    """
    actions = [item[0] if isinstance(item, tuple) else item for item in trace]
    gain = p.delta - p.kappa
    m = sum(isinstance(a, LocalWrite) for a in actions)
    cheap = sum(isinstance(a, (LocalWrite, LocalRead)) for a in actions)
    overhead = sum(action_cost(a, p) for a in actions if is_system(a) or isinstance(a, Reconf))
    cost = trace_cost(actions, p)
    ref = sum(_reference_cost(a, p) for a in actions)
    written = set()
    repeats = 0
    for a in actions:
        if isinstance(a, LocalWrite):
            if (a.thread, a.var) in written:
                repeats += 1
            written.add((a.thread, a.var))
    hits = sum(isinstance(a, LocalRead) for a in actions) + repeats
    breakeven = -(-m * p.kappa // gain)
    return BreakevenReport(
        deferred_writes=m, write_credit=m * gain, cheap_op_savings=cheap * gain,
        flush_overhead=overhead, trace_cost=cost, reference_cost=ref,
        net_credit=ref - cost, breakeven_ops=breakeven, cache_hits=hits,
        clears_breakeven=hits >= breakeven,
    )
