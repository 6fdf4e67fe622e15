"""Explicit labelled transition systems and the breadth-first explorer."""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass, field

from .actions import format_action
from .errors import ResourceLimit

DEFAULT_STATE_CAP = 10**6


@dataclass
class LTS:
    """Reachable fragment of a transition system.

    States are numbered in discovery order; ``initial`` is always 0.
    ``final`` holds states in which no thread can take a programmed step
    (terminated or blocked), ``truncated`` the states left unexpanded by a
    depth bound.
    """

    states: list
    edges: list = field(default_factory=list)
    final: set = field(default_factory=set)
    truncated: set = field(default_factory=set)
    meta: dict = field(default_factory=dict)
    initial: int = 0

    def __post_init__(self):
        self.index = {s: i for i, s in enumerate(self.states)}
        self._out = [[] for _ in self.states]
        for src, a, dst in self.edges:
            self._out[src].append((a, dst))

    def __len__(self):
        return len(self.states)

    def out(self, sid: int) -> list:
        return self._out[sid]

    @property
    def complete(self) -> bool:
        return not self.truncated

    def path_to(self, target: int) -> list:
        """Actions along one shortest path from the initial state."""
        parent = {self.initial: None}
        queue = deque([self.initial])
        while queue:
            s = queue.popleft()
            if s == target:
                break
            for a, t in self._out[s]:
                if t not in parent:
                    parent[t] = (s, a)
                    queue.append(t)
        if target not in parent:
            raise KeyError(f"state {target} unreachable")
        actions = []
        node = target
        while parent[node] is not None:
            node, a = parent[node]
            actions.append(a)
        return actions[::-1]

    def state_hash(self, sid: int) -> str:
        return hashlib.sha1(str(self.states[sid]).encode()).hexdigest()[:10]

    def to_text(self, params=None) -> str:
        from .report import lts_text_lines

        return "\n".join(lts_text_lines(self.to_dict(params))) + "\n"

    def to_dict(self, params=None) -> dict:
        from .cost import CostParams, action_cost

        params = params or CostParams()
        return {
            "initial": self.initial,
            "states": [
                {"id": i, "hash": self.state_hash(i), "final": i in self.final,
                 "truncated": i in self.truncated, "text": str(s), "state": s.to_dict()}
                for i, s in enumerate(self.states)
            ],
            "edges": [
                {"src": src, "action": format_action(a), "cost": action_cost(a, params), "dst": dst}
                for src, a, dst in self.edges
            ],
            "meta": self.meta,
        }

    def to_json(self, params=None) -> str:
        return json.dumps(self.to_dict(params), indent=1, sort_keys=True)


def explore(initial, successors, is_final, depth=None, state_cap=DEFAULT_STATE_CAP) -> LTS:
    """Breadth-first closure of ``successors`` from ``initial``.

    ``successors(state)`` must return (action, state) pairs in a canonical
    order; the result is then deterministic. States at BFS distance ``depth``
    are recorded but not expanded.
    """
    index = {initial: 0}
    states = [initial]
    edges = []
    dist = [0]
    final = set()
    truncated = set()
    queue = deque([0])
    while queue:
        sid = queue.popleft()
        state = states[sid]
        if is_final(state):
            final.add(sid)
        if depth is not None and dist[sid] >= depth:
            truncated.add(sid)
            continue
        for action, nxt in successors(state):
            tid = index.get(nxt)
            if tid is None:
                if len(states) >= state_cap:
                    raise ResourceLimit(f"state cap of {state_cap} exceeded")
                tid = len(states)
                index[nxt] = tid
                states.append(nxt)
                dist.append(dist[sid] + 1)
                queue.append(tid)
            edges.append((sid, action, tid))
    # Only states with moves left unexplored count as truncated.
    truncated = {s for s in truncated if successors(states[s])}
    return LTS(states, edges, final, truncated)
