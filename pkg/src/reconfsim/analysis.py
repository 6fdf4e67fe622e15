"""Views, coherence, reducts, race freedom and trace conformance."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

from .actions import observable_key
from .errors import ResourceLimit
from .implementation import (ImplState, _reduct_store, impl_system_successors,
                             incoherent_vars, initial_impl_state)
from .lts import DEFAULT_STATE_CAP, LTS
from .reference import RaceWitness, RefState, detect_races

__all__ = [
    "view", "is_coherent", "is_consistent", "reduct", "system_normal_forms",
    "DrfResult", "is_drf", "observable_projection", "functionally_equivalent",
    "observable_language", "ConformanceVerdict", "check_conformance",
    "realise_observables",
]

DEFAULT_TRACE_CAP = 10**5


def view(s: ImplState, i: int, x: str) -> int:
    """Value of ``x`` as seen by core ``i``: its cluster's cached copy, else the store."""
    if x not in s.store:
        raise KeyError(f"unknown variable {x!r}")
    cache = s.cache_of(i)
    return cache[x].val if x in cache else s.store[x]


def is_coherent(s: ImplState, report: bool = False):
    if report:
        bad = set(incoherent_vars(s))
        return {x: x not in bad for x in s.store}
    return not incoherent_vars(s)


def is_consistent(s: ImplState, report: bool = False):
    ok = {x: True for x in s.store}
    for cache in s.caches:
        for x, e in cache.items():
            if e.dirty or e.val != s.store[x]:
                ok[x] = False
    return ok if report else all(ok.values())


def reduct(s: ImplState) -> RefState:
    """The reference state a coherent implementation state settles to.

    Raises IncoherentError when dirty copies of some variable disagree.
    """
    return RefState(_reduct_store(s), s.threads, s.locks)


def system_normal_forms(s: ImplState, memo: dict | None = None):
    """Exhaustive system-only exploration from ``s``.

    Returns ``(normal_states, acyclic)``: the set of states without enabled
    system transitions reachable from ``s``, and whether the system-only graph
    below ``s`` is free of cycles (every maximal path is then finite). Pass
    the same ``memo`` across calls to share work.
    """
    memo = {} if memo is None else memo
    on_stack = set()

    def visit(state):
        if state in memo:
            return memo[state]
        if state in on_stack:
            return frozenset(), False
        on_stack.add(state)
        succ = impl_system_successors(state)
        if not succ:
            result = (frozenset([state]), True)
        else:
            normals = set()
            acyclic = True
            for _, nxt in succ:
                n, a = visit(nxt)
                normals |= n
                acyclic = acyclic and a
            result = (frozenset(normals), acyclic)
        on_stack.discard(state)
        # Results computed while a cycle is open are partial; do not cache them.
        if result[1] or not on_stack:
            memo[state] = result
        return result

    return visit(s)


class DrfResult(NamedTuple):
    drf: bool
    witness: RaceWitness | None = None
    state: RefState | None = None

    def __bool__(self):
        return self.drf


def is_drf(w, q_start=None, depth=None, state_cap=DEFAULT_STATE_CAP) -> DrfResult:
    """Race freedom of ``w``, decided on the reference machine.

    When ``q_start`` is given the search starts from the reduct of the cold
    implementation state on that clustering, which is the workload's own
    initial reference state.
    """
    if q_start is not None:
        start = reduct(initial_impl_state(w, q_start))
        assert start.store == w.init_store
    races = detect_races(w, depth, state_cap)
    if not races:
        return DrfResult(True)
    state, witness = races[0]
    return DrfResult(False, witness, state)


def observable_projection(trace, locks_observable: bool = True) -> list:
    """Drop unobservable steps. Accepts bare actions or ``(action, cost)`` pairs."""
    out = []
    for item in trace:
        a = item[0] if isinstance(item, tuple) else item
        if observable_key(a, locks_observable) is not None:
            out.append(item)
    return out


def functionally_equivalent(a, b, locks_observable: bool = True) -> bool:
    return observable_key(a, locks_observable) == observable_key(b, locks_observable)


def _check_complete(lts: LTS):
    if lts.truncated:
        raise ValueError("LTS was cut off by a depth bound; explore it to completion first")


def observable_language(lts: LTS, locks_observable: bool = True,
                        trace_cap: int = DEFAULT_TRACE_CAP) -> frozenset:
    """Observable contents of all maximal traces, as tuples of observable keys.

    A trace is maximal when it ends in a final state (every thread terminated
    or blocked). Unobservable steps, including cycles of system transitions,
    are skipped.
    """
    _check_complete(lts)
    keys = {}
    memo = {}

    def key(a):
        k = keys.get(a, keys)
        if k is keys:
            k = keys[a] = observable_key(a, locks_observable)
        return k

    def closure(sid):
        seen = {sid}
        queue = deque([sid])
        while queue:
            s = queue.popleft()
            for a, t in lts.out(s):
                if key(a) is None and t not in seen:
                    seen.add(t)
                    queue.append(t)
        return seen

    def lang(sid):
        if sid in memo:
            return memo[sid]
        words = set()
        for s in closure(sid):
            if s in lts.final:
                words.add(())
            for a, t in lts.out(s):
                k = key(a)
                if k is not None:
                    words.update((k,) + w for w in lang(t))
            if len(words) > trace_cap:
                raise ResourceLimit(f"more than {trace_cap} observable traces")
        memo[sid] = frozenset(words)
        return memo[sid]

    return lang(lts.initial)


def realise_observables(lts: LTS, word, locks_observable: bool = True) -> list | None:
    """A full action path to a final state whose observable content is ``word``."""
    word = tuple(word)
    start = (lts.initial, 0)
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        sid, pos = node
        if pos == len(word) and sid in lts.final:
            path = []
            while parent[node] is not None:
                node, a = parent[node]
                path.append(a)
            return path[::-1]
        for a, t in lts.out(sid):
            k = observable_key(a, locks_observable)
            if k is None:
                nxt = (t, pos)
            elif pos < len(word) and k == word[pos]:
                nxt = (t, pos + 1)
            else:
                continue
            if nxt not in parent:
                parent[nxt] = (node, a)
                queue.append(nxt)
    return None


@dataclass
class ConformanceVerdict:
    conforms: bool
    counterexample: list | None = None  # [(action, cost)] in the checked LTS
    checked_traces: int = 0
    observable: tuple | None = None  # offending observable content

    def __post_init__(self):
        if self.conforms != (self.counterexample is None):
            raise ValueError("a counterexample is present exactly when conformance fails")


def check_conformance(impl_lts: LTS, ref_lts: LTS, params=None, locks_observable: bool = True,
                      trace_cap: int = DEFAULT_TRACE_CAP) -> ConformanceVerdict:
    """Is every maximal observable trace of ``impl_lts`` one of ``ref_lts``?

    Either argument may be any LTS over the shared action vocabulary, so the
    same check covers implementation against reference, coarse against fine
    clustering, and (called twice) trace equivalence.
    """
    from .cost import CostParams, action_cost

    params = params or CostParams()
    impl_words = observable_language(impl_lts, locks_observable, trace_cap)
    ref_words = observable_language(ref_lts, locks_observable, trace_cap)
    extra = sorted(impl_words - ref_words)
    if not extra:
        return ConformanceVerdict(True, None, len(impl_words))
    word = extra[0]
    path = realise_observables(impl_lts, word, locks_observable)
    trace = [(a, action_cost(a, params)) for a in path]
    return ConformanceVerdict(False, trace, len(impl_words), word)
