"""Clustered write-back machine with the update-based coherence protocol.

There is one cache per cluster; cores of the same cluster address the same
cache object, so aliasing holds by construction. Programmed transitions
touch only the issuing core's cache (or read the store on a miss); the
system transitions ``Evict``, ``CacheUpd`` and ``StoreUpd`` propagate values
nondeterministically. ``Unlock`` acts as a release fence: it is enabled only
once the releasing cluster's cache holds no dirty entry.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ._fmap import FrozenMap
from .actions import (CacheUpd, Evict, LocalRead, LocalWrite, LockAcq, LockRel,
                      PullRead, Reconf, StoreRead, StoreUpd, Tau)
from .clustering import Clustering
from .errors import IncoherentError
from .lts import DEFAULT_STATE_CAP, LTS, explore
from .reference import _fmt_locks, thread_successor
from .workload import Compute, Lock, Read, Unlock, Workload, Write

__all__ = [
    "CLEAN", "DIRTY", "CacheEntry", "ImplState", "ReconfEvent",
    "initial_impl_state", "impl_program_successors", "impl_system_successors",
    "impl_successors", "apply_reconf", "explore_impl", "incoherent_vars",
]

CLEAN = "clean"
DIRTY = "dirty"


@dataclass(frozen=True)
class CacheEntry:
    val: int
    state: str

    def __post_init__(self):
        if self.state not in (CLEAN, DIRTY):
            raise ValueError(f"cache entry state must be clean or dirty, not {self.state!r}")

    @property
    def dirty(self) -> bool:
        return self.state == DIRTY

    def __str__(self):
        return f"{self.val}{self.state[0]}"


@dataclass(frozen=True)
class ImplState:
    store: FrozenMap
    caches: tuple  # FrozenMap var -> CacheEntry, one per cluster
    clustering: Clustering
    threads: tuple
    locks: FrozenMap = FrozenMap()
    pending: int = 0  # index of the next reconfiguration event

    def cache_of(self, core: int) -> FrozenMap:
        return self.caches[self.clustering.cluster_of[core]]

    @property
    def pcs(self) -> tuple:
        return tuple(t.pc for t in self.threads)

    @property
    def steps(self) -> int:
        """Programmed transitions taken so far."""
        return sum(t.pc for t in self.threads)

    def __str__(self):
        store = ",".join(f"{x}={v}" for x, v in self.store.items())
        caches = " ".join(
            f"C{i}{{{','.join(f'{x}={e}' for x, e in c.items())}}}"
            for i, c in enumerate(self.caches))
        s = f"S{{{store}}} {caches} Q{self.clustering} pc{list(self.pcs)}"
        if self.locks:
            s += f" L{{{_fmt_locks(self.locks)}}}"
        if self.pending:
            s += f" #{self.pending}"
        return s

    def to_dict(self) -> dict:
        return {
            "store": dict(self.store),
            "caches": [{x: [e.val, e.state] for x, e in c.items()} for c in self.caches],
            "clustering": str(self.clustering),
            "pcs": list(self.pcs),
            "locks": dict(self.locks),
            "pending": self.pending,
        }


@dataclass(frozen=True)
class ReconfEvent:
    """Morph to ``target`` after ``at`` programmed steps, or anywhere if ``at`` is None."""

    target: Clustering
    at: int | None = None


def initial_impl_state(w: Workload, q: Clustering) -> ImplState:
    if q.num_cores != w.num_cores:
        raise ValueError(f"clustering has {q.num_cores} cores, workload {w.num_cores}")
    empty = FrozenMap()
    return ImplState(w.init_store, (empty,) * len(q), q, w.threads,
                     FrozenMap({l: None for l in w.locks}))


def _with_cache(caches, cid, cache):
    return caches[:cid] + (cache,) + caches[cid + 1:]


def impl_program_successors(s: ImplState) -> list:
    out = []
    owner = s.clustering.cluster_of
    for i in range(len(s.threads)):
        cid = owner[i]
        cache = s.caches[cid]
        ins = s.threads[i].next_instruction
        if isinstance(ins, Unlock) and any(e.dirty for e in cache.values()):
            continue  # release fence: flush first
        step = thread_successor(s.threads, s.locks, i)
        if step is None:
            continue
        ins, threads, locks = step
        base = replace(s, threads=threads, locks=locks)
        if isinstance(ins, Read):
            x = ins.var
            if x in cache:
                out.append((LocalRead(x, cache[x].val, i), base))
            else:
                v = s.store[x]
                out.append((StoreRead(x, v, i), base))
                pulled = _with_cache(s.caches, cid, cache.set(x, CacheEntry(v, CLEAN)))
                out.append((PullRead(x, v, i), replace(base, caches=pulled)))
        elif isinstance(ins, Write):
            written = _with_cache(s.caches, cid, cache.set(ins.var, CacheEntry(ins.value, DIRTY)))
            out.append((LocalWrite(ins.var, ins.value, i), replace(base, caches=written)))
        elif isinstance(ins, Compute):
            out.append((Tau(i), base))
        elif isinstance(ins, Lock):
            out.append((LockAcq(ins.lockvar, i), base))
        else:
            out.append((LockRel(ins.lockvar, i), base))
    return out


def impl_system_successors(s: ImplState) -> list:
    out = []
    caches = s.caches
    for i, ci in enumerate(caches):
        for x, e in ci.items():
            if not e.dirty:
                out.append((Evict(i, x), replace(s, caches=_with_cache(caches, i, ci.remove(x)))))
                continue
            fresh = CacheEntry(e.val, CLEAN)
            agreed = True
            for j, cj in enumerate(caches):
                if j == i or x not in cj:
                    continue
                if cj[x] != fresh:
                    agreed = False
                    out.append((CacheUpd(i, j, x),
                                replace(s, caches=_with_cache(caches, j, cj.set(x, fresh)))))
            if agreed:
                out.append((StoreUpd(i, x),
                            replace(s, store=s.store.set(x, e.val),
                                    caches=_with_cache(caches, i, ci.set(x, fresh)))))
    return out


def incoherent_vars(s: ImplState) -> list:
    """Variables whose dirty cached copies disagree."""
    seen = {}
    bad = set()
    for cache in s.caches:
        for x, e in cache.items():
            if e.dirty:
                if seen.setdefault(x, e.val) != e.val:
                    bad.add(x)
    return sorted(bad)


def _reduct_store(s: ImplState) -> FrozenMap:
    bad = incoherent_vars(s)
    if bad:
        raise IncoherentError(bad)
    store = dict(s.store)
    for cache in s.caches:
        for x, e in cache.items():
            if e.dirty:
                store[x] = e.val
    return FrozenMap(store)


def apply_reconf(s: ImplState, q_new: Clustering):
    """Write back, drop all caches and resume on ``q_new`` with cold caches."""
    if q_new.num_cores != s.clustering.num_cores:
        raise ValueError("reconfiguration must keep the number of cores")
    store = _reduct_store(s)
    action = Reconf(s.clustering, q_new)
    return action, replace(s, store=store, caches=(FrozenMap(),) * len(q_new), clustering=q_new)


def _reconf_due(s: ImplState, events, anywhere: bool):
    """(event, mandatory) for the pending event if it may fire in ``s``."""
    if s.pending >= len(events):
        return None, False
    ev = events[s.pending]
    if anywhere or ev.at is None:
        return ev, False
    if s.steps == ev.at:
        return ev, True
    return None, False


def impl_successors(s: ImplState, events=(), anywhere: bool = False) -> list:
    """Programmed, then system, then reconfiguration transitions.

    A step-triggered event holds back programmed transitions once the trigger
    is reached; system transitions stay enabled so an incoherent state can
    settle before the morph.
    """
    ev, mandatory = _reconf_due(s, events, anywhere)
    out = [] if mandatory else impl_program_successors(s)
    out += impl_system_successors(s)
    if ev is not None and not incoherent_vars(s):
        action, nxt = apply_reconf(s, ev.target)
        out.append((action, replace(nxt, pending=s.pending + 1)))
    return out


def _impl_final(s: ImplState) -> bool:
    return all(thread_successor(s.threads, s.locks, i) is None for i in range(len(s.threads)))


def explore_impl(w: Workload, q: Clustering, events=(), depth=None,
                 state_cap=DEFAULT_STATE_CAP, reconf_anywhere: bool = False) -> LTS:
    events = tuple(events)
    for ev in events:
        if ev.target.num_cores != w.num_cores:
            raise ValueError("reconfiguration target has the wrong number of cores")
    lts = explore(initial_impl_state(w, q),
                  lambda s: impl_successors(s, events, reconf_anywhere),
                  _impl_final, depth, state_cap)
    skipped = sum(1 for s in lts.states
                  if _reconf_due(s, events, reconf_anywhere)[0] is not None and incoherent_vars(s))
    lts.meta.update(semantics="implementation", clustering=str(q),
                    events=[[str(e.target), e.at] for e in events],
                    reconf_anywhere=reconf_anywhere, skipped_reconf=skipped)
    return lts
