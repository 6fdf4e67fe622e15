"""Sequentially consistent reference machine: one shared store, atomic accesses.

Threads interleave one instruction at a time. Locks are blocking
test-and-set cells kept apart from the data store.
"""

from __future__ import annotations

from dataclasses import dataclass

from ._fmap import FrozenMap
from .actions import LockAcq, LockRel, RefRead, RefWrite, Tau
from .lts import DEFAULT_STATE_CAP, LTS, explore
from .workload import Compute, Lock, Read, Unlock, Workload, Write

__all__ = [
    "RefState", "RaceWitness", "initial_ref_state", "ref_successors",
    "explore_ref", "is_racy_state", "detect_races", "thread_successor",
]


def _fmt_locks(locks):
    return ",".join(f"{l}={'-' if h is None else h}" for l, h in locks.items())


@dataclass(frozen=True)
class RefState:
    store: FrozenMap
    threads: tuple
    locks: FrozenMap = FrozenMap()

    @property
    def pcs(self) -> tuple:
        return tuple(t.pc for t in self.threads)

    def __str__(self):
        store = ",".join(f"{x}={v}" for x, v in self.store.items())
        s = f"S{{{store}}} pc{list(self.pcs)}"
        if self.locks:
            s += f" L{{{_fmt_locks(self.locks)}}}"
        return s

    def to_dict(self) -> dict:
        return {"store": dict(self.store), "pcs": list(self.pcs),
                "locks": dict(self.locks)}


@dataclass(frozen=True)
class RaceWitness:
    threads: tuple  # (i, j), i != j
    var: str
    kinds: tuple  # access kind of thread i, then of thread j

    def __post_init__(self):
        if self.threads[0] == self.threads[1]:
            raise ValueError("a race needs two distinct threads")
        if "write" not in self.kinds:
            raise ValueError("a race needs at least one write")

    def __str__(self):
        (i, j), (ki, kj) = self.threads, self.kinds
        return f"race on {self.var}: thread {i} {ki} / thread {j} {kj}"

    def to_dict(self) -> dict:
        return {"threads": list(self.threads), "var": self.var, "kinds": list(self.kinds)}


def initial_ref_state(w: Workload) -> RefState:
    return RefState(w.init_store, w.threads, FrozenMap({l: None for l in w.locks}))


def thread_successor(threads, locks, i):
    """Thread part of a step, shared by both machines.

    Returns ``(instruction, threads', locks')`` for thread ``i``, or None when
    it is terminated or blocked on a lock. Store and cache effects are left to
    the caller.
    """
    t = threads[i]
    ins = t.next_instruction
    if ins is None:
        return None
    if isinstance(ins, Lock):
        if locks[ins.lockvar] is not None:
            return None
        locks = locks.set(ins.lockvar, i)
    elif isinstance(ins, Unlock):
        if locks[ins.lockvar] != i:
            return None
        locks = locks.set(ins.lockvar, None)
    threads = threads[:i] + (t.advance(),) + threads[i + 1:]
    return ins, threads, locks


def ref_successors(s: RefState) -> list:
    """Enabled transitions, thread index ascending."""
    out = []
    for i, t in enumerate(s.threads):
        step = thread_successor(s.threads, s.locks, i)
        if step is None:
            continue
        ins, threads, locks = step
        store = s.store
        if isinstance(ins, Read):
            action = RefRead(ins.var, store[ins.var], i)
        elif isinstance(ins, Write):
            action = RefWrite(ins.var, ins.value, i)
            store = store.set(ins.var, ins.value)
        elif isinstance(ins, Compute):
            action = Tau(i)
        elif isinstance(ins, Lock):
            action = LockAcq(ins.lockvar, i)
        else:
            action = LockRel(ins.lockvar, i)
        out.append((action, RefState(store, threads, locks)))
    return out


def _ref_final(s: RefState) -> bool:
    return not ref_successors(s)


def explore_ref(w: Workload, depth=None, state_cap=DEFAULT_STATE_CAP) -> LTS:
    """Reachable reference LTS of ``w``; ``depth=None`` explores to completion."""
    lts = explore(initial_ref_state(w), ref_successors, _ref_final, depth, state_cap)
    lts.meta["semantics"] = "reference"
    return lts


def _access(ins):
    if isinstance(ins, Read):
        return ins.var, "read"
    if isinstance(ins, Write):
        return ins.var, "write"
    return None


def is_racy_state(s) -> RaceWitness | None:
    """First pair of co-enabled conflicting redexes, or None.

    Works on any state with a ``threads`` vector; lock operations never race.
    """
    redexes = [_access(t.next_instruction) for t in s.threads]
    for i, ri in enumerate(redexes):
        if ri is None:
            continue
        for j in range(i + 1, len(redexes)):
            rj = redexes[j]
            if rj is None or rj[0] != ri[0]:
                continue
            if "write" in (ri[1], rj[1]):
                return RaceWitness((i, j), ri[0], (ri[1], rj[1]))
    return None


def detect_races(w: Workload, depth=None, state_cap=DEFAULT_STATE_CAP) -> list:
    """Every reachable racy reference state (BFS order) with one witness each."""
    lts = explore_ref(w, depth, state_cap)
    found = []
    for s in lts.states:
        witness = is_racy_state(s)
        if witness is not None:
            found.append((s, witness))
    return found
