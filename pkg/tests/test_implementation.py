import pytest

from reconfsim import corpus
from reconfsim._fmap import FrozenMap
from reconfsim.actions import (CacheUpd, Evict, LocalRead, LocalWrite, PullRead, Reconf,
                               StoreRead, StoreUpd, is_program, is_system)
from reconfsim.analysis import view
from reconfsim.clustering import all_clusterings, cmp, smp
from reconfsim.errors import IncoherentError
from reconfsim.implementation import (CLEAN, DIRTY, CacheEntry, ImplState, ReconfEvent,
                                      apply_reconf, explore_impl, impl_program_successors,
                                      impl_system_successors, initial_impl_state)
from reconfsim.workload import Lock, Read, Thread, Unlock, Workload, Write


def state(caches, store=None, q=None, programs=((), ())):
    store = FrozenMap(store or {"x": 0})
    q = q or smp(len(programs))
    threads = tuple(Thread(i, tuple(p)) for i, p in enumerate(programs))
    return ImplState(store, tuple(FrozenMap(c) for c in caches), q, threads)


def d(v):
    return CacheEntry(v, DIRTY)


def c(v):
    return CacheEntry(v, CLEAN)


def test_local_read_hit():
    s = state([{"x": d(7)}, {}], programs=([Read("x")], []))
    [(a, t)] = impl_program_successors(s)
    assert a == LocalRead("x", 7, 0)
    assert t.caches == s.caches and t.store == s.store


def test_read_miss_has_store_and_pull():
    s = state([{}, {}], programs=([Read("x")], []))
    succ = impl_program_successors(s)
    assert [a for a, _ in succ] == [StoreRead("x", 0, 0), PullRead("x", 0, 0)]
    assert succ[0][1].caches[0] == {}
    assert succ[1][1].caches[0] == {"x": c(0)}


def test_write_shared_cache_aliases():
    s = state([{}], q=cmp(2), programs=([Write("x", 1)], []))
    [(a, t)] = impl_program_successors(s)
    assert a == LocalWrite("x", 1, 0)
    assert t.cache_of(0)["x"] == t.cache_of(1)["x"] == d(1)


def test_system_successors_with_stale_copy():
    s = state([{"x": d(1)}, {"x": c(0)}])
    assert {a for a, _ in impl_system_successors(s)} == {CacheUpd(0, 1, "x"), Evict(1, "x")}


def test_store_update():
    s = state([{"x": d(1)}, {}])
    [(a, t)] = impl_system_successors(s)
    assert a == StoreUpd(0, "x")
    assert t.store["x"] == 1 and t.caches[0]["x"] == c(1)


def test_empty_caches_are_normal():
    assert impl_system_successors(state([{}, {}])) == []


def test_unlock_waits_for_flush():
    w = Workload.build({"x": 0}, [[Lock("l"), Write("x", 1), Unlock("l")]], ["l"])
    s = initial_impl_state(w, smp(1))
    for _ in range(2):
        [(_, s)] = impl_program_successors(s)
    assert impl_program_successors(s) == []
    [(_, s)] = impl_system_successors(s)
    assert [type(a).__name__ for a, _ in impl_program_successors(s)] == ["LockRel"]


def test_reconf_uses_reduct():
    s = state([{"x": d(1)}, {}])
    a, t = apply_reconf(s, cmp(2))
    assert a == Reconf(smp(2), cmp(2))
    assert t.store["x"] == 1 and t.caches == (FrozenMap(),)
    empty = state([{}, {}], store={"x": 3})
    _, t = apply_reconf(empty, cmp(2))
    assert t.store == empty.store and t.threads == empty.threads and t.clustering == cmp(2)
    with pytest.raises(IncoherentError):
        apply_reconf(state([{"x": d(1)}, {"x": d(2)}]), cmp(2))


def maximal_action_traces(lts, limit=6):
    out = []

    def go(s, tr):
        if s in lts.final:
            out.append(tr)
        if len(tr) < limit:
            for a, t in lts.out(s):
                go(t, tr + [a])

    go(lts.initial, [])
    return out


def test_write_read_traces_on_cmp1():
    w = Workload.build({"x": 0}, [[Write("x", 1), Read("x")]])
    traces = maximal_action_traces(explore_impl(w, cmp(1), depth=6))
    assert [LocalWrite("x", 1, 0), LocalRead("x", 1, 0)] in traces
    assert [LocalWrite("x", 1, 0), StoreUpd(0, "x"), Evict(0, "x"), StoreRead("x", 1, 0)] in traces


def test_sb_outcomes_by_clustering():
    sb = corpus.load("sb")

    def outcomes(q):
        found = set()
        for tr in maximal_action_traces(explore_impl(sb, q), limit=20):
            reads = {(a.var, a.thread): a.value for a in tr
                     if isinstance(a, (LocalRead, StoreRead, PullRead))}
            found.add((reads[("y", 0)], reads[("x", 1)]))
        return found

    assert (0, 0) in outcomes(smp(2))
    assert (0, 0) not in outcomes(cmp(2))


def test_view():
    s = state([{"x": d(9)}, {}])
    assert (view(s, 0, "x"), view(s, 1, "x")) == (9, 0)
    shared = state([{"x": c(3)}], q=cmp(2))
    assert view(shared, 0, "x") == view(shared, 1, "x") == 3
    assert view(state([{}, {}], store={"x": 4}), 1, "x") == 4


@pytest.mark.parametrize("name", corpus.NAMES)
def test_transition_invariants(name):
    w = corpus.load(name)
    for q in all_clusterings(w.num_cores):
        lts = explore_impl(w, q)
        for sid, a, tid in lts.edges:
            s, t = lts.states[sid], lts.states[tid]
            dirty = lambda st: sum(e.dirty for ch in st.caches for e in ch.values())
            if isinstance(a, Evict):
                assert not s.caches[a.cache][a.var].dirty
            if isinstance(a, StoreUpd):
                # no other cache holds a different copy
                v = s.caches[a.cache][a.var].val
                assert all(ch[a.var] == c(v) for j, ch in enumerate(s.caches)
                           if j != a.cache and a.var in ch)
            if is_system(a):
                assert dirty(t) <= dirty(s)
                assert t.pcs == s.pcs
            if is_program(a):
                assert sum(t.pcs) == sum(s.pcs) + 1
                assert t.store == s.store


def test_step_triggered_reconf():
    w = corpus.load("single")
    lts = explore_impl(w, cmp(1), [ReconfEvent(cmp(1), at=1)])
    reconfs = [(lts.states[s], lts.states[t]) for s, a, t in lts.edges if isinstance(a, Reconf)]
    assert reconfs
    for s, t in reconfs:
        assert s.steps == 1 and t.pending == 1
        assert t.caches == (FrozenMap(),) and t.store["x"] == 1
    # programmed steps wait at the trigger
    for sid, st in enumerate(lts.states):
        if st.pending == 0 and st.steps == 1:
            assert all(not is_program(a) for a, _ in lts.out(sid))
    assert all(st.pending == 1 for i, st in enumerate(lts.states) if i in lts.final)


def test_reconf_core_count_checked():
    with pytest.raises(ValueError):
        explore_impl(corpus.load("single"), cmp(1), [ReconfEvent(cmp(2), 0)])
    with pytest.raises(ValueError):
        initial_impl_state(corpus.load("sb"), cmp(3))
