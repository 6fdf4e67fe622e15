import pytest

import oracles
from reconfsim import corpus
from reconfsim._fmap import FrozenMap
from reconfsim.actions import (Evict, LocalRead, LocalWrite, LockAcq, RefRead, RefWrite,
                               StoreRead, StoreUpd, Tau)
from reconfsim.analysis import (check_conformance, functionally_equivalent, is_coherent,
                                is_consistent, is_drf, observable_language,
                                observable_projection, realise_observables, reduct,
                                system_normal_forms)
from reconfsim.clustering import all_clusterings, cmp, smp
from reconfsim.errors import IncoherentError, ResourceLimit
from reconfsim.implementation import CLEAN, DIRTY, CacheEntry, ImplState, explore_impl
from reconfsim.reference import explore_ref


def state(caches, store=None):
    return ImplState(FrozenMap(store or {"x": 0}), tuple(FrozenMap(c) for c in caches),
                     smp(len(caches)), ())


D1, D2, C0 = CacheEntry(1, DIRTY), CacheEntry(2, DIRTY), CacheEntry(0, CLEAN)


def test_coherence_examples():
    assert is_coherent(state([{}, {"x": C0}]))
    assert is_coherent(state([{"x": D1}, {"x": D1}]))
    assert not is_coherent(state([{"x": D1}, {"x": D2}]))
    assert is_coherent(state([{"x": D1}, {"x": D2}], {"x": 0, "y": 0}), report=True) == \
        {"x": False, "y": True}


def test_consistency_examples():
    assert is_consistent(state([{}, {}]))
    assert is_consistent(state([{"x": C0}, {"x": C0}]))
    assert not is_consistent(state([{"x": D1}, {}]))
    assert not is_consistent(state([{"x": CacheEntry(5, CLEAN)}, {}]))


@pytest.mark.parametrize("caches, expected", [
    ([{}, {}], 0),
    ([{"x": D1}, {}], 1),
    ([{"x": CacheEntry(5, CLEAN)}, {}], 0),
    ([{"x": D1}, {"x": C0}], 1),
])
def test_reduct_matches_normal_forms(caches, expected):
    s = state(caches)
    assert reduct(s).store["x"] == expected
    normals, acyclic = system_normal_forms(s)
    assert acyclic
    assert {n.store["x"] for n in normals} == {expected}


def test_reduct_incoherent():
    with pytest.raises(IncoherentError) as exc:
        reduct(state([{"x": D1}, {"x": D2}]))
    assert exc.value.variables == ("x",)


def test_drf():
    assert is_drf(corpus.load("w2"))
    assert is_drf(corpus.load("single"), cmp(1))
    res = is_drf(corpus.load("w1"))
    assert not res and res.witness.var == "x"


def test_projection():
    assert observable_projection([Tau(0), StoreUpd(0, "x"), Evict(0, "x")]) == []
    tr = [LocalWrite("x", 1, 0), StoreUpd(0, "x"), StoreRead("x", 1, 1)]
    assert observable_projection(tr) == [tr[0], tr[2]]
    plain = [LocalRead("x", 1, 0), RefWrite("y", 2, 1)]
    assert observable_projection(plain) == plain
    assert observable_projection([LockAcq("l", 0)], locks_observable=False) == []


def test_functional_equivalence():
    assert functionally_equivalent(LocalRead("x", 1, 0), RefRead("x", 1, 0))
    assert not functionally_equivalent(LocalWrite("x", 1, 0), RefWrite("x", 1, 1))
    assert functionally_equivalent(Evict(0, "x"), Tau(1))


def test_conformance_reflexive(corpus_name):
    ref = explore_ref(corpus.load(corpus_name))
    v = check_conformance(ref, ref)
    assert v.conforms and v.counterexample is None and v.checked_traces > 0


def test_language_matches_path_oracle(corpus_name):
    w = corpus.load(corpus_name)
    for q in all_clusterings(w.num_cores):
        lts = explore_impl(w, q)
        assert observable_language(lts) == oracles.lts_observable_traces(lts)


def test_counterexample_is_a_real_path():
    sb = corpus.load("sb")
    lts = explore_impl(sb, smp(2))
    v = check_conformance(lts, explore_ref(sb))
    sid = lts.initial
    for a, cost in v.counterexample:
        sid = next(t for b, t in lts.out(sid) if b == a)
    assert sid in lts.final
    assert realise_observables(lts, ("nonsense",)) is None


def test_truncated_lts_rejected():
    lts = explore_ref(corpus.load("sb"), depth=1)
    with pytest.raises(ValueError):
        observable_language(lts)


def test_trace_cap():
    with pytest.raises(ResourceLimit):
        observable_language(explore_impl(corpus.load("mp3"), smp(3)), trace_cap=3)
