# %% [markdown]
# # Reconfiguring a race-free workload
#
# W2 guards its write and read of `x` with a lock, and unlocking waits until
# the releasing cache is flushed. Morphing the machine between clusterings
# writes back through the reduct, so every observable run should still be
# a reference run.

# %%
from reconfsim import corpus
from reconfsim.analysis import check_conformance, is_coherent, is_drf, reduct
from reconfsim.actions import Reconf
from reconfsim.clustering import all_clusterings, cmp, smp
from reconfsim.implementation import ReconfEvent, explore_impl
from reconfsim.reference import explore_ref

w2 = corpus.load("w2")
print(is_drf(w2))
ref = explore_ref(w2)

# %%
for q in all_clusterings(2):
    lts = explore_impl(w2, q)
    print(q.notation(), len(lts), check_conformance(lts, ref).conforms)

# %% [markdown]
# With `reconf_anywhere` the morph may fire in any coherent state. Every
# Reconf edge should leave the reduct unchanged.

# %%
for src, dst in ((smp(2), cmp(2)), (cmp(2), smp(2))):
    lts = explore_impl(w2, src, [ReconfEvent(dst)], reconf_anywhere=True)
    edges = [(s, t) for s, a, t in lts.edges if isinstance(a, Reconf)]
    same = all(reduct(lts.states[s]) == reduct(lts.states[t]) for s, t in edges)
    coherent = all(is_coherent(s) for s in lts.states)
    print(f"{src.notation()} -> {dst.notation()}: {len(edges)} morph points, "
          f"reducts kept {same}, all coherent {coherent}, "
          f"conforms {check_conformance(lts, ref).conforms}")

# %% [markdown]
# A step trigger instead holds programmed steps back after `at` steps until
# the morph happens; system steps may still run to settle the caches.

# %%
lts = explore_impl(w2, smp(2), [ReconfEvent(cmp(2), at=2)])
print(len(lts), "states;", lts.meta["skipped_reconf"], "incoherent trigger states")
