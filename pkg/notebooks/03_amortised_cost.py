# %% [markdown]
# # Paying for write-back with cache hits
#
# A dirty write costs kappa now and delta later when it reaches the store.
# The amortised comparison treats this as a game: the cheaper side banks
# credit on every cheap step and spends it on flushes.

# %%
from reconfsim import corpus
from reconfsim.clustering import cmp
from reconfsim.cost import CostParams, amortised_compare, breakeven_report
from reconfsim.implementation import explore_impl
from reconfsim.reference import explore_ref

w = corpus.load("single")
print(w)
impl, ref = explore_impl(w, cmp(1)), explore_ref(w)

# %% [markdown]
# Forward: can the cached machine keep up with the reference given a little
# starting credit? The challenger's best play flushes right after the write:
# three units banked, four spent.

# %%
print(amortised_compare(impl, ref))
print(amortised_compare(ref, impl))

# %% [markdown]
# The required credit depends on the gap between store and cache latency.

# %%
for delta in (2, 3, 4, 8):
    p = CostParams(kappa=1, delta=delta)
    print(delta, amortised_compare(impl, ref, p), amortised_compare(ref, impl, p))

# %% [markdown]
# Per trace, the breakeven report counts how many cache hits are needed to
# cover the flushes of m deferred writes.

# %%
from reconfsim.actions import Evict, LocalRead, LocalWrite, StoreUpd

trace = [LocalWrite("x", 1, 0)] + [LocalRead("x", 1, 0)] * 5 + [StoreUpd(0, "x"), Evict(0, "x")]
for k, v in breakeven_report(trace).to_dict().items():
    print(f"{k:18} {v}")
