# %% [markdown]
# # Store buffering on private and shared caches
#
# Two threads each write one variable and then read the other. On a
# sequentially consistent machine at least one read must see a 1. With
# private write-back caches both writes can sit dirty in their own cache
# while both reads miss and go to the store.

# %%
from reconfsim import corpus
from reconfsim.analysis import check_conformance, observable_language
from reconfsim.clustering import cmp, smp
from reconfsim.implementation import explore_impl
from reconfsim.reference import explore_ref
from reconfsim.report import Report, format_report, trace_rows

sb = corpus.load("sb")
print(sb)

# %%
ref = explore_ref(sb)
print(len(ref), "reference states")


def outcomes(lts):
    found = set()
    for word in observable_language(lts):
        reads = {(k[1], k[3]): k[2] for k in word if k[0] == "read"}
        found.add((reads[("y", 0)], reads[("x", 1)]))
    return sorted(found)


print("reference (r_y, r_x):", outcomes(ref))

# %% [markdown]
# Each core gets its own cache under `smp`; `cmp` puts both cores behind one.

# %%
for q in (smp(2), cmp(2)):
    lts = explore_impl(sb, q)
    print(q.notation(), len(lts), "states, outcomes", outcomes(lts))

# %% [markdown]
# The conformance check finds the (0, 0) run and replays it in full,
# system steps included (marked with `~`).

# %%
verdict = check_conformance(explore_impl(sb, smp(2)), ref)
r = Report("conform", verdicts={"conforms": verdict.conforms},
           traces={"counterexample": trace_rows(verdict.counterexample)})
print(format_report(r))

# %%
shared = explore_impl(sb, cmp(2))
print(check_conformance(shared, ref).conforms, check_conformance(ref, shared).conforms)
