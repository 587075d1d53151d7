# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Pages of a filtered complex
#
# A filtration `F_0 <= ... <= F_L = C` gives an exact couple.
# `D` is the homology of the quotients `C / F_t` and `E` is the homology of the
# layers `F_t / F_{t-1}`. Deriving the couple produces the pages `E_2, E_3, ...`.

# %%
from specseq.builders import (
    CwComplexSpec,
    couple_from_tower,
    cw_library,
    reindex_cohomological,
    skeletal_filtration,
    z4_extension_filtration,
)
from specseq.couple import derived_sequence, differential, infinity_page, validate_couple
from specseq.graded import nonzero_indices

# %% [markdown]
# ## RP^3 with its skeletal filtration
#
# The attaching map of the 2-cell has degree 2. It shows up as the only
# nonzero `d_2`.

# %%
F = skeletal_filtration(cw_library(CwComplexSpec("rp", 3)))
tc = couple_from_tower(F)
print("exact couple:", validate_couple(tc.couple) == [])

for Cr in derived_sequence(tc.couple, 4):
    P = reindex_cohomological(Cr)
    d = differential(P)
    groups = {x: str(G.canonical) for x, G in sorted(P.E.groups.items()) if not G.is_trivial}
    print(f"E_{Cr.r}", groups)
    for x in nonzero_indices(d):
        print(f"   d_{Cr.r}: {x} -> {d.degree(x)}  {d.maps[x].matrix.tolist()}")

# %%
Einf = reindex_cohomological(infinity_page(tc.couple, tc.bound))
print("E_inf", {x: str(G.canonical) for x, G in sorted(Einf.groups.items())})

# %% [markdown]
# ## Convergence certificates
#
# `converge(n)` returns the chain of surjections `H_n = C^0 ->> C^1 ->> ... ->> 0`.
# The kernels of these surjections are the `E_inf` entries on one diagonal.
# Each short exact sequence is re-checked before the certificate is returned.

# %%
for n in range(4):
    cert = tc.converge(n)
    print(f"H_{n} = {cert.target}:", " ->> ".join(map(str, cert.chain())))

# %% [markdown]
# ## An extension problem
#
# `0 -> Z --4--> Z -> 0` filtered with `F_0 = (Z --2--> Z)`. Both
# `E_inf` pieces are Z/2, but the group they build is Z/4, not Z/2 + Z/2.
# The certificate carries the extension maps, so it records which of the
# two it is.

# %%
cert = couple_from_tower(z4_extension_filtration()).converge(0)
print("pieces:", [str(p) for p in cert.nontrivial_pieces])
print("chain: ", " ->> ".join(map(str, cert.chain())))
for s in cert.sess:
    print(f"   k = {s.k.matrix.tolist()}, i = {s.i.matrix.tolist()}, exact: {s.verified}")
