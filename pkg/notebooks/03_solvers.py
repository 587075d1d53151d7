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
# # Solving for unknown groups
#
# There are two deduction engines.
#
# `les_solve` propagates zeros through a long exact sequence. An entry flanked by
# zeros is isomorphic to its neighbour, and an entry between two zeros is zero.
#
# The page solver works on two-row and two-column `E_2` pages where only one
# differential can be nonzero. It uses the prescribed `E_inf` to decide when
# that differential must be an isomorphism.

# %%
from specseq.builders import CwComplexSpec, cw_library, hopf_les_template
from specseq.chain import homology_at_position, les_solve, realize_les, is_exact
from specseq.solver import render, two_column_solve, two_line_solve

# %% [markdown]
# ## The Hopf fibration
#
# Feeding in the homotopy groups of the circle and the low ones of `S^3` gives
# `pi_2(S^2)`. It also identifies each higher `pi_n(S^2)` with `pi_n(S^3)`,
# which stays a symbol.

# %%
T = hopf_les_template(6)
res = les_solve(T)
for name in T.unknowns():
    print(f"{name} = {res[name]}")

# %%
# the answer is realised by an explicit exact sequence
H, certified = realize_les(T, res)
print("realised sequence exact:", is_exact(H, certified).ok)

# %% [markdown]
# ## Circle bundles over a contractible space
#
# A two-row page with rows `0` and `1` and `E_inf = Z` at the origin forces
# every `d_2` to be an isomorphism. That gives Z in every even degree.

# %%
groups = two_line_solve(1, 10)
print(render(groups))
CP = cw_library(CwComplexSpec("cp", 3), "cohomology")
print(render([homology_at_position(CP, p) for p in range(7)]), " <- CP^3")

# %% [markdown]
# ## Loop spaces of spheres
#
# Two columns at `p = 0` and `p = n` give Z at the multiples of `n - 1`.

# %%
for n in (2, 3, 4):
    print(n, render(two_column_solve(n, 9)))
