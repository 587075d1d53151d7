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
# # Groups, presentations and homology
#
# Every group in the package is a cokernel `Z^n / im R` for an integer matrix `R`.
# Its canonical form comes from the Smith normal form of `R`.

# %%
import numpy as np

from specseq.builders import CwComplexSpec, cw_library
from specseq.chain import homology_at_position, is_exact
from specseq.fga import GroupHom, Presentation, Subquotient, image, int_matrix, kernel, smith_normal_form

# %% [markdown]
# ## Smith normal form
#
# `U M V = D` with `U`, `V` unimodular and each diagonal entry dividing the next.

# %%
M = int_matrix([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
U, D, V = smith_normal_form(M)
print(D)
assert np.array_equal(U @ M @ V, D)

# %%
P = Presentation(3, M)
print("Z^3 / im M =", P.canonical)

# %% [markdown]
# ## A map and its kernel
#
# Multiplication by 2 from Z/4 to Z/4 has kernel and image both Z/2.

# %%
Z4 = Presentation.cyclic(4)
two = GroupHom(Z4, Z4, [[2]])
print("kernel:", Subquotient(kernel(two)).canonical, " image:", Subquotient(image(two)).canonical)

# %% [markdown]
# ## Cellular homology
#
# The library ships cellular chain complexes for spheres, the torus and the
# real and complex projective spaces.

# %%
for name, n in [("sphere", 2), ("torus", 0), ("rp", 4), ("cp", 2)]:
    C = cw_library(CwComplexSpec(name, n))
    top = max(C.positions())
    print(f"{name}{n or ''}:", ", ".join(f"{k}: {homology_at_position(C, k)}" for k in range(top + 1)))

# %%
# cohomology of RP^4 moves the torsion up one degree
C = cw_library(CwComplexSpec("rp", 4), "cohomology")
print([str(homology_at_position(C, k)) for k in range(5)])

# %% [markdown]
# ## Exactness reports
#
# `is_exact` gives the homology defect at each position.

# %%
rep = is_exact(cw_library(CwComplexSpec("rp", 2)))
for e in rep.entries:
    print(e.position, "exact" if e.exact else f"defect {e.defect}")
