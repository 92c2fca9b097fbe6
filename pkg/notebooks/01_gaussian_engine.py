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
# # The Gaussian engine
#
# Every state is stored in transfer form: each output annihilation operator is
# a linear combination of input annihilation and creation operators plus a
# classical displacement, `a = A v + B v^dag + d`.  Losses append vacuum input
# columns.  Photon-number moments follow from `N = B* B^T`, `M = A B^T` and `d`.

# %%
import numpy as np

from dualsu11 import elements as el
from dualsu11.gaussian import apply_bogoliubov, apply_loss, displace, photon_statistics, second_moments, vacuum_state
from dualsu11.modes import ModeIndex, Polarization

np.set_printoptions(precision=4, suppress=True)

# %% [markdown]
# ## A two-mode squeezer
#
# One OPA on the H pair: signal and idler each see a thermal state with
# `sinh^2 g` photons, and the pair is correlated through `M[sH, iH]`.

# %%
g = 1.0
U, V = el.make_opa(el.OpaParams(g, Polarization.H))
state = apply_bogoliubov(vacuum_state(), U, V)
mom = second_moments(state)
print("diag N:", np.diag(mom.N).real, " sinh^2 g =", np.sinh(g) ** 2)
print("M[sH, iH] =", mom.M[0, 2].real, " cosh g sinh g =", np.cosh(g) * np.sinh(g))
for m in ModeIndex:
    print(m.label, photon_statistics(state, [m]))

# %% [markdown]
# ## Seeding and loss
#
# A coherent seed on sH is amplified into the idler.  A beam splitter to an
# ancilla with transmission t scales the idler occupation by t^2.

# %%
seeded = apply_bogoliubov(displace(vacuum_state(), "sH", 3.0), U, V)
lossy = apply_loss(seeded, ModeIndex.IH, np.sqrt(0.9))
print("idler mean, lossless:", photon_statistics(seeded, ["iH"])[0])
print("idler mean, 10% loss:", photon_statistics(lossy, ["iH"])[0])
print("transfer matrix shape after loss:", lossy.A.shape)

# %% [markdown]
# ## Invariants
#
# The commutators survive every element: `A A^dag - B B^dag = I` and
# `A B^T` symmetric.

# %%
print("commutator residual:", lossy.commutator_residual())
print("symmetry residual:  ", lossy.symmetry_residual())
print("symplectic eigenvalues:", second_moments(lossy).symplectic_eigenvalues())

# %% [markdown]
# ## The inverse squeezer
#
# A second OPA with the opposite sign undoes the first exactly: this is the
# SU(1,1) dark fringe.

# %%
U2, V2 = el.make_opa(el.OpaParams(g, Polarization.H, sign=-1))
back = apply_bogoliubov(state, U2, V2)
print("max |A - I| =", np.max(np.abs(back.A - np.eye(4))), " max |B| =", np.max(np.abs(back.B)))
