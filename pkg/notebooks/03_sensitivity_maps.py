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
# # Sensitivity maps over sample phase and axis
#
# Maps at g = 2 with 10% loss, SU(1,1) phase fixed on the dark fringe, for each
# plate setting.  The text rendering marks sub-shot-noise points; `dualsu11 map
# --pgm` writes the same grids as graymaps.

# %%
import numpy as np

from dualsu11 import BellState, DetectionSpec, InterferometerConfig, Placement
from dualsu11.config import Axis
from dualsu11.sweep import SweepRequest, locate_minimum, run_map

axes = (Axis("sample_phase_phi_b", -np.pi, np.pi, 61), Axis("sample_axis_delta", 0.0, np.pi, 25))


def show(result, step=2):
    """Rows: delta; columns: phi_b.  '#' below -6 dB, '+' below 0 dB."""
    for j in range(0, len(result.delta), step):
        row = "".join("#" if v < -6 else "+" if v < 0 else "." for v in result.S2_db[:, j])
        print(f"delta={result.delta[j]:5.2f} |{row}|")


def cfg(bell, pol, **kw):
    return InterferometerConfig(
        gain_g=2.0, loss_intensity_l=0.1, seed={f"s{pol}": 1000.0}, bell=bell, detection=DetectionSpec(frozenset({f"i{pol}"})), **kw
    )


# %% [markdown]
# ## Phi+
#
# A sub-shot-noise band runs along `phi_b = 0` except where the sample axis is
# at pi/4 or 3pi/4.  H and V give the same map.

# %%
h = run_map(SweepRequest(cfg(BellState.PHI_PLUS, "H"), *axes))
v = run_map(SweepRequest(cfg(BellState.PHI_PLUS, "V"), *axes))
show(h)
print("max |H - V| =", np.max(np.abs(h.S2_db - v.S2_db)), "dB")
print("refined minimum (phi_b, delta, dB):", locate_minimum(h))

# %% [markdown]
# ## The other plate settings
#
# Phi- with V detection has isolated enhancement near `phi_b = +-pi`; the
# Psi settings reproduce Phi+ with the sample axis shifted by pi/8.

# %%
for bell, pol in ((BellState.PHI_MINUS, "V"), (BellState.PSI_PLUS, "H"), (BellState.PSI_MINUS, "H")):
    r = run_map(SweepRequest(cfg(bell, pol), *axes))
    print(f"\n{bell.value}, {pol} detection: grid minimum {r.argmin()[2]:.2f} dB")
    show(r, step=4)

# %% [markdown]
# ## Placement of the sample
#
# Before and after the plate pair give identical maps.

# %%
before = run_map(SweepRequest(cfg(BellState.PSI_PLUS, "V", placement=Placement.BEFORE), *axes))
after = run_map(SweepRequest(cfg(BellState.PSI_PLUS, "V", placement=Placement.AFTER), *axes))
print("max |before - after| =", np.max(np.abs(before.S2_db - after.S2_db)), "dB")
