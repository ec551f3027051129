# %% [markdown]
# # Transmission through a sech^2 barrier
#
# Three routes to T(E) for V(x) = U0 sech^2(beta x) with m = hbar = beta = 1:
# the closed form from the hypergeometric connection formula, a slab
# transfer matrix on [-14, 14], and the two-line WKB-type formula
# 1/T = 1/sqrt(A) - sqrt(A).  The first two are exact up to discretisation
# and should agree; the third is only measured against them.

# %%
import numpy as np

from rosenmorse import model, numerics
from rosenmorse.model import PotentialParams
from rosenmorse.numerics import GridSpec

p = PotentialParams(U0=2.0)
energies = np.linspace(0.2, 8.0, 50)
grid = GridSpec(-14.0, 14.0, 8192)

# %%
exact = [model.transmission_connection(p, E) for E in energies]
slab = numerics.transfer_matrix_transmission(lambda x: p.potential(x), p, energies, grid)
gap = max(abs(a.T - b.T) + abs(a.R - b.R) for a, b in zip(exact, slab))
print(f"closed form vs transfer matrix: {gap:.2e}")

# %% [markdown]
# The WKB-type formula, with the sign of sqrt(A) carried continuously along
# the sweep.  Deep below the barrier top it tracks the exact |T|^2 to a few
# percent; above the top its |T|^2 decays towards zero while the exact value
# goes to one, so the formula should not be read as a transmission
# coefficient there.

# %%
wkb, flips = model.transmission_wkb_sweep(p, energies)
for E, w, e in list(zip(energies, wkb, exact))[::7]:
    where = "below" if E < p.U0 else "above"
    print(f"E={E:5.2f} ({where})  |T|^2 exact {abs(e.T)**2:.4f}  WKB {abs(w.T)**2:.4f}")

# %% [markdown]
# The phase of T rises through the resonance region, but only by about
# 1.4 rad: the pole at E = 1.75 - 0.97i is far enough from the axis that
# the textbook jump of pi never develops.

# %%
E_R, gamma = 1.75, 2 * 0.968246
window = np.linspace(E_R - gamma / 2, E_R + gamma / 2, 41)
delta = model.phase_shift_sweep(p, window)
print(f"phase rise across E_R -+ Gamma/2: {delta[-1] - delta[0]:.3f} rad")
