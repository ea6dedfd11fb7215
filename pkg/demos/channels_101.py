# %% [markdown]
# Splitting a stationary scattering state into its two channels.
# Rectangular barrier of height 2 and width 1, energy below the top.

# %%
import numpy as np

from scatter_channels import clip_channels, decompose, make_rectangular

barrier = make_rectangular(2.0, 1.0)
dec = decompose(barrier, 1.0)
print("T =", dec.T, " R =", dec.R)
print("|A_tr_in|^2 =", abs(dec.A_tr_in) ** 2, " |A_ref_in|^2 =", abs(dec.A_ref_in) ** 2)

# %%
# the reflection part vanishes at the midpoint and carries no current
x = np.linspace(-4, 5, 10)
print("Psi_ref(x_c) =", dec.psi_ref_solution.evaluate(barrier.x_c))
print("J_ref:", np.round(dec.psi_ref_solution.current(x), 15))
print("J_tr - J_full:", np.round(dec.psi_tr_solution.current(x) - dec.psi_full.current(x), 15))

# %%
tr, ref = clip_channels(dec)
for xi in (-2.0, 0.25, 0.75, 3.0):
    print(f"x={xi:5.2f}  |psi_tr|^2={abs(tr.evaluate(xi))**2:.5f}  |psi_ref|^2={abs(ref.evaluate(xi))**2:.5f}")
