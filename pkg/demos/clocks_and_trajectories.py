# %% [markdown]
# Channel times at a few energies, then the Bohmian critical starting point.
# The trajectory part takes under a minute.

# %%
from scatter_channels import make_rectangular
from scatter_channels.times import times_row
from scatter_channels import bohm

barrier = make_rectangular(2.0, 1.0)
for E in (0.5, 1.0, 3.0):
    row = times_row(barrier, E)
    print(f"E={E}: dwell tr/ref/full = {row['dwell_tr']:.4f} {row['dwell_ref']:.4f} {row['dwell_full']:.4f}"
          f"   larmor tr/ref = {row['larmor_tr']:.4f} {row['larmor_ref']:.4f}"
          f"   kink = {row['kink']:.4f}")

# %%
packets = bohm.reference_packets(barrier)
crit = bohm.find_critical_point(packets, rtol=1e-6, atol=1e-6)
print("x* =", crit.x_star, " tail mass =", crit.tail_mass, " T =", crit.transmission)
