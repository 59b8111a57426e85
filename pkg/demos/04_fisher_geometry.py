"""
Bures versus Kubo-Mori on displacements, checked in Fock space
==============================================================

For a thermal mode both monotone metrics are diagonal on displacement
tangents. We build the state as an explicit density matrix, differentiate it
along Q and compare the Petz sums with the closed forms and their ratio
``c_geom(nu)``.
"""

# %%
import math

from gausscp import c_geom, gaussian_fidelity, squeezed_thermal_cov
from gausscp.fock import displacement_tangent, fock_fidelity, fock_gaussian_state, fock_monotone_metric

# %%
print(f"{'nu':>4} {'Bures':>10} {'1/(2nu)':>10} {'BKM':>10} {'closed':>10} {'ratio':>10} {'c_geom':>10}")
for nu in [1.05, 1.5, 2.0, 3.0, 4.0, 10.0]:
    state = fock_gaussian_state((nu, 0.0), 128 if nu < 5 else 512)
    x = displacement_tangent(state)
    bures = fock_monotone_metric(state, x, "bures")
    bkm = fock_monotone_metric(state, x, "bkm")
    print(f"{nu:4g} {bures:10.6f} {1 / (2 * nu):10.6f} {bkm:10.6f} "
          f"{math.log((nu + 1) / (nu - 1)):10.6f} {bures / bkm:10.6f} {c_geom(nu):10.6f}")

# %% [markdown]
# The ratio tends to 1/4 for hot states and to 0 near purity.

# %%
for nu in [1 + 1e-6, 1 + 1e-3, 1e3, 1e6]:
    print(f"c_geom({nu:.7g}) = {c_geom(nu):.8f}")

# %% [markdown]
# The same Fock states give an independent check of the covariance fidelity.

# %%
a, b = (2.0, 0.5), (1.5, 0.9)
f_fock = fock_fidelity(fock_gaussian_state(a, 128), fock_gaussian_state(b, 128))
f_cov = gaussian_fidelity(squeezed_thermal_cov(a), squeezed_thermal_cov(b)).f
print(f"Fock {f_fock:.10f}  covariance {f_cov:.10f}")
