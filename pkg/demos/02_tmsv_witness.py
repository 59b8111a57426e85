"""
Checking complete positivity with a two-mode squeezed probe
===========================================================

Feed half of a two-mode squeezed vacuum through a one-mode channel and take
the Schur complement of the untouched half. The result does not depend on the
squeezing and coincides with the channel's own CP matrix. For a small step of
a generator it reproduces, after dividing by dt, the generator CP matrix.
"""

# %%
import numpy as np

from gausscp import attenuator, bayes_reverse_generator, nogo_lambda_min, squeezed_thermal_cov, tmsv_schur_witness
from gausscp.generator import hhw_matrix, infinitesimal_witness

fwd = attenuator(1.0)
step = fwd.step_channel(0.05)

# %%
mus = [1.1, 1.5, 2.0, 5.0, 20.0]
mats = [tmsv_schur_witness(step, mu) for mu in mus]
spread = max(np.abs(a - b).max() for a in mats for b in mats)
print(f"spread over mu: {spread:.2e}")
print(f"distance to the closed form: {max(np.abs(m - hhw_matrix(step)).max() for m in mats):.2e}")

# %% [markdown]
# Now the reversed generator at a squeezed reference beyond the threshold.

# %%
bayes = bayes_reverse_generator(fwd, squeezed_thermal_cov((1.2, 0.6)))
for dt in [1e-2, 1e-3, 1e-4, 1e-6]:
    coarse, rich = infinitesimal_witness(bayes, dt)
    print(f"dt={dt:.0e}  min eig / dt = {coarse:+.8f}  Richardson = {rich:+.8f}")
print(f"closed form lambda_min = {nogo_lambda_min(1.0, (1.2, 0.6)):+.8f}")
