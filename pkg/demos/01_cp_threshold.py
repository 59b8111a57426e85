"""
Where the score-lifted reverse generator stops being completely positive
=========================================================================

The quantum-limited attenuator relaxes every one-mode state to vacuum. Its
classical time reversal adds the score drift ``D gamma^{-1}`` to the forward
drift. Here we assemble the generator CP matrix of that reversed generator
for squeezed thermal references and watch its smallest eigenvalue change sign.
"""

# %%
import math

import numpy as np

from gausscp import bayes_cp_matrix, nogo_eigenvalues, nogo_lambda_min

gamma = 1.0

# %% [markdown]
# A thermal reference with nu = 2 is harmless; squeezing it enough is not.

# %%
for nu, r in [(2.0, 0.0), (2.0, 0.5), (1.2, 0.6), (1.5, 0.8)]:
    cp = bayes_cp_matrix(gamma, (nu, r))
    print(f"nu={nu:<4} r={r:<4} eigenvalues={np.round(cp.eigenvalues, 6)}  "
          f"closed form={np.round(sorted(nogo_eigenvalues(gamma, (nu, r))), 6)}  CP={cp.is_cp}")

# %% [markdown]
# The sign of lambda_min is the sign of ``nu - cosh(2r)``. Scan r at fixed nu
# and compare the first negative grid point with ``arccosh(nu)/2``.

# %%
nu = 1.8
rs = np.linspace(0.0, 1.0, 2001)
lam = np.array([nogo_lambda_min(gamma, (nu, r)) for r in rs])
first = rs[np.argmax(lam < 0)]
print(f"first defect at r = {first:.4f}, threshold arccosh(nu)/2 = {math.acosh(nu) / 2:.4f}")

# %% [markdown]
# A coarse text phase diagram: '#' marks a CP defect.

# %%
for r in np.linspace(1.5, 0.0, 16):
    line = "".join("#" if nogo_lambda_min(gamma, (nu, r)) < 0 else "." for nu in np.linspace(1.0, 4.0, 61))
    print(f"r={r:4.2f} {line}")
print("       nu = 1 " + " " * 45 + "nu = 4")
