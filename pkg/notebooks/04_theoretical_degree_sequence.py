# %% [markdown]
# # The limiting degree sequence
#
# `d_k` is assembled from the decaying homogeneous solution and a short
# particular solution, then checked row by row against the recurrence.

# %%
import numpy as np

from evograph import derive, validate
from evograph.recurrence import (
    build_sequence,
    evolve_mean_field,
    leading_constant,
    mass_sums,
)

for raw in [(1, 1, 1), (0.75, 0.3, 2), (0.6, 0.6, 2), (0.6, 0.4, 2)]:
    p = validate(*raw)
    c = derive(p)
    seq = build_sequence(p, c)
    s0, s1 = mass_sums(seq)
    print(f"{raw} {c.regime.value:11s} D={seq.D_mix:.6g} C={leading_constant(seq):.6g} "
          f"max residual={seq.residuals().max():.1e} sum d={s0:.6f} (alpha1={p.alpha1}) "
          f"sum k d={s1:.6f} (2 eta={2 * c.eta})")

# %% [markdown]
# For alpha = alpha1 = 1, m = 1 the sequence is `4 / (k (k+1) (k+2))`.

# %%
seq = build_sequence(validate(1, 1, 1), derive(validate(1, 1, 1)))
k = np.arange(1, 8)
print(seq.d[1:8])
print(4 / (k * (k + 1) * (k + 2)))

# %% [markdown]
# The mean-field iteration of the expected counts converges to the same
# profile from a cold start.

# %%
p = validate(0.6, 0.6, 2)
c = derive(p)
seq = build_sequence(p, c)
K = 400
dh = evolve_mean_field(p, c, 10 * K, 10**6, K)
print(np.abs(dh[:51] - seq.d[:51]).max() / seq.d.max())
