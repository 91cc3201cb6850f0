# %% [markdown]
# # The homogeneous solutions u1, u2, uc
#
# Each is an integral over [0, 1] concentrated near t = 1. After
# `t = 1 - exp(-s)` the peak sits near `s ~ log k` with unit width.

# %%
import math

import numpy as np

from evograph import special
from evograph.special import KernelSpec, eval_u

for kernel in [KernelSpec.u1(2, 0.3), KernelSpec.u2(-2, 0.75), KernelSpec.uc(0.5)]:
    print(kernel.kind, [f"{eval_u(kernel, k):.6e}" for k in (1, 10, 100, 1000)])

# %% [markdown]
# Prefactors of the power and geometric tails, with their O(1/k) rate.
# For these kernels the limits are `Gamma(1+beta)/(1-zeta)^beta` and
# `gamma^-beta Gamma(1-beta) (1-gamma)^beta`.

# %%
grid = [64, 128, 256, 512, 1024]
r1 = special.estimate_asymptotic_constant(KernelSpec.u1(2, 0.3), grid)
r2 = special.estimate_asymptotic_constant(KernelSpec.u2(-2, 0.75), grid)
print(r1.constant, math.gamma(3) / 0.7**2, r1.convergence_rate)
print(r2.constant, 0.75**2 * math.gamma(3) * 0.25**-2, r2.convergence_rate)

# %% [markdown]
# uc has a finite-sum form. Its terms alternate and grow factorially, so the
# evaluation refuses once its own rounding bound gets too large.

# %%
for k in (1, 5, 10, 15):
    cf = special.uc_closed_form(0.5, k)
    q = eval_u(KernelSpec.uc(0.5), k)
    print(k, cf, q, abs(cf - q) / q)
try:
    special.uc_closed_form(0.5, 40)
except Exception as exc:
    print(type(exc).__name__, exc)

# %% [markdown]
# uc decays slower than any exponential and faster than any power:
# `log uc(k) ~ -2 sqrt(mu k)`.

# %%
for k in (64, 256, 1024, 4096):
    lu = special.log_u(KernelSpec.uc(0.5), k)
    print(k, lu, lu / -k, -math.log(k) / lu, lu / (-2 * math.sqrt(0.5 * k)))
