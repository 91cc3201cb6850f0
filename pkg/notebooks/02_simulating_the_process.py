# %% [markdown]
# # Simulating the multigraph
#
# Each trial owns one random stream `(seed, stream_id)`; the compiled kernel
# and the step-by-step `advance` consume it identically.

# %%
import math
import time

import numpy as np

from evograph import derive, validate
from evograph.analysis import aggregate, check_concentration
from evograph.process import RngStream, advance, init_state, run_trial, run_trials

p = validate(0.75, 0.5, 2)
s = init_state()
gen = RngStream(1).generator()
for _ in range(6):
    out = advance(s, p, gen)
    print(s.step, out.kind, out.count, s.edges.tolist())

# %% [markdown]
# Long runs go through `run_trial`. Without deletions the edge count is
# deterministic: `e_t = 1 + m (t - 2)`.

# %%
r = run_trial(validate(1, 1, 3), 200_000, RngStream(0))
print([(s.t, s.e, 1 + 3 * (s.t - 2)) for s in r.trajectory[-3:]])

# %% [markdown]
# Edge density and the maximum-degree bound over 50 trials.

# %%
p = validate(0.6, 0.5, 2)
c = derive(p)
T = 10**5
t0 = time.perf_counter()
res = run_trials(p, T, 50, seed=2026, snapshot_times=[T])
print(f"{time.perf_counter() - t0:.2f}s for 50 trials")
rep = check_concentration([r.trajectory[-1] for r in res], c)
print(rep.as_dict())
print("e_T/T range", rep.edge_ratio.min(), rep.edge_ratio.max(), "eta", c.eta)

# %%
prof = aggregate(r.histograms[T] for r in res)
for k in range(0, 12):
    print(k, f"{prof.mean[k]:.5f} +/- {prof.stderr[k]:.5f}")
