# %% [markdown]
# # Parameters and regimes
#
# A model is the triple (alpha, alpha1, m). Everything else is derived from
# it, including which of the four tail regimes applies.

# %%
from evograph import classify, derive, validate

for raw in [(1, 1, 3), (0.9, 0.9, 2), (0.75, 0.3, 2), (0.6, 0.6, 2), ("3/5", "2/5", 2), (0.55, 0.55, 2)]:
    p = validate(*raw)
    c = derive(p)
    print(f"{str(raw):22s} alpha_c={c.alpha_c:.3f} regime={classify(p).value:12s} "
          f"beta={c.beta!s:.6s} gamma={c.gamma:.4g} mu={c.mu:.4g} rho_eps={c.rho_eps:.4f}")

# %% [markdown]
# Invalid input is refused with the violated inequality in the message.

# %%
from evograph.errors import OutOfRange

try:
    validate(0.5, 0.3, 1)
except OutOfRange as exc:
    print(exc)

# %% [markdown]
# The coefficient identities: `A0 + A1 + A2` is always zero, and the
# regime sign sits in `A0 - A2 = 1/beta` instead.

# %%
for raw in [(0.75, 0.3, 1), (0.6, 0.6, 1)]:
    c = derive(validate(*raw))
    print(raw, c.A0 + c.A1 + c.A2, (c.A0 - c.A2) * c.beta)
