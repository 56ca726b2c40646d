# %% [markdown]
# # Smoothness slopes from ball averages
#
# Fit the decay of `f - B_t f` across dyadic scales for Weierstrass-type
# functions and compare with first differences, which stop at order one.

# %%
import numpy as np

from ballavg import estimate_alpha, generate, make_ladder, weierstrass

N = 4096
ladder = make_ladder(N, 5, 10)

# %% [markdown]
# L2-over-x statistic first, then the sup statistic for comparison.

# %%
for a0 in (0.4, 0.9, 1.5):
    f = generate(weierstrass(a0, N, seed=0))
    row = [a0]
    for p in (2.0, np.inf):
        for stat in ("ball", "difference"):
            row.append(estimate_alpha(f, ladder, stat, p=p).alpha)
    print("a0=%.1f  L2: ball %.3f diff %.3f   sup: ball %.3f diff %.3f" % tuple(row))

# %% [markdown]
# The sup fits wander with the random phases; try a few seeds.

# %%
for seed in range(4):
    f = generate(weierstrass(0.9, N, seed=seed))
    fit = estimate_alpha(f, ladder, "ball")
    print(seed, round(fit.alpha, 3), round(fit.residual, 3))

# %%
fit = estimate_alpha(generate(weierstrass(1.5, N, seed=0)), ladder, "ball", p=2.0)
print(fit.to_text())
