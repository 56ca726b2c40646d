# %% [markdown]
# # Equivalence ratios across resolutions
#
# Each functional is divided by the Littlewood-Paley (fourier) norm on the
# six-member corpus. Ratios that stay put as N grows are what equivalence
# looks like on a grid.

# %%
import math

from ballavg import SpaceParams, equivalence_study, standard_corpus

corpus = standard_corpus(512)

# %%
rep = equivalence_study(corpus, SpaceParams(0.9, 2.0, 2.0), [512, 1024, 2048], extra_banks=("alternate",))
print(rep.to_table())

# %% [markdown]
# q = inf swaps the averaged forms for the pointwise sup gradient.

# %%
rep_inf = equivalence_study(corpus, SpaceParams(0.9, 2.0, math.inf), [512, 1024])
print(rep_inf.to_table())

# %% [markdown]
# At the critical index the Weierstrass function sits on the q = inf side only,
# so the q = 2 ratio creeps upward with N.

# %%
from ballavg import weierstrass
from ballavg.functionals import fourier_tl_norm
from ballavg.grid import make_ladder
from ballavg.synth import generate

for N in (512, 1024, 2048, 4096):
    f = generate(weierstrass(0.9, N, seed=0))
    print(N, fourier_tl_norm(f, SpaceParams(0.9, 2.0, 2.0), make_ladder(N)).norm)
