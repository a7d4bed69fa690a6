"""Colonel Blotto: two players allocate budgets over battlefields.

Each player's raw strategy vector is squashed through a softmax-like feasible
map so allocations are positive and sum to less than the budget (the leftover
mass is an implicit reserve slot).  Payoffs are the battlefield values won;
the game is zero sum.

Run:  python3 demos/blotto_walkthrough.py
"""

import numpy as np

from mixednash.games import cost, feasible_map, gen_blotto
from mixednash.optim import SolverConfig, run

game = gen_blotto(seed=5, m=4)
print(f"battlefields: {game.payload.m}, budgets: {game.payload.budgets}")
print(f"raw action dims per player: {game.dims}")

# the feasible map in action: raw vectors in, allocations out
rng = np.random.default_rng(1)
z = rng.normal(size=game.dims[0])
alloc = feasible_map(game, 0, z)
print(f"\nraw z     = {np.array_str(z, precision=3)}")
print(f"allocation = {np.array_str(alloc, precision=3)} (sum {alloc.sum():.3f} "
      f"< budget {game.payload.budgets[0]})")

x = rng.normal(size=game.total_dim)
print(f"\nzero-sum check: f0 = {cost(game, 0, x):+.6f}, f1 = {cost(game, 1, x):+.6f}")

# a short mixed-strategy run; blotto costs are small (budgets are U(0,1)
# draws), so the solver steps hotter here -- the harness applies rho=1.0
# automatically via FAMILY_METHOD_DEFAULTS, direct calls set it themselves
config = SolverConfig(method="mcgni", iterations=200, hidden=(16, 16), rho=1.0)
state, rows = run(config, game)
print(f"\nlocal regret: {rows[0].local_regret:.3e} -> {rows[-1].local_regret:.3e} "
      f"after {state.iteration} iterations")

# where did the mass go? average the sampled allocations per player
from mixednash.pushforward import forward_batch, sample_omega

for i, gen in enumerate(state.iterate.generators):
    Z = forward_batch(gen, sample_omega(np.random.default_rng(7), 2000, gen.latent_dim).samples)
    A = np.array([feasible_map(game, i, z) for z in Z])
    print(f"player {i} mean allocation: {np.array_str(A.mean(axis=0), precision=3)}")
