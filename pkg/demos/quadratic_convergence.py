"""Train a mixed strategy on one random quadratic game and watch the regret fall.

Run:  python3 demos/quadratic_convergence.py
"""

import numpy as np

from mixednash.games import gen_quadratic
from mixednash.mcgni import MCGNIConfig
from mixednash.optim import SolverConfig, run

# a 2-player game with 3-dimensional actions and uniform [0,1] cost entries
game = gen_quadratic(seed=0, n_i=3)
print(f"game: {game.kind}, dims {game.dims}, {game.total_dim} joint action coords")

# small generator nets keep this demo around ten seconds; the benchmark-scale
# architecture is the default (20, 40, 160, 160, 40, 20)
config = SolverConfig(
    method="mcgni",
    iterations=300,
    hidden=(16, 16),
    mcgni=MCGNIConfig(batch=64, eval_batch=256),
)
state, rows = run(config, game)

print(f"\n{'iter':>6} {'local regret':>14} {'snp residual':>14}")
for row in rows:
    if row.iteration % 50 == 0:
        snp = f"{row.snp_residual:.6e}" if row.snp_residual is not None else ""
        print(f"{row.iteration:>6} {row.local_regret:>14.6e} {snp:>14}")

first, last = rows[0].local_regret, rows[-1].local_regret
print(f"\nregret fell by {first / last:.0f}x over {state.iteration} iterations")
print(f"diverged: {state.diverged}")

# the trained object is a tuple of generator networks, one per player; pushing
# uniform noise through them samples each player's mixed strategy
from mixednash.pushforward import forward_batch, sample_omega

rng = np.random.default_rng(0)
gen = state.iterate.generators[0]
actions = forward_batch(gen, sample_omega(rng, 5, gen.latent_dim).samples)
print("\nfive sampled actions for player 0:")
print(np.array_str(actions, precision=4))
