"""Sweep the reverse-time noise scale kappa at a fixed 10-call budget.

kappa interpolates between the probability-flow ODE (kappa=0, deterministic)
and progressively noisier reverse SDEs that all share the same marginals in
the exact-integration limit. At a finite budget the injected noise is not
fully re-contracted, so the endpoint variance grows with kappa; every kappa
reuses the same start draws and noise stream, which makes that growth visible
without Monte Carlo jitter swamping it.

    python3 demos/05_noise_scale_family.py [--out kappa.csv]
"""

import argparse

from isde import config_from_dict, kappa_sweep, marginal_moments

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--out", default=None, help="also write the table as CSV")
args = parser.parse_args()

config = config_from_dict({
    "sde": {"kind": "fOUVE", "sigma_min": 0.001, "sigma_max": 0.1, "gamma0": 2.0},
    "prior": {"kind": "gaussian", "m0": 0.5, "s0": 0.2},
    "y": 1.0,
    "seed": 1234,
    "n_trajectories": 10000,
    "kappas": [0.0, 0.05, 0.1, 0.125, 0.15],
    "nfe_budget": 10,
    "solvers": [{"kind": "isde", "p": 2, "label": "isde2"}],
})

res = kappa_sweep(config)
_, v_end = marginal_moments(config.prior, config.sde, config.y, config.sde.delta)

print(f"{'kappa':>6} {'mean dev':>10} {'endpoint var':>13} {'rel var dev':>12}")
for kappa, mean_dev, var, var_rel in res.rows:
    print(f"{kappa:6.3f} {mean_dev:10.2e} {var:13.6e} {var_rel:12.3f}")
print(f"\ntarget end variance: {v_end:.3e}")
print("The variance column should be nondecreasing in kappa; the deviation"
      " from the target reflects the coarse 5-step grid, not sampler bias.")

if args.out:
    manifest = res.write(args.out)
    print(f"\nwrote {args.out} and {manifest}")
