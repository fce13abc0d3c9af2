"""Monte-Carlo cost of phase estimation with early rejection, on the water fixtures."""

from __future__ import annotations

from fermiprep import phaseprep

for name in phaseprep.fixture_names():
    params = phaseprep.load_fixture(name)
    model = phaseprep.SpectralModel.two_level(params)
    rej = phaseprep.rejection_run(model, params, rng_seed=0, trials=10_000)
    naive = phaseprep.naive_run(model, params, rng_seed=0, trials=10_000)
    print(name)
    print(f"  alpha0 = {params.alpha0}, E* - E0_bound = {params.coarse_gap:.4f}")
    print(f"  rejection: {rej.mean_cost:9.1f} +- {rej.std_err:.1f}  (formula {rej.analytic_cost:.1f})")
    print(f"  naive:     {naive.mean_cost:9.1f} +- {naive.std_err:.1f}  (formula {naive.analytic_cost:.1f})")
    print(f"  speedup {naive.mean_cost / rej.mean_cost:.2f}, 1/alpha0 = {1 / params.alpha0:.2f}")
