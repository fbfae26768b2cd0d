"""Automated search for informative parameter sets.

Given a prior guess of the coupling tensor, samples random preparation
and measurement directions, assigns each run an interaction time from
its correction curve (the largest time at which the model error is
still below threshold), and ranks candidates by the conditioning of
the design matrix they would produce.  The best candidate is then
validated by an exact-dynamics round trip at dt and dt/2.
"""

import numpy as np

from weakspin import (
    ProtocolRun,
    default_time_grid,
    estimate_tensor,
    record_from_run,
    run_protocol,
    sample_designs,
)
from weakspin.design import predicted_design_matrix
from weakspin.nv import nv_coupling, nv_runs

np.set_printoptions(precision=4, suppress=True)

g_prior = nv_coupling()

# Reference point: the conditioning of the bundled hand-picked design.
kappa_ref = np.linalg.cond(predicted_design_matrix(nv_runs(), g_prior))
print(f"bundled design condition number: {kappa_ref:.2f}")

grid = default_time_grid(stop=0.08, step=2e-4)
candidates = sample_designs(seed=7, g_prior=g_prior, n=40, times=grid, threshold=1e-4)

print("\ntop five sampled candidates:")
print("rank  condition  max model error   chosen dts (us)")
for rank, cand in enumerate(candidates[:5], start=1):
    dts = ", ".join(f"{r.dt:.4f}" for r in cand.runs)
    print(
        f"{rank:>4}  {cand.condition_number:9.2f}  {cand.max_correction:15.2e}   {dts}"
    )

best = candidates[0]

def round_trip(runs):
    records = [record_from_run(r, run_protocol(r, g_prior)) for r in runs]
    est = estimate_tensor(records).g_est.values
    return np.abs(est - g_prior.values).max()

err_full = round_trip(best.runs)
err_half = round_trip(
    [ProtocolRun(r_i=r.r_i, p=r.p, q_tilde=r.q_tilde, dt=r.dt / 2.0) for r in best.runs]
)
print(f"\nbest candidate round-trip error: {err_full:.2e} MHz")
print(f"same design with halved times:   {err_half:.2e} MHz (ratio {err_half / err_full:.2f})")
print(
    "\nThe times sit inside the weak horizon of each curve, so halving"
    "\nthem halves the inversion error: the estimate converges linearly"
    "\nto the true tensor as the interaction window shrinks."
)
