"""
Choosing a model by fitting the whole space
===========================================

Eight models are built by a workflow: SIR and SIRD, each with a waning
variant and each in one and two cities. Noisy data is drawn from SIRD in two
cities, and every model is fitted in breadth-first order so that each fit can
start from the parameters of a simpler model it contains.

Pass a number to cap the optimizer budget, e.g. ``python3 select_models.py 300``
for a quicker and rougher run.
"""

import sys
import time

import numpy as np

from modelspace import epi, select as sl

space = epi.stock_space()
print("models:", space.diagram.nodes)
for g in space.diagram.shape.generators:
    print("   ", g.name)

# The stock ground truth: two cities, all infection seeded in the first
truth_net = space.diagram["(SIRD)_2"]
truth = epi.truth_params(truth_net)
data = sl.synthetic_data(space, "(SIRD)_2", truth, 0.0, 50.0, 50, 0.01, np.random.default_rng(1))
print("data columns:", data.names, "samples:", len(data.times))

budget = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
cfg = sl.FitConfig(max_evals=budget)
t = time.perf_counter()
report = sl.select(space, data, cfg)
print(f"fitted {len(report.nodes)} models in {time.perf_counter() - t:.0f}s")

# Losses are reported relative to the true model. With the full budget only the
# two-city models with death get near 1. A small budget can leave the two-city
# fits sitting on their one-city starting point, tied with SIRD.
for n in sorted(report.nodes, key=lambda n: n.normalized_loss):
    print(f"  {n.node:10s} {n.normalized_loss:8.3f}   started from {n.warm_start}")

# Adding a species or transition can only help, so a loss that went up along
# an inclusion is an optimizer shortfall rather than a property of the model.
print("audit:", [a.edge for a in report.audit] or "none")

# Fitted curve of the winner against the data, infected column
best = min(report.nodes, key=lambda n: n.raw_loss)
fit = sl.fitted_trajectory(space, best, data, cfg)
col = data.names.index("I")
print(f"{best.node}: max |I - data| = {np.abs(fit.states[:, col] - data.states[:, col]).max():.4f}")
