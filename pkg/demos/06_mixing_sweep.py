"""How the segregation index responds to cross-team collaboration.

Sweep the planted mixing rate and track the median index of the planted
teams. With no mixing every team is its own component and scores 1.
"""

import numpy as np

from segnet.citations import spearman
from segnet.graph import build_graph
from segnet.segregation import ssi_all
from segnet.synth import SynthConfig, generate

xs, ys = [], []
print("mixing  median SSI over seeds")
for mixing in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5):
    medians = []
    for seed in range(10):
        sc = generate(SynthConfig(mixing=mixing, citation_rate=0.0, seed=seed))
        g = build_graph(sc.focal())
        rows = ssi_all(g, sc.planted_partition(g.nodes)).rows.values()
        medians.append(float(np.median([r.raw_ssi for r in rows])))
    xs += [mixing] * len(medians)
    ys += medians
    print(f"{mixing:>6.1f}  {np.median(medians):.4f}  (range {min(medians):.3f}-{max(medians):.3f})")

rho, _ = spearman(xs, ys)
print(f"\nSpearman(mixing, median SSI) = {rho:.3f}")
