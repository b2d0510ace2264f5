"""Where do segregated communities sit in the community-level network?

Collapse each community to a node, peel k-cores, and tabulate researchers
per core by segregation category. Then compare a community metric against
the opposite category within the same size range.
"""

import numpy as np

from segnet.community import label_propagation
from segnet.cores import build_community_graph, core_assignment, core_category_table
from segnet.graph import build_graph, community_density
from segnet.segregation import Category, normalize_and_categorize, ssi_all
from segnet.stats import size_bins, zscore_vs_opposite
from segnet.synth import SynthConfig, generate

sc = generate(SynthConfig(n_teams=150, mixing=0.25, seed=21))
g = build_graph(sc.focal())
p = label_propagation(g, seed=0)
rep = normalize_and_categorize(ssi_all(g, p))
cg = build_community_graph(g, p)
ca = core_assignment(cg)
print(f"{len(p)} communities, {cg.n_edges} inter-community links, max core {ca.max_core}")

print("\ncore   NR  NR_High  NR_Non   NC  avg size")
for row in core_category_table(ca, p, rep):
    print(f"{row.core:>4} {row.n_researchers:>4} {row.n_researchers_high:>8} "
          f"{row.n_researchers_non:>7} {row.n_communities:>4} {row.avg_size:>9.2f}")

sizes = {c: len(m) for c, m in p.communities.items() if len(m) >= 2}
bins = size_bins(sizes, k=3)
density = {c: community_density(g, p.communities[c]) for c in sizes}
print(f"\nsize ranges {bins.labels}")
for b, label in enumerate(bins.labels):
    in_bin = [c for c in sizes if bins.assignment[c] == b]
    hi = [c for c in in_bin if rep.category_of(c) is Category.HIGH]
    non = [density[c] for c in in_bin if rep.category_of(c) is Category.NON]
    z = [zscore_vs_opposite(density[c], non, min_n=3) for c in hi]
    ok = [s.value for s in z if s.ok]
    print(f"  {label:>6}: {len(hi)} high vs {len(non)} non; "
          + (f"mean density z-score {np.mean(ok):+.2f}" if ok else "too few references"))
