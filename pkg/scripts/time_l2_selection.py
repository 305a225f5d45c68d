"""Time a full 14-point regularization search on a 300-node SBM."""

import time

from embstab.classify import DEFAULT_L2_GRID, select_l2
from embstab.embed import Node2vecConfig, node2vec_lite, spectral_embed
from embstab.graph import SbmConfig, generate_sbm, split_nodes

g = generate_sbm(SbmConfig((150, 150), 0.1, 0.01, seed=7))
split = split_nodes(g, seed=0)
for name, z in [("spectral d=32", spectral_embed(g, 32)),
                ("node2vec_lite d=128", node2vec_lite(g, Node2vecConfig(dim=128)))]:
    t0 = time.perf_counter()
    l2 = select_l2(z, g.labels, split, DEFAULT_L2_GRID, num_classes=g.num_classes)
    print(f"{name}: selected l2={l2:g} over {len(DEFAULT_L2_GRID)} values in {time.perf_counter() - t0:.2f} s")
