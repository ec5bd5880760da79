"""Minimal rough-subembedding constant of the 4-cycle, both orderings.

The cyclic order a, b, c, d forces C = 2; the crossing order a, b, d, c
embeds with C = 0.
"""

import numpy as np

from roughcat import minimal_defect_ordered, path_metric, cycle_graph

met = path_metric(cycle_graph(4, 4.0))
for order in ([0, 1, 2, 3], [0, 1, 3, 2]):
    res = minimal_defect_ordered(met.dist[np.ix_(order, order)])
    print(f"order {order}: C = {res.C:.6f}")
    print(np.round(res.certificate.config.points, 6))
