"""Five-point defect of square nets of shrinking spacing, sampled near the centre."""

from roughcat import SpaceSequence, defect_trend
from roughcat.experiments import lattice_targets

targets = lattice_targets(12, seed=0)
seq = SpaceSequence("square_net", {"radius": 0.3}, (5, 10, 20))
rep = defect_trend(seq, len(targets), targets=targets)
for m, d in zip(rep.ms, rep.defect5):
    print(f"spacing 1/{m}: defect {d:.5f}")
print("strictly decreasing:", rep.strictly_decreasing)
