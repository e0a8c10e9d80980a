"""
Sweeping capacity and demand on the two-bus case
================================================

Each sweep returns a table that can be written to CSV. Columns after the
swept values are status, both costs, PoS and (for randomised sweeps) the
maximum and mean PoS over the random draws.
"""
import numpy as np

from secdispatch.experiments import SweepSpec, capacity_sweep, cheap_demand_sweep, fixed_aggregate_split

# Cheap capacity from 100 to 300 MW with 200 MW of expensive-side load.
# Below 100 MW the expensive generator must run in both dispatches.
spec = SweepSpec("2bus", "capacity-sweep", 100, 300, 25, demand={1: 0, 2: 200})
res = capacity_sweep(spec)
for q1, pos in zip(res.column("cheap_capacity"), res.column("pos")):
    print(f"q1 = {q1:5.0f}  PoS = {pos:.4f}")

# Adding load at the cheap bus only dilutes the security premium.
spec = SweepSpec("2bus", "cheap-demand-sweep", 0, 400, 100, aggregate_demand=200)
res = cheap_demand_sweep(spec)
print(np.round(res.column("pos"), 4))

# Fixed 300 MW total, moved from the cheap to the expensive side.
spec = SweepSpec("2bus", "fixed-aggregate-split", 0, 300, 50, aggregate_demand=300)
print(fixed_aggregate_split(spec).to_csv())
