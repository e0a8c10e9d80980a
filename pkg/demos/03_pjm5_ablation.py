"""
The PJM 5-bus system and a topology ablation
============================================

Load is placed only in the expensive region (buses 3, 4, 5) and split
at random across those buses. For each aggregate demand the largest PoS
over the draws is kept. Four variants progressively simplify the grid:
drop the 150 MW line (1,5), rescale line (2,5) to match line (1,3), then
flatten generator costs to one cheap and one expensive price.

This takes about half a minute per variant with 500 draws; lower ``RUNS``
for a quick look.
"""
from secdispatch.experiments import ABLATION_VARIANTS, ablation_network, ablation_suite
from secdispatch.ptdf import contingency_topologies

RUNS = 100

net = ablation_network("full")
print(net.name, "buses", net.bus_ids, "costs", net.alpha.tolist())
valid, islanding = contingency_topologies(net)
print(f"{len(valid)} outage topologies, {len(islanding)} islanding lines")

for variant in ABLATION_VARIANTS:
    res = ablation_suite(variant, runs=RUNS, seed=0)
    m = res.metadata
    print(f"{variant:12s} first rise {m['first_rise']:5.0f} MW  peak {m['peak']:5.0f} MW  PoS {m['peak_pos']:.3f}")
