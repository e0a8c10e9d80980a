"""
Two buses, two lines: where security gets expensive
===================================================

A cheap generator at bus 1 and an expensive one at bus 2 are joined by
two identical lines rated 100 MW. Without security constraints the cheap
side can push 200 MW across; if either line may trip, only 100 MW.
"""
import math

from secdispatch.dispatch import check_n1_security, price_of_security
from secdispatch.network import InputInstance, load_case
from secdispatch.twobus import TwoBusParams, best_demand_split, closed_form_pos, worst_case_instance

net = load_case("2bus")
p = TwoBusParams.from_network(net)
print(f"transfer limits: f_ed = {p.f_ed:g} MW, f_sc = {p.f_sc:g} MW")

# Solve both dispatches for 200 MW of load on the expensive side.
inst = InputInstance([math.inf, math.inf], [0, 200])
rep = price_of_security(net, inst)
print("ED dispatch  ", rep.ed_solution.generation, "cost", rep.c_ed)
print("SCED dispatch", rep.sc_solution.generation, "cost", rep.c_sc)
print("price of security", rep.pos, "closed form", closed_form_pos(p, 0, 200))

# The ED dispatch is cheaper because it is not N-1 secure.
ed_check = check_n1_security(net, inst, rep.ed_solution.generation)
for v in ed_check.violations:
    print(f"  outage of line {v.outaged_line}: line {v.line} carries {v.flow:g} MW > {v.limit:g}")
print("SCED secure:", check_n1_security(net, inst, rep.sc_solution.generation).secure)

# The worst instance has all load at the expensive bus, equal to f_ed.
wc = worst_case_instance(p)
print(f"worst case: d = ({wc.d1:g}, {wc.d2:g}), PoS = {wc.pos:g}")

# For a fixed total, loading the expensive side up to f_ed is worst.
for d in (50, 150, 250, 400):
    s = best_demand_split(p, d)
    print(f"total {d:4d} MW -> worst split ({s.d1:g}, {s.d2:g}), PoS {s.pos:.4f}")
