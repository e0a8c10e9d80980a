"""Economic dispatch (ED), preventive N-1 SCED and the price of security."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import lp
from .network import InputInstance, Network
from .ptdf import IslandingContingency, base_shift_factors, contingency_topologies, dc_flows

BALANCE_TOL = 1e-6
BINDING_TOL = 1e-6


class DispatchInfeasible(Exception):
    pass


class EdInfeasible(DispatchInfeasible):
    pass


class ScedInfeasible(DispatchInfeasible):
    pass


@dataclass(eq=False)
class DispatchSolution:
    status: str
    generation: np.ndarray | None = None
    flows: np.ndarray | None = None
    cost: float = math.nan
    binding_lines: list[int] = field(default_factory=list)
    binding_contingencies: list[tuple[int, int]] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.status == "optimal"


@dataclass(eq=False)
class PosReport:
    c_ed: float
    c_sc: float
    pos: float
    ed_solution: DispatchSolution
    sc_solution: DispatchSolution


@dataclass(frozen=True)
class Violation:
    outaged_line: int
    line: int
    flow: float
    limit: float

    @property
    def excess(self) -> float:
        return abs(self.flow) - self.limit


@dataclass
class SecurityReport:
    violations: list[Violation]
    post_outage_flows: dict[int, dict[int, float]]
    islanding: list[int]

    @property
    def secure(self) -> bool:
        return not self.violations and not self.islanding


# Each row block is (H, limits, tags); tags label rows for binding reports.

def _limit_rows(H, limits, tag):
    finite = np.flatnonzero(np.isfinite(limits))
    return H[finite], limits[finite], [tag(k) for k in finite]


@lru_cache(maxsize=64)
def _base_block(net: Network):
    H = base_shift_factors(net).entries
    return _limit_rows(H, net.limits, lambda k: net.lines[k].id)


@lru_cache(maxsize=64)
def _contingency_block(net: Network):
    valid, islanding = contingency_topologies(net)
    Hs, fs, tags = [], [], []
    for topo in valid:
        sf = topo.shift_factors
        H, f, t = _limit_rows(sf.entries, topo.limits, lambda k, sf=sf, e=topo.outaged_line: (e, sf.line_ids[k]))
        Hs.append(H)
        fs.append(f)
        tags.extend(t)
    H = np.vstack(Hs) if Hs else np.zeros((0, net.n))
    f = np.concatenate(fs) if fs else np.zeros(0)
    return H, f, tags, [c.line_id for c in islanding]


def _solve(net: Network, inst: InputInstance, blocks) -> DispatchSolution:
    d = inst.demand
    H = np.vstack([b[0] for b in blocks])
    f = np.concatenate([b[1] for b in blocks])
    tags = [t for b in blocks for t in b[2]]
    # -f <= H (q - d) <= f
    A_ub = np.vstack([H, -H])
    b_ub = np.concatenate([f + H @ d, f - H @ d])
    program = lp.LinearProgram(
        net.alpha,
        [(0.0, cap) for cap in inst.gen_capacity],
        A_eq=np.ones((1, net.n)),
        b_eq=[d.sum()],
        A_ub=A_ub,
        b_ub=b_ub,
    )
    result = lp.solve(program)
    if not result.optimal:
        return DispatchSolution(result.status.value)
    q = result.x
    base_H = base_shift_factors(net).entries
    slack = b_ub - A_ub @ q
    active = {tags[i % len(tags)] for i in np.flatnonzero(slack <= BINDING_TOL)} if tags else set()
    return DispatchSolution(
        "optimal",
        generation=q,
        flows=base_H @ (q - d),
        cost=result.objective_value,
        binding_lines=[t for t in net.line_ids if t in active],
        binding_contingencies=sorted(t for t in active if isinstance(t, tuple)),
    )


def solve_ed(net: Network, inst: InputInstance) -> DispatchSolution:
    """Least-cost dispatch under capacity, balance and base-case line limits."""
    return _solve(net, inst, [_base_block(net)])


def solve_sced(net: Network, inst: InputInstance) -> DispatchSolution:
    """Least-cost dispatch that also respects surviving-line limits after any single line outage.

    The same dispatch must hold in every outage topology (preventive
    security). Raises IslandingContingency if some line is a bridge.
    """
    H, f, tags, islanding = _contingency_block(net)
    if islanding:
        raise IslandingContingency(islanding[0])
    return _solve(net, inst, [_base_block(net), (H, f, tags)])


def check_n1_security(net: Network, inst: InputInstance, q, tol: float = 1e-6) -> SecurityReport:
    """Check a dispatch against every single-line outage with fresh DC solves.

    Flows are recomputed by solving the angle equations of each outage
    topology directly, independently of the LP constraint rows.
    """
    q = np.asarray(q, dtype=float)
    p = q - inst.demand
    if abs(p.sum()) > BALANCE_TOL:
        raise ValueError(f"dispatch is unbalanced by {p.sum():g} MW")
    violations, flows, islanding = [], {}, []
    for line in net.lines:
        try:
            reduced = net.without_line(line.id)
        except ValueError:
            islanding.append(line.id)
            continue
        f = dc_flows(reduced, p)
        flows[line.id] = dict(zip(reduced.line_ids, f.tolist()))
        for survivor, fe in zip(reduced.lines, f):
            if abs(fe) > survivor.limit + tol:
                violations.append(Violation(line.id, survivor.id, float(fe), survivor.limit))
    return SecurityReport(violations, flows, islanding)


def _ratio(c_sc, c_ed):
    if c_ed == 0.0:
        return 1.0 if c_sc == 0.0 else math.inf
    return c_sc / c_ed


def price_of_security(net: Network, inst: InputInstance) -> PosReport:
    """Ratio of optimal SCED cost to optimal ED cost (1 when both are zero)."""
    ed = solve_ed(net, inst)
    if not ed.feasible:
        raise EdInfeasible(f"ED is {ed.status} for {inst!r}")
    sc = solve_sced(net, inst)
    if not sc.feasible:
        raise ScedInfeasible(f"SCED is {sc.status} for {inst!r}")
    c_ed, c_sc = ed.cost, sc.cost
    # both are optimal values of nested LPs; clip solver noise below 1
    if abs(c_sc - c_ed) <= 1e-9 * max(1.0, abs(c_ed)):
        c_sc = max(c_sc, c_ed)
    return PosReport(c_ed, c_sc, _ratio(c_sc, c_ed), ed, sc)
