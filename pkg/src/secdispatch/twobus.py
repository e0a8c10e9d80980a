"""Closed-form dispatch costs and price of security for two buses joined by two lines.

Valid only when the cheap generator can cover total demand
(gen capacity at the cheap bus >= d1 + d2); use the LP path otherwise.
Throughout, ``d1`` is the demand at the cheap bus and ``d2`` at the
expensive bus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .network import InputInstance, Network
from .ptdf import two_bus_transfer_limits


@dataclass(frozen=True)
class TwoBusParams:
    alpha1: float
    alpha2: float
    f_ed: float
    f_sc: float
    bus_ids: tuple[int, int] = (1, 2)

    def __post_init__(self):
        if self.alpha1 > self.alpha2:
            raise ValueError("alpha1 <= alpha2 required; build with TwoBusParams.create to relabel")
        if not self.f_sc <= self.f_ed * (1 + 1e-12):
            raise ValueError(f"need f_sc <= f_ed, got f_ed={self.f_ed}, f_sc={self.f_sc}")

    @classmethod
    def create(cls, alpha1, alpha2, limit1, limit2, b1=1.0, b2=1.0, bus_ids=(1, 2)) -> "TwoBusParams":
        """Parameters from raw line data; swaps bus labels if alpha1 > alpha2."""
        f_ed = (b1 + b2) * min(limit1 / b1, limit2 / b2)
        f_sc = min(limit1, limit2)
        if alpha1 > alpha2:
            return cls(alpha2, alpha1, f_ed, f_sc, (bus_ids[1], bus_ids[0]))
        return cls(alpha1, alpha2, f_ed, f_sc, tuple(bus_ids))

    @classmethod
    def from_network(cls, net: Network) -> "TwoBusParams":
        f_ed, f_sc = two_bus_transfer_limits(net)
        a, b = net.buses
        if a.alpha > b.alpha:
            a, b = b, a
        return cls(a.alpha, b.alpha, f_ed, f_sc, (a.id, b.id))

    def instance(self, net: Network, d1, d2, cheap_capacity=math.inf, expensive_capacity=math.inf):
        """InputInstance on ``net`` with demands given in cheap/expensive labels."""
        cheap, expensive = self.bus_ids
        return InputInstance.from_buses(
            net, {cheap: cheap_capacity, expensive: expensive_capacity}, {cheap: d1, expensive: d2}
        )


class DemandSplit(NamedTuple):
    d1: float
    d2: float
    pos: float


class WorstCase(NamedTuple):
    d1: float
    d2: float
    min_cheap_capacity: float
    pos: float


def _pos(x):
    return max(x, 0.0)


def closed_form_costs(p: TwoBusParams, d1: float, d2: float) -> tuple[float, float]:
    if d1 < 0 or d2 < 0:
        raise ValueError("demands must be nonnegative")
    c_ed = p.alpha1 * (d1 + min(p.f_ed, d2)) + p.alpha2 * _pos(d2 - p.f_ed)
    c_sc = p.alpha1 * (d1 + min(p.f_sc, d2)) + p.alpha2 * _pos(d2 - p.f_sc)
    return c_ed, c_sc


def closed_form_pos(p: TwoBusParams, d1: float, d2: float) -> float:
    c_ed, c_sc = closed_form_costs(p, d1, d2)
    if c_ed == 0.0:
        return 1.0 if c_sc == 0.0 else math.inf
    return c_sc / c_ed


def worst_case_instance(p: TwoBusParams) -> WorstCase:
    """Global maximiser: all demand at the expensive bus, equal to f_ed.

    Any cheap capacity of at least f_ed attains it.
    """
    if p.alpha1 <= 0:
        raise ValueError("alpha1 > 0 required")
    pos = p.alpha2 / p.alpha1 - (p.alpha2 - p.alpha1) * p.f_sc / (p.alpha1 * p.f_ed)
    return WorstCase(0.0, p.f_ed, p.f_ed, pos)


def best_demand_split(p: TwoBusParams, d: float) -> DemandSplit:
    """PoS-maximising split of a fixed total demand ``d``."""
    if d < 0:
        raise ValueError("total demand must be nonnegative")
    d2 = min(d, p.f_ed)
    d1 = d - d2
    if d == 0:
        return DemandSplit(0.0, 0.0, 1.0)
    c_sc = p.alpha1 * (d1 + min(p.f_sc, d2)) + p.alpha2 * _pos(d2 - p.f_sc)
    return DemandSplit(d1, d2, c_sc / (p.alpha1 * d) if p.alpha1 > 0 else closed_form_pos(p, d1, d2))
