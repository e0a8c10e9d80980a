"""Shift-factor (PTDF) matrices for the base topology and single-line outages."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .network import Network, is_connected


class IslandingContingency(Exception):
    """Removing ``line_id`` disconnects the network."""

    def __init__(self, line_id: int):
        super().__init__(f"outage of line {line_id} islands part of the network")
        self.line_id = line_id


class WrongTopology(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ShiftFactorMatrix:
    line_ids: tuple[int, ...]
    bus_ids: tuple[int, ...]
    entries: np.ndarray
    slack_bus: int

    def flows(self, injection) -> np.ndarray:
        return self.entries @ np.asarray(injection, dtype=float)


@dataclass(frozen=True, eq=False)
class ContingencyTopology:
    outaged_line: int
    shift_factors: ShiftFactorMatrix
    limits: np.ndarray


def incidence(net: Network) -> np.ndarray:
    """Line-bus incidence matrix: +1 at the from bus, -1 at the to bus."""
    A = np.zeros((net.m, net.n))
    for k, line in enumerate(net.lines):
        A[k, net.bus_index(line.from_bus)] = 1.0
        A[k, net.bus_index(line.to_bus)] = -1.0
    return A


def susceptances(net: Network) -> np.ndarray:
    return np.array([l.susceptance for l in net.lines])


def shift_factors(net: Network, slack: int | None = None) -> ShiftFactorMatrix:
    """PTDF matrix H with f = H p for any balanced injection p.

    H = diag(B) A X where X is the inverse of the reduced Laplacian
    (slack row and column deleted), zero-padded at the slack position.
    """
    if slack is None:
        slack = min(net.bus_ids)
    s = net.bus_index(slack)
    A = incidence(net)
    b = susceptances(net)
    L = A.T @ (b[:, None] * A)
    keep = np.r_[0:s, s + 1 : net.n]
    L_red = L[np.ix_(keep, keep)]
    X = np.zeros((net.n, net.n))
    try:
        factor = scipy.linalg.cho_factor(L_red)
    except np.linalg.LinAlgError:
        raise WrongTopology(f"reduced Laplacian of {net.name!r} is singular; network disconnected") from None
    X[np.ix_(keep, keep)] = scipy.linalg.cho_solve(factor, np.eye(net.n - 1))
    H = b[:, None] * (A @ X)
    H.setflags(write=False)
    return ShiftFactorMatrix(tuple(net.line_ids), tuple(net.bus_ids), H, slack)


def dc_flows(net: Network, injection, slack: int | None = None) -> np.ndarray:
    """Line flows from a direct DC angle solve (no PTDF matrix).

    Solves L_red theta = p_red with the slack angle fixed at 0, then
    f_e = B_e (theta_from - theta_to). Used as an independent check on H.
    """
    p = np.asarray(injection, dtype=float)
    if slack is None:
        slack = min(net.bus_ids)
    s = net.bus_index(slack)
    A = incidence(net)
    b = susceptances(net)
    L = A.T @ (b[:, None] * A)
    keep = np.r_[0:s, s + 1 : net.n]
    theta = np.zeros(net.n)
    theta[keep] = np.linalg.solve(L[np.ix_(keep, keep)], p[keep])
    return b * (A @ theta)


def contingency_topologies(net: Network) -> tuple[list[ContingencyTopology], list[IslandingContingency]]:
    """Outage topologies for every line, split into valid and islanding ones.

    Each valid entry carries shift factors rebuilt on the surviving lines.
    Both lists follow the network's line order.
    """
    return _contingencies(net)


@lru_cache(maxsize=64)
def _contingencies(net: Network):
    valid, islanding = [], []
    for line in net.lines:
        survivors = [l for l in net.lines if l.id != line.id]
        if not survivors or not is_connected(net.bus_ids, survivors):
            islanding.append(IslandingContingency(line.id))
            continue
        reduced = net.without_line(line.id)
        limits = reduced.limits
        limits.setflags(write=False)
        valid.append(ContingencyTopology(line.id, shift_factors(reduced), limits))
    return valid, islanding


@lru_cache(maxsize=64)
def base_shift_factors(net: Network) -> ShiftFactorMatrix:
    return shift_factors(net)


def two_bus_transfer_limits(net: Network) -> tuple[float, float]:
    """Maximum bus-to-bus transfer without (f_ed) and with (f_sc) N-1 security.

    f_ed = (B1 + B2) min(f1/B1, f2/B2) and f_sc = min(f1, f2).
    """
    if net.n != 2 or net.m != 2:
        raise WrongTopology(f"expected 2 buses and 2 lines, got n={net.n}, m={net.m}")
    l1, l2 = net.lines
    b1, b2 = l1.susceptance, l2.susceptance
    f_ed = (b1 + b2) * min(l1.limit / b1, l2.limit / b2)
    f_sc = min(l1.limit, l2.limit)
    return f_ed, f_sc
