"""Network topology, generator costs and input instances.

Case files are JSON documents::

    {"name": "2bus",
     "buses": [{"id": 1, "alpha": 1.0}, ...],
     "lines": [{"id": 1, "from": 1, "to": 2, "susceptance": 1.0, "limit": 100.0}, ...],
     "regions": {"cheap": [1], "expensive": [2]}}

``limit`` may be ``null`` for an unconstrained line and ``regions`` is
optional. Any other keys (``provenance`` notes, per-element ``note``) are
accepted and ignored. Bus and line order in the document fixes the index
order of every vector and matrix built from the network.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np


class NetworkError(ValueError):
    """Invalid case document or network; ``element`` names the offender."""

    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class Bus:
    id: int
    alpha: float

    def __post_init__(self):
        if not self.alpha >= 0:
            raise NetworkError(f"bus {self.id}: alpha must be nonnegative, got {self.alpha}", self.id)


@dataclass(frozen=True)
class Line:
    id: int
    from_bus: int
    to_bus: int
    susceptance: float
    limit: float = math.inf

    def __post_init__(self):
        if not self.susceptance > 0:
            raise NetworkError(
                f"line {self.id}: susceptance must be positive, got {self.susceptance}", self.id
            )
        if not self.limit >= 0:
            raise NetworkError(f"line {self.id}: limit must be nonnegative, got {self.limit}", self.id)
        if self.from_bus == self.to_bus:
            raise NetworkError(f"line {self.id}: from and to bus are both {self.from_bus}", self.id)


@dataclass(frozen=True)
class Network:
    """Immutable directed multigraph of buses and lines.

    Line direction only fixes the sign of the flow. Parallel lines are
    allowed; contingencies are keyed by line id.
    """

    name: str
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    regions: tuple[tuple[str, tuple[int, ...]], ...] = ()
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "regions", tuple((k, tuple(v)) for k, v in self.regions))
        if len(self.buses) < 2:
            raise NetworkError("n >= 2 required")
        if len(self.lines) < 1:
            raise NetworkError("m >= 1 required")
        index = {}
        for i, bus in enumerate(self.buses):
            if bus.id in index:
                raise NetworkError(f"duplicate bus id {bus.id}", bus.id)
            index[bus.id] = i
        seen = set()
        for line in self.lines:
            if line.id in seen:
                raise NetworkError(f"duplicate line id {line.id}", line.id)
            seen.add(line.id)
            for end in (line.from_bus, line.to_bus):
                if end not in index:
                    raise NetworkError(f"line {line.id} references unknown bus {end}", line.id)
        for region, members in self.regions:
            for b in members:
                if b not in index:
                    raise NetworkError(f"region {region!r} references unknown bus {b}", b)
        object.__setattr__(self, "_index", index)
        parts = components(self)
        if len(parts) > 1:
            stray = sorted(b for part in parts[1:] for b in part)
            raise NetworkError(f"network is disconnected; buses {stray} unreachable from bus {self.buses[0].id}", stray)

    @property
    def n(self) -> int:
        return len(self.buses)

    @property
    def m(self) -> int:
        return len(self.lines)

    @property
    def bus_ids(self) -> list[int]:
        return [b.id for b in self.buses]

    @property
    def line_ids(self) -> list[int]:
        return [l.id for l in self.lines]

    @property
    def alpha(self) -> np.ndarray:
        return np.array([b.alpha for b in self.buses], dtype=float)

    @property
    def limits(self) -> np.ndarray:
        return np.array([l.limit for l in self.lines], dtype=float)

    def bus_index(self, bus_id: int) -> int:
        return self._index[bus_id]

    def line(self, line_id: int) -> Line:
        for line in self.lines:
            if line.id == line_id:
                return line
        raise KeyError(line_id)

    def region(self, name: str) -> tuple[int, ...]:
        for key, members in self.regions:
            if key == name:
                return members
        raise KeyError(f"network {self.name!r} has no region {name!r}")

    def vector(self, values) -> np.ndarray:
        """Bus-indexed vector from a ``{bus_id: value}`` mapping (missing ids -> 0)."""
        out = np.zeros(self.n)
        for bus_id, v in values.items():
            out[self._index[int(bus_id)]] = v
        return out

    # Derived networks, used by contingency analysis and the ablation study.

    def without_line(self, line_id: int) -> "Network":
        """Network with one line removed; raises NetworkError if that islands a bus."""
        self.line(line_id)
        return replace(self, lines=tuple(l for l in self.lines if l.id != line_id))

    def with_line_limit(self, line_id: int, limit: float) -> "Network":
        self.line(line_id)
        lines = tuple(replace(l, limit=limit) if l.id == line_id else l for l in self.lines)
        return replace(self, lines=lines)

    def with_alphas(self, alphas) -> "Network":
        """Replace cost coefficients from a ``{bus_id: alpha}`` mapping."""
        buses = tuple(replace(b, alpha=float(alphas[b.id])) if b.id in alphas else b for b in self.buses)
        return replace(self, buses=buses)


def components(net_or_buses, lines=None) -> list[set[int]]:
    """Connected components (as sets of bus ids), largest-first after the first bus's."""
    if lines is None:
        bus_ids = [b.id for b in net_or_buses.buses]
        lines = net_or_buses.lines
    else:
        bus_ids = list(net_or_buses)
    adj = {b: [] for b in bus_ids}
    for line in lines:
        adj[line.from_bus].append(line.to_bus)
        adj[line.to_bus].append(line.from_bus)
    seen: set[int] = set()
    parts = []
    for start in bus_ids:
        if start in seen:
            continue
        part = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in part:
                    part.add(w)
                    queue.append(w)
        seen |= part
        parts.append(part)
    return parts


def is_connected(bus_ids, lines) -> bool:
    return len(components(bus_ids, lines)) == 1


# -- case files ---------------------------------------------------------------

def _number(obj, key, where, element, allow_null=False):
    if key not in obj:
        raise NetworkError(f"{where}: missing field {key!r}", element)
    value = obj[key]
    if value is None and allow_null:
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise NetworkError(f"{where}: field {key!r} must be a number, got {value!r}", element)
    return float(value)


def _integer(obj, key, where, element=None):
    if key not in obj:
        raise NetworkError(f"{where}: missing field {key!r}", element)
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise NetworkError(f"{where}: field {key!r} must be an integer, got {value!r}", element)
    return value


def network_from_dict(doc: dict) -> Network:
    if not isinstance(doc, dict):
        raise NetworkError("case document must be a JSON object")
    name = doc.get("name")
    if not isinstance(name, str):
        raise NetworkError("case document needs a string 'name'")
    for key in ("buses", "lines"):
        if not isinstance(doc.get(key), list):
            raise NetworkError(f"case document needs a list '{key}'")
    buses = []
    for k, b in enumerate(doc["buses"]):
        if not isinstance(b, dict):
            raise NetworkError(f"buses[{k}] must be an object")
        bid = _integer(b, "id", f"buses[{k}]")
        buses.append(Bus(bid, _number(b, "alpha", f"bus {bid}", bid)))
    lines = []
    for k, l in enumerate(doc["lines"]):
        if not isinstance(l, dict):
            raise NetworkError(f"lines[{k}] must be an object")
        lid = _integer(l, "id", f"lines[{k}]")
        where = f"line {lid}"
        lines.append(
            Line(
                lid,
                _integer(l, "from", where, lid),
                _integer(l, "to", where, lid),
                _number(l, "susceptance", where, lid),
                _number(l, "limit", where, lid, allow_null=True),
            )
        )
    regions = doc.get("regions", {})
    if not isinstance(regions, dict):
        raise NetworkError("'regions' must map region names to bus id lists")
    return Network(name, tuple(buses), tuple(lines), tuple((k, tuple(v)) for k, v in regions.items()))


def load_network(document: str) -> Network:
    """Parse and validate a case document (JSON text)."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"case document is not valid JSON: {exc}") from exc
    return network_from_dict(doc)


def network_to_dict(net: Network) -> dict:
    doc = {
        "name": net.name,
        "buses": [{"id": b.id, "alpha": b.alpha} for b in net.buses],
        "lines": [
            {
                "id": l.id,
                "from": l.from_bus,
                "to": l.to_bus,
                "susceptance": l.susceptance,
                "limit": None if math.isinf(l.limit) else l.limit,
            }
            for l in net.lines
        ],
    }
    if net.regions:
        doc["regions"] = {k: list(v) for k, v in net.regions}
    return doc


def dump_network(net: Network) -> str:
    return json.dumps(network_to_dict(net), indent=2)


BUNDLED_CASES = ("2bus", "pjm5")


def load_case(name_or_path) -> Network:
    """Load a bundled case (``"2bus"``, ``"pjm5"``) or a case file path."""
    if str(name_or_path) in BUNDLED_CASES:
        text = resources.files("secdispatch.cases").joinpath(f"{name_or_path}.json").read_text("utf-8")
        net = load_network(text)
        if net.name == "pjm5":
            _check_pjm5(net)
        return net
    return load_network(Path(name_or_path).read_text("utf-8"))


PJM5_CROSS_LIMIT = 790.0


def cross_region_limit(net: Network, a="cheap", b="expensive") -> float:
    """Sum of limits of lines joining region ``a`` to region ``b``."""
    ra, rb = set(net.region(a)), set(net.region(b))
    total = 0.0
    for l in net.lines:
        if (l.from_bus in ra and l.to_bus in rb) or (l.from_bus in rb and l.to_bus in ra):
            total += l.limit
    return total


def _check_pjm5(net):
    total = cross_region_limit(net)
    if abs(total - PJM5_CROSS_LIMIT) > 1e-9:
        raise NetworkError(f"pjm5: cheap->expensive line limits sum to {total}, expected {PJM5_CROSS_LIMIT}")


# -- instances ----------------------------------------------------------------

def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class InputInstance:
    """Generation capacities and demands, both indexed by bus position.

    ``inf`` capacity means the generator is unconstrained.
    """

    gen_capacity: np.ndarray
    demand: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gen_capacity", _frozen(self.gen_capacity))
        object.__setattr__(self, "demand", _frozen(self.demand))

    @classmethod
    def from_buses(cls, net: Network, gen_capacity, demand) -> "InputInstance":
        """Build from ``{bus_id: value}`` mappings; missing demand is 0, missing capacity unlimited."""
        cap = np.full(net.n, math.inf)
        for bus_id, v in gen_capacity.items():
            cap[net.bus_index(int(bus_id))] = math.inf if v is None else v
        return cls(cap, net.vector(demand))

    def __repr__(self):
        return f"InputInstance(gen_capacity={self.gen_capacity.tolist()}, demand={self.demand.tolist()})"


def load_instance(document: str, net: Network) -> InputInstance:
    """Parse an instance document ``{"gen_capacity": {id: MW|null}, "demand": {id: MW}}``.

    Every bus must be listed in both maps; ``null`` capacity is unlimited.
    """
    doc = json.loads(document)
    if not isinstance(doc, dict):
        raise InstanceError("instance document must be a JSON object")
    vectors = {}
    for key in ("gen_capacity", "demand"):
        entries = doc.get(key)
        if not isinstance(entries, dict):
            raise InstanceError(f"instance document needs an object {key!r}")
        vec = np.full(net.n, np.nan)
        for raw_id, value in entries.items():
            try:
                bus_id = int(raw_id)
                idx = net.bus_index(bus_id)
            except (ValueError, KeyError):
                raise InstanceError(f"{key}: unknown bus {raw_id!r}") from None
            if value is None and key == "gen_capacity":
                value = math.inf
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InstanceError(f"{key}[{raw_id}] must be a number, got {value!r}")
            vec[idx] = value
        missing = [net.buses[i].id for i in np.flatnonzero(np.isnan(vec))]
        if missing:
            raise InstanceError(f"{key}: no value for buses {missing}")
        vectors[key] = vec
    return InputInstance(vectors["gen_capacity"], vectors["demand"])


def dump_instance(inst: InputInstance, net: Network) -> str:
    cap = {str(b.id): (None if math.isinf(c) else float(c)) for b, c in zip(net.buses, inst.gen_capacity)}
    dem = {str(b.id): float(d) for b, d in zip(net.buses, inst.demand)}
    return json.dumps({"gen_capacity": cap, "demand": dem}, indent=2)


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_instance(net: Network, inst: InputInstance) -> ValidationReport:
    report = ValidationReport()
    cap, dem = inst.gen_capacity, inst.demand
    for label, vec in (("gen_capacity", cap), ("demand", dem)):
        if vec.shape != (net.n,):
            report.errors.append(f"{label} has length {vec.size}, network has {net.n} buses")
    if report.errors:
        return report
    for label, vec in (("gen_capacity", cap), ("demand", dem)):
        if np.isnan(vec).any():
            report.errors.append(f"{label} contains NaN")
        for i in np.flatnonzero(vec < 0):
            report.errors.append(f"{label} at bus {net.buses[i].id} is negative ({vec[i]:g})")
    if np.isinf(dem).any():
        report.errors.append("demand must be finite")
    if report.ok and cap.sum() < dem.sum():
        report.warnings.append(
            f"total capacity {cap.sum():g} < total demand {dem.sum():g}; dispatch is infeasible"
        )
    return report
