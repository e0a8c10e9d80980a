"""Parameter sweeps over dispatch instances, with CSV output.

Every sweep is a list of independent points. A point fixes generation
capacities, a deterministic part of the demand and an aggregate demand
for the expensive region. When the expensive region holds more than one
bus, that aggregate is split at random ``runs`` times (uniformly on the
simplex) and the maximum and average price of security are recorded.
Random streams are seeded from ``(seed, point index)``, so results do not
depend on how points are scheduled across workers.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .dispatch import EdInfeasible, ScedInfeasible, price_of_security
from .network import InputInstance, Network, load_case

MODES = (
    "capacity-sweep",
    "demand-grid",
    "cheap-demand-sweep",
    "fixed-aggregate-split",
    "random-distribution-study",
)

COLUMNS = ("status", "c_ed", "c_sc", "pos", "pos_max", "pos_avg", "feasible_runs")

RISE_TOL = 1e-6


class EmptyFeasibleGrid(Exception):
    pass


@dataclass(frozen=True)
class SweepSpec:
    case: str
    mode: str
    start: float = 0.0
    stop: float = 0.0
    step: float = 1.0
    second: tuple[float, float, float] | None = None
    aggregate_demand: float | None = None
    demand: dict | None = None
    capacity: dict | None = None
    relative_capacity: bool = False
    runs: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown sweep mode {self.mode!r}; expected one of {MODES}")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.stop < self.start:
            raise ValueError("stop must be >= start")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.second is not None:
            object.__setattr__(self, "second", tuple(self.second))
            lo, hi, step = self.second
            if not step > 0 or hi < lo:
                raise ValueError("second axis needs step > 0 and stop >= start")

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepSpec":
        doc = dict(doc)
        for key in ("demand", "capacity"):
            if doc.get(key) is not None:
                doc[key] = {int(k): v for k, v in doc[key].items()}
        return cls(**doc)


@dataclass
class SweepResult:
    columns: tuple[str, ...]
    records: list[tuple]
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([r[k] for r in self.records], dtype=float)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for record in self.records:
            writer.writerow([format_value(v) for v in record])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def format_value(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.9g}"


def grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive arithmetic grid ``start, start + step, ..., <= stop``."""
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def simplex_split(rng: np.random.Generator, total: float, k: int) -> np.ndarray:
    """Uniform draw from {x >= 0, sum(x) = total} via normalised exponential spacings."""
    e = rng.standard_exponential(k)
    return total * e / e.sum()


class _Point(NamedTuple):
    index: int
    values: tuple
    capacity: np.ndarray
    demand: np.ndarray
    expensive_total: float


def _evaluate(net: Network, point: _Point, expensive_idx, runs, seed) -> tuple:
    if point.expensive_total > 0 and len(expensive_idx) > 1:
        rng = np.random.default_rng([seed, point.index])
        draws = []
        for _ in range(runs):
            d = point.demand.copy()
            d[expensive_idx] += simplex_split(rng, point.expensive_total, len(expensive_idx))
            draws.append(d)
    else:
        d = point.demand.copy()
        if len(expensive_idx):
            d[expensive_idx[0]] += point.expensive_total
        draws = [d]
    best, total, feasible, reason = None, 0.0, 0, None
    for d in draws:
        try:
            rep = price_of_security(net, InputInstance(point.capacity, d))
        except EdInfeasible:
            reason = reason or "ed_infeasible"
            continue
        except ScedInfeasible:
            reason = reason or "sced_infeasible"
            continue
        feasible += 1
        total += rep.pos
        if best is None or rep.pos > best.pos:
            best = rep
    if best is None:
        return point.values + (reason, math.nan, math.nan, math.nan, math.nan, math.nan, 0)
    status = "optimal" if feasible == len(draws) else "partial"
    return point.values + (status, best.c_ed, best.c_sc, best.pos, best.pos, total / feasible, feasible)


def _evaluate_star(args):
    return _evaluate(*args)


def _regions(net: Network):
    try:
        cheap, expensive = net.region("cheap"), net.region("expensive")
    except KeyError:
        if net.n != 2:
            raise ValueError(f"case {net.name!r} needs 'cheap' and 'expensive' regions for sweeps") from None
        a, b = sorted(net.buses, key=lambda bus: bus.alpha)
        cheap, expensive = (a.id,), (b.id,)
    return [net.bus_index(b) for b in cheap], [net.bus_index(b) for b in expensive]


def _base_vectors(net: Network, spec: SweepSpec):
    capacity = np.full(net.n, math.inf)
    for bus_id, v in (spec.capacity or {}).items():
        capacity[net.bus_index(bus_id)] = math.inf if v is None else v
    demand = net.vector(spec.demand or {})
    return capacity, demand


def _points(net: Network, spec: SweepSpec):
    cheap, expensive = _regions(net)
    capacity, demand = _base_vectors(net, spec)
    axis = grid(spec.start, spec.stop, spec.step)

    def cheap_demand(total):
        d = demand.copy()
        d[cheap] = total / len(cheap)
        return d

    points, names = [], ()
    if spec.mode == "capacity-sweep":
        if spec.aggregate_demand is not None:
            exp_total = spec.aggregate_demand
            d0 = demand.copy()
            d0[expensive] = 0.0
        else:
            exp_total = 0.0
            d0 = demand
        total_demand = d0.sum() + exp_total
        names = ("capacity_fraction",) if spec.relative_capacity else ("cheap_capacity",)
        for k, v in enumerate(axis):
            cap = capacity.copy()
            cap[cheap] = (v * total_demand if spec.relative_capacity else v) / len(cheap)
            points.append(_Point(k, (float(v),), cap, d0, exp_total))
    elif spec.mode == "demand-grid":
        if spec.second is None:
            raise ValueError("demand-grid needs a second axis (start, stop, step) for expensive demand")
        names = ("d_cheap", "d_expensive")
        axis2 = grid(*spec.second)
        for k, (a, b) in enumerate(itertools.product(axis, axis2)):
            points.append(_Point(k, (float(a), float(b)), capacity, cheap_demand(a), b))
    elif spec.mode == "cheap-demand-sweep":
        if spec.aggregate_demand is None:
            raise ValueError("cheap-demand-sweep needs aggregate_demand for the expensive region")
        names = ("d_cheap",)
        for k, a in enumerate(axis):
            points.append(_Point(k, (float(a),), capacity, cheap_demand(a), spec.aggregate_demand))
    elif spec.mode == "fixed-aggregate-split":
        if spec.aggregate_demand is None:
            raise ValueError("fixed-aggregate-split needs aggregate_demand")
        names = ("d_expensive",)
        for k, b in enumerate(axis):
            if b > spec.aggregate_demand + 1e-9:
                raise ValueError("expensive share cannot exceed the aggregate demand")
            points.append(_Point(k, (float(b),), capacity, cheap_demand(spec.aggregate_demand - b), b))
    elif spec.mode == "random-distribution-study":
        names = ("d_expensive",)
        d0 = demand.copy()
        d0[expensive] = 0.0
        for k, b in enumerate(axis):
            points.append(_Point(k, (float(b),), capacity, d0, b))
    return names, points, expensive


def run_sweep(spec: SweepSpec, net: Network | None = None, workers: int = 1) -> SweepResult:
    """Evaluate every point of ``spec``; rows come back in sweep order."""
    if net is None:
        net = load_case(spec.case)
    names, points, expensive = _points(net, spec)
    jobs = [(net, p, expensive, spec.runs, spec.seed) for p in points]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_evaluate_star, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        records = [_evaluate(*job) for job in jobs]
    result = SweepResult(names + COLUMNS, records)
    meta = {"case": net.name, "mode": spec.mode, "seed": spec.seed, "runs": spec.runs,
            "spec": asdict(spec), "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S")}
    pos_max = result.column("pos_max")
    if np.isfinite(pos_max).any():
        k = int(np.nanargmax(pos_max))
        meta["argmax"] = records[k][: len(names)]
        meta["pos_max"] = float(pos_max[k])
    result.metadata = meta
    return result


def capacity_sweep(spec: SweepSpec, net=None, workers=1) -> SweepResult:
    """PoS as cheap-side generation capacity grows, demand fixed."""
    return run_sweep(_with_mode(spec, "capacity-sweep"), net, workers)


def demand_grid(spec: SweepSpec, net=None, workers=1) -> SweepResult:
    """PoS over a (cheap demand, expensive demand) grid; metadata['argmax'] holds the maximiser."""
    return run_sweep(_with_mode(spec, "demand-grid"), net, workers)


def cheap_demand_sweep(spec: SweepSpec, net=None, workers=1) -> SweepResult:
    return run_sweep(_with_mode(spec, "cheap-demand-sweep"), net, workers)


def fixed_aggregate_split(spec: SweepSpec, net=None, workers=1) -> SweepResult:
    """PoS as a fixed total demand moves from the cheap to the expensive region."""
    return run_sweep(_with_mode(spec, "fixed-aggregate-split"), net, workers)


def random_distribution_study(spec: SweepSpec, net=None, workers=1) -> SweepResult:
    """Max/average PoS over random expensive-side splits with zero cheap-side demand."""
    return run_sweep(_with_mode(spec, "random-distribution-study"), net, workers)


def _with_mode(spec, mode):
    if spec.mode != mode:
        raise ValueError(f"spec mode is {spec.mode!r}, expected {mode!r}")
    return spec


class CriticalPoints(NamedTuple):
    first_rise: float
    peak: float
    peak_pos: float


def critical_points(result: SweepResult, column: str = "pos_max") -> CriticalPoints:
    """Demand where PoS first exceeds 1, and where it peaks (ties go to the lower demand)."""
    x = result.column(result.columns[0])
    y = result.column(column)
    above = np.flatnonzero(y > 1 + RISE_TOL)
    first = float(x[above[0]]) if above.size else math.nan
    k = int(np.nanargmax(y))
    return CriticalPoints(first, float(x[k]), float(y[k]))


# -- worst-case search --------------------------------------------------------

class WorstCaseResult(NamedTuple):
    instance: InputInstance
    pos: float
    c_ed: float
    c_sc: float
    evaluated: int
    feasible: int


def _axis(lo, hi, step):
    if hi is None or math.isinf(hi) or hi == lo:
        return [math.inf if hi is None else hi]
    return grid(lo, hi, step).tolist()


def worst_case_search(net: Network, capacity_box=None, demand_box=None, step: float = 10.0) -> WorstCaseResult:
    """Exhaustive grid search for the instance with the largest PoS.

    Boxes map bus id to ``(lo, hi)``. Buses missing from ``demand_box``
    carry zero demand; buses missing from ``capacity_box`` have unlimited
    capacity (an unlimited ``hi`` also means a single unlimited value).
    Infeasible grid points are skipped. Ties keep the first point in
    enumeration order.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    capacity_box = capacity_box or {}
    demand_box = demand_box or {}
    cap_axes = [_axis(*capacity_box.get(b, (math.inf, math.inf)), step) for b in net.bus_ids]
    dem_axes = []
    for b in net.bus_ids:
        lo, hi = demand_box.get(b, (0.0, 0.0))
        if math.isinf(hi):
            raise ValueError("demand box must be bounded")
        dem_axes.append(grid(lo, hi, step).tolist() if hi > lo else [lo])
    best, evaluated, feasible = None, 0, 0
    for cap in itertools.product(*cap_axes):
        for dem in itertools.product(*dem_axes):
            evaluated += 1
            inst = InputInstance(cap, dem)
            try:
                rep = price_of_security(net, inst)
            except (EdInfeasible, ScedInfeasible):
                continue
            feasible += 1
            if best is None or rep.pos > best[1].pos:
                best = (inst, rep)
    if best is None:
        raise EmptyFeasibleGrid(f"no feasible instance among {evaluated} grid points")
    inst, rep = best
    return WorstCaseResult(inst, rep.pos, rep.c_ed, rep.c_sc, evaluated, feasible)


# -- topology-simplification ablation on pjm5 ---------------------------------

ABLATION_VARIANTS = ("full", "no-150-link", "normalized", "homogeneous")

# line ids in the bundled pjm5 case
PJM5_LINE_15 = 3
PJM5_LINE_13 = 2
PJM5_LINE_25 = 4
HOMOGENEOUS_COSTS = {"cheap": 15.0, "expensive": 40.0}


def ablation_network(variant: str, base: Network | None = None) -> Network:
    """pjm5 after the cumulative simplifications up to ``variant``.

    no-150-link drops line (1,5); normalized then rescales the (2,5) limit
    so that limit/susceptance matches line (1,3); homogeneous then sets
    every cheap-region cost to 15 and every expensive-region cost to 40.
    """
    if variant not in ABLATION_VARIANTS:
        raise ValueError(f"unknown ablation variant {variant!r}")
    net = base if base is not None else load_case("pjm5")
    stage = ABLATION_VARIANTS.index(variant)
    if stage >= 1:
        net = net.without_line(PJM5_LINE_15)
    if stage >= 2:
        l13, l25 = net.line(PJM5_LINE_13), net.line(PJM5_LINE_25)
        net = net.with_line_limit(PJM5_LINE_25, l13.limit / l13.susceptance * l25.susceptance)
    if stage >= 3:
        costs = {b: HOMOGENEOUS_COSTS[r] for r in HOMOGENEOUS_COSTS for b in net.region(r)}
        net = net.with_alphas(costs)
    return net


def ablation_suite(variant: str, runs: int = 500, seed: int = 0, start: float = 0.0,
                   stop: float = 1000.0, step: float = 50.0, workers: int = 1) -> SweepResult:
    """Worst-case demand sweep (no cheap-side demand) on one ablation variant."""
    net = ablation_network(variant)
    spec = SweepSpec("pjm5", "random-distribution-study", start, stop, step, runs=runs, seed=seed)
    result = run_sweep(spec, net, workers)
    cp = critical_points(result)
    result.metadata.update(variant=variant, first_rise=cp.first_rise, peak=cp.peak, peak_pos=cp.peak_pos)
    if variant in ("normalized", "homogeneous"):
        result.metadata["normalized_limit_25"] = net.line(PJM5_LINE_25).limit
    return result
