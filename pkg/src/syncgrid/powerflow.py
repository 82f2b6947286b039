"""Power-case ingestion and lossless network analysis.

A case is a set of buses (generator or load, fixed voltage magnitude,
real-power injection) and branches (series reactance, optional thermal
rating).  The lossless mapping to the oscillator model uses

    a_ij = |V_i| |V_j| Im(Y_ij),   omega_i = net injection (p.u.),

with generator buses as second-order nodes and load buses as first-order
nodes.  Branch resistances are dropped (recorded as an approximation);
only active power with fixed voltage magnitudes is modeled.

Two input formats are accepted: the package's JSON case schema and the
bus/gen/branch table layout of the widely used MATPOWER text cases.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .dynamics import OscillatorNetwork, rotating_frame
from .equilibrium import EquilibriumSolution, solve_equilibrium
from .errors import (
    InconsistentCaseError,
    IslandingDetectedError,
    NoAdjustableSourcesError,
    NoConvergenceError,
    NonLosslessCaseError,
    ParseError,
    SingularJacobianError,
    SingularSystemError,
)
from .graph import WeightedGraph, edge_differences, is_connected, solve_poisson
from .rng import substream
from .sync import Infeasible, sync_margin

GENERATOR_DAMPING = 1.0   # p.u., default for second-order buses
LOAD_DAMPING = 0.1        # s, default load frequency coefficient
DEFAULT_INERTIA = 1.0


@dataclass(frozen=True)
class Bus:
    id: int
    kind: str                    # "gen" | "load"
    vm: float = 1.0
    pg_mw: float = 0.0
    pd_mw: float = 0.0
    area: int = 1
    inertia: float | None = None
    damping: float | None = None

    def __post_init__(self):
        if self.kind not in ("gen", "load"):
            raise InconsistentCaseError(f"bus {self.id}: unknown kind {self.kind!r}")
        if self.vm <= 0:
            raise InconsistentCaseError(f"bus {self.id}: non-positive voltage magnitude")


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    x: float                     # series reactance, p.u.
    r: float = 0.0
    rating_mva: float | None = None
    angle_limit: float | None = None  # rad; overrides the rating-derived limit

    def __post_init__(self):
        if self.from_bus == self.to_bus:
            raise InconsistentCaseError(f"branch {self.from_bus}-{self.to_bus} is a self-loop")
        if self.x <= 0:
            raise InconsistentCaseError(
                f"branch {self.from_bus}-{self.to_bus}: reactance must be positive"
            )

    @property
    def susceptance(self) -> float:
        return 1.0 / self.x


@dataclass(frozen=True, eq=False)
class PowerCase:
    name: str
    base_mva: float
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    approximations: tuple[str, ...] = ()

    def __post_init__(self):
        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            raise InconsistentCaseError("duplicate bus ids")
        known = set(ids)
        for br in self.branches:
            if br.from_bus not in known or br.to_bus not in known:
                raise InconsistentCaseError(
                    f"branch {br.from_bus}-{br.to_bus} references a missing bus"
                )

    @property
    def bus_order(self) -> tuple[int, ...]:
        """Bus ids in node order (sorted); node k is bus_order[k-1]."""
        return tuple(sorted(b.id for b in self.buses))

    def bus(self, bus_id: int) -> Bus:
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise InconsistentCaseError(f"no bus {bus_id}")

    def injections_pu(self) -> np.ndarray:
        """Net real-power injection per node (generation minus load)."""
        order = {bid: k for k, bid in enumerate(self.bus_order)}
        inj = np.zeros(len(self.buses))
        for b in self.buses:
            inj[order[b.id]] = (b.pg_mw - b.pd_mw) / self.base_mva
        return inj


# --- parsing ---

def _case_from_dict(d: dict) -> PowerCase:
    try:
        buses = tuple(
            Bus(
                id=int(b["id"]),
                kind=str(b["type"]),
                vm=float(b.get("vm", 1.0)),
                pg_mw=float(b.get("pg", 0.0)),
                pd_mw=float(b.get("pd", 0.0)),
                area=int(b.get("area", 1)),
                inertia=(float(b["M"]) if "M" in b else None),
                damping=(float(b["D"]) if "D" in b else None),
            )
            for b in d["buses"]
        )
        branches = tuple(
            Branch(
                from_bus=int(br["from"]),
                to_bus=int(br["to"]),
                x=float(br["x"]),
                r=float(br.get("r", 0.0)),
                rating_mva=(float(br["rating"]) if br.get("rating") else None),
                angle_limit=(float(br["angle_limit"]) if br.get("angle_limit") else None),
            )
            for br in d["branches"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad case JSON: {exc}") from exc
    return PowerCase(
        name=str(d.get("name", "case")),
        base_mva=float(d.get("base_mva", 100.0)),
        buses=buses,
        branches=branches,
    )


_MATRIX_RE = re.compile(r"mpc\.(\w+)\s*=\s*\[(.*?)\];", re.DOTALL)
_SCALAR_RE = re.compile(r"mpc\.baseMVA\s*=\s*([0-9.eE+-]+)\s*;")


def _parse_matpower(text: str) -> PowerCase:
    """Importer for MATPOWER-style case tables (bus/gen/branch matrices)."""
    scalar = _SCALAR_RE.search(text)
    base_mva = float(scalar.group(1)) if scalar else 100.0
    tables: dict[str, list[list[float]]] = {}
    for match in _MATRIX_RE.finditer(text):
        name, body = match.group(1), match.group(2)
        rows = []
        for lineno, raw in enumerate(body.splitlines(), start=1):
            line = raw.split("%")[0].strip().rstrip(";")
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split()])
            except ValueError as exc:
                raise ParseError(f"mpc.{name} line {lineno}: {exc}") from exc
        tables[name] = rows
    if "bus" not in tables or "branch" not in tables:
        raise ParseError("missing mpc.bus or mpc.branch table")

    gen_by_bus: dict[int, float] = {}
    for row in tables.get("gen", []):
        if len(row) >= 8 and row[7] <= 0:  # status column
            continue
        gen_by_bus[int(row[0])] = gen_by_bus.get(int(row[0]), 0.0) + float(row[1])

    buses = []
    for row in tables["bus"]:
        if len(row) < 8:
            raise ParseError(f"mpc.bus row too short: {row}")
        bus_id, bus_type, pd = int(row[0]), int(row[1]), float(row[2])
        vm = float(row[7])
        kind = "gen" if bus_type in (2, 3) else "load"
        buses.append(Bus(id=bus_id, kind=kind, vm=vm, pd_mw=pd, pg_mw=gen_by_bus.get(bus_id, 0.0)))

    branches = []
    for row in tables["branch"]:
        if len(row) < 4:
            raise ParseError(f"mpc.branch row too short: {row}")
        status = row[10] if len(row) > 10 else 1.0
        if status <= 0:
            continue
        rating = float(row[5]) if len(row) > 5 and row[5] > 0 else None
        branches.append(
            Branch(from_bus=int(row[0]), to_bus=int(row[1]), x=float(row[3]),
                   r=float(row[2]), rating_mva=rating)
        )
    return PowerCase(name="matpower_case", base_mva=base_mva,
                     buses=tuple(buses), branches=tuple(branches))


def parse_case(text: str, strict_lossless: bool = False) -> PowerCase:
    """Parse a case from JSON or MATPOWER-style text.

    Branch resistances are dropped (the model is lossless); the dropped
    values are recorded as an approximation flag.  strict_lossless instead
    rejects resistive cases outright.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            case = _case_from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    elif "mpc." in text:
        case = _parse_matpower(text)
    else:
        raise ParseError("unrecognized case format (expected JSON or MATPOWER tables)")

    resistive = [br for br in case.branches if br.r != 0.0]
    if resistive:
        if strict_lossless:
            raise NonLosslessCaseError(f"{len(resistive)} branches have nonzero resistance")
        case = replace(
            case,
            branches=tuple(replace(br, r=0.0) for br in case.branches),
            approximations=case.approximations
            + (f"dropped series resistance on {len(resistive)} branches",),
        )
    return case


def load_case(path: str, strict_lossless: bool = False) -> PowerCase:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_case(fh.read(), strict_lossless=strict_lossless)


def bundled_case(name: str) -> PowerCase:
    """Load a case shipped with the package (e.g. 'case9', 'rts96')."""
    for suffix in (".json", ".m"):
        ref = resources.files("syncgrid").joinpath(f"data/{name}{suffix}")
        if ref.is_file():
            return parse_case(ref.read_text(encoding="utf-8"))
    raise FileNotFoundError(f"no bundled case named {name!r}")


# --- model construction ---

def _merged_edges(case: PowerCase) -> dict[tuple[int, int], dict]:
    """Combine parallel branches: susceptances and ratings add."""
    order = {bid: k + 1 for k, bid in enumerate(case.bus_order)}
    vm = {b.id: b.vm for b in case.buses}
    merged: dict[tuple[int, int], dict] = {}
    for br in case.branches:
        i, j = order[br.from_bus], order[br.to_bus]
        if i > j:
            i, j = j, i
        entry = merged.setdefault((i, j), {"a": 0.0, "rating_pu": 0.0, "has_rating": False,
                                           "angle_limit": None})
        entry["a"] += vm[br.from_bus] * vm[br.to_bus] * br.susceptance
        if br.rating_mva is not None:
            entry["rating_pu"] += br.rating_mva / case.base_mva
            entry["has_rating"] = True
        if br.angle_limit is not None:
            prior = entry["angle_limit"]
            entry["angle_limit"] = br.angle_limit if prior is None else min(prior, br.angle_limit)
    return merged


def case_graph(case: PowerCase) -> WeightedGraph:
    merged = _merged_edges(case)
    edges = [(i, j, entry["a"]) for (i, j), entry in merged.items()]
    return WeightedGraph.from_edges(len(case.buses), edges)


def branch_angle_limits(case: PowerCase) -> dict[tuple[int, int], float]:
    """Per merged edge thermal limit as an angle: arcsin(rating / a_ij).

    Explicit angle limits take precedence.  Edges without any rating are
    omitted (unconstrained).
    """
    limits: dict[tuple[int, int], float] = {}
    for (i, j), entry in _merged_edges(case).items():
        if entry["angle_limit"] is not None:
            limits[(i, j)] = entry["angle_limit"]
        elif entry["has_rating"]:
            ratio = min(1.0, entry["rating_pu"] / entry["a"])
            limits[(i, j)] = math.asin(ratio)
    return limits


def build_oscillator_model(case: PowerCase) -> OscillatorNetwork:
    """Map a case onto the oscillator model, in the rotating frame.

    Generator buses become second-order nodes (defaults M = 1, D = 1);
    load buses are first order (default D = 0.1).  Injections are recentred
    so the synchronization frequency is zero.
    """
    g = case_graph(case)
    order = case.bus_order
    second = frozenset(k + 1 for k, bid in enumerate(order) if case.bus(bid).kind == "gen")
    m = np.ones(g.n) * DEFAULT_INERTIA
    d = np.empty(g.n)
    for k, bid in enumerate(order):
        b = case.bus(bid)
        if b.inertia is not None:
            m[k] = b.inertia
        d[k] = b.damping if b.damping is not None else (
            GENERATOR_DAMPING if b.kind == "gen" else LOAD_DAMPING
        )
    net = OscillatorNetwork(graph=g, omega=case.injections_pu(), second_order=second, M=m, D=d)
    return rotating_frame(net)


# --- power flow ---

@dataclass(frozen=True, eq=False)
class DCFlowResult:
    delta: np.ndarray
    max_angle_diff: float


def dc_power_flow(case: PowerCase) -> DCFlowResult:
    """Linear power flow: solve L delta = omega with gauge delta_1 = 0.

    The largest edge difference of delta equals the synchronization margin
    by construction (identical linear system).
    """
    net = build_oscillator_model(case)
    if not is_connected(net.graph):
        raise SingularSystemError("case network is disconnected")
    delta = solve_poisson(net.graph, net.omega)
    delta = delta - delta[0]
    diffs = edge_differences(net.graph, delta)
    return DCFlowResult(delta=delta, max_angle_diff=float(np.max(np.abs(diffs))) if len(diffs) else 0.0)


def ac_power_flow(case: PowerCase, gamma: float = math.pi / 2) -> EquilibriumSolution | Infeasible:
    """Nonlinear power flow via Newton, seeded with the DC solution."""
    net = build_oscillator_model(case)
    dc = dc_power_flow(case)
    try:
        return solve_equilibrium(net.graph, net.omega, theta0=dc.delta, gamma=gamma)
    except (NoConvergenceError, SingularJacobianError) as exc:
        margin = sync_margin(net.graph, net.omega).margin
        return Infeasible(margin=margin, gamma=gamma, reason=str(exc))


# --- randomized smart-grid scenarios ---

@dataclass(frozen=True)
class ScenarioConfig:
    """Randomization of loads/generation plus balancing sources.

    Fractions select subsets by count (rounded; balancing counts round up
    so at least one adjustable source exists whenever the pool is
    nonempty).  Perturbations are Gaussian around the nominal injection
    with standard deviation sigma in per unit.
    """

    load_fluct_fraction: float = 0.5
    gen_fluct_fraction: float = 0.33
    sigma: float = 0.3
    fast_ramp_fraction: float = 0.10
    controllable_load_fraction: float = 0.10
    seed: int = 0

    def __post_init__(self):
        for name in ("load_fluct_fraction", "gen_fluct_fraction",
                     "fast_ramp_fraction", "controllable_load_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


def randomize_scenario(case: PowerCase, cfg: ScenarioConfig, sample: int = 0) -> PowerCase:
    """Perturb a case per the scenario config and rebalance exactly.

    The power imbalance created by the fluctuations is dispatched uniformly
    across the selected fast-ramping generators and controllable loads, so
    the returned injections sum to zero.  sample selects an independent
    substream for batch studies under one config seed.
    """
    rng = substream(cfg.seed, sample)
    gens = [b.id for b in case.buses if b.pg_mw > 0]
    loads = [b.id for b in case.buses if b.pd_mw > 0]

    def pick(pool: list[int], count: int) -> set[int]:
        if count <= 0 or not pool:
            return set()
        count = min(count, len(pool))
        return set(int(x) for x in rng.choice(pool, size=count, replace=False))

    fluct_loads = pick(loads, int(round(cfg.load_fluct_fraction * len(loads))))
    fluct_gens = pick(gens, int(round(cfg.gen_fluct_fraction * len(gens))))
    ramp_gens = pick(gens, math.ceil(cfg.fast_ramp_fraction * len(gens))
                     if cfg.fast_ramp_fraction > 0 else 0)
    ctrl_loads = pick(loads, math.ceil(cfg.controllable_load_fraction * len(loads))
                      if cfg.controllable_load_fraction > 0 else 0)
    n_adjust = len(ramp_gens) + len(ctrl_loads)
    if n_adjust == 0:
        raise NoAdjustableSourcesError("scenario selects zero adjustable sources")

    new_buses = []
    for b in case.buses:
        pg, pd = b.pg_mw, b.pd_mw
        if b.id in fluct_loads:
            pd = pd + rng.normal(0.0, cfg.sigma) * case.base_mva
        if b.id in fluct_gens:
            pg = pg + rng.normal(0.0, cfg.sigma) * case.base_mva
        new_buses.append(replace(b, pg_mw=pg, pd_mw=pd))

    imbalance_mw = sum(b.pg_mw - b.pd_mw for b in new_buses)
    share = -imbalance_mw / n_adjust
    balanced = []
    for b in new_buses:
        pg, pd = b.pg_mw, b.pd_mw
        if b.id in ramp_gens:
            pg += share
        if b.id in ctrl_loads:
            pd -= share
        balanced.append(replace(b, pg_mw=pg, pd_mw=pd))
    return replace(case, buses=tuple(balanced))


# --- contingencies and loading sweeps ---

@dataclass(frozen=True)
class RampSpec:
    """Load increase in one area, compensated by generators elsewhere.

    mode "uniform" adds the same MW increment to every load bus of the
    area (the increment is sized so the area total grows by the loading
    fraction); "proportional" scales each load by (1 + loading).  Either
    way the compensating generators each pick up an equal share.
    """

    load_area: int
    gen_areas: tuple[int, ...]
    mode: str = "uniform"

    def __post_init__(self):
        if self.mode not in ("uniform", "proportional"):
            raise ValueError(f"unknown ramp mode {self.mode!r}")


@dataclass(frozen=True, eq=False)
class ContingencyScan:
    loadings: np.ndarray
    margins: np.ndarray
    line_utilization: np.ndarray     # max over limited lines of predicted/limit
    predicted_limit_loading: float | None
    margin_one_loading: float | None
    binding_line: tuple[int, int] | None


def apply_trips(case: PowerCase, trips: list[str]) -> PowerCase:
    """Trip generators ('gen:ID') and branches ('branch:I-J').

    A branch trip removes every parallel circuit between the two buses.
    Islanding raises immediately.
    """
    buses = list(case.buses)
    branches = list(case.branches)
    for trip in trips:
        kind, _, spec = trip.partition(":")
        if kind == "gen":
            bid = int(spec)
            for k, b in enumerate(buses):
                if b.id == bid:
                    buses[k] = replace(b, pg_mw=0.0, kind="load")
                    break
            else:
                raise InconsistentCaseError(f"trip references missing bus {bid}")
        elif kind == "branch":
            i, _, j = spec.partition("-")
            pair = {int(i), int(j)}
            kept = [br for br in branches if {br.from_bus, br.to_bus} != pair]
            if len(kept) == len(branches):
                raise InconsistentCaseError(f"trip references missing branch {spec}")
            branches = kept
        else:
            raise ValueError(f"unknown trip kind {kind!r}")
    tripped = replace(case, buses=tuple(buses), branches=tuple(branches))
    if not is_connected(case_graph(tripped)):
        raise IslandingDetectedError("network splits after trips")
    return tripped


def apply_ramp(case: PowerCase, ramp: RampSpec, loading: float) -> PowerCase:
    """Grow the ramp area's total load by the loading fraction.

    Compensating generators in the other areas each pick up an equal MW
    share of the added demand.
    """
    area_loads = [b.id for b in case.buses if b.area == ramp.load_area and b.pd_mw > 0]
    extra = loading * sum(b.pd_mw for b in case.buses if b.id in set(area_loads))
    comp_gens = [b.id for b in case.buses
                 if b.area in ramp.gen_areas and b.pg_mw > 0 and b.kind == "gen"]
    if not comp_gens and extra != 0.0:
        raise NoAdjustableSourcesError("no compensating generators in the ramp areas")
    share = extra / len(comp_gens) if comp_gens else 0.0
    increment = extra / len(area_loads) if area_loads else 0.0
    buses = []
    for b in case.buses:
        pg, pd = b.pg_mw, b.pd_mw
        if b.id in set(area_loads):
            pd = pd + increment if ramp.mode == "uniform" else pd * (1.0 + loading)
        if b.id in comp_gens:
            pg = pg + share
        buses.append(replace(b, pg_mw=pg, pd_mw=pd))
    return replace(case, buses=tuple(buses))


def _margin_and_utilization(case: PowerCase) -> tuple[float, float, tuple[int, int] | None]:
    net = build_oscillator_model(case)
    psi = edge_differences(net.graph, solve_poisson(net.graph, net.omega))
    margin = float(np.max(np.abs(psi))) if len(psi) else 0.0
    limits = branch_angle_limits(case)
    best = 0.0
    binding = None
    for k, (i, j, _) in enumerate(net.graph.edges):
        limit = limits.get((i, j))
        if limit is None or limit <= 0:
            continue
        predicted = math.asin(min(1.0, abs(psi[k])))
        util = predicted / limit
        if util > best:
            best, binding = util, (i, j)
    return margin, best, binding


def contingency_scan(
    case: PowerCase,
    trips: list[str],
    ramp: RampSpec,
    loadings=None,
) -> ContingencyScan:
    """Sweep the ramp loading after applying trips.

    Reports the margin and the worst thermal-line utilization (predicted
    angle over limit angle) per loading, plus bisected crossing loadings
    for the first thermal-limit hit and for margin = 1.
    """
    tripped = apply_trips(case, trips)
    if loadings is None:
        loadings = np.linspace(0.0, 1.0, 21)
    loadings = np.asarray(loadings, dtype=float)

    margins = np.empty(len(loadings))
    utils = np.empty(len(loadings))
    binding = None
    for k, s in enumerate(loadings):
        margins[k], utils[k], line = _margin_and_utilization(apply_ramp(tripped, ramp, float(s)))
        if line is not None and utils[k] >= 1.0 and binding is None:
            binding = line

    def bisect_crossing(values: np.ndarray, target: float, evaluate) -> float | None:
        above = np.nonzero(values >= target)[0]
        if len(above) == 0:
            return None
        hi_idx = int(above[0])
        if hi_idx == 0:
            return float(loadings[0])
        lo, hi = float(loadings[hi_idx - 1]), float(loadings[hi_idx])
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if evaluate(mid) >= target:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-6 * max(1.0, hi):
                break
        return hi

    def margin_at(s: float) -> float:
        return _margin_and_utilization(apply_ramp(tripped, ramp, s))[0]

    def util_at(s: float) -> float:
        return _margin_and_utilization(apply_ramp(tripped, ramp, s))[1]

    predicted_limit = bisect_crossing(utils, 1.0, util_at)
    margin_one = bisect_crossing(margins, 1.0, margin_at)
    if binding is None and predicted_limit is not None:
        _, _, binding = _margin_and_utilization(apply_ramp(tripped, ramp, predicted_limit))
    return ContingencyScan(
        loadings=loadings,
        margins=margins,
        line_utilization=utils,
        predicted_limit_loading=predicted_limit,
        margin_one_loading=margin_one,
        binding_line=binding,
    )


# --- serialization ---

def case_to_dict(case: PowerCase) -> dict:
    return {
        "name": case.name,
        "base_mva": case.base_mva,
        "buses": [
            {k: v for k, v in {
                "id": b.id, "type": b.kind, "vm": b.vm, "pg": b.pg_mw, "pd": b.pd_mw,
                "area": b.area, "M": b.inertia, "D": b.damping,
            }.items() if v is not None}
            for b in case.buses
        ],
        "branches": [
            {k: v for k, v in {
                "from": br.from_bus, "to": br.to_bus, "x": br.x, "r": br.r,
                "rating": br.rating_mva, "angle_limit": br.angle_limit,
            }.items() if v is not None}
            for br in case.branches
        ],
    }


def save_case(case: PowerCase, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(case_to_dict(case), fh, indent=1, sort_keys=True)
        fh.write("\n")
