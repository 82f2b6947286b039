#!/usr/bin/env python3
"""Regenerate the bundled power cases (data/case9.json, data/rts96.json).

case9: the classic 9-bus / 3-machine test system, adapted to the lossless
constant-voltage model: series resistances dropped, the slack injection set
so generation balances load exactly (67 + 163 + 85 = 315 MW), voltage
magnitudes from the commonly published solved operating point.

rts96: reconstruction of the three-area Reliability Test System 1996.
Per-area bus loads, generating units, and intra-area branch impedances and
ratings follow the published single-area tables (areas offset by 100).
Multi-area details follow the published extension: inter-area ties
107-203 (138 kV), 113-215, 123-217, plus the area-3 ties 121-325 and
223-318 and the extra bus 325 attached to 323; the optional HVDC link
113-316 is omitted.  The synchronous condenser at each x14 bus is replaced
by a 50 MW hydro unit so every generation bus carries real power capacity.

Reconstruction notes (provenance):
  * Nominal dispatch is not part of the published tables (studies derive it
    from an OPF).  Here it is a fuel merit order per area - hydro, nuclear,
    coal, then oil - filling 2850 MW; partially loaded marginal units share
    uniformly.  Each area is self-balanced at nominal.
  * Voltage magnitudes are set flat at 1.03 p.u. (typical mid-range of
    solved operating points for this system).
  * The impedances of the two area-3 ties are not reliably recoverable
    from the secondary tables available here.  They are inferred from two
    published behaviors of the modeled system: the thermal limit of line
    {121, 325} expressed as an angle is 0.1977 rad, and a uniform
    southeastern load increase drives the network margin through 1 between
    +141% and +151%.  Both point to a series reactance near 0.042 p.u. at
    a 500 MVA continuous rating (arcsin(5.0 / (1.03^2 / 0.042)) = 0.198 rad),
    so X = 0.042 is used for both ties.  All other tie parameters follow
    the published values as closely as available.
"""

from __future__ import annotations

import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "src", "syncgrid", "data")


def make_case9() -> dict:
    buses = [
        {"id": 1, "type": "gen", "vm": 1.040, "pg": 67.0, "pd": 0.0, "area": 1},
        {"id": 2, "type": "gen", "vm": 1.025, "pg": 163.0, "pd": 0.0, "area": 1},
        {"id": 3, "type": "gen", "vm": 1.025, "pg": 85.0, "pd": 0.0, "area": 1},
        {"id": 4, "type": "load", "vm": 1.026, "pd": 0.0, "area": 1},
        {"id": 5, "type": "load", "vm": 0.996, "pd": 90.0, "area": 1},
        {"id": 6, "type": "load", "vm": 1.013, "pd": 0.0, "area": 1},
        {"id": 7, "type": "load", "vm": 1.026, "pd": 100.0, "area": 1},
        {"id": 8, "type": "load", "vm": 1.016, "pd": 0.0, "area": 1},
        {"id": 9, "type": "load", "vm": 1.032, "pd": 125.0, "area": 1},
    ]
    branches = [
        {"from": 1, "to": 4, "x": 0.0576, "rating": 250.0},
        {"from": 4, "to": 5, "x": 0.0920, "rating": 250.0},
        {"from": 5, "to": 6, "x": 0.1700, "rating": 150.0},
        {"from": 3, "to": 6, "x": 0.0586, "rating": 300.0},
        {"from": 6, "to": 7, "x": 0.1008, "rating": 150.0},
        {"from": 7, "to": 8, "x": 0.0720, "rating": 250.0},
        {"from": 2, "to": 8, "x": 0.0625, "rating": 250.0},
        {"from": 8, "to": 9, "x": 0.1610, "rating": 250.0},
        {"from": 4, "to": 9, "x": 0.0850, "rating": 250.0},
    ]
    return {"name": "case9", "base_mva": 100.0, "buses": buses, "branches": branches}


# --- single-area RTS tables ---

AREA_LOADS = {
    1: 108, 2: 97, 3: 180, 4: 74, 5: 71, 6: 136, 7: 125, 8: 171, 9: 175,
    10: 195, 13: 265, 14: 194, 15: 317, 16: 100, 18: 333, 19: 181, 20: 128,
}

# bus -> list of (unit MW capacity, unit type); condenser at 14 replaced by
# a U50 hydro unit
AREA_UNITS = {
    1: [(20, "U20"), (20, "U20"), (76, "U76"), (76, "U76")],
    2: [(20, "U20"), (20, "U20"), (76, "U76"), (76, "U76")],
    7: [(100, "U100"), (100, "U100"), (100, "U100")],
    13: [(197, "U197"), (197, "U197"), (197, "U197")],
    14: [(50, "U50")],
    15: [(12, "U12")] * 5 + [(155, "U155")],
    16: [(155, "U155")],
    18: [(400, "U400")],
    21: [(400, "U400")],
    22: [(50, "U50")] * 6,
    23: [(155, "U155"), (155, "U155"), (350, "U350")],
}

# Merit order from published full-load heat rates and fuel costs
# (hydro free; nuclear ~6 $/MWh; coal U350 ~11, U155 ~12, U76 ~14;
#  #6-oil U197 ~22, U100 ~23; #2-oil U12 ~36, U20 ~44).
MERIT = {"U50": 0, "U400": 1, "U350": 2, "U155": 3, "U76": 4,
         "U197": 5, "U100": 6, "U12": 7, "U20": 8}

# (from, to, X, continuous rating MVA); R values dropped by the lossless model
AREA_BRANCHES = [
    (1, 2, 0.014, 175), (1, 3, 0.211, 175), (1, 5, 0.085, 175),
    (2, 4, 0.127, 175), (2, 6, 0.192, 175), (3, 9, 0.119, 175),
    (3, 24, 0.084, 400), (4, 9, 0.104, 175), (5, 10, 0.088, 175),
    (6, 10, 0.061, 175), (7, 8, 0.061, 175), (8, 9, 0.165, 175),
    (8, 10, 0.165, 175), (9, 11, 0.084, 400), (9, 12, 0.084, 400),
    (10, 11, 0.084, 400), (10, 12, 0.084, 400), (11, 13, 0.048, 500),
    (11, 14, 0.042, 500), (12, 13, 0.048, 500), (12, 23, 0.097, 500),
    (13, 23, 0.087, 500), (14, 16, 0.059, 500), (15, 16, 0.017, 500),
    (15, 21, 0.049, 500), (15, 21, 0.049, 500), (15, 24, 0.052, 500),
    (16, 17, 0.026, 500), (16, 19, 0.023, 500), (17, 18, 0.014, 500),
    (17, 22, 0.105, 500), (18, 21, 0.026, 500), (18, 21, 0.026, 500),
    (19, 20, 0.040, 500), (19, 20, 0.040, 500), (20, 23, 0.022, 500),
    (20, 23, 0.022, 500), (21, 22, 0.068, 500),
]

TIES = [
    (107, 203, 0.161, 175),
    (113, 215, 0.075, 500),
    (123, 217, 0.074, 500),
    (121, 325, 0.042, 500),    # inferred, see module docstring
    (223, 318, 0.042, 500),    # inferred, see module docstring
    (323, 325, 0.024, None),   # attachment of the extra area-3 bus; no
                               # thermal limit of its own (not a real line)
]


def merit_dispatch(total_load: float) -> dict[int, float]:
    """Fill unit capacities cheapest type first; marginal type shares uniformly."""
    by_rank: dict[int, list[tuple[int, float]]] = {}
    for bus, lst in AREA_UNITS.items():
        for cap, unit_type in lst:
            by_rank.setdefault(MERIT[unit_type], []).append((bus, float(cap)))
    dispatch: dict[int, float] = {}
    remaining = total_load
    for rank in sorted(by_rank):
        block = by_rank[rank]
        block_cap = sum(c for _, c in block)
        if remaining <= 0:
            break
        frac = min(1.0, remaining / block_cap)
        for bus, cap in block:
            dispatch[bus] = dispatch.get(bus, 0.0) + cap * frac
        remaining -= block_cap * frac
    return dispatch


def make_rts96() -> dict:
    buses = []
    branches = []
    dispatch = merit_dispatch(sum(AREA_LOADS.values()))
    for area in (1, 2, 3):
        off = 100 * area
        for local in range(1, 25):
            bid = off + local
            pd = float(AREA_LOADS.get(local, 0))
            pg = float(dispatch.get(local, 0.0))
            kind = "gen" if local in AREA_UNITS else "load"
            buses.append({"id": bid, "type": kind, "vm": 1.03,
                          "pg": pg, "pd": pd, "area": area})
        for i, j, x, rating in AREA_BRANCHES:
            branches.append({"from": off + i, "to": off + j, "x": x, "rating": float(rating)})
    buses.append({"id": 325, "type": "load", "vm": 1.03, "pg": 0.0, "pd": 0.0, "area": 3})
    for i, j, x, rating in TIES:
        entry = {"from": i, "to": j, "x": x}
        if rating is not None:
            entry["rating"] = float(rating)
        branches.append(entry)
    return {"name": "rts96", "base_mva": 100.0, "buses": buses, "branches": branches}


def main() -> None:
    os.makedirs(DATA, exist_ok=True)
    for name, payload in (("case9", make_case9()), ("rts96", make_rts96())):
        path = os.path.join(DATA, f"{name}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")
        print(f"wrote {path}: {len(payload['buses'])} buses, {len(payload['branches'])} branches")


if __name__ == "__main__":
    main()
