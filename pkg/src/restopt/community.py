"""Interdependent community model: networks, dependency propagation, benefit counting.

The community is a set of repairable components spanning four systems plus the
population they serve:

* electric power network (EPN): ``power_source``, ``substation``,
  ``tower_line_segment``, connected by an undirected adjacency (tower-line
  chains and explicit power links),
* water network (WN): ``water_well``, ``booster_pump``, ``water_tank``, and
  ``pipe_segment`` edges between them,
* ``bridge`` components gating road access,
* ``retailer`` components (food retailers) that need power, water, and bridge
  access, and
* population cells, each tied to the EPN/WN nodes that serve it.

Functionality propagates through the dependency structure:

* an EPN component works iff it is undamaged and reachable from an undamaged
  power source through undamaged EPN components,
* wells and booster pumps work iff undamaged and their required EPN node works;
  tanks additionally need their feeding pump (when one is declared) to work,
* water reaches a WN node iff a path of undamaged pipe segments connects it to
  a working source (non-pipe nodes on the path act as junctions and do not
  block flow),
* bridges work iff undamaged,
* a retailer works iff it is undamaged, every declared access bridge works,
  its required EPN node works, and water reaches its required WN node.

A cell is "benefited" when it has power, has water, and at least one retailer
in its choice set (all retailers, under the gravity model) is functional. An
optional mode weights each cell by the gravity-model probability mass of its
functional retailers instead of the any-retailer indicator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

EPN_KINDS = frozenset({"power_source", "substation", "tower_line_segment"})
WATER_SOURCE_KINDS = frozenset({"water_well", "booster_pump", "water_tank"})
WATER_KINDS = WATER_SOURCE_KINDS | {"pipe_segment"}
COMPONENT_KINDS = EPN_KINDS | WATER_KINDS | {"bridge", "retailer"}

DEFAULT_GRAVITY_EXPONENT = 2.0
DEFAULT_DISTANCE_FLOOR_M = 10.0
DEFAULT_TOWER_SPACING_M = 100.0


class CommunityValidationError(ValueError):
    """Raised when a community description violates its invariants.

    Carries the full list of problems, not just the first one found.
    """

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("invalid community config:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class Component:
    """One repairable infrastructure element."""

    id: str
    kind: str
    location: tuple[float, float]
    requires: frozenset[str] = frozenset()
    # pipe segments only: the two WN components this pipe connects
    endpoints: tuple[str, str] | None = None


@dataclass(frozen=True)
class Retailer:
    """Gravity-model attributes of a retailer component."""

    component_id: str
    floor_area: float
    access_bridges: frozenset[str] = frozenset()


@dataclass(frozen=True)
class PopulationCell:
    """A block of residents and the utility nodes that serve them.

    ``epn_node`` / ``wn_node`` may be None, meaning that utility is not
    network-dependent for this cell (it is always considered served).
    """

    id: str
    location: tuple[float, float]
    population: int
    epn_node: str | None = None
    wn_node: str | None = None


@dataclass(frozen=True)
class CellStatus:
    cell_id: str
    has_power: bool
    has_water: bool
    has_retailer_access: bool
    benefited: float


@dataclass(frozen=True)
class FunctionalityMap:
    """Result of one functionality propagation.

    ``functional`` marks components delivering their own service;
    ``water_served`` marks WN components that water actually reaches
    (a superset of functional water sources). ``benefited`` is in persons;
    it is an exact integer count in binary access mode and a fractional
    expectation in gravity-weighted mode.
    """

    functional: Mapping[str, bool]
    water_served: Mapping[str, bool]
    cells: tuple[CellStatus, ...]
    benefited: float


@dataclass(frozen=True)
class Community:
    """Validated, immutable community. Build through :func:`validate_community`."""

    components: Mapping[str, Component]
    retailers: tuple[Retailer, ...]
    cells: tuple[PopulationCell, ...]
    gravity_exponent: float = DEFAULT_GRAVITY_EXPONENT
    distance_floor: float = DEFAULT_DISTANCE_FLOOR_M
    weighted_access: bool = False
    name: str = "community"
    # derived, filled by validate_community
    epn_adjacency: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    water_adjacency: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    power_sources: tuple[str, ...] = ()
    cell_gravity: Mapping[str, np.ndarray] = field(default_factory=dict)

    @property
    def total_population(self) -> int:
        return sum(c.population for c in self.cells)

    @property
    def component_ids(self) -> frozenset[str]:
        return frozenset(self.components)

    def __eq__(self, other):  # np arrays in cell_gravity defeat dataclass eq
        if not isinstance(other, Community):
            return NotImplemented
        return (
            self.components == other.components
            and self.retailers == other.retailers
            and self.cells == other.cells
            and self.gravity_exponent == other.gravity_exponent
            and self.distance_floor == other.distance_floor
            and self.weighted_access == other.weighted_access
            and self.name == other.name
        )


def _distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def gravity_probabilities(
    cell: PopulationCell,
    retailers: Sequence[Retailer],
    locations: Mapping[str, tuple[float, float]],
    exponent: float = DEFAULT_GRAVITY_EXPONENT,
    distance_floor: float = DEFAULT_DISTANCE_FLOOR_M,
) -> np.ndarray:
    """Shopping-choice probabilities for one cell over ``retailers``.

    p_j is proportional to floor_area_j / d(cell, j)**exponent, with distances
    floored at ``distance_floor`` so coincident locations stay finite. The
    returned vector is aligned with the order of ``retailers`` and sums to 1.
    """
    if not retailers:
        raise ValueError("gravity_probabilities needs at least one retailer")
    weights = np.empty(len(retailers), dtype=float)
    for j, ret in enumerate(retailers):
        d = max(_distance(cell.location, locations[ret.component_id]), distance_floor)
        weights[j] = ret.floor_area / d**exponent
    return weights / weights.sum()


def _expand_tower_lines(raw_lines, comp_by_id, errors):
    """Turn tower-line endpoint declarations into segment components + chain edges."""
    segments: list[Component] = []
    edges: list[tuple[str, str]] = []
    for k, line in enumerate(raw_lines):
        if not isinstance(line, dict):
            errors.append(f"tower_lines[{k}]: must be a mapping")
            continue
        prefix = line.get("id_prefix")
        src = line.get("from")
        dst = line.get("to")
        spacing = float(line.get("spacing_m", DEFAULT_TOWER_SPACING_M))
        label = prefix or f"tower_lines[{k}]"
        if not prefix:
            errors.append(f"{label}: missing id_prefix")
            continue
        if spacing <= 0:
            errors.append(f"{label}: spacing_m must be positive")
            continue
        bad = False
        for end in (src, dst):
            if end not in comp_by_id:
                errors.append(f"{label}: endpoint '{end}' is not a component")
                bad = True
            elif comp_by_id[end].kind not in EPN_KINDS:
                errors.append(f"{label}: endpoint '{end}' is not an EPN component")
                bad = True
        if bad:
            continue
        (x0, y0), (x1, y1) = comp_by_id[src].location, comp_by_id[dst].location
        length = _distance((x0, y0), (x1, y1))
        n_seg = max(1, math.ceil(length / spacing))
        chain = [src]
        for i in range(n_seg):
            frac = (i + 0.5) / n_seg
            seg = Component(
                id=f"{prefix}_{i:02d}",
                kind="tower_line_segment",
                location=(x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)),
            )
            segments.append(seg)
            chain.append(seg.id)
        chain.append(dst)
        edges.extend(zip(chain[:-1], chain[1:]))
    return segments, edges


def _find_requires_cycle(components: Mapping[str, Component]) -> list[str] | None:
    """Return one cycle in the requires graph (as an id list), or None."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {cid: WHITE for cid in components}
    for start in sorted(components):
        if color[start] != WHITE:
            continue
        stack = [(start, iter(sorted(components[start].requires)))]
        color[start] = GRAY
        path = [start]
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if nxt not in components:
                    continue
                if color[nxt] == GRAY:
                    return path[path.index(nxt):] + [nxt]
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    path.append(nxt)
                    stack.append((nxt, iter(sorted(components[nxt].requires))))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                path.pop()
                stack.pop()
    return None


def validate_community(config: Mapping) -> Community:
    """Check a parsed community description and build the immutable model.

    All invariant violations are collected and reported together in a
    :class:`CommunityValidationError`.
    """
    errors: list[str] = []
    if not isinstance(config, Mapping):
        raise CommunityValidationError(["community section must be a mapping"])
    for key in ("components", "tower_lines", "power_links", "retailers", "cells"):
        value = config.get(key)
        if value is not None and not isinstance(value, (list, tuple)):
            raise CommunityValidationError([f"'{key}' must be a list"])

    raw_components = config.get("components", []) or []
    comp_by_id: dict[str, Component] = {}
    for k, raw in enumerate(raw_components):
        if not isinstance(raw, Mapping):
            errors.append(f"components[{k}]: must be a mapping")
            continue
        cid = raw.get("id")
        label = cid if cid else f"components[{k}]"
        if not cid or not isinstance(cid, str):
            errors.append(f"components[{k}]: missing or non-string id")
            continue
        kind = raw.get("kind")
        if kind not in COMPONENT_KINDS:
            errors.append(f"{label}: unknown kind '{kind}'")
            continue
        loc = raw.get("location")
        if not (isinstance(loc, (list, tuple)) and len(loc) == 2):
            errors.append(f"{label}: location must be an [x, y] pair")
            continue
        endpoints = raw.get("endpoints")
        if kind == "pipe_segment":
            if not (isinstance(endpoints, (list, tuple)) and len(endpoints) == 2):
                errors.append(f"{label}: pipe_segment needs exactly two endpoints")
                endpoints = None
        elif endpoints is not None:
            errors.append(f"{label}: endpoints only allowed on pipe_segment")
            endpoints = None
        comp = Component(
            id=cid,
            kind=kind,
            location=(float(loc[0]), float(loc[1])),
            requires=frozenset(raw.get("requires") or ()),
            endpoints=tuple(endpoints) if endpoints else None,
        )
        if cid in comp_by_id:
            errors.append(f"{label}: duplicate component id")
        else:
            comp_by_id[cid] = comp

    tower_segments, tower_edges = _expand_tower_lines(
        config.get("tower_lines", []) or [], comp_by_id, errors
    )
    for seg in tower_segments:
        if seg.id in comp_by_id:
            errors.append(f"{seg.id}: generated tower segment id collides with a component")
        else:
            comp_by_id[seg.id] = seg

    # cross references
    for comp in comp_by_id.values():
        if comp.id in comp.requires:
            errors.append(f"{comp.id}: requires itself")
        for ref in sorted(comp.requires):
            if ref not in comp_by_id:
                errors.append(f"{comp.id}: requires unknown component '{ref}'")
        if comp.endpoints:
            for ref in comp.endpoints:
                if ref == comp.id:
                    errors.append(f"{comp.id}: pipe endpoint references itself")
                elif ref not in comp_by_id:
                    errors.append(f"{comp.id}: endpoint references unknown component '{ref}'")
                elif comp_by_id[ref].kind not in WATER_KINDS:
                    errors.append(f"{comp.id}: endpoint '{ref}' is not a water component")

    cycle = _find_requires_cycle(
        {cid: c for cid, c in comp_by_id.items()
         if all(r in comp_by_id for r in c.requires)}
    )
    if cycle:
        errors.append("dependency cycle in requires: " + " -> ".join(cycle))

    power_links = []
    for k, pair in enumerate(config.get("power_links", []) or []):
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            errors.append(f"power_links[{k}]: must be a pair of component ids")
            continue
        a, b = pair
        ok = True
        for end in (a, b):
            if end not in comp_by_id:
                errors.append(f"power_links[{k}]: unknown component '{end}'")
                ok = False
            elif comp_by_id[end].kind not in EPN_KINDS:
                errors.append(f"power_links[{k}]: '{end}' is not an EPN component")
                ok = False
        if ok:
            power_links.append((a, b))

    retailers: list[Retailer] = []
    seen_ret: set[str] = set()
    for k, raw in enumerate(config.get("retailers", []) or []):
        if not isinstance(raw, Mapping):
            errors.append(f"retailers[{k}]: must be a mapping")
            continue
        rid = raw.get("component_id")
        label = rid or f"retailers[{k}]"
        if rid not in comp_by_id:
            errors.append(f"{label}: retailer record references unknown component")
            continue
        if comp_by_id[rid].kind != "retailer":
            errors.append(f"{label}: component is not of kind retailer")
            continue
        if rid in seen_ret:
            errors.append(f"{label}: duplicate retailer record")
            continue
        seen_ret.add(rid)
        area = float(raw.get("floor_area_m2", 0.0))
        if area <= 0:
            errors.append(f"{label}: floor_area_m2 must be positive")
        bridges = frozenset(raw.get("access_bridges") or ())
        for b in sorted(bridges):
            if b not in comp_by_id:
                errors.append(f"{label}: access bridge '{b}' is not a component")
            elif comp_by_id[b].kind != "bridge":
                errors.append(f"{label}: access component '{b}' is not a bridge")
        retailers.append(Retailer(component_id=rid, floor_area=area, access_bridges=bridges))
    for cid, comp in sorted(comp_by_id.items()):
        if comp.kind == "retailer" and cid not in seen_ret:
            errors.append(f"{cid}: retailer component has no retailer record (floor area)")

    cells: list[PopulationCell] = []
    seen_cells: set[str] = set()
    for k, raw in enumerate(config.get("cells", []) or []):
        if not isinstance(raw, Mapping):
            errors.append(f"cells[{k}]: must be a mapping")
            continue
        cid = raw.get("id") or f"cell_{k}"
        loc = raw.get("location") or (0.0, 0.0)
        if not (isinstance(loc, (list, tuple)) and len(loc) == 2):
            errors.append(f"{cid}: cell location must be an [x, y] pair")
            loc = (0.0, 0.0)
        pop = raw.get("population", 0)
        if not isinstance(pop, int) or pop < 0:
            errors.append(f"{cid}: population must be a nonnegative integer")
            pop = max(int(pop), 0) if isinstance(pop, (int, float)) else 0
        if cid in seen_cells:
            errors.append(f"{cid}: duplicate cell id")
        seen_cells.add(cid)
        epn_node = raw.get("epn_node")
        wn_node = raw.get("wn_node")
        if epn_node is not None:
            if epn_node not in comp_by_id:
                errors.append(f"{cid}: epn_node '{epn_node}' is not a component")
            elif comp_by_id[epn_node].kind not in EPN_KINDS:
                errors.append(f"{cid}: epn_node '{epn_node}' is not an EPN component")
        if wn_node is not None:
            if wn_node not in comp_by_id:
                errors.append(f"{cid}: wn_node '{wn_node}' is not a component")
            elif comp_by_id[wn_node].kind not in WATER_KINDS:
                errors.append(f"{cid}: wn_node '{wn_node}' is not a water component")
        cells.append(PopulationCell(
            id=cid,
            location=(float(loc[0]), float(loc[1])),
            population=pop,
            epn_node=epn_node,
            wn_node=wn_node,
        ))

    gravity_exponent = float(config.get("gravity_exponent", DEFAULT_GRAVITY_EXPONENT))
    distance_floor = float(config.get("distance_floor_m", DEFAULT_DISTANCE_FLOOR_M))
    if gravity_exponent < 0:
        errors.append("gravity_exponent must be nonnegative")
    if distance_floor <= 0:
        errors.append("distance_floor_m must be positive")

    if errors:
        raise CommunityValidationError(errors)

    # adjacency
    epn_adj: dict[str, set[str]] = {
        cid: set() for cid, c in comp_by_id.items() if c.kind in EPN_KINDS
    }
    for a, b in tower_edges + power_links:
        epn_adj[a].add(b)
        epn_adj[b].add(a)
    water_adj: dict[str, set[str]] = {
        cid: set() for cid, c in comp_by_id.items() if c.kind in WATER_KINDS
    }
    for cid, comp in comp_by_id.items():
        if comp.kind == "pipe_segment" and comp.endpoints:
            for end in comp.endpoints:
                water_adj[cid].add(end)
                water_adj[end].add(cid)

    retailers_t = tuple(retailers)
    cells_t = tuple(cells)
    locations = {cid: c.location for cid, c in comp_by_id.items()}
    cell_gravity = {}
    if retailers_t:
        for cell in cells_t:
            cell_gravity[cell.id] = gravity_probabilities(
                cell, retailers_t, locations, gravity_exponent, distance_floor
            )

    return Community(
        components=dict(sorted(comp_by_id.items())),
        retailers=retailers_t,
        cells=cells_t,
        gravity_exponent=gravity_exponent,
        distance_floor=distance_floor,
        weighted_access=bool(config.get("weighted_access", False)),
        name=str(config.get("name", "community")),
        epn_adjacency={k: tuple(sorted(v)) for k, v in epn_adj.items()},
        water_adjacency={k: tuple(sorted(v)) for k, v in water_adj.items()},
        power_sources=tuple(sorted(
            cid for cid, c in comp_by_id.items() if c.kind == "power_source"
        )),
        cell_gravity=cell_gravity,
    )


def _powered_epn(community: Community, damaged: frozenset[str]) -> set[str]:
    """EPN components reachable from an undamaged source through undamaged EPN nodes."""
    powered: set[str] = set()
    stack = [s for s in community.power_sources if s not in damaged]
    powered.update(stack)
    adj = community.epn_adjacency
    while stack:
        node = stack.pop()
        for nxt in adj.get(node, ()):
            if nxt in powered or nxt in damaged:
                continue
            powered.add(nxt)
            stack.append(nxt)
    return powered


def _water_reach(community: Community, damaged: frozenset[str],
                 functional: Mapping[str, bool]) -> set[str]:
    """WN components that water reaches through undamaged pipes from functional sources."""
    comps = community.components
    adj = community.water_adjacency
    visited: set[str] = set()
    stack = [
        cid for cid in adj
        if comps[cid].kind in WATER_SOURCE_KINDS and functional.get(cid, False)
    ]
    visited.update(stack)
    while stack:
        node = stack.pop()
        for nxt in adj.get(node, ()):
            if nxt in visited:
                continue
            # pipes block when damaged; junction nodes pass flow through
            if comps[nxt].kind == "pipe_segment" and nxt in damaged:
                continue
            visited.add(nxt)
            stack.append(nxt)
    return visited


def propagate_functionality(community: Community, damaged_set: Iterable[str]) -> FunctionalityMap:
    """Fixed-point functionality propagation for a given damage pattern.

    Pure function: safe to call concurrently, identical output on re-runs.
    """
    damaged = frozenset(damaged_set)
    unknown = damaged - community.component_ids
    if unknown:
        raise ValueError(f"damaged_set references unknown components: {sorted(unknown)}")

    comps = community.components
    powered = _powered_epn(community, damaged)
    access_bridges = {r.component_id: r.access_bridges for r in community.retailers}
    functional: dict[str, bool] = {cid: False for cid in comps}
    water_served: dict[str, bool] = {
        cid: False for cid, c in comps.items() if c.kind in WATER_KINDS
    }

    def requirement_ok(consumer: Component, ref: str) -> bool:
        provider = comps[ref]
        # a water component consuming from another water component needs the
        # provider itself working (feed relation, e.g. tank fed by pump);
        # retailers need water delivered at their node
        if provider.kind in WATER_KINDS and consumer.kind == "retailer":
            return water_served[ref]
        return functional[ref]

    for _ in range(len(comps) + 2):
        changed = False
        for cid, comp in comps.items():
            if cid in damaged:
                ok = False
            elif comp.kind in EPN_KINDS:
                ok = cid in powered and all(requirement_ok(comp, r) for r in comp.requires)
            elif comp.kind == "pipe_segment" or comp.kind == "bridge":
                ok = True
            elif comp.kind in WATER_SOURCE_KINDS:
                ok = all(requirement_ok(comp, r) for r in comp.requires)
            else:  # retailer: utilities via requires, plus every access bridge
                ok = all(requirement_ok(comp, r) for r in comp.requires) and all(
                    functional[b] for b in access_bridges.get(cid, ())
                )
            if ok != functional[cid]:
                functional[cid] = ok
                changed = True
        reach = _water_reach(community, damaged, functional)
        for cid in water_served:
            served = cid in reach and cid not in damaged
            if served != water_served[cid]:
                water_served[cid] = served
                changed = True
        # retailer water requirements observe water_served, so one more pass
        # may be needed after reach changes
        if not changed:
            break

    retailers = community.retailers
    retailer_functional = np.array(
        [functional[r.component_id] for r in retailers], dtype=bool
    )

    statuses: list[CellStatus] = []
    total = 0.0
    for cell in community.cells:
        has_power = cell.epn_node is None or functional[cell.epn_node]
        if cell.wn_node is None:
            has_water = True
        elif comps[cell.wn_node].kind in WATER_KINDS:
            has_water = water_served[cell.wn_node]
        else:
            has_water = functional[cell.wn_node]
        if not retailers:
            # no retailers modeled: access constraint is inapplicable
            access_weight = 1.0
            has_access = True
        elif community.weighted_access:
            probs = community.cell_gravity[cell.id]
            access_weight = float(probs[retailer_functional].sum())
            has_access = access_weight > 0.0
        else:
            has_access = bool(retailer_functional.any())
            access_weight = 1.0 if has_access else 0.0
        benefited = cell.population * access_weight if (has_power and has_water) else 0.0
        statuses.append(CellStatus(cell.id, has_power, has_water, has_access, benefited))
        total += benefited

    if not community.weighted_access:
        total = float(round(total))
    return FunctionalityMap(
        functional=functional,
        water_served=water_served,
        cells=tuple(statuses),
        benefited=total,
    )


def benefited_population(community: Community, damaged_set: Iterable[str]) -> float:
    """Persons with power, water, and a functional accessible retailer."""
    return propagate_functionality(community, damaged_set).benefited
