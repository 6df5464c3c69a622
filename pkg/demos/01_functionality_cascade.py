"""
Dependency propagation through an interdependent community
===========================================================

Builds a small community by hand (one power source, a substation, two wells,
a tank fed through a pipe, a bridge, and two retailers serving three
population cells), then knocks out components one at a time and walks through
how functionality cascades across the power, water, and access layers.
"""

import restopt as r

community = r.validate_community({
    "name": "walkthrough",
    "components": [
        {"id": "ps", "kind": "power_source", "location": [0.0, 0.0]},
        {"id": "sub_a", "kind": "substation", "location": [1000.0, 0.0]},
        {"id": "w_a", "kind": "water_well", "location": [1200.0, 400.0],
         "requires": ["sub_a"]},
        {"id": "w_b", "kind": "water_well", "location": [800.0, -400.0],
         "requires": ["sub_a"]},
        {"id": "t_a", "kind": "water_tank", "location": [1500.0, 200.0]},
        {"id": "p_a", "kind": "pipe_segment", "location": [1350.0, 300.0],
         "endpoints": ["w_a", "t_a"]},
        {"id": "br_1", "kind": "bridge", "location": [600.0, 300.0]},
        {"id": "ret_1", "kind": "retailer", "location": [1100.0, 250.0],
         "requires": ["sub_a", "t_a"]},
        {"id": "ret_2", "kind": "retailer", "location": [700.0, -200.0],
         "requires": ["sub_a", "w_b"]},
    ],
    "power_links": [["ps", "sub_a"]],
    "retailers": [
        {"component_id": "ret_1", "floor_area_m2": 4000.0, "access_bridges": ["br_1"]},
        {"component_id": "ret_2", "floor_area_m2": 2000.0},
    ],
    "cells": [
        {"id": "north", "location": [1300.0, 500.0], "population": 1000,
         "epn_node": "sub_a", "wn_node": "t_a"},
        {"id": "south", "location": [900.0, -500.0], "population": 2000,
         "epn_node": "sub_a", "wn_node": "w_b"},
        {"id": "west", "location": [100.0, 200.0], "population": 500,
         "epn_node": "ps"},
    ],
})

print(f"community '{community.name}': {len(community.components)} components, "
      f"{community.total_population} residents\n")


def report(title, damaged):
    fm = r.propagate_functionality(community, damaged)
    down = sorted(cid for cid, ok in fm.functional.items() if not ok)
    print(f"{title} (damaged: {sorted(damaged) or 'none'})")
    print(f"  nonfunctional: {down or 'none'}")
    for cell in fm.cells:
        flags = (f"power={'y' if cell.has_power else 'n'} "
                 f"water={'y' if cell.has_water else 'n'} "
                 f"retailer={'y' if cell.has_retailer_access else 'n'}")
        print(f"  cell {cell.cell_id:>5s}: {flags} -> benefited {cell.benefited:.0f}")
    print(f"  total benefited: {fm.benefited:.0f}\n")


# Everything intact: the full population is served.
report("baseline", set())

# The power source gates everything downstream: substation, wells, and both
# retailers lose service, so nobody is benefited even though most components
# are physically undamaged.
report("power source down", {"ps"})

# Losing the pipe does not hurt: the tank is an undamaged source on its own.
report("feeder pipe down", {"p_a"})

# Losing the tank cuts water to the north cell only.
report("tank down", {"t_a"})

# The bridge only gates access to ret_1; ret_2 keeps the community fed.
report("bridge down", {"br_1"})

# Both retailers down: utilities are fine but nobody has a place to shop.
report("all retailers down", {"ret_1", "ret_2"})

# The same queries drive the scheduler's objective: benefited_population is
# the h evaluated after every candidate repair batch.
print("benefited_population({'ps'}) =",
      r.benefited_population(community, {"ps"}))
