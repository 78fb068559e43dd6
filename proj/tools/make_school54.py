#!/usr/bin/env python3
"""Regenerates assets/school54.json.

A 6 x 9 floor of corridor junctions and rooms (54 locations) with two exits:
the west exit at the top-left corner and the east exit at the bottom-right.
The team starts in the central hall. The shortest routes to both exits cross
hazard zones: a fire in the north-west wing and a flooded south-east wing.
Longer detours follow the main east-west corridor (row 3) and the two
stairwells (column 0 and column 8). The north-east classrooms are smoky and
the south-west gym is partly blocked by debris.
"""

import json
import pathlib

ROWS, COLS = 6, 9

PMF = {
    "safe": [0.92, 0.08, 0.0, 0.0, 0.0],
    "hall": [0.6, 0.3, 0.1, 0.0, 0.0],
    "smoke": [0.05, 0.25, 0.45, 0.2, 0.05],
    "debris": [0.1, 0.3, 0.35, 0.2, 0.05],
    "flood": [0.0, 0.05, 0.25, 0.45, 0.25],
    "fire": [0.0, 0.0, 0.05, 0.3, 0.65],
}


def zone(r, c):
    if (r, c) in ((0, 0), (5, 8)):
        return "safe"  # exits
    if c == 0 or c == 8 or r == 3:
        return "safe"  # stairwells and main corridor
    if r <= 2 and 1 <= c <= 3:
        return "fire"
    if r >= 4 and 5 <= c <= 7:
        return "flood"
    if r <= 2 and 5 <= c <= 7:
        return "smoke"
    if c == 4:
        return "hall"
    return "debris"  # south-west gym, rows 4-5, cols 1-4


# Interior walls: pairs of cells with no door between them.
WALLS = {
    ((1, 5), (1, 6)),
    ((4, 2), (5, 2)),
    ((4, 6), (5, 6)),
    ((0, 6), (0, 7)),
}


def node_id(r, c):
    return r * COLS + c


def main():
    nodes = []
    for r in range(ROWS):
        for c in range(COLS):
            z = zone(r, c)
            nodes.append({"id": node_id(r, c), "truth": PMF[z],
                          "label": f"{z}-r{r}c{c}"})
    arcs = []
    for r in range(ROWS):
        for c in range(COLS):
            for dr, dc in ((0, 1), (1, 0)):
                rr, cc = r + dr, c + dc
                if rr >= ROWS or cc >= COLS:
                    continue
                if ((r, c), (rr, cc)) in WALLS:
                    continue
                arcs.append([node_id(r, c), node_id(rr, cc)])
    doc = {
        "undirected": True,
        "nodes": nodes,
        "arcs": arcs,
        "start": node_id(2, 4),
        "exits": [node_id(0, 0), node_id(5, 8)],
    }
    out = pathlib.Path(__file__).resolve().parent.parent / "assets" / "school54.json"
    out.write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
