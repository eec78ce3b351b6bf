"""Bundled fixture graphs used by the tests and the CLI.

Each fixture is a plain graph document (vertices / edges / killing); see
graph.load_energy_form for the schema.
"""

import json
import os

__all__ = ["FIXTURES", "fixture", "write_fixtures"]


def _p2():
    return {
        "comment": "single edge, unit conductance, unit killing at both ends",
        "vertices": ["x", "y"],
        "edges": [["x", "y", 1]],
        "killing": {"x": 1, "y": 1},
    }


def _v1():
    return {
        "comment": "one vertex, killing 2, no edges",
        "vertices": ["x"],
        "edges": [],
        "killing": {"x": 2},
    }


def _k4c1():
    vs = ["a", "b", "c", "d"]
    return {
        "comment": "complete graph on 4 vertices, all conductances 1, uniform killing 1",
        "vertices": vs,
        "edges": [[u, v, 1] for i, u in enumerate(vs) for v in vs[i + 1 :]],
        "killing": {v: 1 for v in vs},
    }


def _k4_rooted():
    vs = ["a", "b", "c", "d"]
    return {
        "comment": "complete graph on 4 vertices, no killing (recurrent; root a tree sampler at any vertex)",
        "vertices": vs,
        "edges": [[u, v, 1] for i, u in enumerate(vs) for v in vs[i + 1 :]],
        "killing": {},
    }


def _cube():
    vs = [f"v{i}" for i in range(8)]
    # vertices of the 3-cube indexed by binary words; edges flip one bit
    edges = []
    for i in range(8):
        for bit in (1, 2, 4):
            j = i ^ bit
            if i < j:
                edges.append([f"v{i}", f"v{j}", 1])
    return {
        "comment": "3-cube graph, unit conductances, no killing (zeta fixture)",
        "vertices": vs,
        "edges": edges,
        "killing": {},
    }


def _counterexample():
    # A cube with vertices +-a, +-b, +-c, +-d whose top and bottom face
    # 4-cycles are subdivided by the midpoints +-al (of ab), +-be (of cd),
    # +-ga (of ac), +-de (of bd); 4 vertical edges join x to -x.  All
    # conductances and killing rates equal to 1.
    def face(sign):
        s = "" if sign > 0 else "-"
        return [
            [s + "a", s + "al", 1],
            [s + "al", s + "b", 1],
            [s + "b", s + "de", 1],
            [s + "de", s + "d", 1],
            [s + "d", s + "be", 1],
            [s + "be", s + "c", 1],
            [s + "c", s + "ga", 1],
            [s + "ga", s + "a", 1],
        ]

    names = ["a", "b", "c", "d", "al", "be", "ga", "de"]
    vertices = names + ["-" + v for v in names]
    edges = face(+1) + face(-1) + [[v, "-" + v, 1] for v in ["a", "b", "c", "d"]]
    return {
        "comment": "cube with subdivided horizontal faces; reflection x -> -x is the involution",
        "vertices": vertices,
        "edges": edges,
        "killing": {v: 1 for v in vertices},
    }


def _k3_wreath():
    vs = ["a", "b", "c"]
    return {
        "comment": "triangle with unit conductances and unit killing (wreath identity base)",
        "vertices": vs,
        "edges": [["a", "b", 1], ["b", "c", 1], ["a", "c", 1]],
        "killing": {v: 1 for v in vs},
    }


def _single_edge():
    return {
        "comment": "a single edge, no killing (tree; trivial zeta)",
        "vertices": ["x", "y"],
        "edges": [["x", "y", 1]],
        "killing": {},
    }


def _mirror_p2():
    # two disjoint copies of the p2 fixture joined by cross edges fixed by
    # the swap involution; the cross conductance matrix is diagonal, hence
    # nonnegative definite
    return {
        "comment": "reflection-positive fixture: swap involution a<->b across the two copies",
        "vertices": ["a1", "a2", "b1", "b2"],
        "edges": [["a1", "a2", 1], ["b1", "b2", 1], ["a1", "b1", 0.5], ["a2", "b2", 0.5]],
        "killing": {"a1": 1, "a2": 1, "b1": 1, "b2": 1},
    }


FIXTURES = {
    "p2": _p2,
    "v1": _v1,
    "k4c1": _k4c1,
    "k4_rooted": _k4_rooted,
    "cube": _cube,
    "counterexample": _counterexample,
    "k3_wreath": _k3_wreath,
    "single_edge": _single_edge,
    "mirror_p2": _mirror_p2,
}


def fixture(name):
    """Fixture document by name."""
    return FIXTURES[name]()


def write_fixtures(directory):
    """Write every fixture as <name>.json into the directory."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name, make in FIXTURES.items():
        path = os.path.join(directory, f"{name}.json")
        with open(path, "w") as fh:
            json.dump(make(), fh, indent=2)
            fh.write("\n")
        paths.append(path)
    return paths
