"""Planar graph extraction from a frozen tessellation clipped to its box.

Vertices are the four box corners plus one junction per half-ray: the stop
point for a ray blocked inside the box, or the boundary crossing for a ray
whose closed segment reaches the box edge. Junction coordinates are copies of
input coordinates (one from each participating seed, or a box side value), so
vertices hash and deduplicate exactly with no epsilon.

Faces come from a half-edge traversal. Every edge is axis aligned, so the
"most counterclockwise turn" rule reduces to scanning the four compass
directions; interior faces come out counterclockwise, the outer face
clockwise (negative signed area). For a frozen configuration with n seeds in
general position the counts obey

    vertices = 2n + 4,  edges = 3n + 4,  bounded faces = n + 1,

and every T-junction has degree 3, every corner degree 2. `euler_check`
reports all of these together with the Euler relation V - E + F = 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .engine import Tessellation, _MINUS, _PLUS


class NonTJunctionError(ValueError):
    """Raised when two clipped segments cross without forming a T-junction."""


@dataclass(frozen=True)
class GraphVertex:
    x: float
    y: float
    kind: str  # "corner" or "t_junction"


@dataclass
class PlanarGraph:
    """Vertices, undirected edges, and face cycles of the clipped tessellation."""

    vertices: list[GraphVertex]
    edges: list[tuple[int, int]]
    faces: list[list[int]]  # vertex cycles; interior ones counterclockwise
    outer_face: int  # index into `faces`
    box_side: float

    @property
    def n_rectangles(self) -> int:
        return len(self.faces) - 1

    def degree_of(self, vertex_index: int) -> int:
        return sum(1 for a, b in self.edges if vertex_index in (a, b))


# Compass encoding in counterclockwise order; the face walk turns as far
# counterclockwise as the vertex allows.
_EAST, _NORTH, _WEST, _SOUTH = 0, 1, 2, 3


def _direction(ax: float, ay: float, bx: float, by: float) -> int:
    if ay == by:
        return _EAST if bx > ax else _WEST
    return _NORTH if by > ay else _SOUTH


def extract_graph(tess: Tessellation) -> PlanarGraph:
    """Clip all segments to the box and build the induced planar subdivision.

    Requires a box domain and a horizon of at least the box side, so the
    configuration inside the box is frozen and independent of the horizon.
    """
    if tess.domain is None:
        raise ValueError("tessellation has no box domain")
    side = tess.domain.side
    if tess.horizon < side:
        raise ValueError(
            f"horizon {tess.horizon} is below the box side {side}; "
            "grow to at least the box side before extracting"
        )
    n = tess.n_seeds
    xs, ys, vertical = tess.xs, tess.ys, tess.vertical
    if n and not (
        (xs > 0.0).all() and (xs < side).all() and (ys > 0.0).all() and (ys < side).all()
    ):
        raise ValueError("seeds must lie strictly inside the box")

    vertex_index: dict[tuple[float, float], int] = {}
    vertices: list[GraphVertex] = []

    def add_vertex(x: float, y: float, kind: str) -> int:
        key = (x, y)
        if key in vertex_index:
            return vertex_index[key]
        idx = len(vertices)
        vertex_index[key] = idx
        vertices.append(GraphVertex(x, y, kind))
        return idx

    for cx, cy in ((0.0, 0.0), (side, 0.0), (side, side), (0.0, side)):
        add_vertex(cx, cy, "corner")

    # Junction bookkeeping: vertices sitting on each seed's segment and on
    # each of the four box edges (keyed by the coordinate that varies).
    on_segment: list[list[tuple[float, int]]] = [[] for _ in range(n)]
    boundary: dict[str, list[tuple[float, int]]] = {
        "bottom": [], "top": [], "left": [], "right": [],
    }

    along = np.where(vertical, ys, xs)
    lo = along - tess.lengths[:, _MINUS]
    hi = along + tess.lengths[:, _PLUS]

    for i in range(n):
        if vertical[i]:
            line, (low_name, high_name) = xs[i], ("bottom", "top")
        else:
            line, (low_name, high_name) = ys[i], ("left", "right")
        for s, tip in ((_PLUS, hi[i]), (_MINUS, lo[i])):
            j = int(tess.blocker[i, s])
            blocked_inside = j >= 0 and 0.0 <= tip <= side
            if blocked_inside:
                # Exact stop point: my line coordinate stays, the other comes
                # from the blocker's line.
                stop_along = xs[j] if not vertical[i] else ys[j]
                if vertical[i]:
                    vx, vy = xs[i], ys[j]
                else:
                    vx, vy = xs[j], ys[i]
                v_idx = add_vertex(float(vx), float(vy), "t_junction")
                on_segment[i].append((float(stop_along), v_idx))
                on_segment[j].append((float(line), v_idx))
            else:
                # The closed segment reaches the boundary (free rays always do
                # when horizon >= side; blocked-outside rays cross on the way).
                if s == _PLUS and tip >= side:
                    bx, by = (line, side) if vertical[i] else (side, line)
                    v_idx = add_vertex(float(bx), float(by), "t_junction")
                    on_segment[i].append((side, v_idx))
                    boundary[high_name].append((float(line), v_idx))
                elif s == _MINUS and tip <= 0.0:
                    bx, by = (line, 0.0) if vertical[i] else (0.0, line)
                    v_idx = add_vertex(float(bx), float(by), "t_junction")
                    on_segment[i].append((0.0, v_idx))
                    boundary[low_name].append((float(line), v_idx))
                else:
                    raise NonTJunctionError(
                        f"half-ray ({int(tess.seed_ids[i])},"
                        f"{'+' if s == _PLUS else '-'}) ends inside the box "
                        "without a blocker; configuration is not frozen"
                    )

    _check_no_transversal_crossings(tess, side, vertex_index)

    edges: list[tuple[int, int]] = []
    adjacency: dict[int, dict[int, int]] = {}

    def add_edge(a: int, b: int) -> None:
        va, vb = vertices[a], vertices[b]
        edges.append((a, b))
        adjacency.setdefault(a, {})[_direction(va.x, va.y, vb.x, vb.y)] = b
        adjacency.setdefault(b, {})[_direction(vb.x, vb.y, va.x, va.y)] = a

    for i in range(n):
        pts = sorted(set(on_segment[i]))
        if len(pts) < 2:
            raise NonTJunctionError(
                f"seed {int(tess.seed_ids[i])} has a degenerate clipped segment"
            )
        for (_, a), (_, b) in zip(pts, pts[1:]):
            add_edge(a, b)

    corner_keys = {
        "bottom": ((0.0, 0.0), (side, 0.0)),
        "top": ((0.0, side), (side, side)),
        "left": ((0.0, 0.0), (0.0, side)),
        "right": ((side, 0.0), (side, side)),
    }
    for name, pts in boundary.items():
        (k0, k1) = corner_keys[name]
        full = sorted(set(pts) | {(k0[0] if name in ("bottom", "top") else k0[1], vertex_index[k0]),
                                  (k1[0] if name in ("bottom", "top") else k1[1], vertex_index[k1])})
        for (_, a), (_, b) in zip(full, full[1:]):
            add_edge(a, b)

    faces, outer = _trace_faces(vertices, adjacency)
    return PlanarGraph(
        vertices=vertices, edges=edges, faces=faces, outer_face=outer, box_side=side
    )


def _check_no_transversal_crossings(
    tess: Tessellation, side: float, vertex_index: dict
) -> None:
    """Reject configurations where two clipped segments cross interior-to-interior."""
    n = tess.n_seeds
    if n == 0:
        return
    xs, ys, vertical = tess.xs, tess.ys, tess.vertical
    along = np.where(vertical, ys, xs)
    lo = np.maximum(along - tess.lengths[:, _MINUS], 0.0)
    hi = np.minimum(along + tess.lengths[:, _PLUS], side)
    h = np.flatnonzero(~vertical)
    v = np.flatnonzero(vertical)
    if h.size == 0 or v.size == 0:
        return
    # Broadcast horizontal rows against vertical columns.
    cross_x = (xs[v][None, :] > lo[h][:, None]) & (xs[v][None, :] < hi[h][:, None])
    cross_y = (ys[h][:, None] > lo[v][None, :]) & (ys[h][:, None] < hi[v][None, :])
    both = cross_x & cross_y
    if both.any():
        ih, iv = np.argwhere(both)[0]
        i, j = int(h[ih]), int(v[iv])
        key = (float(xs[j]), float(ys[i]))
        if key not in vertex_index:
            raise NonTJunctionError(
                f"segments of seeds {int(tess.seed_ids[i])} and "
                f"{int(tess.seed_ids[j])} cross transversally at {key} "
                "without a junction"
            )


def _trace_faces(
    vertices: list[GraphVertex], adjacency: dict[int, dict[int, int]]
) -> tuple[list[list[int]], int]:
    """Orbit decomposition of the next-half-edge map; returns (faces, outer index)."""
    visited: set[tuple[int, int]] = set()
    faces: list[list[int]] = []
    outer = -1
    for start in sorted(adjacency):
        for d0 in sorted(adjacency[start]):
            if (start, d0) in visited:
                continue
            cycle: list[int] = []
            v, d = start, d0
            area2 = 0.0
            while (v, d) not in visited:
                visited.add((v, d))
                w = adjacency[v][d]
                pv, pw = vertices[v], vertices[w]
                area2 += pv.x * pw.y - pw.x * pv.y
                cycle.append(v)
                # Walk with the face on the left: from the reversed incoming
                # direction, take the first outgoing direction clockwise.
                back = (d + 2) % 4
                for turn in (1, 2, 3, 0):
                    cand = (back - turn) % 4
                    if cand in adjacency[w]:
                        v, d = w, cand
                        break
            faces.append(cycle)
            if area2 < 0.0:
                outer = len(faces) - 1
    if outer < 0:
        raise NonTJunctionError("no outer face found; graph is not a subdivision")
    return faces, outer


def _face_is_rectangle(vertices: list[GraphVertex], cycle: list[int]) -> bool:
    """True if the cycle has exactly four direction changes (collinear chains merged)."""
    m = len(cycle)
    dirs = []
    for k in range(m):
        a = vertices[cycle[k]]
        b = vertices[cycle[(k + 1) % m]]
        dirs.append(_direction(a.x, a.y, b.x, b.y))
    turns = sum(1 for k in range(m) if dirs[k] != dirs[(k + 1) % m])
    return turns == 4


@dataclass(frozen=True)
class EulerReport:
    """Observed vs expected counts for one extracted graph."""

    n_seeds: int
    n_vertices: int
    n_edges: int
    n_faces: int  # includes the outer face
    n_rectangles: int
    expected_vertices: int
    expected_edges: int
    expected_rectangles: int
    euler_ok: bool
    vertices_ok: bool
    edges_ok: bool
    rectangles_ok: bool
    junction_degrees_ok: bool
    corner_degrees_ok: bool
    faces_rectangular: bool

    @property
    def passed(self) -> bool:
        return (
            self.euler_ok
            and self.vertices_ok
            and self.edges_ok
            and self.rectangles_ok
            and self.junction_degrees_ok
            and self.corner_degrees_ok
            and self.faces_rectangular
        )

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__} | {
            "passed": self.passed
        }


def euler_check(graph: PlanarGraph, n_seeds: int) -> EulerReport:
    """Check the closed-form counts and the Euler relation; never raises."""
    v = len(graph.vertices)
    e = len(graph.edges)
    f = len(graph.faces)
    degrees = np.zeros(v, dtype=np.int64)
    for a, b in graph.edges:
        degrees[a] += 1
        degrees[b] += 1
    junction_ok = all(
        degrees[k] == 3 for k, gv in enumerate(graph.vertices) if gv.kind == "t_junction"
    )
    corner_ok = all(
        degrees[k] == 2 for k, gv in enumerate(graph.vertices) if gv.kind == "corner"
    )
    rect_ok_geom = all(
        _face_is_rectangle(graph.vertices, cyc)
        for k, cyc in enumerate(graph.faces)
        if k != graph.outer_face
    )
    return EulerReport(
        n_seeds=n_seeds,
        n_vertices=v,
        n_edges=e,
        n_faces=f,
        n_rectangles=graph.n_rectangles,
        expected_vertices=2 * n_seeds + 4,
        expected_edges=3 * n_seeds + 4,
        expected_rectangles=n_seeds + 1,
        euler_ok=v - e + f == 2,
        vertices_ok=v == 2 * n_seeds + 4,
        edges_ok=e == 3 * n_seeds + 4,
        rectangles_ok=graph.n_rectangles == n_seeds + 1,
        junction_degrees_ok=junction_ok,
        corner_degrees_ok=corner_ok,
        faces_rectangular=rect_ok_geom,
    )


def graph_to_json(graph: PlanarGraph, path: str) -> None:
    """Write vertices, edges, and face cycles as deterministic JSON."""
    payload = {
        "box_side": graph.box_side,
        "vertices": [
            {"x": gv.x, "y": gv.y, "kind": gv.kind} for gv in graph.vertices
        ],
        "edges": [[a, b] for a, b in graph.edges],
        "faces": graph.faces,
        "outer_face": graph.outer_face,
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
