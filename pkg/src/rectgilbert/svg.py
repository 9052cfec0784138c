"""Static SVG rendering for tessellations, graphs and lattice traces.

The drawing convention follows the usual mathematical orientation: the
viewBox is exactly the domain box and the y axis points up, which we get
by wrapping everything in a translate/scale group rather than flipping
coordinates one by one. Output is plain text with no timestamps or other
varying content, so rendering the same scene twice gives identical bytes.
"""

from __future__ import annotations

from .engine import Tessellation
from .planar import PlanarGraph

_H_COLOR = "#1f77b4"
_V_COLOR = "#d62728"
_SEED_COLOR = "#222222"
_FACE_PALETTE = (
    "#c6dbef", "#fdd0a2", "#c7e9c0", "#dadaeb", "#f2f0f7", "#fee6ce",
)


def _fmt(value: float) -> str:
    text = f"{value:.6f}".rstrip("0").rstrip(".")
    return text if text not in ("", "-0") else "0"


def _svg_document(box_side: float, body: list[str], margin: float) -> str:
    lo = -margin
    span = box_side + 2 * margin
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{_fmt(lo)} {_fmt(lo)} {_fmt(span)} {_fmt(span)}" '
        f'width="640" height="640">\n'
        # Flip y so the origin sits bottom-left like in a plot.
        f'<g transform="translate(0,{_fmt(box_side)}) scale(1,-1)">\n'
    )
    tail = "</g>\n</svg>\n"
    return head + "".join(line + "\n" for line in body) + tail


def _box_rect(box_side: float, stroke: float) -> str:
    return (
        f'<rect x="0" y="0" width="{_fmt(box_side)}" height="{_fmt(box_side)}" '
        f'fill="none" stroke="#888888" stroke-width="{_fmt(stroke)}"/>'
    )


def render_segments_svg(
    path: str,
    segments,
    box_side: float,
    vertical_flags=None,
    seed_points=None,
) -> None:
    """Draw axis-aligned segments inside the domain box.

    `segments` is an iterable of (x0, y0, x1, y1). When vertical_flags is
    given, segments are colored by orientation; seed_points (x, y pairs)
    are drawn as dots on top.
    """
    box_side = float(box_side)
    stroke = box_side / 400.0
    body = [_box_rect(box_side, stroke)]
    for idx, (x0, y0, x1, y1) in enumerate(segments):
        if vertical_flags is not None:
            color = _V_COLOR if vertical_flags[idx] else _H_COLOR
        else:
            color = _H_COLOR
        body.append(
            f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" '
            f'stroke="{color}" stroke-width="{_fmt(stroke * 1.5)}" stroke-linecap="round"/>'
        )
    if seed_points is not None:
        r = stroke * 2.5
        for x, y in seed_points:
            body.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" fill="{_SEED_COLOR}"/>'
            )
    with open(path, "w", newline="\n") as fh:
        fh.write(_svg_document(box_side, body, margin=box_side * 0.02))


def render_tessellation_svg(path: str, tess: Tessellation) -> None:
    if tess.domain is None:
        raise ValueError("tessellation has no domain box to draw")
    segs = tess.segments()
    render_segments_svg(
        path,
        segs,
        tess.domain.side,
        vertical_flags=tess.vertical,
        seed_points=zip(tess.xs, tess.ys),
    )


def render_graph_svg(path: str, graph: PlanarGraph, fill_faces: bool = False) -> None:
    """Draw a planar graph; interior faces can be flood-colored."""
    box_side = float(graph.box_side)
    stroke = box_side / 400.0
    body = []
    if fill_faces:
        for face_idx, face in enumerate(graph.faces):
            if face_idx == graph.outer_face:
                continue
            pts = " ".join(
                f"{_fmt(graph.vertices[v].x)},{_fmt(graph.vertices[v].y)}" for v in face
            )
            color = _FACE_PALETTE[face_idx % len(_FACE_PALETTE)]
            body.append(f'<polygon points="{pts}" fill="{color}" stroke="none"/>')
    body.append(_box_rect(box_side, stroke))
    for v0, v1 in graph.edges:
        a, b = graph.vertices[v0], graph.vertices[v1]
        body.append(
            f'<line x1="{_fmt(a.x)}" y1="{_fmt(a.y)}" x2="{_fmt(b.x)}" y2="{_fmt(b.y)}" '
            f'stroke="#333333" stroke-width="{_fmt(stroke)}"/>'
        )
    r_junction = stroke * 2.0
    for vertex in graph.vertices:
        color = "#d62728" if vertex.kind == "t_junction" else "#555555"
        body.append(
            f'<circle cx="{_fmt(vertex.x)}" cy="{_fmt(vertex.y)}" '
            f'r="{_fmt(r_junction)}" fill="{color}"/>'
        )
    with open(path, "w", newline="\n") as fh:
        fh.write(_svg_document(box_side, body, margin=box_side * 0.02))
