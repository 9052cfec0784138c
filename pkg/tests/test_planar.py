"""Planar subdivision extraction and the vertex/edge/face count identities."""

import dataclasses
import json

import pytest

from rectgilbert.engine import simulate
from rectgilbert.geometry import BoxDomain, Direction, Point2
from rectgilbert.planar import (
    euler_check,
    extract_graph,
    graph_to_json,
)
from rectgilbert.sampling import SeedPoint, SeedSet, sample_poisson

H = Direction.HORIZONTAL
V = Direction.VERTICAL


def tessellate(points, box_side, horizon=None):
    seeds = tuple(
        SeedPoint(id=k, position=Point2(x, y), mark=m)
        for k, (x, y, m) in enumerate(points)
    )
    ss = SeedSet(seeds, domain=BoxDomain(box_side), intensity=1.0)
    return simulate(ss, horizon=horizon if horizon is not None else box_side)


def test_empty_box_is_one_rectangle():
    graph = extract_graph(tessellate([], 4.0))
    assert len(graph.vertices) == 4
    assert len(graph.edges) == 4
    assert len(graph.faces) == 2
    assert graph.n_rectangles == 1
    report = euler_check(graph, n_seeds=0)
    assert report.passed


def test_single_seed_counts():
    graph = extract_graph(tessellate([(2.0, 2.0, H)], 4.0))
    assert len(graph.vertices) == 6
    assert len(graph.edges) == 7
    assert len(graph.faces) == 3
    assert graph.n_rectangles == 2
    assert euler_check(graph, n_seeds=1).passed


def test_two_seed_counts_and_degrees():
    graph = extract_graph(tessellate([(1.0, 1.0, H), (2.0, 3.0, V)], 4.0))
    assert len(graph.vertices) == 8
    assert len(graph.edges) == 10
    assert graph.n_rectangles == 3
    for k, gv in enumerate(graph.vertices):
        want = 2 if gv.kind == "corner" else 3
        assert graph.degree_of(k) == want
    assert euler_check(graph, n_seeds=2).passed


def test_junction_count_is_twice_the_seed_count():
    ss = sample_poisson(BoxDomain(12.0), 1.0, rng_seed=44)
    graph = extract_graph(simulate(ss, horizon=12.0))
    junctions = sum(1 for gv in graph.vertices if gv.kind == "t_junction")
    assert junctions == 2 * len(ss)


def test_random_instances_satisfy_all_identities():
    for k in range(30):
        ss = sample_poisson(BoxDomain(15.0), 1.0, rng_seed=700 + k)
        graph = extract_graph(simulate(ss, horizon=15.0))
        report = euler_check(graph, n_seeds=len(ss))
        assert report.passed, dataclasses.asdict(report)


def test_graph_does_not_depend_on_the_horizon():
    ss = sample_poisson(BoxDomain(10.0), 1.0, rng_seed=55)
    g1 = extract_graph(simulate(ss, horizon=10.0))
    g2 = extract_graph(simulate(ss, horizon=30.0))
    assert g1.vertices == g2.vertices
    assert g1.edges == g2.edges
    assert sorted(map(sorted, g1.faces)) == sorted(map(sorted, g2.faces))


def test_outer_face_is_flagged():
    graph = extract_graph(tessellate([(2.0, 2.0, H)], 4.0))
    assert 0 <= graph.outer_face < len(graph.faces)
    # the outer face touches all four corners
    outer = set(graph.faces[graph.outer_face])
    corners = {k for k, gv in enumerate(graph.vertices) if gv.kind == "corner"}
    assert corners <= outer


def test_extraction_requires_frozen_horizon():
    with pytest.raises(ValueError):
        extract_graph(tessellate([(2.0, 2.0, H)], 4.0, horizon=2.0))


def test_corrupted_graph_fails_the_check():
    graph = extract_graph(tessellate([(2.0, 2.0, H)], 4.0))
    broken = dataclasses.replace(graph, edges=graph.edges[:-1])
    assert not euler_check(broken, n_seeds=1).passed


def test_graph_json_is_deterministic_and_loadable(tmp_path):
    ss = sample_poisson(BoxDomain(8.0), 1.0, rng_seed=66)
    graph = extract_graph(simulate(ss, horizon=8.0))
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    graph_to_json(graph, str(p1))
    graph_to_json(graph, str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    data = json.loads(p1.read_text())
    assert len(data["vertices"]) == len(graph.vertices)
    assert len(data["edges"]) == len(graph.edges)
    assert data["outer_face"] == graph.outer_face
