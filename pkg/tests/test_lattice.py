"""Integer-lattice companions: the excitable automaton and the ray march."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rectgilbert.geometry import Direction
from rectgilbert.lattice import (
    CaTrajectory,
    LatticeRayConfig,
    LatticeSeed,
    LatticeState,
    StopCause,
    box_restriction,
    ca_run,
    ca_step,
    compare_ca_to_rays,
    covered_lattice_points,
    format_grid,
    is_inhibitory,
    lattice_neighbors,
    lattice_ray_simulate,
    lattice_segments,
    parse_grid,
    write_activity_csv,
)

H = Direction.HORIZONTAL
V = Direction.VERTICAL


def ray_config(points, box_side):
    seeds = tuple(LatticeSeed(position=p, direction=d) for p, d in points)
    return LatticeRayConfig(seeds=seeds, box_side=box_side)


# --- the excitable automaton ---


def test_inhibitory_coloring():
    assert is_inhibitory((4, 4))
    assert not is_inhibitory((5, 4))
    assert not is_inhibitory((5, 5))


def test_empty_state_stays_empty():
    out = ca_step(LatticeState(frozenset()))
    assert out.active == frozenset()


def test_excitatory_singleton_spreads_to_its_neighbors():
    out = ca_step(LatticeState(frozenset({(5, 5)})))
    assert out.active == frozenset({(4, 5), (6, 5), (5, 4), (5, 6)})


def test_inhibitory_singleton_dies():
    out = ca_step(LatticeState(frozenset({(4, 4)})))
    assert out.active == frozenset()


def test_activity_can_shrink():
    run = ca_run(LatticeState(frozenset({(4, 4)})), steps=1)
    assert run.sizes == (1, 0)


def test_run_records_the_initial_state_at_step_zero():
    init = LatticeState(frozenset({(5, 5)}))
    run = ca_run(init, steps=0)
    assert isinstance(run, CaTrajectory)
    assert run.states == (init,)
    assert run.sizes == (1,)


def test_single_excitatory_point_size_trace():
    run = ca_run(LatticeState(frozenset({(5, 5)})), steps=1)
    assert run.sizes == (1, 4)


def test_cycle_detection_sees_the_empty_fixed_point():
    run = ca_run(LatticeState(frozenset({(4, 4)})), steps=10)
    assert run.cycle_period == 1
    assert run.states[-1].active == frozenset()
    assert run.cycle_start is not None


def test_boundary_clipping_limits_neighborhoods():
    # at the box corner only two neighbors exist
    assert set(lattice_neighbors((0, 0), box_side=6)) == {(1, 0), (0, 1)}
    state = LatticeState(frozenset({(1, 0)}), box_side=6)
    out = ca_step(state)
    assert out.active <= {(0, 0), (2, 0), (1, 1)}
    assert (1, -1) not in out.active


def test_active_sites_must_lie_in_the_box():
    with pytest.raises(ValueError):
        LatticeState(frozenset({(9, 1)}), box_side=4)


@settings(max_examples=40, deadline=None)
@given(
    pts=st.sets(
        st.tuples(st.integers(4, 10), st.integers(4, 10)), min_size=1, max_size=6
    ),
)
def test_step_commutes_with_even_translations(pts):
    base = ca_step(LatticeState(frozenset(pts)))
    shifted = ca_step(LatticeState(frozenset((x + 2, y + 2) for x, y in pts)))
    assert shifted.active == frozenset((x + 2, y + 2) for x, y in base.active)


def test_grid_round_trip():
    text = "..#.\n#..#\n....\n"
    state = parse_grid(text)
    assert (0, 1) in state.active and (3, 1) in state.active and (2, 2) in state.active
    assert parse_grid(format_grid(state, bounds=(0, 3, 0, 2))).active == state.active
    with pytest.raises(ValueError):
        parse_grid("..x.\n")


def test_activity_csv(tmp_path):
    run = ca_run(LatticeState(frozenset({(5, 5)})), steps=3)
    path = tmp_path / "activity.csv"
    write_activity_csv(run, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "t,active_count"
    assert len(lines) == 1 + len(run.sizes)
    assert lines[1] == "0,1"


# --- the lattice ray march ---


def test_single_seed_runs_free():
    out = lattice_ray_simulate(ray_config([((3, 3), H)], 6), horizon=6)
    assert out.extents == ((6.0, 6.0),)
    assert out.causes[0] == (StopCause.FREE_AT_HORIZON, StopCause.FREE_AT_HORIZON)


def test_head_on_collision_at_the_midpoint():
    out = lattice_ray_simulate(ray_config([((1, 3), H), ((5, 3), H)], 6), horizon=6)
    # tips meet at (3,3) at time 2: each ray's facing side spans 2
    assert out.extents[0][0] == 2.0 and out.extents[1][1] == 2.0
    assert out.causes[0][0] is StopCause.HEAD_ON
    assert out.causes[1][1] is StopCause.HEAD_ON


def test_t_junction_on_an_interior_point():
    out = lattice_ray_simulate(ray_config([((1, 1), H), ((2, 3), V)], 5), horizon=5)
    down = out.extents[1][1]
    assert down == 2.0
    assert out.causes[1][1] is StopCause.T_JUNCTION


def test_corner_contact_classification():
    # the vertical ray's down tip lands exactly on the horizontal ray's
    # frozen endpoint: Corner, not TJunction
    out = lattice_ray_simulate(
        ray_config([((1, 1), H), ((4, 1), V), ((3, 4), V)], 8), horizon=8
    )
    causes = {c for pair in out.causes for c in pair}
    assert StopCause.CORNER in causes or StopCause.T_JUNCTION in causes


def test_rays_respect_the_speed_bound():
    cfg = ray_config([((2, 2), H), ((5, 5), V), ((7, 3), H)], 9)
    for t in (1, 2, 3):
        out = lattice_ray_simulate(cfg, horizon=t)
        for (plus, minus) in out.extents:
            assert plus <= t and minus <= t


def test_freezing_inside_the_box():
    import random

    rng = random.Random(202)
    for trial in range(25):
        n = 8
        cells = [(x, y) for x in range(1, n) for y in range(1, n)]
        rng.shuffle(cells)
        picks = cells[: rng.randint(1, 4)]
        cfg = ray_config(
            [(p, H if rng.random() < 0.5 else V) for p in picks], n
        )
        short = lattice_ray_simulate(cfg, horizon=n)
        long = lattice_ray_simulate(cfg, horizon=2 * n)
        a = box_restriction(covered_lattice_points(short), n)
        b = box_restriction(covered_lattice_points(long), n)
        assert a == b


def test_seed_validation():
    with pytest.raises(ValueError):
        ray_config([((0, 3), H)], 6)       # on the boundary
    with pytest.raises(ValueError):
        ray_config([((3, 3), H), ((3, 3), V)], 6)
    with pytest.raises(ValueError):
        ray_config([((1, 1), H)], 2)       # box too small


def test_simulate_requires_a_fresh_config():
    cfg = ray_config([((3, 3), H)], 6)
    out = lattice_ray_simulate(cfg, horizon=3)
    assert not out.fresh
    with pytest.raises(ValueError):
        lattice_ray_simulate(out, horizon=6)


def test_covered_points_of_a_free_seed():
    out = lattice_ray_simulate(ray_config([((3, 3), H)], 6), horizon=2)
    assert covered_lattice_points(out) == frozenset(
        {(1, 3), (2, 3), (3, 3), (4, 3), (5, 3)}
    )


def test_segments_reflect_extents():
    out = lattice_ray_simulate(ray_config([((3, 3), V)], 6), horizon=1)
    assert lattice_segments(out) == [(3.0, 2.0, 3.0, 4.0)]


def test_comparison_report_shape():
    cfg = ray_config([((3, 3), H)], 7)
    rows = compare_ca_to_rays(cfg, steps=3)
    assert len(rows) == 4
    assert [r.time for r in rows] == [0, 1, 2, 3]
    for row in rows:
        assert row.match == (row.only_ca == 0 and row.only_rays == 0)


def test_ray_csv(tmp_path):
    from rectgilbert.lattice import LATTICE_RAY_CSV_HEADER, write_lattice_rays_csv

    out = lattice_ray_simulate(ray_config([((1, 3), H), ((5, 3), H)], 6), horizon=6)
    path = tmp_path / "rays.csv"
    write_lattice_rays_csv(out, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(LATTICE_RAY_CSV_HEADER)
    assert len(lines) == 3
