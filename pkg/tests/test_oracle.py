"""Time-stepping reference implementation against the exact engine."""

import numpy as np
import pytest

from rectgilbert.engine import oracle_simulate, simulate
from rectgilbert.geometry import BoxDomain, Direction, Point2
from rectgilbert.sampling import SeedPoint, SeedSet, sample_poisson

H = Direction.HORIZONTAL
V = Direction.VERTICAL


def _two_seed_set():
    seeds = (
        SeedPoint(id=0, position=Point2(1.0, 1.0), mark=H),
        SeedPoint(id=1, position=Point2(2.0, 3.0), mark=V),
    )
    return SeedSet(seeds, domain=BoxDomain(4.0), intensity=1.0)


def test_oracle_matches_exactly_with_nothing_to_hit():
    seeds = (SeedPoint(id=0, position=Point2(2.0, 2.0), mark=H),)
    ss = SeedSet(seeds, domain=BoxDomain(4.0), intensity=1.0)
    exact = simulate(ss, horizon=4.0)
    approx = oracle_simulate(ss, horizon=4.0, dt=0.01)
    np.testing.assert_array_equal(approx.lengths, exact.lengths)


def test_oracle_two_seed_example():
    dt = 1e-3
    approx = oracle_simulate(_two_seed_set(), horizon=4.0, dt=dt)
    down = approx.half_ray(1, "-")
    assert 2.0 - 2 * dt <= down.final_length <= 2.0
    assert down.blocked_by is not None and down.blocked_by.seed_id == 0


def test_oracle_validates_dt():
    ss = _two_seed_set()
    with pytest.raises(ValueError):
        oracle_simulate(ss, horizon=4.0, dt=0.0)
    with pytest.raises(ValueError):
        oracle_simulate(ss, horizon=4.0, dt=2.0)   # too coarse for horizon 4


def test_oracle_agrees_on_random_instances():
    dt = 1e-3
    for k in range(10):
        ss = sample_poisson(BoxDomain(8.0), 1.0, rng_seed=500 + k)
        if len(ss) == 0:
            continue
        exact = simulate(ss, horizon=8.0)
        approx = oracle_simulate(ss, horizon=8.0, dt=dt)
        assert np.max(np.abs(exact.lengths - approx.lengths)) <= 2 * dt
        np.testing.assert_array_equal(exact.blocker, approx.blocker)
        np.testing.assert_array_equal(exact.blocker_side, approx.blocker_side)
