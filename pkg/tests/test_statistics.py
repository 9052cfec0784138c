"""Monte Carlo estimators at smoke scale.

The heavyweight runs with pinned tolerances live in test_acceptance; here the
replicate counts are small and the tolerances wide, so each estimator's
plumbing (streams, windows, grouping, reductions) is exercised quickly.
"""

import math

import numpy as np
import pytest

from rectgilbert.geometry import Direction
from rectgilbert.stats import (
    PARALLEL_CONFIG,
    PRESET_CONFIGS,
    TRAP_CONFIG,
    covariance_decay_sweep,
    default_fit_range,
    escaping_expectation,
    estimate_covariance,
    estimate_event_probability,
    estimate_side_covariance,
    estimate_survival,
    fit_exponential_tail,
    sample_ray_lengths,
    survival_grid,
    two_sample_ks,
    uncensored_totals,
    _jackknife_covariance_se,
)

H = Direction.HORIZONTAL
V = Direction.VERTICAL


# --- survival curves and tail fits (pure array plumbing) ---


def test_survival_counts_strictly_greater():
    curve = estimate_survival([1.0, 2.0, 3.0], [2.0])
    assert curve.survival[0] == pytest.approx(1.0 / 3.0)
    flat = estimate_survival([5.0, 5.0, 5.0], [5.0])
    assert flat.survival[0] == 0.0


def test_survival_is_monotone_and_bounded():
    rng = np.random.default_rng(1)
    lengths = rng.exponential(2.0, size=400).tolist()
    grid = survival_grid(8.0, points=33)
    curve = estimate_survival(lengths, grid)
    s = np.asarray(curve.survival)
    assert np.all(np.diff(s) <= 0)
    assert np.all((0.0 <= s) & (s <= 1.0))


def test_survival_rejects_empty_samples():
    with pytest.raises(ValueError):
        estimate_survival([], [1.0])


def test_exponential_fit_recovers_an_exact_rate():
    grid = [0.5 * k for k in range(1, 11)]
    from rectgilbert.stats import SurvivalCurve

    s = SurvivalCurve(
        grid=np.array(grid),
        survival=np.array([math.exp(-2.0 * t) for t in grid]),
        sample_size=1,
        censor_point=math.inf,
    )
    fit = fit_exponential_tail(s, (0.5, 5.0))
    assert fit.rate == pytest.approx(2.0, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_constant_survival_fits_rate_zero():
    from rectgilbert.stats import SurvivalCurve

    s = SurvivalCurve(
        grid=np.array([1.0, 2.0, 3.0, 4.0]),
        survival=np.array([0.5, 0.5, 0.5, 0.5]),
        sample_size=1,
        censor_point=math.inf,
    )
    fit = fit_exponential_tail(s, (1.0, 4.0))
    assert fit.rate == 0.0


def test_fit_needs_three_points():
    from rectgilbert.stats import SurvivalCurve

    s = SurvivalCurve(
        grid=np.array([1.0, 2.0, 3.0]),
        survival=np.array([0.5, 0.25, 0.0]),
        sample_size=4,
        censor_point=math.inf,
    )
    with pytest.raises(ValueError):
        fit_exponential_tail(s, (1.0, 2.0))  # only two usable points


def test_fit_skips_zero_survival_and_censored_grid_points():
    from rectgilbert.stats import SurvivalCurve

    s = SurvivalCurve(
        grid=np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
        survival=np.array(
            [math.exp(-1.0), math.exp(-2.0), math.exp(-3.0), 0.0, 0.3, 0.3]
        ),
        sample_size=100,
        censor_point=4.5,
    )
    fit = fit_exponential_tail(s, (1.0, 6.0))
    assert fit.n_points == 3
    assert fit.rate == pytest.approx(1.0, abs=1e-9)


# --- ray length sampling ---


def test_empty_environment_gives_free_growth():
    samples = sample_ray_lengths(1e-9, 2.0, 5, rng_seed=1)
    for total, censored in samples:
        assert total == 4.0
        assert censored


def test_sampling_is_reproducible_and_thread_invariant():
    a = sample_ray_lengths(1.0, 3.0, 40, rng_seed=11)
    b = sample_ray_lengths(1.0, 3.0, 40, rng_seed=11)
    c = sample_ray_lengths(1.0, 3.0, 40, rng_seed=11, threads=3)
    assert a == b == c
    d = sample_ray_lengths(1.0, 3.0, 40, rng_seed=12)
    assert a != d


def test_mark_changes_the_stream():
    a = sample_ray_lengths(1.0, 3.0, 20, rng_seed=11, mark=H)
    b = sample_ray_lengths(1.0, 3.0, 20, rng_seed=11, mark=V)
    assert a != b


def test_default_fit_range_brackets_the_bulk():
    samples = sample_ray_lengths(1.0, 8.0, 300, rng_seed=5)
    lo, hi = default_fit_range(samples)
    totals = uncensored_totals(samples)
    assert min(totals) <= lo < hi <= max(totals)


def test_uncensored_totals_drops_censored_rows():
    rows = [(4.0, True), (1.5, False), (2.5, False)]
    assert list(uncensored_totals(rows)) == [1.5, 2.5]


def test_scaled_intensities_agree_in_distribution():
    n = 800
    base = uncensored_totals(sample_ray_lengths(1.0, 6.0, n, rng_seed=77))
    quad = uncensored_totals(sample_ray_lengths(4.0, 3.0, n, rng_seed=77))
    rescaled = [2.0 * x for x in quad]
    assert two_sample_ks(base, rescaled) < 0.08


def test_two_sample_ks_is_zero_on_identical_samples():
    xs = [1.0, 2.0, 3.0, 4.0]
    assert two_sample_ks(xs, list(xs)) == 0.0


# --- event probabilities ---


def test_event_probability_trivial_limits():
    p, se = estimate_event_probability((0.0, 0.0), H, "+", 0.0, 1.0, 10, rng_seed=1)
    assert (p, se) == (1.0, 0.0)
    p, se = estimate_event_probability((0.0, 0.0), H, "+", 2.0, 0.0, 50, rng_seed=1)
    assert p == 1.0 and se == 0.0


def test_event_probability_decreases_in_t():
    est = {
        t: estimate_event_probability((0.0, 0.0), H, "+", t, 1.0, 2000, rng_seed=9)
        for t in (1.0, 2.0, 4.0)
    }
    for a, b in [(1.0, 2.0), (2.0, 4.0)]:
        pa, sa = est[a]
        pb, sb = est[b]
        assert pa - pb > 3 * math.hypot(sa, sb)


def test_growth_horizon_does_not_change_the_event():
    # {length >= t} at horizon 2t equals {length = t} at horizon t, replicate
    # by replicate, because the sampled environment depends only on t.
    kw = dict(t=2.0, intensity=1.0, replicates=500, rng_seed=33)
    p1, _ = estimate_event_probability((0.0, 0.0), V, "-", **kw)
    p2, _ = estimate_event_probability((0.0, 0.0), V, "-", horizon=4.0, **kw)
    assert p1 == p2


# --- covariances ---


def test_covariance_rejects_coincident_seeds():
    with pytest.raises(ValueError):
        estimate_covariance((1.0, 1.0), H, (1.0, 1.0), V, 2.0, 1.0, 10, rng_seed=0)


def test_independent_distance_gives_null_covariance():
    # t = 1 <= l1/4 = 2: the dependence squares cannot meet.
    u, v = PARALLEL_CONFIG.place(8.0)
    est = estimate_covariance(u, H, v, H, 1.0, 1.0, 3000, rng_seed=13)
    assert abs(est.value) <= 3 * est.std_error
    assert abs(est.value) <= 0.25


def test_trap_joint_event_is_impossible():
    # u's upward ray crosses v's rightward path: if v ran free to time t it
    # covered the crossing before u arrived, and the meeting point stops u
    # (and vice versa), so both running free has frequency exactly zero.
    u, v = TRAP_CONFIG.place(2.0)
    for intensity in (1.0, 0.0):
        est = estimate_covariance(
            u, TRAP_CONFIG.d_u, v, TRAP_CONFIG.d_v, 2.5, intensity, 800, rng_seed=3
        )
        assert est.p_joint == 0.0
        assert est.value == pytest.approx(-est.p_u * est.p_v)
        assert est.value <= 0.0


def test_parallel_seeds_nearby_are_positively_correlated():
    u, v = PARALLEL_CONFIG.place(0.05)
    est = estimate_covariance(
        u, PARALLEL_CONFIG.d_u, v, PARALLEL_CONFIG.d_v, 2.0, 1.0, 3000, rng_seed=21
    )
    assert est.value > 3 * est.std_error


def test_side_covariance_is_null():
    est = estimate_side_covariance((0.0, 0.0), H, 2.0, 1.0, 3000, rng_seed=14)
    assert abs(est.value) <= 3 * est.std_error


def test_covariance_bound_is_enforced():
    from rectgilbert.stats import CovarianceEstimate

    with pytest.raises(ValueError):
        CovarianceEstimate(
            value=0.3, std_error=0.0, replicates=1,
            p_u=1.0, p_v=1.0, p_joint=1.0, config="x",
        )


def test_grouped_jackknife_matches_direct_leave_one_out():
    n11, n10, n01, n00 = 17, 5, 9, 30
    got = _jackknife_covariance_se(n11, n10, n01, n00)
    pairs = [(1, 1)] * n11 + [(1, 0)] * n10 + [(0, 1)] * n01 + [(0, 0)] * n00
    n = len(pairs)
    estimates = []
    for k in range(n):
        rest = pairs[:k] + pairs[k + 1 :]
        a = np.array([p[0] for p in rest], dtype=float)
        b = np.array([p[1] for p in rest], dtype=float)
        estimates.append(float(np.mean(a * b) - np.mean(a) * np.mean(b)))
    estimates = np.asarray(estimates)
    want = math.sqrt((n - 1) / n * float(np.sum((estimates - estimates.mean()) ** 2)))
    assert got == pytest.approx(want, rel=1e-12)


# --- presets and sweeps ---


def test_preset_registry_and_placement():
    assert set(PRESET_CONFIGS) == {"parallel", "trap", "orthogonal"}
    u, v = PARALLEL_CONFIG.place(3.0)
    assert abs(u[0] - v[0]) + abs(u[1] - v[1]) == pytest.approx(3.0)
    u, v = TRAP_CONFIG.place(1.0)
    assert abs(u[0] - v[0]) + abs(u[1] - v[1]) == pytest.approx(1.0)


def test_decay_sweep_orders_and_reports():
    rows = covariance_decay_sweep(
        PARALLEL_CONFIG, [1.0, 4.0], 1.0, 1.0, 400, rng_seed=19
    )
    assert [r.distance for r in rows] == [1.0, 4.0]
    for row in rows:
        assert row.std_error > 0
        assert abs(row.value) <= 0.25
    with pytest.raises(ValueError):
        covariance_decay_sweep(PARALLEL_CONFIG, [2.0, 2.0], 1.0, 1.0, 10, rng_seed=0)


def test_swap_symmetry_of_the_covariance():
    u, v = PARALLEL_CONFIG.place(1.0)
    a = estimate_covariance(u, H, v, H, 1.5, 1.0, 600, rng_seed=41)
    b = estimate_covariance(v, H, u, H, 1.5, 1.0, 600, rng_seed=41)
    # same law, not the same stream; agreement within joint error bars
    assert abs(a.value - b.value) <= 4 * math.hypot(a.std_error, b.std_error)


# --- escaping rays ---


def test_escape_table_shape_and_scaling():
    rows = escaping_expectation(1.0, [10.0, 20.0], 60, rng_seed=15)
    assert [r.box_side for r in rows] == [10.0, 20.0]
    for row in rows:
        assert row.replicates == 60
        assert row.mean >= 0
        assert row.normalized == pytest.approx(row.mean / row.box_side)
    # linear growth: normalized means in the same ballpark
    a, b = rows
    assert abs(a.normalized - b.normalized) <= 5 * math.hypot(a.std_error / 10.0, b.std_error / 20.0)


def test_escape_intensity_scales_normalization():
    rows = escaping_expectation(4.0, [10.0], 40, rng_seed=16)
    row = rows[0]
    assert row.normalized == pytest.approx(row.mean / (2.0 * 10.0))


def test_estimates_are_replicable_across_calls():
    a = escaping_expectation(1.0, [10.0], 30, rng_seed=61)
    b = escaping_expectation(1.0, [10.0], 30, rng_seed=61)
    assert a == b
