"""Monte Carlo estimators built on the exact growth engine.

Every experiment here conditions on one or two seeds being present by
pinning them into an independent Poisson background. Locality makes that
affordable: whether a half-ray reaches length t is decided entirely by
the configuration inside its dependence diamond, so each replicate only
samples background points inside the union of the relevant diamonds (a
Poisson process restricted to a region is obtained by sampling its
bounding rectangle and keeping the points that fall inside).

Replicates draw their randomness from per-replicate streams derived as
(master_seed, purpose, replicate_index), where the purpose string encodes
the experiment and all law-determining parameters. Two consequences are
worth spelling out: results never depend on execution order or thread
count, and experiments with different parameters (different intensity,
different t) get statistically independent samples rather than coupled
ones.

Standard errors are plug-in for single probabilities and a grouped
jackknife for covariances. Acceptance-style checks express everything in
multiples of these, never against the underlying constants, which no one
knows numerically.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import ks_2samp

from .engine import simulate, simulate_arrays, escaping_rays
from .geometry import BoxDomain, DependenceRegion, Direction, Point2
from .sampling import MarkDistribution, sample_poisson, stream_seed

_SIDE_INDEX = {"+": 0, "-": 1}


def _dir_letter(d: Direction) -> str:
    return "V" if d is Direction.VERTICAL else "H"


def _purpose(name: str, **params) -> str:
    parts = [name]
    for key in sorted(params):
        value = params[key]
        if isinstance(value, float):
            value = repr(value)
        parts.append(f"{key}={value}")
    return "|".join(parts)


def _run_replicates(fn, n_replicates: int, threads: int, args: tuple) -> list:
    """Map fn(rep, *args) over replicate indices, optionally in processes.

    Chunks are reassembled in index order, so the output is identical for
    every thread count.
    """
    if threads <= 1:
        return [fn(rep, *args) for rep in range(n_replicates)]
    n_chunks = min(n_replicates, threads * 4)
    chunks = np.array_split(np.arange(n_replicates), n_chunks)
    out: list = []
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_run_chunk, fn, chunk.tolist(), args) for chunk in chunks]
        for fut in futures:
            out.extend(fut.result())
    return out


def _run_chunk(fn, indices, args):
    return [fn(rep, *args) for rep in indices]


def _palm_lengths(
    pinned: list[tuple[float, float, Direction]],
    regions: list[DependenceRegion],
    intensity: float,
    horizon: float,
    rng: np.random.Generator,
    p_vertical: float = 0.5,
) -> np.ndarray:
    """Simulate pinned seeds in a fresh local environment.

    Background points are Poisson(intensity) on the union of the given
    dependence diamonds; marks are independent coin flips. Returns the
    (len(pinned), 2) array of half-ray lengths for the pinned seeds, in
    input order.

    Draw order within the stream is fixed: count, x block, y block, then
    marks for the points that survived the diamond filter.
    """
    x_lo = min(r.center.x - r.horizon for r in regions)
    x_hi = max(r.center.x + r.horizon for r in regions)
    y_lo = min(r.center.y - r.horizon for r in regions)
    y_hi = max(r.center.y + r.horizon for r in regions)
    bg_x = np.empty(0)
    bg_y = np.empty(0)
    bg_v = np.empty(0, dtype=bool)
    if intensity > 0.0:
        area = (x_hi - x_lo) * (y_hi - y_lo)
        count = int(rng.poisson(intensity * area))
        if count:
            xs = rng.uniform(x_lo, x_hi, count)
            ys = rng.uniform(y_lo, y_hi, count)
            keep = np.zeros(count, dtype=bool)
            for r in regions:
                keep |= np.abs(xs - r.center.x) + np.abs(ys - r.center.y) <= r.horizon
            bg_x = xs[keep]
            bg_y = ys[keep]
            bg_v = rng.random(bg_x.size) < p_vertical
    k = len(pinned)
    xs_all = np.concatenate([np.array([p[0] for p in pinned]), bg_x])
    ys_all = np.concatenate([np.array([p[1] for p in pinned]), bg_y])
    vert_all = np.concatenate(
        [np.array([p[2] is Direction.VERTICAL for p in pinned]), bg_v]
    )
    tess = simulate_arrays(xs_all, ys_all, vert_all, horizon=horizon)
    return tess.lengths[:k].copy()


def _both_side_regions(v: Point2, d: Direction, t: float) -> list[DependenceRegion]:
    return [
        DependenceRegion(v, d, "+", t),
        DependenceRegion(v, d, "-", t),
    ]


def _rep_ray_length(rep, master, purpose, mark, intensity, t_max, p_vertical):
    rng = np.random.default_rng(stream_seed(master, rep, purpose))
    v = Point2(0.0, 0.0)
    lengths = _palm_lengths(
        [(0.0, 0.0, mark)],
        _both_side_regions(v, mark, t_max),
        intensity,
        horizon=t_max,
        rng=rng,
        p_vertical=p_vertical,
    )
    len_plus, len_minus = float(lengths[0, 0]), float(lengths[0, 1])
    censored = len_plus >= t_max or len_minus >= t_max
    return (len_plus + len_minus, censored)


def sample_ray_lengths(
    intensity: float,
    t_max: float,
    replicates: int,
    rng_seed: int,
    mark: Direction = Direction.HORIZONTAL,
    p_vertical: float = 0.5,
    threads: int = 1,
) -> list[tuple[float, bool]]:
    """Palm-sample the total segment length of a pinned seed.

    Each replicate inserts the seed at the origin of its own background,
    grows everything to time t_max and records L+ + L-. The sample is
    censored when either side is still growing at t_max.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    purpose = _purpose(
        "ray-lengths",
        intensity=float(intensity),
        t_max=float(t_max),
        mark=_dir_letter(mark),
        p_vertical=float(p_vertical),
    )
    args = (rng_seed, purpose, mark, float(intensity), float(t_max), float(p_vertical))
    return _run_replicates(_rep_ray_length, replicates, threads, args)


@dataclass(frozen=True)
class SurvivalCurve:
    """Empirical survival S(t_k) on a fixed grid.

    censor_point marks where censoring starts to bias the curve; grid
    points at or beyond it should not be trusted (or fitted).
    """

    grid: np.ndarray
    survival: np.ndarray
    sample_size: int
    censor_point: float


def estimate_survival(
    lengths, grid, censor_point: float = math.inf
) -> SurvivalCurve:
    """S(t_k) = fraction of samples strictly greater than t_k."""
    values = np.asarray(
        [item[0] if isinstance(item, tuple) else item for item in lengths], dtype=float
    )
    if values.size == 0:
        raise ValueError("empty sample")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    surv = np.array([(values > t).mean() for t in grid])
    return SurvivalCurve(grid=grid, survival=surv, sample_size=values.size,
                         censor_point=float(censor_point))


@dataclass(frozen=True)
class TailFit:
    rate: float
    intercept: float
    r_squared: float
    fit_range: tuple[float, float]
    n_points: int


def default_fit_range(samples: list[tuple[float, bool]]) -> tuple[float, float]:
    """Quantile window [median, q95] of the uncensored totals."""
    uncensored = np.array([length for length, censored in samples if not censored])
    if uncensored.size < 3:
        raise ValueError("not enough uncensored samples for a fit range")
    return float(np.quantile(uncensored, 0.5)), float(np.quantile(uncensored, 0.95))


def fit_exponential_tail(
    curve: SurvivalCurve, fit_range: tuple[float, float]
) -> TailFit:
    """Least squares on (t_k, ln S(t_k)) over the window; rate is -slope.

    Only grid points with positive survival and strictly below the censor
    point participate. A constant curve fits a horizontal line exactly,
    reported as rate 0 with r² = 1.
    """
    t_lo, t_hi = fit_range
    mask = (
        (curve.grid >= t_lo)
        & (curve.grid <= t_hi)
        & (curve.survival > 0.0)
        & (curve.grid < curve.censor_point)
    )
    if int(mask.sum()) < 3:
        raise ValueError("fewer than 3 usable grid points in the fit range")
    t = curve.grid[mask]
    y = np.log(curve.survival[mask])
    if np.ptp(y) == 0.0:
        slope, intercept = 0.0, float(y[0])
    else:
        slope, intercept = np.polyfit(t, y, 1)
    fitted = slope * t + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return TailFit(
        rate=float(-slope),
        intercept=float(intercept),
        r_squared=float(r_squared),
        fit_range=(float(t_lo), float(t_hi)),
        n_points=int(mask.sum()),
    )


def survival_grid(t_max: float, points: int = 81) -> np.ndarray:
    return np.linspace(0.0, float(t_max), points)


def _rep_event(rep, master, purpose, vx, vy, mark, side, t, intensity, horizon):
    rng = np.random.default_rng(stream_seed(master, rep, purpose))
    regions = [DependenceRegion(Point2(vx, vy), mark, side, t)]
    lengths = _palm_lengths([(vx, vy, mark)], regions, intensity, horizon, rng)
    return bool(lengths[0, _SIDE_INDEX[side]] >= t)


def estimate_event_probability(
    v: tuple[float, float],
    d_v: Direction,
    side: str,
    t: float,
    intensity: float,
    replicates: int,
    rng_seed: int,
    threads: int = 1,
    horizon: float | None = None,
) -> tuple[float, float]:
    """Frequency of the pinned seed's half-ray growing freely to length t.

    The optional horizon only extends the simulation clock; the sampled
    environment is a function of t alone, so estimates at horizons t and
    2t agree replicate by replicate (free growth to t is the same event
    as length >= t at any later time).
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if side not in _SIDE_INDEX:
        raise ValueError("side must be '+' or '-'")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return 1.0, 0.0
    purpose = _purpose(
        "event-probability",
        v=f"({repr(float(v[0]))},{repr(float(v[1]))})",
        mark=_dir_letter(d_v),
        side=side,
        t=float(t),
        intensity=float(intensity),
    )
    args = (
        rng_seed, purpose, float(v[0]), float(v[1]), d_v, side, float(t),
        float(intensity), float(horizon if horizon is not None else t),
    )
    hits = _run_replicates(_rep_event, replicates, threads, args)
    p_hat = float(np.mean(hits))
    se = math.sqrt(p_hat * (1.0 - p_hat) / replicates)
    return p_hat, se


@dataclass(frozen=True)
class CovarianceEstimate:
    value: float
    std_error: float
    replicates: int
    p_u: float
    p_v: float
    p_joint: float
    config: tuple

    def __post_init__(self) -> None:
        if abs(self.value) > 0.25 + 1e-12:
            raise ValueError("covariance of two indicators cannot exceed 1/4")


def _jackknife_covariance_se(n11: int, n10: int, n01: int, n00: int) -> float:
    """Leave-one-out SE of p11 - p1*p2, grouped by the four outcome cells."""
    n = n11 + n10 + n01 + n00
    if n < 2:
        return float("nan")
    n1 = n11 + n10
    n2 = n11 + n01
    cells = {
        (1, 1): n11,
        (1, 0): n10,
        (0, 1): n01,
        (0, 0): n00,
    }
    loo = {}
    for (a, b), count in cells.items():
        if count == 0:
            continue
        m = n - 1
        p11 = (n11 - (a & b)) / m
        p1 = (n1 - a) / m
        p2 = (n2 - b) / m
        loo[(a, b)] = p11 - p1 * p2
    mean_loo = sum(cells[c] * val for c, val in loo.items()) / n
    var = (n - 1) / n * sum(
        cells[c] * (val - mean_loo) ** 2 for c, val in loo.items()
    )
    return math.sqrt(var)


def _rep_pair(rep, master, purpose, ux, uy, du, vx, vy, dv, t, intensity):
    rng = np.random.default_rng(stream_seed(master, rep, purpose))
    regions = [
        DependenceRegion(Point2(ux, uy), du, "+", t),
        DependenceRegion(Point2(vx, vy), dv, "+", t),
    ]
    lengths = _palm_lengths([(ux, uy, du), (vx, vy, dv)], regions, intensity, t, rng)
    return bool(lengths[0, 0] >= t), bool(lengths[1, 0] >= t)


def estimate_covariance(
    u: tuple[float, float],
    d_u: Direction,
    v: tuple[float, float],
    d_v: Direction,
    t: float,
    intensity: float,
    replicates: int,
    rng_seed: int,
    threads: int = 1,
) -> CovarianceEstimate:
    """Sample covariance of the two free-growth indicators A+_u(t), A+_v(t).

    Both seeds are pinned into the same background, realizing the
    conditioning on both being present. Intensity 0 is allowed and means
    the two seeds interact only with each other.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if tuple(map(float, u)) == tuple(map(float, v)):
        raise ValueError("u and v must differ")
    if t <= 0:
        raise ValueError("t must be positive")
    purpose = _purpose(
        "pair-covariance",
        u=f"({repr(float(u[0]))},{repr(float(u[1]))})",
        du=_dir_letter(d_u),
        v=f"({repr(float(v[0]))},{repr(float(v[1]))})",
        dv=_dir_letter(d_v),
        t=float(t),
        intensity=float(intensity),
    )
    args = (
        rng_seed, purpose, float(u[0]), float(u[1]), d_u,
        float(v[0]), float(v[1]), d_v, float(t), float(intensity),
    )
    pairs = _run_replicates(_rep_pair, replicates, threads, args)
    n11 = sum(1 for a, b in pairs if a and b)
    n10 = sum(1 for a, b in pairs if a and not b)
    n01 = sum(1 for a, b in pairs if not a and b)
    n00 = replicates - n11 - n10 - n01
    p_u = (n11 + n10) / replicates
    p_v = (n11 + n01) / replicates
    p_joint = n11 / replicates
    return CovarianceEstimate(
        value=p_joint - p_u * p_v,
        std_error=_jackknife_covariance_se(n11, n10, n01, n00),
        replicates=replicates,
        p_u=p_u,
        p_v=p_v,
        p_joint=p_joint,
        config=((float(u[0]), float(u[1])), _dir_letter(d_u),
                (float(v[0]), float(v[1])), _dir_letter(d_v), float(t)),
    )


def _rep_side_pair(rep, master, purpose, vx, vy, mark, t, intensity):
    rng = np.random.default_rng(stream_seed(master, rep, purpose))
    v = Point2(vx, vy)
    lengths = _palm_lengths(
        [(vx, vy, mark)], _both_side_regions(v, mark, t), intensity, t, rng
    )
    return bool(lengths[0, 0] >= t), bool(lengths[0, 1] >= t)


def estimate_side_covariance(
    v: tuple[float, float],
    d_v: Direction,
    t: float,
    intensity: float,
    replicates: int,
    rng_seed: int,
    threads: int = 1,
) -> CovarianceEstimate:
    """Covariance between the + and - free-growth indicators of one seed.

    The two sides look into disjoint half-planes, so this should hover
    around zero; the estimator exists to let tests check exactly that.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if t <= 0:
        raise ValueError("t must be positive")
    purpose = _purpose(
        "side-covariance",
        v=f"({repr(float(v[0]))},{repr(float(v[1]))})",
        mark=_dir_letter(d_v),
        t=float(t),
        intensity=float(intensity),
    )
    args = (rng_seed, purpose, float(v[0]), float(v[1]), d_v, float(t), float(intensity))
    pairs = _run_replicates(_rep_side_pair, replicates, threads, args)
    n11 = sum(1 for a, b in pairs if a and b)
    n10 = sum(1 for a, b in pairs if a and not b)
    n01 = sum(1 for a, b in pairs if not a and b)
    n00 = replicates - n11 - n10 - n01
    p_plus = (n11 + n10) / replicates
    p_minus = (n11 + n01) / replicates
    return CovarianceEstimate(
        value=n11 / replicates - p_plus * p_minus,
        std_error=_jackknife_covariance_se(n11, n10, n01, n00),
        replicates=replicates,
        p_u=p_plus,
        p_v=p_minus,
        p_joint=n11 / replicates,
        config=((float(v[0]), float(v[1])), _dir_letter(d_v), "+/-", float(t)),
    )


@dataclass(frozen=True)
class DirectionConfig:
    """How to place the pair (u, v) for a covariance experiment.

    offset_unit is the displacement from v to u at L1 distance 1; it is
    scaled by the requested distance. The presets cover the three regimes
    of interest: near-parallel seeds (positive correlation), the
    perpendicular trap (negative), and a plain orthogonal pair.
    """

    name: str
    d_u: Direction
    d_v: Direction
    offset_unit: tuple[float, float]

    def place(self, distance: float) -> tuple[tuple[float, float], tuple[float, float]]:
        u = (self.offset_unit[0] * distance, self.offset_unit[1] * distance)
        return u, (0.0, 0.0)


PARALLEL_CONFIG = DirectionConfig(
    "parallel", Direction.HORIZONTAL, Direction.HORIZONTAL, (0.5, 0.5)
)
TRAP_CONFIG = DirectionConfig(
    "trap", Direction.VERTICAL, Direction.HORIZONTAL, (0.5, -0.5)
)
ORTHOGONAL_CONFIG = DirectionConfig(
    "orthogonal", Direction.VERTICAL, Direction.HORIZONTAL, (0.5, 0.5)
)

PRESET_CONFIGS = {
    cfg.name: cfg for cfg in (PARALLEL_CONFIG, TRAP_CONFIG, ORTHOGONAL_CONFIG)
}


@dataclass(frozen=True)
class DecayRow:
    distance: float
    value: float
    abs_value: float
    std_error: float
    p_u: float
    p_v: float
    p_joint: float
    replicates: int


def covariance_decay_sweep(
    direction_config: DirectionConfig,
    distances,
    t: float,
    intensity: float,
    replicates: int,
    rng_seed: int,
    threads: int = 1,
) -> tuple[DecayRow, ...]:
    """estimate_covariance at each L1 separation, one row per distance."""
    distances = [float(d) for d in distances]
    if any(b <= a for a, b in zip(distances, distances[1:])):
        raise ValueError("distances must be strictly increasing")
    rows = []
    for dist in distances:
        u, v = direction_config.place(dist)
        est = estimate_covariance(
            u, direction_config.d_u, v, direction_config.d_v,
            t, intensity, replicates, rng_seed, threads=threads,
        )
        rows.append(
            DecayRow(
                distance=dist,
                value=est.value,
                abs_value=abs(est.value),
                std_error=est.std_error,
                p_u=est.p_u,
                p_v=est.p_v,
                p_joint=est.p_joint,
                replicates=replicates,
            )
        )
    return tuple(rows)


@dataclass(frozen=True)
class EscapeRow:
    box_side: float
    mean: float
    std_error: float
    normalized: float
    replicates: int


def _rep_escape(rep, master, purpose, box_side, intensity):
    seed_set = sample_poisson(
        BoxDomain(box_side), intensity, MarkDistribution(),
        rng_seed=stream_seed(master, rep, purpose),
    )
    tess = simulate(seed_set, horizon=box_side)
    return escaping_rays(tess)


def escaping_expectation(
    intensity: float,
    n_values,
    replicates: int,
    rng_seed: int,
    threads: int = 1,
) -> tuple[EscapeRow, ...]:
    """Mean count of boundary-reaching half-rays per box size.

    The normalized column divides by sqrt(intensity) * N, the growth rate
    the count is expected to track; a flat normalized column across N is
    the check callers want to make.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    n_values = [float(n) for n in n_values]
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("n_values must be strictly increasing")
    rows = []
    for box_side in n_values:
        purpose = _purpose(
            "escape", intensity=float(intensity), box_side=float(box_side)
        )
        counts = np.array(
            _run_replicates(
                _rep_escape, replicates, threads, (rng_seed, purpose, box_side, float(intensity))
            ),
            dtype=float,
        )
        mean = float(counts.mean())
        se = float(counts.std(ddof=1) / math.sqrt(replicates)) if replicates > 1 else float("nan")
        rows.append(
            EscapeRow(
                box_side=box_side,
                mean=mean,
                std_error=se,
                normalized=mean / (math.sqrt(intensity) * box_side),
                replicates=replicates,
            )
        )
    return tuple(rows)


def two_sample_ks(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov distance."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    return float(ks_2samp(a, b).statistic)


def uncensored_totals(samples: list[tuple[float, bool]]) -> np.ndarray:
    return np.array([length for length, censored in samples if not censored])
