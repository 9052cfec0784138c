"""Seed sampling: marked Poisson points, Palm insertion, and CSV round-trip.

Every random draw in the project flows through `stream_seed`, which derives an
independent child stream from (master_seed, purpose, replicate). Purpose tags
mix the experiment name and its parameters, so two experiments (or the same
experiment at different parameters) never share uniforms. Results are
therefore reproducible byte-for-byte from the master seed alone and do not
depend on scheduling or thread count.
"""

from __future__ import annotations

import csv
import zlib
from dataclasses import dataclass, replace

import numpy as np

from .geometry import BoxDomain, Direction, Point2


class DegenerateInputError(ValueError):
    """Raised when a seed configuration violates strict general position."""


@dataclass(frozen=True)
class MarkDistribution:
    """Bernoulli mark law: vertical with probability p_vertical, else horizontal."""

    p_vertical: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.p_vertical < 1.0:
            raise ValueError(
                f"p_vertical must lie strictly inside (0, 1), got {self.p_vertical}"
            )


@dataclass(frozen=True)
class SeedPoint:
    id: int
    position: Point2
    mark: Direction
    pinned: bool = False


@dataclass(frozen=True)
class SeedSet:
    """An ordered collection of marked seeds with its sampling metadata."""

    seeds: tuple[SeedPoint, ...]
    domain: BoxDomain
    intensity: float
    rng_seed: int | None = None

    def __len__(self) -> int:
        return len(self.seeds)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(ids, xs, ys, vertical, pinned) as numpy arrays, in seed order."""
        n = len(self.seeds)
        ids = np.empty(n, dtype=np.int64)
        xs = np.empty(n, dtype=np.float64)
        ys = np.empty(n, dtype=np.float64)
        vertical = np.empty(n, dtype=bool)
        pinned = np.empty(n, dtype=bool)
        for k, s in enumerate(self.seeds):
            ids[k] = s.id
            xs[k] = s.position.x
            ys[k] = s.position.y
            vertical[k] = s.mark is Direction.VERTICAL
            pinned[k] = s.pinned
        return ids, xs, ys, vertical, pinned


def stream_seed(master_seed: int, replicate: int, purpose: int | str) -> np.random.SeedSequence:
    """Derive an independent child stream for one replicate of one purpose.

    String purposes are hashed with CRC32 so the derivation never depends on
    PYTHONHASHSEED. Distinct (master, purpose, replicate) triples give
    statistically independent streams; the same triple always gives the same
    stream regardless of execution order.
    """
    if isinstance(purpose, str):
        purpose = zlib.crc32(purpose.encode("utf-8"))
    return np.random.SeedSequence(entropy=(int(master_seed), int(purpose), int(replicate)))


def _check_general_position(xs: np.ndarray, ys: np.ndarray) -> None:
    """Strict mode: no two seeds share an x-coordinate or a y-coordinate."""
    for axis, coords in (("x", xs), ("y", ys)):
        values, counts = np.unique(coords, return_counts=True)
        dup = values[counts > 1]
        if dup.size:
            raise DegenerateInputError(
                f"shared {axis}-coordinate among seeds: {axis}={float(dup[0])!r}"
            )


def _build_seed_set(
    xs: np.ndarray,
    ys: np.ndarray,
    vertical: np.ndarray,
    domain: BoxDomain,
    intensity: float,
    rng_seed: int | None,
) -> SeedSet:
    seeds = tuple(
        SeedPoint(
            id=k,
            position=Point2(float(xs[k]), float(ys[k])),
            mark=Direction.VERTICAL if vertical[k] else Direction.HORIZONTAL,
        )
        for k in range(len(xs))
    )
    return SeedSet(seeds=seeds, domain=domain, intensity=intensity, rng_seed=rng_seed)


def sample_poisson(
    domain: BoxDomain,
    intensity: float,
    marks: MarkDistribution = MarkDistribution(),
    rng_seed: int | np.random.SeedSequence = 0,
) -> SeedSet:
    """Sample a marked homogeneous Poisson process on the box.

    Draws the count from Poisson(intensity * area), then positions uniformly,
    then i.i.d. marks. Strict general position is verified on the draw; a
    collision (probability zero for float64 uniforms) raises rather than
    silently perturbing.
    """
    if not intensity > 0:
        raise ValueError(f"intensity must be positive, got {intensity}")
    rng = np.random.default_rng(rng_seed)
    count = int(rng.poisson(intensity * domain.area))
    xs = rng.uniform(0.0, domain.side, size=count)
    ys = rng.uniform(0.0, domain.side, size=count)
    vertical = rng.random(count) < marks.p_vertical
    _check_general_position(xs, ys)
    seed_val = rng_seed if isinstance(rng_seed, int) else None
    return _build_seed_set(xs, ys, vertical, domain, intensity, seed_val)


def insert_palm(seed_set: SeedSet, points: list[tuple[Point2, Direction]]) -> SeedSet:
    """Append pinned seeds, preserving the background and continuing ids.

    The background law is untouched (Palm conditioning for a Poisson process
    is insertion). Strict mode applies: the pinned positions must not share a
    coordinate with each other or with any existing seed.
    """
    ids0 = len(seed_set.seeds)
    pinned = tuple(
        SeedPoint(id=ids0 + k, position=p, mark=mark, pinned=True)
        for k, (p, mark) in enumerate(points)
    )
    all_seeds = seed_set.seeds + pinned
    xs = np.array([s.position.x for s in all_seeds])
    ys = np.array([s.position.y for s in all_seeds])
    _check_general_position(xs, ys)
    return replace(seed_set, seeds=all_seeds)


def jitter_points(
    points: list[tuple[Point2, Direction]],
    epsilon: float,
    rng_seed: int | np.random.SeedSequence = 0,
) -> list[tuple[Point2, Direction]]:
    """Perturb user-supplied positions by uniform(-epsilon, epsilon) per axis.

    Escape hatch for degenerate hand-written configurations that strict mode
    would reject; sampled seeds never need it.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    rng = np.random.default_rng(rng_seed)
    out = []
    for p, mark in points:
        dx, dy = rng.uniform(-epsilon, epsilon, size=2)
        out.append((Point2(p.x + dx, p.y + dy), mark))
    return out


SEED_CSV_HEADER = ["id", "x", "y", "mark", "pinned"]


def write_seeds_csv(seed_set: SeedSet, path: str) -> None:
    """Write seeds as CSV: comma-separated, '.' decimals, header row, LF endings."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SEED_CSV_HEADER)
        for s in seed_set.seeds:
            writer.writerow(
                [s.id, repr(s.position.x), repr(s.position.y), s.mark.value, int(s.pinned)]
            )


def read_seeds_csv(
    path: str,
    domain: BoxDomain,
    intensity: float = 1.0,
    rng_seed: int | None = None,
) -> SeedSet:
    """Read a seeds CSV written by `write_seeds_csv`. Full-precision round trip."""
    seeds = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != SEED_CSV_HEADER:
            raise ValueError(f"unexpected seeds CSV header: {header}")
        for row in reader:
            seeds.append(
                SeedPoint(
                    id=int(row[0]),
                    position=Point2(float(row[1]), float(row[2])),
                    mark=Direction(row[3]),
                    pinned=bool(int(row[4])),
                )
            )
    xs = np.array([s.position.x for s in seeds])
    ys = np.array([s.position.y for s in seeds])
    _check_general_position(xs, ys)
    return SeedSet(tuple(seeds), domain=domain, intensity=intensity, rng_seed=rng_seed)
