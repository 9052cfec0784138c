"""Companion models on the integer lattice.

Two discrete processes live here. The first is a cellular automaton on
Z^2 (or a finite box) with a fixed two-coloring: sites whose coordinates
are both even are inhibitory, every other site is excitatory. A site is
active at the next step exactly when its active excitatory neighbors
outnumber its active inhibitory neighbors, counting only the <= 4 lattice
neighbors inside the domain. The rule ignores the site's own state, which
is what makes the activity count non-monotone in time.

The second is a ray-growth process: each seed emits two tips along its
axis, one edge per unit time, and a tip freezes the moment it touches any
point already covered by another seed's trace. Unlike the continuous
model, collinear seeds are allowed, so tips can meet head-on; meetings
happen at half-integer times, at lattice vertices or edge midpoints. We
run the whole thing in doubled integer coordinates, where one half-step
moves a tip by exactly one unit. All tip positions share the same parity
at every step (they start even and advance together), so approaching tips
always land on a common point instead of passing through each other, and
no floating point is involved anywhere.

Stop causes distinguish how a tip died: T_JUNCTION for contact in the
interior of an orthogonal trace, CORNER for contact at an orthogonal
trace's endpoint, HEAD_ON for any collinear contact, FREE_AT_HORIZON for
tips still growing when the clock ran out. When several blockers touch
the same point, collinear contact wins, then interior, then endpoint.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from .geometry import Direction

Site = tuple[int, int]

ACTIVE_CHAR = "#"
INACTIVE_CHAR = "."


def is_inhibitory(site: Site) -> bool:
    """True when both coordinates are even."""
    return site[0] % 2 == 0 and site[1] % 2 == 0


def _site_in_box(site: Site, box_side: int) -> bool:
    return 0 <= site[0] <= box_side and 0 <= site[1] <= box_side


def lattice_neighbors(site: Site, box_side: int | None = None) -> Iterator[Site]:
    """The <= 4 nearest neighbors, clipped to the box when one is given."""
    x, y = site
    for nb in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)):
        if box_side is None or _site_in_box(nb, box_side):
            yield nb


@dataclass(frozen=True)
class LatticeState:
    """An active-site set, either on all of Z^2 or on the box {0..N}^2."""

    active: frozenset[Site]
    box_side: int | None = None

    def __post_init__(self) -> None:
        active = frozenset((int(x), int(y)) for x, y in self.active)
        object.__setattr__(self, "active", active)
        if self.box_side is not None:
            if self.box_side < 1:
                raise ValueError("box_side must be a positive integer")
            for site in active:
                if not _site_in_box(site, self.box_side):
                    raise ValueError(f"active site {site} lies outside the box")

    def __len__(self) -> int:
        return len(self.active)


def ca_step(state: LatticeState) -> LatticeState:
    """One synchronous update of the excitatory/inhibitory rule.

    A site is active next iff, among its in-domain neighbors, the active
    excitatory ones outnumber the active inhibitory ones by at least one.
    Only neighbors of currently active sites can possibly activate, so the
    update is finite even on the unbounded lattice.
    """
    candidates: set[Site] = set()
    for site in state.active:
        candidates.update(lattice_neighbors(site, state.box_side))
    nxt = set()
    for site in candidates:
        score = 0
        for nb in lattice_neighbors(site, state.box_side):
            if nb in state.active:
                score += -1 if is_inhibitory(nb) else 1
        if score >= 1:
            nxt.add(site)
    return LatticeState(frozenset(nxt), state.box_side)


@dataclass(frozen=True)
class CaTrajectory:
    """States visited by repeated ca_step, with cycle bookkeeping.

    ``states[t]`` is the state at time t. When a state revisit is found
    within the history window the run stops there and (cycle_start,
    cycle_period) record the repeat; both are None otherwise.
    """

    states: tuple[LatticeState, ...]
    cycle_start: int | None = None
    cycle_period: int | None = None

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.states)


def ca_run(initial: LatticeState, steps: int, cycle_window: int = 64) -> CaTrajectory:
    """Iterate ca_step up to `steps` times, stopping early on a state revisit.

    Revisits are only looked for among the most recent `cycle_window`
    states; older history is forgotten, so very long cycles go undetected.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    states = [initial]
    recent: dict[frozenset[Site], int] = {initial.active: 0}
    order: deque[frozenset[Site]] = deque([initial.active])
    for t in range(1, steps + 1):
        nxt = ca_step(states[-1])
        seen_at = recent.get(nxt.active)
        states.append(nxt)
        if seen_at is not None:
            return CaTrajectory(tuple(states), cycle_start=seen_at, cycle_period=t - seen_at)
        recent[nxt.active] = t
        order.append(nxt.active)
        if len(order) > cycle_window:
            del recent[order.popleft()]
    return CaTrajectory(tuple(states))


def parse_grid(text: str, box_side: int | None = None) -> LatticeState:
    """Read a plain-text grid into a state.

    '#' marks an active site, '.' an inactive one. The last line of the
    text is row y = 0 and columns map to x, so the text looks like the
    plane with y pointing up.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    active: set[Site] = set()
    height = len(lines)
    for row, line in enumerate(lines):
        y = height - 1 - row
        for x, ch in enumerate(line):
            if ch == ACTIVE_CHAR:
                active.add((x, y))
            elif ch != INACTIVE_CHAR:
                raise ValueError(f"unexpected grid character {ch!r}")
    return LatticeState(frozenset(active), box_side)


def format_grid(state: LatticeState, bounds: tuple[int, int, int, int] | None = None) -> str:
    """Render a state as the text format accepted by parse_grid.

    `bounds` is (x_lo, x_hi, y_lo, y_hi) inclusive; it defaults to the box
    for bounded states and to the active set's bounding box otherwise.
    """
    if bounds is None:
        if state.box_side is not None:
            bounds = (0, state.box_side, 0, state.box_side)
        elif state.active:
            xs = [s[0] for s in state.active]
            ys = [s[1] for s in state.active]
            bounds = (min(xs), max(xs), min(ys), max(ys))
        else:
            bounds = (0, 0, 0, 0)
    x_lo, x_hi, y_lo, y_hi = bounds
    rows = []
    for y in range(y_hi, y_lo - 1, -1):
        rows.append(
            "".join(
                ACTIVE_CHAR if (x, y) in state.active else INACTIVE_CHAR
                for x in range(x_lo, x_hi + 1)
            )
        )
    return "\n".join(rows) + "\n"


def write_activity_csv(trajectory: CaTrajectory, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "active_count"])
        for t, size in enumerate(trajectory.sizes):
            writer.writerow([t, size])


class StopCause(Enum):
    T_JUNCTION = "TJunction"
    CORNER = "Corner"
    HEAD_ON = "HeadOn"
    FREE_AT_HORIZON = "FreeAtHorizon"


@dataclass(frozen=True)
class LatticeSeed:
    position: Site
    direction: Direction


@dataclass(frozen=True)
class LatticeRayConfig:
    """Seeds plus the per-ray growth state of the lattice ray process.

    A fresh configuration has time 0 and no extents; lattice_ray_simulate
    returns a copy with `time` advanced to the horizon, per-ray extents
    (plus side, minus side) at half-integer resolution, and a stop cause
    for every ray. Seeds must lie strictly inside the box {0..N}^2 and be
    pairwise distinct.
    """

    seeds: tuple[LatticeSeed, ...]
    box_side: int
    time: float = 0.0
    extents: tuple[tuple[float, float], ...] = field(default=())
    causes: tuple[tuple[StopCause | None, StopCause | None], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.box_side <= 2:
            raise ValueError("box_side must exceed 2")
        positions = set()
        for seed in self.seeds:
            x, y = seed.position
            if not (1 <= x <= self.box_side - 1 and 1 <= y <= self.box_side - 1):
                raise ValueError(f"seed {seed.position} outside {{1..{self.box_side - 1}}}^2")
            if seed.position in positions:
                raise ValueError(f"duplicate seed position {seed.position}")
            positions.add(seed.position)
        if self.extents and len(self.extents) != len(self.seeds):
            raise ValueError("extents length must match seeds")
        if self.causes and len(self.causes) != len(self.seeds):
            raise ValueError("causes length must match seeds")

    @property
    def fresh(self) -> bool:
        return self.time == 0.0 and not self.extents


_PLUS, _MINUS = 0, 1


def lattice_ray_simulate(config: LatticeRayConfig, horizon: int) -> LatticeRayConfig:
    """Grow all rays for `horizon` time units and classify every stop.

    The march runs in doubled coordinates, one unit per half-step. At each
    half-step every live tip advances, then any tip standing on a point
    covered by another seed's trace (including points reached this very
    step) freezes for good. Simultaneous arrivals therefore stop each
    other, matching the tie rule of the continuous engine.
    """
    if not config.fresh:
        raise ValueError("expected a fresh configuration (time 0, no extents)")
    if horizon < 0 or horizon != int(horizon):
        raise ValueError("horizon must be a nonnegative integer")
    horizon = int(horizon)

    n = len(config.seeds)
    vertical = [seed.direction is Direction.VERTICAL for seed in config.seeds]
    # Doubled coordinates: seed i sits at (2x, 2y); its tips move along
    # `axis_pos` while `line` stays fixed.
    line = [2 * (seed.position[0] if vertical[i] else seed.position[1])
            for i, seed in enumerate(config.seeds)]
    axis0 = [2 * (seed.position[1] if vertical[i] else seed.position[0])
             for i, seed in enumerate(config.seeds)]

    tip = [[axis0[i], axis0[i]] for i in range(n)]
    alive = [[True, True] for _ in range(n)]
    cause: list[list[StopCause | None]] = [[None, None] for _ in range(n)]

    def point_of(i: int, axis_value: int) -> Site:
        return (line[i], axis_value) if vertical[i] else (axis_value, line[i])

    covered: dict[Site, list[int]] = {}
    for i in range(n):
        covered.setdefault(point_of(i, axis0[i]), []).append(i)

    for _step in range(2 * horizon):
        if not any(alive[i][s] for i in range(n) for s in (_PLUS, _MINUS)):
            break
        moves: list[tuple[int, int, Site]] = []
        arrivals: dict[Site, list[int]] = {}
        for i in range(n):
            for s in (_PLUS, _MINUS):
                if not alive[i][s]:
                    continue
                nxt = tip[i][s] + (1 if s == _PLUS else -1)
                target = point_of(i, nxt)
                moves.append((i, s, target))
                arrivals.setdefault(target, []).append(i)
        # Advance everyone first so endpoint tests below see this step's
        # positions, then resolve blocking against the pre-step coverage
        # plus the simultaneous arrivals.
        for i, s, target in moves:
            tip[i][s] += 1 if s == _PLUS else -1
        for i, s, target in moves:
            blockers = {j for j in covered.get(target, ()) if j != i}
            blockers.update(j for j in arrivals[target] if j != i)
            if blockers:
                alive[i][s] = False
                cause[i][s] = _classify_stop(i, target, blockers, vertical, line, tip, point_of)
        for i, s, target in moves:
            entry = covered.setdefault(target, [])
            if i not in entry:
                entry.append(i)

    final_time = float(horizon)
    extents = tuple(
        (abs(tip[i][_PLUS] - axis0[i]) / 2.0, abs(tip[i][_MINUS] - axis0[i]) / 2.0)
        for i in range(n)
    )
    causes = tuple(
        (
            cause[i][_PLUS] if cause[i][_PLUS] is not None else StopCause.FREE_AT_HORIZON,
            cause[i][_MINUS] if cause[i][_MINUS] is not None else StopCause.FREE_AT_HORIZON,
        )
        for i in range(n)
    )
    return LatticeRayConfig(
        seeds=config.seeds,
        box_side=config.box_side,
        time=final_time,
        extents=extents,
        causes=causes,
    )


def _classify_stop(i, target, blockers, vertical, line, tip, point_of) -> StopCause:
    """Name the contact that killed tip i at `target`.

    Collinear contact is HEAD_ON no matter where on the blocker's trace it
    happened. Orthogonal contact is T_JUNCTION when the point is strictly
    inside the blocker's trace and CORNER when it sits at a trace end,
    which covers simultaneous tip-to-tip meetings as well.
    """
    saw_interior = False
    for j in blockers:
        if vertical[j] == vertical[i]:
            return StopCause.HEAD_ON
        lo = min(tip[j][_PLUS], tip[j][_MINUS])
        hi = max(tip[j][_PLUS], tip[j][_MINUS])
        axis_value = target[1] if vertical[j] else target[0]
        if lo < axis_value < hi:
            saw_interior = True
    return StopCause.T_JUNCTION if saw_interior else StopCause.CORNER


def covered_lattice_points(config: LatticeRayConfig) -> frozenset[Site]:
    """Integer lattice points lying on some trace (edge midpoints excluded)."""
    if not config.extents:
        return frozenset(seed.position for seed in config.seeds)
    pts: set[Site] = set()
    for seed, (ext_plus, ext_minus) in zip(config.seeds, config.extents):
        x, y = seed.position
        if seed.direction is Direction.VERTICAL:
            span = range(math.ceil(y - ext_minus), math.floor(y + ext_plus) + 1)
            pts.update((x, v) for v in span)
        else:
            span = range(math.ceil(x - ext_minus), math.floor(x + ext_plus) + 1)
            pts.update((u, y) for u in span)
    return frozenset(pts)


def box_restriction(points: frozenset[Site], box_side: int) -> frozenset[Site]:
    return frozenset(p for p in points if _site_in_box(p, box_side))


def lattice_segments(config: LatticeRayConfig) -> list[tuple[float, float, float, float]]:
    """One (x0, y0, x1, y1) segment per seed, in ordinary coordinates."""
    segs = []
    extents = config.extents or tuple((0.0, 0.0) for _ in config.seeds)
    for seed, (ext_plus, ext_minus) in zip(config.seeds, extents):
        x, y = seed.position
        if seed.direction is Direction.VERTICAL:
            segs.append((float(x), y - ext_minus, float(x), y + ext_plus))
        else:
            segs.append((x - ext_minus, float(y), x + ext_plus, float(y)))
    return segs


@dataclass(frozen=True)
class LatticeComparisonRow:
    time: int
    ca_count: int
    ray_count: int
    only_ca: int
    only_rays: int

    @property
    def match(self) -> bool:
        return self.only_ca == 0 and self.only_rays == 0


def compare_ca_to_rays(config: LatticeRayConfig, steps: int) -> tuple[LatticeComparisonRow, ...]:
    """Side-by-side activity report for the two models, no verdict attached.

    The automaton starts from the seed positions on the same box and both
    processes are sampled at integer times. The models need not agree: the
    automaton spreads along both axes while rays follow their mark, so the
    report simply counts the discrepancies and leaves interpretation to
    the caller.
    """
    if not config.fresh:
        raise ValueError("expected a fresh configuration")
    rows = []
    state = LatticeState(frozenset(s.position for s in config.seeds), config.box_side)
    for t in range(steps + 1):
        rays_t = lattice_ray_simulate(config, horizon=t)
        ray_pts = box_restriction(covered_lattice_points(rays_t), config.box_side)
        ca_pts = state.active
        rows.append(
            LatticeComparisonRow(
                time=t,
                ca_count=len(ca_pts),
                ray_count=len(ray_pts),
                only_ca=len(ca_pts - ray_pts),
                only_rays=len(ray_pts - ca_pts),
            )
        )
        if t < steps:
            state = ca_step(state)
    return tuple(rows)


LATTICE_RAY_CSV_HEADER = [
    "seed_x",
    "seed_y",
    "mark",
    "ext_plus",
    "cause_plus",
    "ext_minus",
    "cause_minus",
]


def write_lattice_rays_csv(config: LatticeRayConfig, path: str) -> None:
    extents = config.extents or tuple((0.0, 0.0) for _ in config.seeds)
    causes = config.causes or tuple((None, None) for _ in config.seeds)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LATTICE_RAY_CSV_HEADER)
        for seed, (ep, em), (cp, cm) in zip(config.seeds, extents, causes):
            writer.writerow(
                [
                    seed.position[0],
                    seed.position[1],
                    "V" if seed.direction is Direction.VERTICAL else "H",
                    repr(float(ep)),
                    cp.value if cp is not None else "",
                    repr(float(em)),
                    cm.value if cm is not None else "",
                ]
            )
