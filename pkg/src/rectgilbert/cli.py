"""Command line experiment runner.

Each subcommand runs one experiment end to end: parse flags, merge them
over an optional flat key=value config file, run, and write the outputs
next to a manifest. The manifest echoes every effective parameter plus a
version string and the wall time, and feeding it back through --config
reproduces the CSV and JSON outputs byte for byte (the manifest itself
carries the new wall time, nothing else changes).

Exit codes: 0 success, 1 usage or configuration error, 2 degenerate
input, 3 a checked property failed (euler, oracle-check).

Reports that produce tables also render a figure alongside them; both go
to output_dir, whose default can be overridden with the
RECTGILBERT_OUTPUT_DIR environment variable (flags still win).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, fields, replace

from . import __version__
from .engine import oracle_simulate, simulate, write_tessellation_csv
from .geometry import BoxDomain, Direction
from .lattice import (
    LatticeRayConfig,
    LatticeSeed,
    LatticeState,
    ca_run,
    compare_ca_to_rays,
    format_grid,
    lattice_ray_simulate,
    lattice_segments,
    parse_grid,
    write_activity_csv,
    write_lattice_rays_csv,
)
from .planar import euler_check, extract_graph
from .sampling import (
    DegenerateInputError,
    MarkDistribution,
    read_seeds_csv,
    sample_poisson,
    stream_seed,
)
from . import plots, stats, svg

_OUTPUT_DIR_ENV = "RECTGILBERT_OUTPUT_DIR"


@dataclass
class ExperimentConfig:
    """Every knob of every experiment, with the shared ones up front.

    Unused fields are simply ignored by a given subcommand but still
    echoed into its manifest, keeping manifests uniform and diffable.
    """

    experiment: str = ""
    intensity: float = 1.0
    box_side: float = 20.0
    horizon: float = 0.0  # 0 means "use box_side"
    replicates: int = 1000
    master_seed: int = 7
    output_dir: str = "."
    mark_p: float = 0.5
    threads: int = 1
    t_max: float = 10.0
    t: float = 2.0
    dt: float = 1e-3
    intensity_hi: float = 4.0
    separation: float = 0.05
    preset: str = "parallel"
    distances: str = "1,2,4,8"
    n_values: str = "20,40,80"
    steps: int = 20
    active: str = ""
    seeds: str = ""
    seeds_csv: str = ""
    compare_steps: int = 0

    def distances_list(self) -> list[float]:
        return [float(x) for x in self.distances.split(",") if x.strip()]

    def n_values_list(self) -> list[float]:
        return [float(x) for x in self.n_values.split(",") if x.strip()]

    def effective_horizon(self) -> float:
        return self.horizon if self.horizon > 0 else self.box_side


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


class CliError(Exception):
    """Configuration problem that should exit with status 1."""


def load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}") from exc
    return values


def _coerce(name: str, value: str):
    kind = _FIELD_TYPES.get(name)
    if kind is None:
        raise CliError(f"unknown config key {name!r}")
    try:
        if kind in ("int", int):
            return int(value)
        if kind in ("float", float):
            return float(value)
    except ValueError as exc:
        raise CliError(f"bad value for {name}: {value!r}") from exc
    return value


def build_config(experiment: str, args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then config file, then environment, then explicit flags."""
    cfg = ExperimentConfig(experiment=experiment)
    if getattr(args, "config", None):
        for key, value in load_config_file(args.config).items():
            if key in ("version", "wall_time_s", "experiment"):
                continue
            cfg = replace(cfg, **{key: _coerce(key, value)})
    env_dir = os.environ.get(_OUTPUT_DIR_ENV)
    if env_dir:
        cfg = replace(cfg, output_dir=env_dir)
    for name in _FIELD_TYPES:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            cfg = replace(cfg, **{name: flag_value})
    cfg.experiment = experiment
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.replicates < 1:
        raise CliError("replicates must be >= 1")
    if cfg.intensity < 0:
        raise CliError("intensity must be nonnegative")
    if cfg.box_side < 0:
        raise CliError("box_side must be nonnegative")
    if not 0 < cfg.mark_p < 1:
        raise CliError("mark_p must lie strictly between 0 and 1")
    if cfg.threads < 1:
        raise CliError("threads must be >= 1")


def _out_path(cfg: ExperimentConfig, suffix: str) -> str:
    os.makedirs(cfg.output_dir, exist_ok=True)
    stem = f"{cfg.experiment}-seed{cfg.master_seed}"
    return os.path.join(cfg.output_dir, stem + suffix)


def write_manifest(cfg: ExperimentConfig, wall_time_s: float) -> str:
    path = _out_path(cfg, "-manifest.txt")
    lines = []
    for f in fields(ExperimentConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name}={value}")
    lines.append(f"version={__version__}")
    lines.append(f"wall_time_s={wall_time_s:.3f}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _write_json(path: str, payload) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    import csv as _csv

    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def _parse_direction(letter: str) -> Direction:
    if letter.upper() in ("H", "HORIZONTAL"):
        return Direction.HORIZONTAL
    if letter.upper() in ("V", "VERTICAL"):
        return Direction.VERTICAL
    raise CliError(f"unknown direction {letter!r}")


# ---------------------------------------------------------------- commands


def _cmd_simulate(cfg: ExperimentConfig) -> int:
    if cfg.seeds_csv:
        seed_set = read_seeds_csv(cfg.seeds_csv, BoxDomain(cfg.box_side), cfg.intensity)
    else:
        seed_set = sample_poisson(
            BoxDomain(cfg.box_side),
            cfg.intensity,
            MarkDistribution(cfg.mark_p),
            rng_seed=stream_seed(cfg.master_seed, 0, "simulate"),
        )
    tess = simulate(seed_set, horizon=cfg.effective_horizon())
    write_tessellation_csv(tess, _out_path(cfg, ".csv"))
    svg.render_tessellation_svg(_out_path(cfg, ".svg"), tess)
    summary = {
        "n_seeds": len(seed_set),
        "degenerate_events": len(tess.degenerate_events),
        "csv": os.path.basename(_out_path(cfg, ".csv")),
        "svg": os.path.basename(_out_path(cfg, ".svg")),
    }
    _write_json(_out_path(cfg, ".json"), summary)
    return 0


def _cmd_oracle_check(cfg: ExperimentConfig) -> int:
    mismatches = []
    max_diff = 0.0
    for rep in range(cfg.replicates):
        seed_set = sample_poisson(
            BoxDomain(cfg.box_side),
            cfg.intensity,
            MarkDistribution(cfg.mark_p),
            rng_seed=stream_seed(cfg.master_seed, rep, "oracle-check"),
        )
        exact = simulate(seed_set, horizon=cfg.effective_horizon())
        approx = oracle_simulate(seed_set, horizon=cfg.effective_horizon(), dt=cfg.dt)
        for i in range(exact.n_seeds):
            for s in (0, 1):
                cause_exact = exact.blocker[i, s] >= 0
                cause_oracle = approx.blocker[i, s] >= 0
                diff = abs(exact.lengths[i, s] - approx.lengths[i, s])
                max_diff = max(max_diff, float(diff))
                if cause_exact != cause_oracle or (
                    cause_exact and exact.blocker[i, s] != approx.blocker[i, s]
                ):
                    mismatches.append(
                        {"replicate": rep, "seed": int(exact.seed_ids[i]), "side": "+-"[s]}
                    )
                elif diff > 2 * cfg.dt:
                    mismatches.append(
                        {
                            "replicate": rep,
                            "seed": int(exact.seed_ids[i]),
                            "side": "+-"[s],
                            "length_diff": float(diff),
                        }
                    )
    report = {
        "replicates": cfg.replicates,
        "dt": cfg.dt,
        "max_length_diff": max_diff,
        "mismatches": mismatches,
        "passed": not mismatches,
    }
    _write_json(_out_path(cfg, ".json"), report)
    return 0 if not mismatches else 3


def _cmd_euler(cfg: ExperimentConfig) -> int:
    rows = []
    failures = 0
    for rep in range(cfg.replicates):
        seed_set = sample_poisson(
            BoxDomain(cfg.box_side),
            cfg.intensity,
            MarkDistribution(cfg.mark_p),
            rng_seed=stream_seed(cfg.master_seed, rep, "euler"),
        )
        tess = simulate(seed_set, horizon=cfg.effective_horizon())
        report = euler_check(extract_graph(tess), len(seed_set))
        failures += 0 if report.passed else 1
        rows.append(
            [
                rep,
                len(seed_set),
                report.n_vertices,
                report.n_edges,
                report.n_faces,
                report.n_rectangles,
                report.passed,
            ]
        )
    _write_csv(
        _out_path(cfg, ".csv"),
        ["replicate", "n_seeds", "vertices", "edges", "faces", "rectangles", "passed"],
        rows,
    )
    summary = {
        "replicates": cfg.replicates,
        "failures": failures,
        "passed": failures == 0,
    }
    _write_json(_out_path(cfg, ".json"), summary)
    return 0 if failures == 0 else 3


def _cmd_tail(cfg: ExperimentConfig) -> int:
    samples = stats.sample_ray_lengths(
        cfg.intensity,
        cfg.t_max,
        cfg.replicates,
        cfg.master_seed,
        p_vertical=cfg.mark_p,
        threads=cfg.threads,
    )
    curve = stats.estimate_survival(
        [l for l, _ in samples], stats.survival_grid(cfg.t_max), censor_point=cfg.t_max
    )
    fit = stats.fit_exponential_tail(curve, stats.default_fit_range(samples))
    _write_csv(
        _out_path(cfg, ".csv"),
        ["t", "survival"],
        [[float(t), float(s)] for t, s in zip(curve.grid, curve.survival)],
    )
    n_censored = sum(1 for _, c in samples if c)
    _write_json(
        _out_path(cfg, ".json"),
        {
            "rate": fit.rate,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "fit_range": list(fit.fit_range),
            "n_points": fit.n_points,
            "replicates": cfg.replicates,
            "censored": n_censored,
            "censored_fraction": n_censored / cfg.replicates,
        },
    )
    plots.survival_figure(_out_path(cfg, ".png"), curve, fit)
    return 0


def _cmd_scaling(cfg: ExperimentConfig) -> int:
    ratio = cfg.intensity_hi / cfg.intensity
    if ratio <= 0:
        raise CliError("intensity_hi must exceed 0")
    scale = ratio ** 0.5
    base = stats.sample_ray_lengths(
        cfg.intensity, cfg.t_max, cfg.replicates, cfg.master_seed,
        p_vertical=cfg.mark_p, threads=cfg.threads,
    )
    high = stats.sample_ray_lengths(
        cfg.intensity_hi, cfg.t_max / scale, cfg.replicates, cfg.master_seed,
        p_vertical=cfg.mark_p, threads=cfg.threads,
    )
    base_unc = stats.uncensored_totals(base)
    high_unc = scale * stats.uncensored_totals(high)
    ks = stats.two_sample_ks(high_unc, base_unc)
    rows = [["reference", float(x)] for x in base_unc]
    rows += [["rescaled", float(x)] for x in high_unc]
    _write_csv(_out_path(cfg, ".csv"), ["sample", "total_length"], rows)
    _write_json(
        _out_path(cfg, ".json"),
        {
            "ks_distance": ks,
            "n_reference": int(base_unc.size),
            "n_rescaled": int(high_unc.size),
            "intensity": cfg.intensity,
            "intensity_hi": cfg.intensity_hi,
            "scale": scale,
        },
    )
    plots.scaling_figure(_out_path(cfg, ".png"), base_unc, high_unc, ks)
    return 0


def _preset(cfg: ExperimentConfig) -> stats.DirectionConfig:
    try:
        return stats.PRESET_CONFIGS[cfg.preset]
    except KeyError:
        raise CliError(
            f"unknown preset {cfg.preset!r}; choose from {sorted(stats.PRESET_CONFIGS)}"
        ) from None


def _cmd_cov(cfg: ExperimentConfig) -> int:
    preset = _preset(cfg)
    u, v = preset.place(cfg.separation)
    est = stats.estimate_covariance(
        u, preset.d_u, v, preset.d_v, cfg.t, cfg.intensity,
        cfg.replicates, cfg.master_seed, threads=cfg.threads,
    )
    _write_json(
        _out_path(cfg, ".json"),
        {
            "value": est.value,
            "std_error": est.std_error,
            "p_u": est.p_u,
            "p_v": est.p_v,
            "p_joint": est.p_joint,
            "replicates": est.replicates,
            "preset": preset.name,
            "separation": cfg.separation,
            "t": cfg.t,
        },
    )
    _write_csv(
        _out_path(cfg, ".csv"),
        ["preset", "separation", "t", "value", "std_error", "p_u", "p_v", "p_joint"],
        [[preset.name, cfg.separation, cfg.t, est.value, est.std_error,
          est.p_u, est.p_v, est.p_joint]],
    )
    return 0


def _cmd_cov_sweep(cfg: ExperimentConfig) -> int:
    preset = _preset(cfg)
    rows = stats.covariance_decay_sweep(
        preset, cfg.distances_list(), cfg.t, cfg.intensity,
        cfg.replicates, cfg.master_seed, threads=cfg.threads,
    )
    _write_csv(
        _out_path(cfg, ".csv"),
        ["distance", "value", "abs_value", "std_error", "p_u", "p_v", "p_joint"],
        [[r.distance, r.value, r.abs_value, r.std_error, r.p_u, r.p_v, r.p_joint]
         for r in rows],
    )
    first, last = rows[0], rows[-1]
    _write_json(
        _out_path(cfg, ".json"),
        {
            "preset": preset.name,
            "t": cfg.t,
            "distances": [r.distance for r in rows],
            "values": [r.value for r in rows],
            "std_errors": [r.std_error for r in rows],
            "far_within_3se_of_zero": bool(last.abs_value < 3 * last.std_error),
            "near_far_separated_3se": bool(
                first.abs_value - last.abs_value
                > 3 * (first.std_error + last.std_error)
            ),
        },
    )
    plots.decay_figure(_out_path(cfg, ".png"), rows)
    return 0


def _cmd_escape(cfg: ExperimentConfig) -> int:
    rows = stats.escaping_expectation(
        cfg.intensity, cfg.n_values_list(), cfg.replicates,
        cfg.master_seed, threads=cfg.threads,
    )
    _write_csv(
        _out_path(cfg, ".csv"),
        ["box_side", "mean", "std_error", "normalized"],
        [[r.box_side, r.mean, r.std_error, r.normalized] for r in rows],
    )
    normalized = [r.normalized for r in rows]
    spread = (max(normalized) - min(normalized)) / min(normalized) if min(normalized) > 0 else float("inf")
    _write_json(
        _out_path(cfg, ".json"),
        {
            "intensity": cfg.intensity,
            "box_sides": [r.box_side for r in rows],
            "means": [r.mean for r in rows],
            "normalized": normalized,
            "relative_spread": spread,
        },
    )
    plots.escape_figure(_out_path(cfg, ".png"), rows)
    return 0


def _parse_active(text: str) -> frozenset[tuple[int, int]]:
    sites = set()
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            x, y = part.split(",")
            sites.add((int(x), int(y)))
        except ValueError as exc:
            raise CliError(f"bad site {part!r}, expected x,y") from exc
    return frozenset(sites)


def _cmd_ca(cfg: ExperimentConfig) -> int:
    if not cfg.active:
        raise CliError("ca needs --active 'x,y;x,y' or a config file with active=")
    box = int(cfg.box_side) if cfg.box_side > 0 else None
    initial = LatticeState(_parse_active(cfg.active), box)
    traj = ca_run(initial, cfg.steps)
    write_activity_csv(traj, _out_path(cfg, ".csv"))
    with open(_out_path(cfg, ".txt"), "w", newline="\n") as fh:
        fh.write(format_grid(traj.states[-1]))
    _write_json(
        _out_path(cfg, ".json"),
        {
            "steps_run": len(traj.states) - 1,
            "sizes": list(traj.sizes),
            "cycle_start": traj.cycle_start,
            "cycle_period": traj.cycle_period,
        },
    )
    plots.ca_activity_figure(_out_path(cfg, ".png"), traj)
    return 0


def _parse_lattice_seeds(text: str) -> tuple[LatticeSeed, ...]:
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            x, y, mark = part.split(",")
            out.append(LatticeSeed((int(x), int(y)), _parse_direction(mark)))
        except ValueError as exc:
            raise CliError(f"bad lattice seed {part!r}, expected x,y,H|V") from exc
    if not out:
        raise CliError("no lattice seeds given")
    return tuple(out)


def _cmd_lattice_rays(cfg: ExperimentConfig) -> int:
    seeds = _parse_lattice_seeds(cfg.seeds)
    box = int(cfg.box_side)
    try:
        ray_cfg = LatticeRayConfig(seeds=seeds, box_side=box)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    horizon = int(cfg.effective_horizon())
    final = lattice_ray_simulate(ray_cfg, horizon)
    write_lattice_rays_csv(final, _out_path(cfg, ".csv"))
    svg.render_segments_svg(
        _out_path(cfg, ".svg"),
        lattice_segments(final),
        box,
        vertical_flags=[s.direction is Direction.VERTICAL for s in seeds],
        seed_points=[s.position for s in seeds],
    )
    cause_counts: dict[str, int] = {}
    for pair in final.causes:
        for cause in pair:
            cause_counts[cause.value] = cause_counts.get(cause.value, 0) + 1
    payload = {"horizon": horizon, "cause_counts": cause_counts}
    if cfg.compare_steps > 0:
        comparison = compare_ca_to_rays(ray_cfg, cfg.compare_steps)
        _write_csv(
            _out_path(cfg, "-compare.csv"),
            ["t", "ca_count", "ray_count", "only_ca", "only_rays", "match"],
            [[r.time, r.ca_count, r.ray_count, r.only_ca, r.only_rays, r.match]
             for r in comparison],
        )
        payload["comparison_csv"] = os.path.basename(_out_path(cfg, "-compare.csv"))
    _write_json(_out_path(cfg, ".json"), payload)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "oracle-check": _cmd_oracle_check,
    "euler": _cmd_euler,
    "tail": _cmd_tail,
    "scaling": _cmd_scaling,
    "cov": _cmd_cov,
    "cov-sweep": _cmd_cov_sweep,
    "escape": _cmd_escape,
    "ca": _cmd_ca,
    "lattice-rays": _cmd_lattice_rays,
}


class _Parser(argparse.ArgumentParser):
    """argparse, but usage problems exit with status 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file (a manifest works)")
    p.add_argument("--lambda", dest="intensity", type=float, help="Poisson intensity")
    p.add_argument("--box", dest="box_side", type=float, help="domain box side")
    p.add_argument("--horizon", type=float, help="growth horizon (default: box side)")
    p.add_argument("--replicates", type=int, help="number of Monte Carlo replicates")
    p.add_argument("--seed", dest="master_seed", type=int, help="master RNG seed")
    p.add_argument("--out", dest="output_dir", help="output directory")
    p.add_argument("--mark-p", dest="mark_p", type=float, help="P(mark = vertical)")
    p.add_argument("--threads", type=int, help="replicate parallelism (results identical for any value)")


def make_parser() -> _Parser:
    parser = _Parser(prog="rectgilbert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rectgilbert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    specs = {
        "simulate": "sample one tessellation and write CSV + SVG",
        "oracle-check": "compare the exact engine against the time-stepping oracle",
        "euler": "check the planar-graph count identities on random instances",
        "tail": "Palm-sample total lengths and fit the exponential tail",
        "scaling": "two-sample KS check of the intensity rescaling identity",
        "cov": "covariance of two free-growth indicators at one placement",
        "cov-sweep": "covariance decay over a range of separations",
        "escape": "mean boundary-reaching ray count per box size",
        "ca": "run the excitatory/inhibitory automaton",
        "lattice-rays": "run the lattice ray growth process",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "simulate":
            p.add_argument("--seeds-csv", dest="seeds_csv",
                           help="simulate these seeds instead of sampling")
        if name == "oracle-check":
            p.add_argument("--dt", type=float, help="oracle step size")
        if name in ("tail", "scaling"):
            p.add_argument("--tmax", dest="t_max", type=float, help="censoring horizon")
        if name == "scaling":
            p.add_argument("--lambda-hi", dest="intensity_hi", type=float,
                           help="rescaled intensity (default 4)")
        if name in ("cov", "cov-sweep"):
            p.add_argument("--preset", choices=sorted(stats.PRESET_CONFIGS),
                           help="direction configuration")
            p.add_argument("--t", type=float, help="growth time of the indicators")
        if name == "cov":
            p.add_argument("--separation", type=float, help="L1 distance between the seeds")
        if name == "cov-sweep":
            p.add_argument("--distances", help="comma-separated L1 separations")
        if name == "escape":
            p.add_argument("--n-values", dest="n_values", help="comma-separated box sides")
        if name == "ca":
            p.add_argument("--active", help="initial sites 'x,y;x,y'")
            p.add_argument("--grid", help="initial state as a text grid file")
            p.add_argument("--steps", type=int, help="number of automaton steps")
        if name == "lattice-rays":
            p.add_argument("--seeds", help="lattice seeds 'x,y,H;x,y,V'")
            p.add_argument("--compare-steps", dest="compare_steps", type=int,
                           help="also write the automaton comparison table for this many steps")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "grid", None):
            with open(args.grid) as fh:
                state = parse_grid(fh.read())
            args.active = ";".join(f"{x},{y}" for x, y in sorted(state.active))
        cfg = build_config(args.command, args)
        started = time.perf_counter()
        status = _COMMANDS[args.command](cfg)
        write_manifest(cfg, time.perf_counter() - started)
        return status
    except CliError as exc:
        print(f"rectgilbert: {exc}", file=sys.stderr)
        return 1
    except DegenerateInputError as exc:
        print(f"rectgilbert: degenerate input: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"rectgilbert: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"rectgilbert: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
