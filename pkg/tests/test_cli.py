"""Command line behavior: outputs, exit codes, manifests, reruns."""

import dataclasses
import json
import subprocess
import sys

import rectgilbert.cli as cli


def run(args, **kw):
    return cli.main(list(args), **kw)


def read(path):
    return path.read_bytes()


def test_usage_errors_exit_one(capsys):
    assert run(["no-such-command"]) == 1
    assert run([]) == 1
    assert run(["tail", "--tmax", "-3"]) == 1
    assert run(["tail", "--replicates", "0"]) == 1
    capsys.readouterr()


def test_simulate_writes_the_full_set(tmp_path):
    rc = run(
        ["simulate", "--box", "8", "--seed", "3", "--out", str(tmp_path)]
    )
    assert rc == 0
    for suffix in (".csv", ".svg", ".json", "-manifest.txt"):
        assert (tmp_path / f"simulate-seed3{suffix}").exists(), suffix
    manifest = (tmp_path / "simulate-seed3-manifest.txt").read_text()
    assert "master_seed=3" in manifest
    assert "wall_time_s" in manifest


def test_degenerate_seed_csv_exits_two(tmp_path, capsys):
    bad = tmp_path / "seeds.csv"
    bad.write_text("id,x,y,mark,pinned\n0,1.0,2.0,H,0\n1,1.0,4.0,V,0\n")
    rc = run(
        [
            "simulate", "--seeds-csv", str(bad),
            "--box", "8", "--out", str(tmp_path),
        ]
    )
    assert rc == 2
    assert "degenerate" in capsys.readouterr().err


def test_euler_passes_and_reports(tmp_path):
    rc = run(
        [
            "euler", "--replicates", "10", "--box", "8",
            "--seed", "5", "--out", str(tmp_path),
        ]
    )
    assert rc == 0
    payload = json.loads((tmp_path / "euler-seed5.json").read_text())
    assert payload["passed"] is True
    assert payload["failures"] == 0


def test_failed_identity_exits_three(tmp_path, monkeypatch):
    real = cli.euler_check

    def sabotaged(graph, n_seeds):
        report = real(graph, n_seeds)
        return dataclasses.replace(report, euler_ok=False)

    monkeypatch.setattr(cli, "euler_check", sabotaged)
    rc = run(
        [
            "euler", "--replicates", "2", "--box", "6",
            "--seed", "5", "--out", str(tmp_path),
        ]
    )
    assert rc == 3
    payload = json.loads((tmp_path / "euler-seed5.json").read_text())
    assert payload["passed"] is False


def test_oracle_check_confirms_the_engine(tmp_path):
    rc = run(
        [
            "oracle-check", "--replicates", "3", "--box", "6",
            "--dt", "0.001", "--seed", "2", "--out", str(tmp_path),
        ]
    )
    assert rc == 0
    payload = json.loads((tmp_path / "oracle-check-seed2.json").read_text())
    assert payload["passed"] is True


def test_manifest_rerun_reproduces_bytes(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    rc = run(
        [
            "tail", "--replicates", "120", "--tmax", "4",
            "--seed", "9", "--out", str(first),
        ]
    )
    assert rc == 0
    rc = run(
        [
            "tail", "--config", str(first / "tail-seed9-manifest.txt"),
            "--out", str(second),
        ]
    )
    assert rc == 0
    assert read(first / "tail-seed9.csv") == read(second / "tail-seed9.csv")
    assert read(first / "tail-seed9.json") == read(second / "tail-seed9.json")


def test_thread_count_does_not_change_results(tmp_path):
    one, three = tmp_path / "one", tmp_path / "three"
    base = ["tail", "--replicates", "90", "--tmax", "4", "--seed", "9"]
    assert run(base + ["--out", str(one)]) == 0
    assert run(base + ["--threads", "3", "--out", str(three)]) == 0
    assert read(one / "tail-seed9.csv") == read(three / "tail-seed9.csv")
    assert read(one / "tail-seed9.json") == read(three / "tail-seed9.json")


def test_flags_beat_config_file_beats_environment(tmp_path, monkeypatch):
    conf = tmp_path / "run.conf"
    conf.write_text("replicates = 7\nbox_side = 6.0\n")
    env_dir = tmp_path / "from-env"
    flag_dir = tmp_path / "from-flag"
    monkeypatch.setenv("RECTGILBERT_OUTPUT_DIR", str(env_dir))

    rc = run(["euler", "--config", str(conf), "--seed", "4"])
    assert rc == 0
    assert (env_dir / "euler-seed4.json").exists()
    payload = json.loads((env_dir / "euler-seed4.json").read_text())
    assert payload["replicates"] == 7

    rc = run(
        [
            "euler", "--config", str(conf), "--seed", "4",
            "--replicates", "3", "--out", str(flag_dir),
        ]
    )
    assert rc == 0
    payload = json.loads((flag_dir / "euler-seed4.json").read_text())
    assert payload["replicates"] == 3
    assert (flag_dir / "euler-seed4-manifest.txt").exists()


def test_cov_uses_presets(tmp_path):
    rc = run(
        [
            "cov", "--preset", "trap", "--t", "2.5", "--separation", "2.0",
            "--replicates", "200", "--seed", "6", "--out", str(tmp_path),
        ]
    )
    assert rc == 0
    payload = json.loads((tmp_path / "cov-seed6.json").read_text())
    assert payload["p_joint"] == 0.0
    assert run(["cov", "--preset", "bogus", "--out", str(tmp_path)]) == 1


def test_ca_accepts_a_grid_file(tmp_path):
    grid = tmp_path / "init.txt"
    grid.write_text(".....\n..#..\n.....\n")
    rc = run(
        [
            "ca", "--grid", str(grid), "--steps", "4",
            "--seed", "1", "--out", str(tmp_path),
        ]
    )
    assert rc == 0
    activity = (tmp_path / "ca-seed1.csv").read_text().splitlines()
    assert activity[0] == "t,active_count"
    assert activity[1] == "0,1"
    assert (tmp_path / "ca-seed1.txt").exists()


def test_ca_requires_an_initial_state(tmp_path, capsys):
    assert run(["ca", "--out", str(tmp_path)]) == 1
    capsys.readouterr()


def test_lattice_rays_with_comparison(tmp_path):
    rc = run(
        [
            "lattice-rays", "--seeds", "1,3,H;5,3,H", "--box", "6",
            "--compare-steps", "4", "--seed", "8", "--out", str(tmp_path),
        ]
    )
    assert rc == 0
    payload = json.loads((tmp_path / "lattice-rays-seed8.json").read_text())
    assert payload["cause_counts"]["HeadOn"] == 2
    assert (tmp_path / "lattice-rays-seed8-compare.csv").exists()
    assert (tmp_path / "lattice-rays-seed8.svg").exists()


def test_installed_entry_point_runs(tmp_path):
    proc = subprocess.run(
        [
            sys.executable, "-m", "rectgilbert.cli",
            "euler", "--replicates", "2", "--box", "6",
            "--seed", "11", "--out", str(tmp_path),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "euler-seed11.json").exists()
