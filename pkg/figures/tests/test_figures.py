"""Figure-script acceptance: consume primary outputs through the file
formats only, produce PNGs, and keep slope annotations in lockstep with
the primary CSV fits.
"""

import json
import subprocess
import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[2]
FIGURES = REPO / "figures"


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "balancelaws.cli", *args],
                          capture_output=True, text=True, cwd=REPO)


def run_script(script, *args):
    return subprocess.run([sys.executable, str(FIGURES / script), *args],
                          capture_output=True, text=True)


@pytest.fixture(scope="module")
def primary_outputs(tmp_path_factory):
    """Outputs of the ODE-order ladder, the sourced TV run, and the
    weak-residual ladder, produced via the CLI alone."""
    base = tmp_path_factory.mktemp("primary")

    ode_dir = base / "ode"
    proc = run_cli("convergence", "ode-order", "--output-dir", str(ode_dir))
    assert proc.returncode == 0, proc.stderr

    weak_dir = base / "weak"
    proc = run_cli("convergence", "weak-residual", "--output-dir",
                   str(weak_dir))
    assert proc.returncode == 0, proc.stderr

    run_dir = base / "tv_run"
    config = {
        "system": {
            "name": "burgers",
            "source": {"kind": "exp_decay", "amplitude": 0.05},
            "phase_box": {"center": [0.525], "half_widths": [0.35]},
        },
        "domain": [-2.0, 2.0],
        "r": 1 / 200,
        "t_end": 10.0,
        "initial_data": {"kind": "sine", "offset": [0.5],
                         "amplitude": [0.05], "frequency": 0.5},
        "snapshots": [10.0],
        "output_dir": str(run_dir),
    }
    config_path = base / "tv.json"
    config_path.write_text(json.dumps(config))
    proc = run_cli("run", str(config_path))
    assert proc.returncode == 0, proc.stderr

    return {
        "ode_csv": ode_dir / "convergence_ode-order.csv",
        "weak_csv": weak_dir / "convergence_weak-residual.csv",
        "snapshot": run_dir / "snapshot_0000.csv",
        "diagnostics": run_dir / "diagnostics.ndjson",
    }


def recorded_slope(csv_path):
    for line in csv_path.read_text().splitlines():
        if line.startswith("#") and "slope" in line:
            return float(line.split("=", 1)[1])
    raise AssertionError(f"no recorded slope in {csv_path}")


def printed_slope(stdout):
    for line in stdout.splitlines():
        if line.startswith("slope="):
            return float(line.split("=", 1)[1])
    raise AssertionError(f"no slope in output: {stdout!r}")


class TestProfile:
    def test_snapshot_profile(self, primary_outputs, tmp_path):
        out = tmp_path / "profile.png"
        proc = run_script("plot_profile.py", str(primary_outputs["snapshot"]),
                          "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        assert out.stat().st_size > 0

    def test_deterministic_bytes(self, primary_outputs, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        for out in (a, b):
            proc = run_script("plot_profile.py",
                              str(primary_outputs["snapshot"]),
                              "--out", str(out))
            assert proc.returncode == 0, proc.stderr
        assert a.read_bytes() == b.read_bytes()

    def test_empty_csv_fails_without_output(self, tmp_path):
        bad = tmp_path / "empty.csv"
        bad.write_text("")
        out = tmp_path / "nope.png"
        proc = run_script("plot_profile.py", str(bad), "--out", str(out))
        assert proc.returncode == 1
        assert not out.exists()

    def test_component_selection_validated(self, primary_outputs, tmp_path):
        out = tmp_path / "sel.png"
        proc = run_script("plot_profile.py", str(primary_outputs["snapshot"]),
                          "--out", str(out), "--components", "7")
        assert proc.returncode == 1
        assert not out.exists()


class TestDiagnostics:
    def test_plot_with_budget_line(self, primary_outputs, tmp_path):
        out = tmp_path / "diag.png"
        proc = run_script("plot_diagnostics.py",
                          str(primary_outputs["diagnostics"]),
                          "--out", str(out), "--budget", "0.05")
        assert proc.returncode == 0, proc.stderr
        assert out.stat().st_size > 0

    def test_schema_violation_fails(self, tmp_path):
        bad = tmp_path / "bad.ndjson"
        bad.write_text('{"k": 0, "t": 0.0, "L": 1.0}\n')
        out = tmp_path / "nope.png"
        proc = run_script("plot_diagnostics.py", str(bad), "--out", str(out))
        assert proc.returncode == 1
        assert not out.exists()


class TestConvergence:
    @pytest.mark.parametrize("key", ["ode_csv", "weak_csv"])
    def test_annotation_matches_primary_fit(self, primary_outputs, tmp_path,
                                            key):
        csv_path = primary_outputs[key]
        out = tmp_path / f"{key}.png"
        proc = run_script("plot_convergence.py", str(csv_path),
                          "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        assert out.stat().st_size > 0
        assert abs(printed_slope(proc.stdout)
                   - recorded_slope(csv_path)) <= 1e-6

    def test_single_row_fails(self, tmp_path):
        bad = tmp_path / "single.csv"
        bad.write_text("r,err\n0.1,0.01\n")
        out = tmp_path / "nope.png"
        proc = run_script("plot_convergence.py", str(bad), "--out", str(out))
        assert proc.returncode == 1
        assert not out.exists()


def test_primary_package_is_independent_of_figures():
    # the solver package must import and run with no plotting stack loaded
    code = ("import sys; import balancelaws; "
            "sys.exit(1 if 'matplotlib' in sys.modules else 0)")
    proc = subprocess.run([sys.executable, "-c", code], cwd=REPO)
    assert proc.returncode == 0
