import csv
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from fringesynth import formats
from fringesynth.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(l for l in fh if not l.startswith("#")))


# --- synth -------------------------------------------------------------------------

def test_synth_writes_all_artifacts(tmp_path, capsys):
    code, out, _ = run(capsys, "synth", "rect", 10, "--out", tmp_path)
    assert code == 0
    for name in ("coefficients.csv", "roots.json", "roots.csv", "settings.csv", "settings.json", "manifest.json"):
        assert (tmp_path / name).exists()
    assert "28.75" in out and "-147.68" in out
    rows = read_csv(tmp_path / "settings.csv")
    assert len(rows) == 10
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "synth" and manifest["tool_version"]


def test_synth_noon_1(tmp_path, capsys):
    code, _, _ = run(capsys, "synth", "noon", 1, "--out", tmp_path)
    assert code == 0
    rows = read_csv(tmp_path / "settings.csv")
    assert len(rows) == 1
    assert float(rows[0]["rho_deg"]) == pytest.approx(45.0)
    assert float(rows[0]["theta_deg"]) == 0.0


def test_synth_flag_form_and_smoothing(tmp_path, capsys):
    code, _, _ = run(capsys, "synth", "--target", "saw", "--n", 10, "--smoothing", "lanczos", "--out", tmp_path)
    assert code == 0
    c = formats.read_coefficients(tmp_path / "coefficients.csv")
    assert abs(c.b[4]) < 0.1607


def test_synth_from_samples(tmp_path, capsys):
    phi = np.arange(256) * 2 * math.pi / 256
    samples = tmp_path / "g.csv"
    samples.write_text("phi,re,im\n" + "".join(f"{float(a)!r},{math.cos(3 * a)!r},0\n" for a in phi))
    code, _, _ = run(capsys, "synth", "file", 6, "--samples", samples, "--out", tmp_path)
    assert code == 0
    assert samples.name in json.loads((tmp_path / "manifest.json").read_text())["inputs"][0]
    assert len(read_csv(tmp_path / "settings.csv")) == 6


# --- pattern ---------------------------------------------------------------------------

def test_pattern_noon10(tmp_path, capsys):
    code, _, _ = run(capsys, "pattern", "noon", 10, "--out", tmp_path)
    assert code == 0
    p = formats.read_pattern(tmp_path / "pattern.csv")
    assert len(p.grid) == 215
    rows = read_csv(tmp_path / "pattern.csv")
    aligned = np.array([float(r["product_aligned"]) for r in rows])
    np.testing.assert_allclose(aligned, p.values, rtol=0, atol=1e-8 * p.values.max())
    x = p.values
    assert sum(1 for i in range(x.size) if x[i] > x[i - 1] and x[i] > x[(i + 1) % x.size]) == 10


def test_pattern_single_projector(tmp_path, capsys):
    settings = tmp_path / "one.csv"
    settings.write_text("n,rho_deg,theta_deg,norm\n1,45,0,0.707107\n")
    code, _, _ = run(capsys, "pattern", "--settings", settings, "--points", 100, "--out", tmp_path)
    assert code == 0
    p = formats.read_pattern(tmp_path / "pattern.csv")
    shape = np.sin(p.grid.phis / 2) ** 2
    np.testing.assert_allclose(p.values / p.values.max(), shape / shape.max(), atol=1e-5)


def test_synth_pattern_analyze_compose(tmp_path, capsys):
    run(capsys, "synth", "noon", 10, "--out", tmp_path / "s")
    code, _, _ = run(capsys, "pattern", "--roots", tmp_path / "s" / "roots.json", "--points", 1000,
                     "--out", tmp_path / "p")
    assert code == 0
    code, out, _ = run(capsys, "analyze", tmp_path / "p" / "pattern.csv", "--out", tmp_path / "a")
    assert code == 0
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    vis = report["visibility"]
    assert vis["n_fringes"] >= 18
    assert vis["v_min"] == pytest.approx(1.0, abs=1e-9)
    assert report["fringe_period_rad"] == pytest.approx(2 * math.pi / 10, abs=1e-6)
    assert (tmp_path / "a" / "plot.gp").read_text().count("analysis.csv") >= 1


def test_pattern_rejects_bad_points(tmp_path, capsys):
    code, _, err = run(capsys, "pattern", "noon", 4, "--points", 0, "--out", tmp_path)
    assert code == 3
    assert json.loads(err)["error"] == "invalid_input"


# --- simulate / analyze ------------------------------------------------------------------

def test_simulate_and_analyze_noon10(tmp_path, capsys):
    code, _, _ = run(capsys, "simulate", "noon", 10, "--seed", 4, "--out", tmp_path / "sim")
    assert code == 0
    manifest = json.loads((tmp_path / "sim" / "manifest.json").read_text())
    assert manifest["seed"] == 4 and len(manifest["config_digest"]) == 64
    # with this seed shot noise splits one fringe top into a spurious max/min pair;
    # the prominence filter removes it
    code, out, _ = run(capsys, "analyze", tmp_path / "sim" / "counts.csv", "--target", "noon", "--n", 10,
                       "--out", tmp_path / "raw")
    raw = json.loads((tmp_path / "raw" / "report.json").read_text())
    assert raw["visibility"]["n_fringes"] > 18
    code, out, _ = run(capsys, "analyze", tmp_path / "sim" / "counts.csv", "--target", "noon", "--n", 10,
                       "--prominence", 0.1, "--out", tmp_path / "an")
    assert code == 0
    report = json.loads((tmp_path / "an" / "report.json").read_text())
    assert report["visibility"]["n_fringes"] == 18
    assert report["visibility"]["v_min"] > 0.95
    assert report["fit"]["relative_residual"] < 0.1
    assert "v_min" in out


def test_simulate_noiseless_tracks_model(tmp_path, capsys):
    cfg = tmp_path / "quiet.json"
    cfg.write_text(json.dumps({"dead_time_s": 0, "dark_rate_hz": 0, "eta_rel_std": 0, "phase_quantum_rad": 0,
                               "extinction_db": 200}))
    code, _, _ = run(capsys, "simulate", "noon", 4, "--config", cfg, "--points", 64, "--out", tmp_path)
    assert code == 0
    p = formats.read_pattern(tmp_path / "multiplied.csv")
    model = np.sin(2 * p.grid.phis) ** 2
    a = np.dot(model, p.values) / np.dot(model, model)
    ok = p.values > 0
    # Poisson relative error of a product of 4 counts
    assert np.all(np.abs(p.values - a * model)[ok] <= 5 * p.sigma[ok] + 1e-9)


def test_simulate_noon60_bench_like(tmp_path, capsys):
    start = time.perf_counter()
    code, _, _ = run(capsys, "simulate", "noon", 60, "--out", tmp_path / "sim")
    elapsed = time.perf_counter() - start
    assert code == 0 and elapsed < 60
    code, _, _ = run(capsys, "analyze", tmp_path / "sim" / "counts.csv", "--target", "noon", "--n", 60,
                     "--out", tmp_path / "an")
    assert code == 0
    report = json.loads((tmp_path / "an" / "report.json").read_text())
    vis = report["visibility"]
    assert vis["v_min"] < vis["v_max"] < 1
    assert report["samples_per_fringe"] < 4


def test_manifest_digest_stable_under_key_order(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(json.dumps({"seed": 3, "gate_s": 0.5, "dark_rate_hz": 1.0}))
    b.write_text(json.dumps({"dark_rate_hz": 1.0, "gate_s": 0.5, "seed": 3}))
    run(capsys, "simulate", "noon", 2, "--points", 20, "--config", a, "--out", tmp_path / "ra")
    run(capsys, "simulate", "noon", 2, "--points", 20, "--config", b, "--out", tmp_path / "rb")
    da = json.loads((tmp_path / "ra" / "manifest.json").read_text())["config_digest"]
    db = json.loads((tmp_path / "rb" / "manifest.json").read_text())["config_digest"]
    assert da == db
    assert (tmp_path / "ra" / "counts.csv").read_bytes() == (tmp_path / "rb" / "counts.csv").read_bytes()


def test_manifest_reproduces_run(tmp_path, capsys):
    run(capsys, "simulate", "rect", 4, "--points", 30, "--seed", 8, "--out", tmp_path / "one")
    argv = json.loads((tmp_path / "one" / "manifest.json").read_text())["argv"]
    argv[argv.index("--out") + 1] = str(tmp_path / "two")
    assert main(argv) == 0
    assert (tmp_path / "one" / "counts.csv").read_bytes() == (tmp_path / "two" / "counts.csv").read_bytes()


# --- errors ----------------------------------------------------------------------------

def test_odd_n_rejected(tmp_path, capsys):
    code, _, err = run(capsys, "synth", "rect", 11, "--out", tmp_path)
    assert code == 3
    msg = json.loads(err)
    assert msg["error"] == "invalid_input" and "even N required" in msg["message"]


def test_malformed_counts_reported_with_position(tmp_path, capsys):
    bad = tmp_path / "counts.csv"
    bad.write_text("projector_index,phi_requested_rad,phi_actual_rad,counts\n0,0.0,0.0,5\n0,0.1,0.1,x\n")
    code, _, err = run(capsys, "analyze", bad, "--out", tmp_path)
    assert code == 4
    msg = json.loads(err)
    assert msg["error"] == "format_error" and "line 3" in msg["message"] and "column 4" in msg["message"]


def test_invalid_config_rejected(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"eta_mean": 2.0}))
    code, _, err = run(capsys, "simulate", "noon", 2, "--config", cfg, "--out", tmp_path)
    assert code == 3 and json.loads(err)["error"] == "invalid_input"
    assert not (tmp_path / "counts.csv").exists()


def test_missing_input_file(tmp_path, capsys):
    code, _, err = run(capsys, "analyze", tmp_path / "nope.csv", "--out", tmp_path)
    assert code != 0
    assert "error" in json.loads(err)


def test_insufficient_fringes_in_report(tmp_path, capsys):
    flat = tmp_path / "flat.csv"
    flat.write_text("phi_rad,value\n" + "".join(f"{k * 0.1},1.0\n" for k in range(20)))
    code, out, _ = run(capsys, "analyze", flat, "--out", tmp_path)
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["fringe_period_rad"] is None and "insufficient fringes" in report["period_note"]
    assert "no fringes" in out


def test_console_script_exit_status(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fringesynth", "synth", "saw", "3", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 3
    assert json.loads(proc.stderr)["error"] == "invalid_input"
