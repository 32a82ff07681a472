"""Command-line front end: outputs, manifests, exit codes, replay."""

import hashlib
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from measdiscrim import PovmTriple, boundary_PIB, tangent_PIT
from measdiscrim.cli import main

from oracles import FROZEN

PI6 = "0.5235987755982988"


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# artifact=")
    columns = lines[1].split(",")
    rows = []
    for line in lines[2:]:
        values = []
        for cell in line.split(","):
            if cell == "":
                values.append(None)
            else:
                try:
                    values.append(float(cell))
                except ValueError:
                    values.append(cell)
        rows.append(dict(zip(columns, values)))
    return columns, rows


def read_manifest(out_dir):
    return json.loads((out_dir / "manifest.json").read_text())


def checksums_match(out_dir):
    manifest = read_manifest(out_dir)
    for name, digest in manifest["outputs"].items():
        assert hashlib.sha256((out_dir / name).read_bytes()).hexdigest() == digest


# --- curves ---


def test_curves_default_grid(tmp_path):
    assert main(["curves", "--theta", PI6, "--out", str(tmp_path)]) == 0
    columns, rows = read_csv(tmp_path / "curves.csv")
    assert columns == [
        "p_inc",
        "ps_entangled",
        "ps_single_optimal",
        "ps_single_pure",
        "pts_entangled",
        "pts_single",
        "advantage",
    ]
    assert len(rows) == 51
    first = rows[0]
    assert first["p_inc"] == 0.0
    assert first["ps_entangled"] == pytest.approx(FROZEN["helstrom_pi6"], abs=1e-12)
    assert first["advantage"] == pytest.approx(0.0, abs=1e-12)
    by_budget = {row["p_inc"]: row for row in rows}
    assert by_budget[0.3]["ps_entangled"] == pytest.approx(
        FROZEN["ps_entangled_pi6_p03"], abs=1e-12
    )
    assert by_budget[0.3]["advantage"] == pytest.approx(
        FROZEN["advantage_pi6_p03"], abs=1e-12
    )
    assert all(row["advantage"] >= -1e-12 for row in rows if row["advantage"] is not None)
    checksums_match(tmp_path)


def test_curves_budgets_past_the_entangled_endpoint_are_blank(tmp_path):
    code = main(
        ["curves", "--theta", PI6, "--pi-grid", "0.4:0.6:0.1", "--out", str(tmp_path)]
    )
    assert code == 0
    _, rows = read_csv(tmp_path / "curves.csv")
    assert [row["p_inc"] for row in rows] == [0.4, 0.5, 0.6]
    assert rows[1]["ps_entangled"] is not None  # endpoint itself is on the curve
    assert rows[2]["ps_entangled"] is None
    assert rows[2]["advantage"] is None
    assert rows[2]["ps_single_optimal"] is not None


def test_curves_degrees_flag_matches_radians(tmp_path):
    rad_dir = tmp_path / "rad"
    deg_dir = tmp_path / "deg"
    assert main(["curves", "--theta", repr(math.radians(30.0)), "--out", str(rad_dir)]) == 0
    assert main(["curves", "--degrees", "--theta", "30", "--out", str(deg_dir)]) == 0
    assert (rad_dir / "curves.csv").read_bytes() == (deg_dir / "curves.csv").read_bytes()


def test_curves_json_format(tmp_path):
    code = main(
        ["curves", "--theta", "0.7854", "--pi-grid", "0.3", "--format", "json",
         "--out", str(tmp_path)]
    )
    assert code == 0
    payload = json.loads((tmp_path / "curves.json").read_text())
    assert payload["columns"][0] == "p_inc"
    assert len(payload["rows"]) == 1
    row = dict(zip(payload["columns"], payload["rows"][0]))
    # 0.7854 snaps to the exact right edge where both bases coincide
    assert row["ps_single_optimal"] == pytest.approx(0.7, abs=1e-12)
    assert row["ps_entangled"] is None


def test_curves_domain_errors(tmp_path, capsys):
    assert main(["curves", "--theta", "2.0", "--out", str(tmp_path)]) == 2
    assert "error:" in capsys.readouterr().err
    assert (
        main(["curves", "--theta", PI6, "--pi-grid", "0:0.7:0.1",
              "--out", str(tmp_path)])
        == 2
    )
    assert "achievable range" in capsys.readouterr().err
    assert (
        main(["curves", "--theta", PI6, "--pi-grid", "0.3:0.1:-0.1",
              "--out", str(tmp_path)])
        == 2
    )


# --- hull ---


def test_hull_report(tmp_path):
    assert main(["hull", "--c", "0.9", "--samples", "2000", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "hull_report.json").read_text())
    assert not report["degenerate"]
    assert report["max_deviation"] <= 1e-6
    assert report["tangent_p_inc"] == pytest.approx(tangent_PIT(0.9), abs=1e-6)
    assert report["point_a"][0] == 0.0
    assert report["point_u"] == [pytest.approx(0.905), pytest.approx(0.095)]
    _, vertices = read_csv(tmp_path / "hull_vertices.csv")
    assert vertices[0]["p_inc"] == 0.0
    assert len(vertices) == report["n_vertices"]
    # random draws past the endpoint budget are discarded, so at most 2000
    _, points = read_csv(tmp_path / "hull_points.csv")
    assert 1900 <= len(points) <= 2000
    checksums_match(tmp_path)


def test_hull_degenerate_overlap(tmp_path):
    assert main(["hull", "--c", "1.0", "--samples", "500", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "hull_report.json").read_text())
    assert report["degenerate"]
    assert report["tangent_p_inc"] is None
    assert report["point_t"] is None


def test_hull_rejects_bad_overlap(tmp_path, capsys):
    assert main(["hull", "--c", "1.5", "--out", str(tmp_path)]) == 2
    assert "overlap" in capsys.readouterr().err


# --- convexity ---


def test_convexity_table(tmp_path):
    code = main(
        ["convexity", "--c-grid", "0.3:0.7:0.2", "--out", str(tmp_path)]
    )
    assert code == 0
    _, rows = read_csv(tmp_path / "convexity.csv")
    branches = {row["branch"] for row in rows}
    assert branches <= {"convex", "concave", "boundary"}
    assert "convex" in branches and "concave" in branches
    for row in rows:
        if row["branch"] == "convex":
            assert row["d2_analytic"] >= -1e-9
            assert row["rel_err"] <= 1e-3
        elif row["branch"] == "concave":
            assert row["d2_analytic"] < 0.0
            assert row["rel_err"] <= 1e-3
    checksums_match(tmp_path)


def test_convexity_explicit_budgets_straddle_both_branches(tmp_path):
    code = main(
        ["convexity", "--c-grid", "0.5", "--pi-grid", "0.1:0.6:0.1",
         "--out", str(tmp_path)]
    )
    assert code == 0
    _, rows = read_csv(tmp_path / "convexity.csv")
    assert [row["branch"] for row in rows] == ["convex"] * 5 + ["concave"]
    assert rows[-1]["p_inc"] == 0.6
    assert rows[-1]["d2_analytic"] < 0.0


def test_convexity_rejects_bad_inputs(tmp_path, capsys):
    assert main(["convexity", "--c-grid", "0:0.9:0.1", "--out", str(tmp_path)]) == 2
    assert "strictly inside" in capsys.readouterr().err
    assert main(["convexity", "--h", "0", "--c-grid", "0.5", "--out", str(tmp_path)]) == 2
    assert main(["convexity", "--c-grid", "abc", "--out", str(tmp_path)]) == 2


# --- oracle ---


def test_oracle_report_matches_the_curve(tmp_path):
    code = main(
        ["oracle", "--theta", PI6, "--pi", "0.3", "--restarts", "5",
         "--out", str(tmp_path)]
    )
    assert code == 0
    report = json.loads((tmp_path / "oracle_report.json").read_text())
    assert report["converged"]
    assert report["method"] == "ascent"
    assert abs(report["gap_to_closed_form"]) <= 1e-4
    assert report["closed_form_p_success"] == pytest.approx(
        FROZEN["ps_entangled_pi6_p03"], abs=1e-12
    )
    assert report["p_inc"] == pytest.approx(0.3, abs=1e-4)
    assert len(report["restart_values"]) == 5
    # the stored blocks reconstruct a valid tester with those probabilities
    triple = PovmTriple(
        h_m=np.array(report["blocks"]["h_m"]),
        h_n=np.array(report["blocks"]["h_n"]),
        h_i=np.array(report["blocks"]["h_i"]),
    )
    assert triple.rho.shape == (2, 2)
    checksums_match(tmp_path)


def test_oracle_snaps_the_angle_endpoint(tmp_path):
    code = main(
        ["oracle", "--theta", "0.7854", "--pi", "0", "--restarts", "3",
         "--out", str(tmp_path)]
    )
    assert code == 0
    report = json.loads((tmp_path / "oracle_report.json").read_text())
    assert report["theta"] == pytest.approx(math.pi / 4.0, abs=0.0)
    assert report["p_success"] == pytest.approx(1.0, abs=1e-6)


def test_oracle_rejects_unreachable_targets(tmp_path, capsys):
    assert main(["oracle", "--theta", PI6, "--pi", "0.6", "--out", str(tmp_path)]) == 2
    assert "inconclusive target" in capsys.readouterr().err


# --- simulate ---


def test_simulate_unambiguous_is_deterministic(tmp_path):
    first = tmp_path / "a"
    second = tmp_path / "b"
    args = ["simulate", "--mode", "unambiguous", "--trials", "20000"]
    assert main(args + ["--out", str(first)]) == 0
    assert main(args + ["--out", str(second)]) == 0
    assert (first / "simulate.csv").read_bytes() == (second / "simulate.csv").read_bytes()
    columns, rows = read_csv(first / "simulate.csv")
    assert len(rows) == 11
    assert columns[-1] == "error_counts"
    assert all(row["error_counts"] == 0.0 for row in rows)
    manifest = read_manifest(first)
    assert manifest["parameters"]["noise"]["singlet_visibility"] == 1.0
    checksums_match(first)


def test_simulate_intermediate_grid(tmp_path):
    code = main(
        ["simulate", "--mode", "intermediate", "--theta", PI6, "--t-grid",
         "1.0:0.6:-0.2", "--trials", "10000", "--out", str(tmp_path)]
    )
    assert code == 0
    _, rows = read_csv(tmp_path / "simulate.csv")
    assert [row["transmittance"] for row in rows] == [1.0, 0.8, 0.6]
    assert all(row["theta"] == pytest.approx(math.pi / 6.0) for row in rows)


def test_simulate_with_a_noise_preset(tmp_path):
    code = main(
        ["simulate", "--mode", "unambiguous", "--t-grid", "0.5", "--trials",
         "20000", "--noise", "labnoise", "--out", str(tmp_path)]
    )
    assert code == 0
    manifest = read_manifest(tmp_path)
    assert manifest["parameters"]["noise"]["phase_noise_sigma_rad"] == 0.1
    assert manifest["parameters"]["noise"]["singlet_visibility"] == 0.98
    _, rows = read_csv(tmp_path / "simulate.csv")
    assert rows[0]["p_error"] <= 0.032


def test_simulate_rejects_unknown_noise(tmp_path, capsys):
    code = main(
        ["simulate", "--mode", "unambiguous", "--noise", "doesnotexist",
         "--out", str(tmp_path)]
    )
    assert code == 2
    assert "unknown noise preset" in capsys.readouterr().err


# --- replay ---


def run_small_simulate(out_dir):
    args = ["simulate", "--mode", "unambiguous", "--t-grid", "0.4:0.8:0.2",
            "--trials", "5000", "--out", str(out_dir)]
    assert main(args) == 0


def test_replay_reproduces_outputs(tmp_path, capsys):
    run_small_simulate(tmp_path)
    assert main(["replay", str(tmp_path / "manifest.json")]) == 0
    out = capsys.readouterr().out
    assert "replay ok" in out
    replayed = tmp_path / "replay" / "simulate.csv"
    assert replayed.read_bytes() == (tmp_path / "simulate.csv").read_bytes()


def test_replay_detects_tampered_parameters(tmp_path, capsys):
    run_small_simulate(tmp_path)
    path = tmp_path / "manifest.json"
    manifest = json.loads(path.read_text())
    manifest["parameters"]["trials"] = 6000
    path.write_text(json.dumps(manifest))
    assert main(["replay", str(path)]) == 2
    assert "checksum does not match" in capsys.readouterr().err


def test_replay_detects_tampered_outputs(tmp_path, capsys):
    run_small_simulate(tmp_path)
    path = tmp_path / "manifest.json"
    manifest = json.loads(path.read_text())
    manifest["outputs"]["simulate.csv"] = "0" * 64
    path.write_text(json.dumps(manifest))
    assert main(["replay", str(path), "--out", str(tmp_path / "check")]) == 4
    assert "replay mismatch" in capsys.readouterr().err


def test_replay_requires_a_manifest(tmp_path, capsys):
    assert main(["replay", str(tmp_path / "missing.json")]) == 2
    incomplete = tmp_path / "incomplete.json"
    incomplete.write_text(json.dumps({"command": "curves"}))
    assert main(["replay", str(incomplete)]) == 2
    assert "missing" in capsys.readouterr().err


# --- process invocation ---


def test_module_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "measdiscrim.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert "measdiscrim" in result.stdout
    result = subprocess.run(
        [sys.executable, "-m", "measdiscrim.cli", "curves", "--theta", "0.3",
         "--pi-grid", "0:0.2:0.1", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert (tmp_path / "curves.csv").is_file()
