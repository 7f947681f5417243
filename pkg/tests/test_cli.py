"""Entry-point behavior: pinned formats, exit codes, headers, determinism."""
import json
import math

import pytest

from ramspect import cli
from ramspect.errors import ParameterError

K4 = "n 4\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def body_lines(path):
    return [l for l in path.read_text().splitlines() if not l.startswith("#")]


# ── fit_slope ────────────────────────────────────────────────────────────


def test_fit_slope_recovers_exact_power_law():
    pts = [(n, n ** 1.5) for n in (64, 128, 256, 512)]
    slope, half = cli.fit_slope(pts)
    assert slope == pytest.approx(1.5, abs=1e-12)
    assert half == pytest.approx(0.0, abs=1e-9)


def test_fit_slope_constant_counts():
    slope, _ = cli.fit_slope([(10, 7), (20, 7), (40, 7)])
    assert slope == pytest.approx(0.0, abs=1e-12)


def test_fit_slope_interval_covers_noisy_truth():
    rng_pts = [(64, 64 ** 1.5 * 1.1), (128, 128 ** 1.5 * 0.95),
               (256, 256 ** 1.5 * 1.02), (512, 512 ** 1.5 * 0.97)]
    slope, half = cli.fit_slope(rng_pts)
    assert abs(slope - 1.5) <= half + 0.1


@pytest.mark.parametrize("pts", [
    [(10, 5), (20, 9)],                      # too few
    [(10, 5), (10, 9), (20, 4)],             # repeated n
    [(10, 5), (20, 0), (40, 4)],             # nonpositive count
])
def test_fit_slope_degenerate_inputs(pts):
    with pytest.raises(ParameterError):
        cli.fit_slope(pts)


# ── pinned formats ───────────────────────────────────────────────────────


def test_phi_k4_pinned_output(tmp_path, capsys):
    f = tmp_path / "k4.edges"
    f.write_text(K4)
    code, out, _ = run(capsys, "phi", "--graph", str(f))
    assert code == 0
    assert out == "0,1,3,6\n|Phi|=4 max=6\n"


def test_psi_output_shape(capsys):
    code, out, _ = run(capsys, "psi", "--gen", "complete", "--n", "4")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "0:0,1:0,2:1,3:3,4:6"
    assert lines[1] == "|Psi|=5 max=6"


def test_lo_csv_columns(tmp_path):
    out = tmp_path / "lo.csv"
    code = cli.main(["lo", "--model", "ones", "--n-list", "16,32,64,128",
                     "--trials", "1000", "--out", str(out)])
    assert code == 0
    lines = body_lines(out)
    assert lines[0] == "n,max_prob,method"
    assert len(lines) == 5
    for l in lines[1:5]:
        n, prob, method = l.split(",")
        assert int(n) in (16, 32, 64, 128)
        assert 0 < float(prob) < 1
        assert method in ("exact", "mc")
    assert out.read_text().splitlines()[-1].startswith("# slope=")


def test_audit_json_keys(capsys):
    code, out, _ = run(capsys, "audit", "--gen", "gnp", "--n", "24",
                       "--graph-seed", "1", "--set", "sample_budget=40")
    assert code == 0
    doc = json.loads(out)
    for key in ("density", "diversity_max_count", "close_complement_pairs",
                "richness_status", "extract_trace"):
        assert key in doc
    assert doc["schema"] == cli.SCHEMA
    assert doc["header"]["version"] == cli.VERSION


def test_generate_roundtrips_through_phi(tmp_path, capsys):
    f = tmp_path / "g.graph"
    assert cli.main(["generate", "--gen", "gnp", "--n", "12", "--p", "0.5",
                     "--seed", "6", "--out", str(f)]) == 0
    assert f.read_text().startswith("# ramspect ")
    code, out, _ = run(capsys, "phi", "--graph", str(f))
    assert code == 0
    assert out.splitlines()[0].startswith("0,")


# ── exit codes ───────────────────────────────────────────────────────────


def test_unknown_flag_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["phi", "--bogus"])
    assert exc.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_override_key_exits_one(capsys):
    code, _, err = run(capsys, "audit", "--gen", "gnp", "--n", "10",
                       "--set", "nope=1")
    assert code == 1
    assert "unknown override key" in err


def test_missing_graph_source_exits_one(capsys):
    code, _, err = run(capsys, "phi")
    assert code == 1
    assert "exactly one" in err


def test_capacity_exits_two(capsys):
    code, _, err = run(capsys, "audit", "--gen", "gnp", "--n", "24",
                       "--exhaustive")
    assert code == 2
    assert "capacity" in err


def test_pipeline_failure_exits_three_with_diagnostics(tmp_path, capsys):
    diag = tmp_path / "fail.diag.json"
    code, _, err = run(capsys, "construct", "--gen", "complete", "--n", "64",
                       "--diagnostics", str(diag))
    assert code == 3
    assert "rich_prepass" in err
    doc = json.loads(diag.read_text())
    assert doc["stage"] == "rich_prepass"
    assert "diagnostics" in doc


# ── pipeline artifacts ───────────────────────────────────────────────────


def test_construct_json_artifact(tmp_path):
    out = tmp_path / "c.json"
    code = cli.main(["construct", "--gen", "gnp", "--n", "256",
                     "--graph-seed", "3", "--seed", "4", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    for key in ("mode", "d", "d_prime", "d_doubleprime", "p", "u0_size",
                "s_units", "t_units", "x_units", "diagnostics"):
        assert key in doc
    assert doc["mode"] in ("star", "matching")
    assert doc["header"]["seed"] == 4
    for unit in doc["s_units"] + doc["t_units"] + doc["x_units"]:
        assert isinstance(unit, list) and len(unit) in (1, 2)


def test_per_m_csv_and_dump(tmp_path):
    out = tmp_path / "pm.csv"
    dump = tmp_path / "pm.json"
    code = cli.main(["per-m", "--gen", "gnp", "--n", "256", "--graph-seed", "3",
                     "--seed", "11", "--out", str(out), "--dump", str(dump)])
    assert code == 0
    lines = body_lines(out)
    assert lines[0] == "m,e_U,distinct_count,k_selected,p_selected,attempts"
    m, e_u, count, ks, ps, attempts = lines[1].split(",")
    assert int(count) > 0 and int(attempts) >= 1
    doc = json.loads(dump.read_text())
    assert doc["schema"] == cli.SCHEMA
    assert len(doc["distinct_sizes"]) == int(count)
    assert doc["m"] == int(m)
    # header lines carry version/seed/config and no timestamps
    header = [l for l in out.read_text().splitlines() if l.startswith("#")]
    assert header[0] == f"# ramspect {cli.VERSION}"
    assert header[1] == "# seed 11"
    assert header[2].startswith("# config {")


def test_theorem_csv(tmp_path):
    out = tmp_path / "th.csv"
    code = cli.main(["theorem", "--gen", "gnp", "--n", "256",
                     "--graph-seed", "3", "--seed", "11", "--out", str(out)])
    assert code == 0
    lines = body_lines(out)
    assert lines[0] == "m,e_U,distinct_count,k_selected,p_selected,attempts"
    tail = out.read_text().splitlines()[-1]
    assert tail.startswith("# total_distinct=")


def test_sweep_csv_and_slope_line(tmp_path):
    out = tmp_path / "sw.csv"
    code = cli.main(["sweep", "--mode", "per-m", "--n-list", "256,384,512",
                     "--seed", "21", "--out", str(out)])
    assert code == 0
    lines = body_lines(out)
    assert lines[0] == "n,count"
    assert len(lines) == 5
    assert lines[-1].startswith("slope=")
    slope = float(lines[-1].split()[0].split("=")[1])
    assert math.isfinite(slope)


# ── determinism ──────────────────────────────────────────────────────────


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["per-m", "--gen", "gnp", "--n", "256", "--graph-seed", "3",
            "--seed", "11"]
    assert cli.main(argv + ["--out", str(a)]) == 0
    assert cli.main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_worker_count_does_not_change_bytes_below_header(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["per-m", "--gen", "gnp", "--n", "256", "--graph-seed", "3",
            "--seed", "11"]
    assert cli.main(argv + ["--workers", "1", "--out", str(a)]) == 0
    assert cli.main(argv + ["--workers", "4", "--out", str(b)]) == 0
    assert body_lines(a) == body_lines(b)

    pa, pb = tmp_path / "pa.txt", tmp_path / "pb.txt"
    argv = ["phi", "--gen", "gnp", "--n", "20", "--graph-seed", "2"]
    assert cli.main(argv + ["--workers", "1", "--out", str(pa)]) == 0
    assert cli.main(argv + ["--workers", "5", "--out", str(pb)]) == 0
    assert body_lines(pa) == body_lines(pb)
