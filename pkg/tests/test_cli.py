"""Command-line driver: argument handling, CSV output, and determinism."""

import csv
import shutil
import subprocess
import sys

import numpy as np
import pytest

from viscowave.cli import (
    CSV_HEADER,
    PRESETS,
    convergence_study,
    format_study_csv,
    main,
    resolve_time,
    temporal_study,
)
from viscowave.mesh import StructuredMesh

HEADER_LINE = "N,M,dt,E_a_sigma,order_sigma,E_c_v,order_v"


def run_main(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# time-grid resolution


def test_resolve_time_fills_dt():
    assert resolve_time(1.0, None, 4) == (1.0, 0.25, 4)


def test_resolve_time_fills_n_steps():
    assert resolve_time(1.0, 0.2, None) == (1.0, 0.2, 5)


def test_resolve_time_default_step_count():
    t, dt, m = resolve_time(2.0, None, None)
    assert (t, m) == (2.0, 200) and dt == pytest.approx(0.01)


def test_resolve_time_rejects_mismatch():
    with pytest.raises(ValueError):
        resolve_time(1.0, 0.3, 4)
    with pytest.raises(ValueError):
        resolve_time(-1.0, None, None)


# ---------------------------------------------------------------------------
# CSV rendering


def test_csv_header_exact():
    assert ",".join(CSV_HEADER) == HEADER_LINE


def test_format_study_csv_layout():
    rows = [
        dict(N=2, M=4, dt=0.25, E_a_sigma=0.5, order_sigma=None, E_c_v=0.25, order_v=None),
        dict(N=4, M=4, dt=0.25, E_a_sigma=0.125, order_sigma=2.0, E_c_v=0.0625, order_v=2.0),
    ]
    text = format_study_csv(rows)
    lines = text.splitlines()
    assert lines[0] == HEADER_LINE
    assert lines[1] == "2,4,0.25,5.000000e-01,,2.500000e-01,"
    assert lines[2] == "4,4,0.25,1.250000e-01,2.000,6.250000e-02,2.000"
    assert text.endswith("\n")


# ---------------------------------------------------------------------------
# study helpers


def test_convergence_study_rows_match_results():
    rows, results = convergence_study("hmz", 1, [2, 4], n_steps=4)
    assert [r["N"] for r in rows] == [2, 4]
    assert all(r["M"] == 4 and r["dt"] == 0.25 for r in rows)
    assert rows[0]["order_sigma"] is None
    expected = np.log2(rows[0]["E_a_sigma"] / rows[1]["E_a_sigma"])
    assert rows[1]["order_sigma"] == pytest.approx(expected)
    assert [r.E_a_sigma for r in results] == [r["E_a_sigma"] for r in rows]


def test_temporal_study_couples_mesh_to_steps():
    rows, results = temporal_study("hmz", 2, [4, 6])
    assert [(r["N"], r["M"]) for r in rows] == [(4, 4), (9, 6)]
    assert [r["dt"] for r in rows] == [pytest.approx(0.25), pytest.approx(1 / 6)]
    assert results[0].config.nx == 4


def test_temporal_study_rejects_odd_steps():
    with pytest.raises(ValueError, match="even"):
        temporal_study("hmz", 1, [3])


# ---------------------------------------------------------------------------
# main(): study modes


def test_main_convergence_stdout(capsys):
    code, out, err = run_main(
        ["--mode", "convergence", "--example", "1", "--element", "hmz",
         "--nx", "2,4", "--nt", "4"],
        capsys,
    )
    assert code == 0 and err == ""
    lines = out.splitlines()
    assert lines[0] == HEADER_LINE
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "2" and first[1] == "4" and first[4] == ""
    assert float(lines[2].split(",")[3]) < float(first[3])


def test_main_convergence_out_file_and_determinism(tmp_path, capsys):
    args = ["--mode", "convergence", "--example", "1", "--element", "hmz",
            "--nx", "2,4", "--nt", "4", "--out"]
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    code1, out1, _ = run_main(args + [str(f1)], capsys)
    code2, out2, _ = run_main(args + [str(f2)], capsys)
    assert code1 == code2 == 0
    assert f"wrote {f1}" in out1 and f"wrote {f2}" in out2
    b1, b2 = f1.read_bytes(), f2.read_bytes()
    assert b1 == b2  # identical configuration, identical bytes
    assert b1.decode().splitlines()[0] == HEADER_LINE


def test_main_temporal_mode(tmp_path, capsys):
    f = tmp_path / "t.csv"
    code, _, err = run_main(
        ["--mode", "temporal-convergence", "--example", "2", "--element", "hmz",
         "--nt", "2,4", "--out", str(f)],
        capsys,
    )
    assert code == 0 and err == ""
    rows = list(csv.DictReader(f.open()))
    assert [(r["N"], r["M"]) for r in rows] == [("1", "2"), ("4", "4")]


def test_main_preset_expands_with_flag_overrides(tmp_path, capsys):
    # preset table2 fixes mode/example; flags shrink the sweep
    f = tmp_path / "p.csv"
    code, _, err = run_main(
        ["--preset", "table2", "--element", "hmz", "--nx", "2,4", "--nt", "4",
         "--out", str(f)],
        capsys,
    )
    assert code == 0 and err == ""
    rows = list(csv.DictReader(f.open()))
    assert [r["N"] for r in rows] == ["2", "4"]
    assert all(r["M"] == "4" for r in rows)


def test_preset_table_registry():
    assert set(PRESETS) == {f"table{k}" for k in (1, 2, 3, 7, 8, 9)}
    for k in (1, 2, 3):
        assert PRESETS[f"table{k}"]["mode"] == "convergence"
        assert PRESETS[f"table{k}"]["nx"] == "4,8,16,32,64"
    for k in (7, 8, 9):
        assert PRESETS[f"table{k}"]["mode"] == "temporal-convergence"
        assert PRESETS[f"table{k}"]["nt"] == "4,8,12,16"


# ---------------------------------------------------------------------------
# main(): config file and precedence


def test_config_file_settings_apply(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# comment line\n"
        "element = hmz\n"
        "t-final = 0.5   # hyphenated keys accepted\n"
        "nt = 2\n"
    )
    code, out, _ = run_main(["--config", str(cfg), "--nx", "2"], capsys)
    assert code == 0
    assert "element=hmz" in out and "T=0.5" in out and "M=2" in out


def test_preset_overrides_config_flags_override_preset(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("mode = solve\npreset = table2\nelement = hmz\n")
    # preset wins over the config file's mode: a convergence CSV comes out
    code, out, _ = run_main(
        ["--config", str(cfg), "--nx", "2,4", "--nt", "2"], capsys
    )
    assert code == 0 and out.splitlines()[0] == HEADER_LINE
    # an explicit --mode flag wins over the preset
    code, out, _ = run_main(
        ["--config", str(cfg), "--mode", "solve", "--nx", "2", "--nt", "2",
         "--example", "1"],
        capsys,
    )
    assert code == 0 and "final energy" in out


def test_config_file_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("meshsize = 4\n")
    code, _, err = run_main(["--config", str(cfg)], capsys)
    assert code == 1 and err.startswith("error:") and "meshsize" in err


def test_config_file_rejects_malformed_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just some words\n")
    code, _, err = run_main(["--config", str(cfg)], capsys)
    assert code == 1 and "key=value" in err


def test_missing_config_file_errors(tmp_path, capsys):
    code, _, err = run_main(["--config", str(tmp_path / "nope.cfg")], capsys)
    assert code == 1 and err.startswith("error:")


# ---------------------------------------------------------------------------
# main(): solve mode and snapshots


def test_main_solve_summary(capsys):
    code, out, err = run_main(
        ["--mode", "solve", "--element", "hmz", "--example", "2",
         "--nx", "2", "--nt", "2"],
        capsys,
    )
    assert code == 0 and err == ""
    assert "element=hmz N=2 M=2" in out
    assert "final energy" in out and "E_a_sigma" in out and "E_c_v" in out


def test_main_solve_without_example(capsys):
    # no manufactured solution: zero initial data, no error report
    code, out, _ = run_main(["--mode", "solve", "--nx", "2", "--nt", "2"], capsys)
    assert code == 0
    assert "final energy" in out and "E_a_sigma" not in out


def test_snapshot_files(tmp_path, capsys):
    stem = tmp_path / "snap.csv"
    code, out, _ = run_main(
        ["--mode", "solve", "--element", "hmz", "--example", "2",
         "--nx", "2", "--nt", "4", "--snapshot-every", "2", "--out", str(stem)],
        capsys,
    )
    assert code == 0
    paths = sorted(tmp_path.glob("snap_n*.csv"))
    assert [p.name for p in paths] == ["snap_n00000.csv", "snap_n00002.csv", "snap_n00004.csv"]
    assert all(f"wrote {p}" in out for p in paths)
    rows = list(csv.reader(paths[0].open()))
    assert rows[0] == ["x", "y", "sigma11", "sigma22", "sigma12", "v1", "v2"]
    data = np.array(rows[1:], dtype=float)
    assert data.shape == (4, 7)
    np.testing.assert_allclose(data[:, :2], StructuredMesh(2, 2).element_centers())
    # example 2 starts from sigma = 0 but a nonzero velocity
    np.testing.assert_allclose(data[:, 2:5], 0.0, atol=1e-12)
    assert np.all(np.abs(data[:, 5:]) > 1e-3)
    late = np.array(list(csv.reader(paths[2].open()))[1:], dtype=float)
    assert np.any(np.abs(late[:, 2:5]) > 1e-3)


# ---------------------------------------------------------------------------
# main(): stability and infsup modes


def test_main_stability_trace(tmp_path, capsys):
    f = tmp_path / "s.csv"
    code, out, _ = run_main(
        ["--mode", "stability", "--example", "2", "--element", "hmz",
         "--nx", "2", "--dt", "0.5,0.25", "--out", str(f)],
        capsys,
    )
    assert code == 0
    assert "dt=0.5 final energy" in out and "dt=0.25 final energy" in out
    rows = list(csv.DictReader(f.open()))
    assert len(rows) == 3 + 5  # M+1 nodes per dt
    energies = np.array([float(r["energy"]) for r in rows])
    assert np.all(np.isfinite(energies)) and np.all(energies >= 0.0)
    assert {r["dt"] for r in rows} == {"0.5", "0.25"}


def test_main_infsup_mode(tmp_path, capsys):
    f = tmp_path / "b.csv"
    code, _, err = run_main(
        ["--mode", "infsup", "--element", "hmz", "--nx", "2,3", "--out", str(f)],
        capsys,
    )
    assert code == 0 and err == ""
    rows = list(csv.DictReader(f.open()))
    assert [r["N"] for r in rows] == ["2", "3"]
    betas = [float(r["beta_h"]) for r in rows]
    assert betas[0] == pytest.approx(0.969277, rel=1e-4)
    assert all(b > 0.05 for b in betas)


# ---------------------------------------------------------------------------
# main(): error handling


def test_missing_example_errors(capsys):
    for mode in ("convergence", "temporal-convergence", "stability"):
        code, _, err = run_main(["--mode", mode, "--nx", "2"], capsys)
        assert code == 1 and err.startswith("error:")


def test_odd_temporal_steps_error_exit(capsys):
    code, _, err = run_main(
        ["--mode", "temporal-convergence", "--example", "1", "--nt", "3"], capsys
    )
    assert code == 1 and "even" in err


def test_solve_rejects_value_lists(capsys):
    code, _, err = run_main(["--mode", "solve", "--nx", "2,4"], capsys)
    assert code == 1 and "single value" in err


def test_inconsistent_time_grid_errors(capsys):
    code, _, err = run_main(
        ["--mode", "solve", "--nx", "2", "--dt", "0.3", "--nt", "4"], capsys
    )
    assert code == 1 and err.startswith("error:")


def test_bad_integer_list_errors(capsys):
    code, _, err = run_main(
        ["--mode", "convergence", "--example", "1", "--nx", "2,x"], capsys
    )
    assert code == 1 and "comma-separated" in err


def test_unwritable_out_path_errors(tmp_path, capsys):
    code, _, err = run_main(
        ["--mode", "infsup", "--element", "hmz", "--nx", "2",
         "--out", str(tmp_path / "missing" / "f.csv")],
        capsys,
    )
    assert code == 1 and err.startswith("error:")


def test_argparse_rejects_unknown_mode(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--mode", "bogus"])
    assert exc.value.code == 2


def test_console_script_installed():
    exe = shutil.which("viscowave")
    assert exe is not None
    proc = subprocess.run(
        [exe, "--mode", "infsup", "--element", "hmz", "--nx", "2"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "N,beta_h"


def test_module_runs_under_fresh_interpreter():
    proc = subprocess.run(
        [sys.executable, "-c",
         "from viscowave.cli import main; raise SystemExit(main("
         "['--mode', 'solve', '--element', 'hmz', '--nx', '2', '--nt', '2']))"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0 and "final energy" in proc.stdout
