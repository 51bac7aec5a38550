import csv
import json
from pathlib import Path

import pytest

from quasitopo.cli import main
from quasitopo.runs import sha256_file

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _manifest(run_dir):
    return json.loads((Path(run_dir) / "manifest.json").read_text())


def _check_digests(run_dir):
    m = _manifest(run_dir)
    for entry in m["files"]:
        assert sha256_file(Path(run_dir) / entry["path"]) == entry["sha256"]
    return m


def test_bands_paper_grid(tmp_path, capsys):
    code, out, _ = _run(["bands", "--config", str(CONFIG_DIR / "bands_paper.toml"),
                         "--out-dir", str(tmp_path), "--no-timestamp"], capsys)
    assert code == 0
    run_dir = tmp_path / "bands"
    with open(run_dir / "bands.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["phi", "mode", "energy", "left_edge_weight", "right_edge_weight"]
    assert len(rows) - 1 == 201 * 100
    m = _check_digests(run_dir)
    assert m["status"] == "complete"
    assert m["summary"]["left_mode_points"] > 0 and m["summary"]["right_mode_points"] > 0
    doc = json.loads((run_dir / "bands.json").read_text())
    assert doc["schema_version"] == "1" and doc["params"]["n_sites"] == 100
    svg = (run_dir / "bands.svg").read_text()
    assert svg.startswith("<svg") and "<metadata>" not in svg
    assert (tmp_path / "LATEST").read_text().strip() == "bands"


def test_bands_single_point_and_flat(tmp_path, capsys):
    code, _, _ = _run(["bands", "--out-dir", str(tmp_path), "--no-timestamp", "--lambda", "0",
                       "--n-sites", "20"], capsys)
    assert code == 0
    doc = json.loads((tmp_path / "bands" / "bands.json").read_text())
    assert all(row == doc["energies"][0] for row in doc["energies"])

    cfg = tmp_path / "one.toml"
    cfg.write_text('[bands]\nstart_pi = 0.2\ncount = 1\n')
    code, _, _ = _run(["bands", "--config", str(cfg), "--out-dir", str(tmp_path / "b"),
                       "--no-timestamp"], capsys)
    assert code == 0
    doc = json.loads((tmp_path / "b" / "bands" / "bands.json").read_text())
    assert len(doc["energies"]) == 1


def test_evolve_prints_xi_and_writes_chart(tmp_path, capsys):
    code, out, _ = _run(["evolve", "--phi-pi", "0.2", "--input-site", "1",
                         "--out-dir", str(tmp_path), "--no-timestamp"], capsys)
    assert code == 0
    xi = float(out.split("xi_1 (d=7) = ")[1].split()[0])
    assert xi > 0.5
    run_dir = tmp_path / "evolve"
    assert "xi_1(d=7)" in (run_dir / "distribution.svg").read_text()
    _check_digests(run_dir)


def test_evolve_101_right_edge(tmp_path, capsys):
    code, out, _ = _run(["evolve", "--n-sites", "101", "--phi-pi", "0.9", "--input-site", "101",
                         "--out-dir", str(tmp_path), "--no-timestamp"], capsys)
    assert code == 0
    s = _manifest(tmp_path / "evolve")["summary"]
    assert s["xi_input"] > 0.5 and s["xi_right"] > 0.5


def test_evolve_z_zero_is_delta(tmp_path, capsys):
    code, out, _ = _run(["evolve", "--z", "0", "--input-site", "5", "--out-dir", str(tmp_path),
                         "--no-timestamp"], capsys)
    assert code == 0
    doc = json.loads((tmp_path / "evolve" / "propagation.json").read_text())
    assert doc["z_samples"] == [0.0]
    dist = doc["distributions"][0]
    assert dist[4] == 1.0 and sum(dist) == 1.0


def test_sweep_reproduces_presence_pattern(tmp_path, capsys):
    code, out, _ = _run(["sweep-phi", "--config", str(CONFIG_DIR / "sweep_paper.toml"),
                         "--out-dir", str(tmp_path), "--no-timestamp"], capsys)
    assert code == 0
    with open(tmp_path / "sweep_phi" / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    for r in rows:
        n, phi_pi, site = int(r["n_sites"]), float(r["phi_pi"]), int(r["input_site"])
        left, right = int(r["left_modes"]), int(r["right_modes"])
        expected_localized = {
            (100, 0.2): {1, 100}, (100, 0.9): set(), (101, 0.2): {1}, (101, 0.9): {101},
        }[(n, round(phi_pi, 6))]
        assert (float(r["xi_input"]) > 0.5) == (site in expected_localized)
        assert (left > 0) == (1 in expected_localized)
        assert (right > 0) == (n in expected_localized)
    assert len(list((tmp_path / "sweep_phi").glob("case-*"))) == 8


def test_sweep_duplicate_cases_get_distinct_dirs(tmp_path, capsys):
    cfg = tmp_path / "dup.toml"
    case = "[[sweep_phi.cases]]\nn_sites = 30\nphi_pi = 0.2\ninput_site = 1\n"
    cfg.write_text(case + case)
    code, _, _ = _run(["sweep-phi", "--config", str(cfg), "--out-dir", str(tmp_path),
                       "--no-timestamp"], capsys)
    assert code == 0
    dirs = sorted(p.name for p in (tmp_path / "sweep_phi").glob("case-*"))
    assert len(dirs) == 2 and dirs[0] != dirs[1]
    a, b = (tmp_path / "sweep_phi" / d / "propagation.csv" for d in dirs)
    assert a.read_bytes() == b.read_bytes()


def test_sweep_empty_case_list_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "empty.toml"
    cfg.write_text("[sweep_phi]\ncases = []\n")
    code, _, err = _run(["sweep-phi", "--config", str(cfg), "--out-dir", str(tmp_path),
                         "--no-timestamp"], capsys)
    assert code == 2
    assert "sweep_phi.cases" in err
    assert _manifest(tmp_path / "sweep_phi-failed")["status"] == "failed"


def test_hbt_single_photon_debug(tmp_path, capsys):
    code, out, _ = _run(["hbt", "--config", str(CONFIG_DIR / "hbt_single.toml"),
                         "--out-dir", str(tmp_path), "--no-timestamp"], capsys)
    assert code == 0
    assert "alpha = 0.0000 (" in out and "[upper bound]" in out
    doc = json.loads((tmp_path / "hbt" / "hbt.json").read_text())
    assert doc["counts"]["c_t12"] == 0 and doc["alpha"]["upper_bound"] is True


def test_hbt_zero_mean_exit_code(tmp_path, capsys):
    cfg = tmp_path / "zero.toml"
    cfg.write_text("[hbt]\nn_windows = 1000\n[hbt.source]\npair_mean = 0.0\n")
    code, _, err = _run(["hbt", "--config", str(cfg), "--out-dir", str(tmp_path),
                         "--no-timestamp"], capsys)
    assert code == 4
    assert "undefined" in err
    m = _check_digests(tmp_path / "hbt")
    assert m["status"] == "failed" and "UndefinedEstimateError" in m["error"]


def test_ldos_runs(tmp_path, capsys):
    code, out, _ = _run(["ldos", "--config", str(CONFIG_DIR / "ldos_phi02.toml"),
                         "--out-dir", str(tmp_path), "--no-timestamp"], capsys)
    assert code == 0
    assert "left=2 right=2" in out
    header = (tmp_path / "ldos" / "ldos.csv").read_text().splitlines()[0]
    assert header == "energy,site,density"


def test_ldos_dimer(tmp_path, capsys):
    code, _, _ = _run(["ldos", "--n-sites", "2", "--lambda", "0", "--t", "1",
                       "--out-dir", str(tmp_path), "--no-timestamp"], capsys)
    assert code == 0
    doc = json.loads((tmp_path / "ldos" / "ldos.json").read_text())
    col = [row[0] for row in doc["density"]]
    peaks = [i for i in range(1, len(col) - 1) if col[i - 1] < col[i] > col[i + 1]]
    assert len(peaks) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["evolve", "--lambda", "3"],
        ["evolve", "--input-site", "500"],
        ["bands", "--seed", "3"],
        ["hbt", "--z", "1"],
        ["evolve", "--config", "/nonexistent/x.toml"],
    ],
)
def test_usage_errors_exit_2(argv, tmp_path, capsys):
    code, _, err = _run(argv + ["--out-dir", str(tmp_path), "--no-timestamp"], capsys)
    assert code == 2
    assert "config error" in err
    assert list(tmp_path.glob("*-failed/manifest.json"))


def test_phi_flags_are_exclusive(capsys):
    with pytest.raises(SystemExit) as info:
        main(["evolve", "--phi", "1", "--phi-pi", "0.2"])
    assert info.value.code == 2


def test_print_config_roundtrip(capsys, tmp_path):
    code, out, _ = _run(["evolve", "--phi-pi", "0.9", "--n-sites", "101", "--print-config"], capsys)
    assert code == 0
    saved = tmp_path / "resolved.toml"
    saved.write_text(out)
    code, again, _ = _run(["evolve", "--config", str(saved), "--print-config"], capsys)
    assert again == out


def test_timestamped_runs_are_distinct(tmp_path, capsys):
    for _ in range(2):
        assert _run(["evolve", "--n-sites", "20", "--out-dir", str(tmp_path)], capsys)[0] == 0
    dirs = sorted(tmp_path.glob("evolve-*"))
    assert len(dirs) == 2
    latest = (tmp_path / "LATEST").read_text().strip()
    assert latest == dirs[-1].name
    m = _manifest(dirs[-1])
    assert m["duration_s"] is not None and m["started_at"] is not None
    assert "<metadata>generated" in (dirs[-1] / "distribution.svg").read_text()
