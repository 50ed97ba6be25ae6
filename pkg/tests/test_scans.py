import json
import math

import pandas as pd
import pytest

from steady_squeeze.config.scan_config import load_scan_config
from steady_squeeze.errors import ConfigError
from steady_squeeze.main import main
from steady_squeeze.scans.dicke import cmd_dicke_scan, mean_spin_angle
from steady_squeeze.scans.perturb_check import cmd_perturb_check
from steady_squeeze.scans.two_emitter import cmd_angle_map, cmd_tfi_scan, cmd_xyz_scan, quadrant
from steady_squeeze.utils.file_utils import UNDEFINED, read_csv


@pytest.mark.parametrize(
    "alpha, beta, label",
    [(1, 1, "I"), (1, -1, "II"), (-1, -1, "III"), (-1, 1, "IV"), (0, 1, "boundary"), (1, 0.0, "boundary")],
)
def test_quadrant_labels(alpha, beta, label):
    assert quadrant(alpha, beta) == label


def test_mean_spin_angle():
    assert mean_spin_angle([0.0, 0.0, -1.0]) == pytest.approx(-math.pi / 2)
    assert mean_spin_angle([0.0, 1.0, 0.0]) == pytest.approx(0.0)


def test_xyz_scan_small_system(tmp_path):
    cfg = load_scan_config("xyz-scan", n=[4], start=-0.05, stop=0.05, steps=3, out=str(tmp_path / "xyz.csv"))
    result = cmd_xyz_scan(cfg)
    assert result.rows == 3
    assert result.flagged == 0
    frame = result.frame
    assert list(frame.columns[:3]) == ["n", "delta_J", "xi2_exact"]
    for k in (0, 2):
        assert frame["xi2_exact"][k] < 1
        assert frame["xi2_pert"][k] == pytest.approx(frame["xi2_closed_form"][k], abs=1e-12)
        assert frame["xi2_exact"][k] == pytest.approx(frame["xi2_pert"][k], abs=0.03)
    assert frame["xi2_exact"][1] == pytest.approx(1.0, abs=1e-8)
    assert math.isnan(frame["theta_min_exact"][1])

    header, back = read_csv(result.path)
    assert header["model"] == "xyz"
    assert header["n"] == "4"
    assert math.isnan(back["theta_min_pert"][1])
    assert UNDEFINED in result.path.read_text(encoding="utf-8")


def test_perturbative_scan_is_deterministic(tmp_path):
    frames = []
    for name in ("a.csv", "b.csv"):
        cfg = load_scan_config("xyz-scan", n=[20], backend="pert", steps=5, out=str(tmp_path / name))
        frames.append(read_csv(cmd_xyz_scan(cfg).path)[1])
    pd.testing.assert_frame_equal(frames[0], frames[1])


def test_large_system_matches_closed_form(tmp_path):
    cfg = load_scan_config("xyz-scan", n=[20], backend="pert", steps=5, out=str(tmp_path / "xyz20.csv"))
    frame = cmd_xyz_scan(cfg).frame
    assert (frame["backend"] == "pert:dicke").all()
    assert frame["xi2_pert"].tolist() == pytest.approx(frame["xi2_closed_form"].tolist(), abs=1e-12)
    assert frame["xi2_exact"].isna().all()
    finite = frame["theta_closed_form"].notna()
    assert (frame["theta_min_pert"].notna() == finite).all()
    for engine, closed in zip(frame["theta_min_pert"][finite], frame["theta_closed_form"][finite]):
        gap = (engine - closed) % math.pi
        assert min(gap, math.pi - gap) < 1e-9


def test_tfi_scan_columns(tmp_path):
    cfg = load_scan_config("tfi-scan", n=[8], backend="pert", steps=3, out=str(tmp_path / "tfi.csv"))
    frame = cmd_tfi_scan(cfg).frame
    assert list(frame.columns[:3]) == ["n", "jx", "delta"]
    assert (frame["delta"] == -6.0).all()
    assert frame["xi2_pert"].iloc[-1] < 1


def test_angle_map_grid(tmp_path):
    cfg = load_scan_config(
        "angle-map", model="tfi", backend="pert", start=-1.0, stop=1.0, steps=3, out=str(tmp_path / "map.csv")
    )
    result = cmd_angle_map(cfg)
    frame = result.frame
    assert result.rows == 9
    assert frame["delta"].tolist()[:3] == [-1.0, -1.0, -1.0]
    assert frame["jx"].tolist()[:3] == [-1.0, 0.0, 1.0]
    row = frame[(frame["jx"] == 1.0) & (frame["delta"] == 1.0)].iloc[0]
    assert row["quadrant"] == "I"
    boundary = frame[frame["jx"] == 0.0]
    assert (boundary["quadrant"] == "boundary").all()
    assert boundary["theta_pert"].isna().all()
    assert frame["theta_exact"].isna().all()


def test_angle_map_with_exact_backend(tmp_path):
    cfg = load_scan_config(
        "angle-map", model="xyz", n=[4], backend="both", start=-0.3, stop=0.3, steps=2,
        jz=1.0, out=str(tmp_path / "map.csv"),
    )
    frame = cmd_angle_map(cfg).frame
    assert (frame["backend"] == "closed-form+exact:full").all()
    assert frame["residual"].notna().all()


def test_angle_map_rejects_dicke(tmp_path):
    cfg = load_scan_config("angle-map", model="dicke", out=str(tmp_path / "map.csv"))
    with pytest.raises(ConfigError):
        cmd_angle_map(cfg)


def test_dicke_scan(tmp_path):
    cfg = load_scan_config("dicke-scan", n=[10], omega_max=0.2, steps=3, out=str(tmp_path / "dicke.csv"))
    result = cmd_dicke_scan(cfg)
    frame = result.frame
    assert result.flagged == 0
    assert frame["xi2_pert"].tolist() == pytest.approx([1.0, 0.995, 0.98])
    assert frame["xi2_exact"][0] == pytest.approx(1.0, abs=1e-8)
    assert frame["xi2_exact"][1] == pytest.approx(0.995, abs=0.01)
    assert frame["phi"][1] == pytest.approx(frame["phi_pert"][1], abs=0.01)
    header, _ = read_csv(result.path)
    assert header["model"] == "driven-dicke"


def test_dicke_scan_needs_positive_decay(tmp_path):
    cfg = load_scan_config("dicke-scan", n=[4], gamma=0.0, out=str(tmp_path / "dicke.csv"))
    with pytest.raises(ConfigError):
        cmd_dicke_scan(cfg)


def test_perturb_check_dicke_suite(tmp_path):
    cfg = load_scan_config("perturb-check", model="dicke", n=[10], out=str(tmp_path / "check.json"))
    report = cmd_perturb_check(cfg)
    suite = report["suites"]["driven-dicke-N10"]
    assert suite["passed"], suite["message"]
    assert report["passed"]
    on_disk = json.loads((tmp_path / "check.json").read_text(encoding="utf-8"))
    assert on_disk["suites"]["driven-dicke-N10"]["checks"]["closed_form_state"]["passed"]
    assert suite["checks"]["backend_agreement"]["passed"]


@pytest.mark.parametrize("model", ["xyz", "tfi"])
def test_perturb_check_two_emitter_suites(tmp_path, model):
    cfg = load_scan_config("perturb-check", model=model, n=[6], out=str(tmp_path / "check.json"))
    report = cmd_perturb_check(cfg)
    suite = report["suites"][f"{model}-N6"]
    assert suite["passed"], suite["message"]
    for name in ("symmetric_sector", "closed_form_F"):
        assert suite["checks"][name]["passed"]
    assert report["passed"]


def test_perturb_check_detects_a_corrupted_ladder(tmp_path):
    cfg = load_scan_config(
        "perturb-check", model="dicke", n=[10], fault="ladder", out=str(tmp_path / "check.json")
    )
    report = cmd_perturb_check(cfg)
    fault = report["suites"]["xyz-corrupted-ladder-N10"]
    assert not fault["passed"]
    assert not fault["checks"]["first_order_sectors"]["passed"]
    assert not report["passed"]


def test_main_runs_a_scan(tmp_path, capsys):
    out = tmp_path / "dicke.csv"
    code = main(["dicke-scan", "--n", "4", "--steps", "2", "--omega-max", "0.1", "--backend", "pert",
                 "--out", str(out)])
    assert code == 0
    assert out.is_file()
    assert "SCAN COMPLETE" in capsys.readouterr().out


def test_main_exit_codes(tmp_path):
    assert main(["xyz-scan", "--steps", "1", "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["angle-map", "--model", "dicke", "--out", str(tmp_path / "m.csv")]) == 2
    with pytest.raises(SystemExit):
        main(["fft-scan"])
