import json

import numpy as np
import pytest

from spintomo.cli import main
from spintomo.dataio import read_field, read_sinograms

SMALL_CONFIG = {
    "phantom": {"segments_per_turn": 32},
    "sim_grid": {"nx": 36, "ny": 36, "fov_m": 0.04},
    "recon_grid": {"nx": 21, "ny": 21, "fov_m": 0.04},
    "geometry": {"n_angles": 36, "angle_step_deg": 10.0, "n_detectors": 30},
    "noise": {"level": 0.05, "seed": 3},
    "rebin_factor": 3,
    "mnkm": {"tol": 0.005, "max_iters": 8},
}


@pytest.fixture
def run(capsys):
    def _run(*argv, expect=0):
        code = main(list(argv))
        captured = capsys.readouterr()
        assert code == expect, captured.err or captured.out
        stream = captured.out if expect == 0 else captured.err
        return json.loads(stream.strip().splitlines()[-1])

    return _run


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(SMALL_CONFIG))
    return str(path)


def test_full_pipeline(tmp_path, run, config_path):
    field = str(tmp_path / "field.json")
    rep = run("phantom", "--config", config_path, "--out", field)
    assert np.isclose(rep["peak_field_t"], 5.8e-6)
    assert read_field(field).spec.nx == 36

    sino = str(tmp_path / "sino.json")
    rep = run("forward", "--field", field, "--config", config_path, "--out", sino)
    assert 0.0 < rep["max_precession_deg"] < 10.0
    assert read_sinograms(sino).values.shape == (3, 3, 36, 30)

    noisy = str(tmp_path / "noisy.json")
    run("noise", "--in", sino, "--level", "0.05", "--seed", "3", "--out", noisy)

    rebinned = str(tmp_path / "rebinned.json")
    rep = run("rebin", "--in", noisy, "--factor", "3", "--out", rebinned)
    assert rep["shape"] == [12, 10]

    est = str(tmp_path / "est.json")
    run("recon-linear", "--in", rebinned, "--config", config_path, "--out", est)
    assert read_field(est).spec.nx == 21

    rep = run("metrics", "--est", est, "--truth", field)
    errs = rep["relative_errors"]
    assert set(errs) == {"B1", "B2", "B3", "mag"}
    assert all(np.isfinite(v) for v in errs.values())


def test_forward_zero_field(tmp_path, run, config_path):
    from spintomo.dataio import write_field
    from spintomo.geometry import GridSpec, VectorField2D

    field = tmp_path / "zero.json"
    write_field(VectorField2D.zeros(GridSpec.centered(16, 16, 0.04)), field)
    sino = str(tmp_path / "sino.json")
    rep = run("forward", "--field", str(field), "--config", config_path, "--out", sino)
    assert rep["max_precession_deg"] == 0.0
    data = read_sinograms(sino)
    assert np.all(data.values[0, 0] == 1.0)
    assert np.all(data.values[0, 1] == 0.0)


def test_recon_mnkm_outputs(tmp_path, run, config_path):
    field = str(tmp_path / "field.json")
    run("phantom", "--config", config_path, "--out", field)
    sino = str(tmp_path / "sino.json")
    run("forward", "--field", field, "--config", config_path, "--out", sino)
    report = run(
        "recon-mnkm", "--in", sino, "--config", config_path,
        "--truth", field, "--out", str(tmp_path / "mnkm"),
    )
    assert (tmp_path / "mnkm.json").exists()
    assert (tmp_path / "mnkm.csv").exists()
    assert (tmp_path / "mnkm.png").exists()
    assert (tmp_path / "mnkm_field.json").exists()
    assert "relative_errors" in report
    lines = (tmp_path / "mnkm.csv").read_text().strip().splitlines()
    assert lines[0] == "iteration,residual,alpha,update_norm"
    assert len(lines) == report["iterations"] + 1


def test_diagnose_nonconvex(tmp_path, run, config_path):
    field = str(tmp_path / "field.json")
    run("phantom", "--config", config_path, "--out", field)
    out = str(tmp_path / "curve.csv")
    rep = run(
        "diagnose-nonconvex", "--field", field, "--config", config_path,
        "--alphas", "0.5:1.5:5", "--out", out,
    )
    assert rep["convex"] is True
    rows = (tmp_path / "curve.csv").read_text().strip().splitlines()
    assert rows[0] == "alpha,residual"
    assert len(rows) == 6
    assert (tmp_path / "curve.png").exists()


def test_render_field_and_sinograms(tmp_path, run, config_path):
    field = str(tmp_path / "field.json")
    run("phantom", "--config", config_path, "--out", field)
    rep = run("render", "--in", field, "--out", str(tmp_path / "field.png"))
    assert rep["kind"] == "field"
    assert (tmp_path / "field.png").exists()

    sino = str(tmp_path / "sino.json")
    run("forward", "--field", field, "--config", config_path, "--out", sino)
    rep = run("render", "--in", sino, "--out", str(tmp_path / "sino.png"))
    assert rep["kind"] == "sinograms"
    assert (tmp_path / "sino.png").exists()


def test_missing_input_is_json_error(tmp_path, run):
    rep = run("rebin", "--in", str(tmp_path / "nope.json"), "--out",
              str(tmp_path / "out.json"), expect=1)
    assert "error" in rep


def test_bad_config_is_json_error(tmp_path, run):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"geometry": {"bogus_key": 1}}))
    rep = run("phantom", "--config", str(bad), "--out", str(tmp_path / "f.json"),
              expect=1)
    assert "error" in rep


def test_rebin_divisibility_error(tmp_path, run, config_path):
    field = str(tmp_path / "field.json")
    run("phantom", "--config", config_path, "--out", field)
    sino = str(tmp_path / "sino.json")
    run("forward", "--field", field, "--config", config_path, "--out", sino)
    rep = run("rebin", "--in", sino, "--factor", "7", "--out",
              str(tmp_path / "o.json"), expect=1)
    assert "factor" in rep["error"]
