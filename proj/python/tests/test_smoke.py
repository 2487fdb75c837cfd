import json
import math

import numpy as np
import pytest

import decomp


def test_stage_names():
    assert decomp.stage_names()[0] == "simulate"
    assert decomp.stage_names()[-1] == "gaze"


def test_step_straight_line():
    x, y, psi, v, omega = decomp.step((0.0, 0.0, 0.0, 2.0, 0.0), 0.0, 0.0, dt=0.1)
    assert psi == 0.0 and omega == 0.0
    assert y == 0.0 and 0.19 < x < 0.2


def test_labels_at_bounds():
    rows = np.array([[0.0, 0, 0, 0, 10.0, 0, 0, 1.0], [0.02, 0, 0, 0, 0.0, -1.0, -5.0, 0.5]])
    codes = decomp.label_constraints(rows)
    assert codes.tolist() == [[0, 1, 0, 1], [-1, 0, -1, -1]]


def test_sice_unpenalised_is_inverse():
    cov = np.array([[2.0, 0.5], [0.5, 1.0]])
    prec, edges = decomp.sice(cov, lam=0.0)
    assert np.allclose(prec, np.linalg.inv(cov), atol=1e-6)
    assert edges == [(0, 1)]


def test_viterbi_and_errors():
    T = np.array([[0.9, 0.1], [0.2, 0.8]])
    Z = np.array([[0.7, 0.3], [0.1, 0.9]])
    assert decomp.viterbi([0, 1, 1], T, Z, np.array([0.5, 0.5])) == [1, 1, 1]
    with pytest.raises(decomp.ValidationError):
        decomp.viterbi([5], T, Z, np.array([0.5, 0.5]))


def test_similarity():
    e = {("omega", "v")}
    assert decomp.class_similarity(e, (0, 1, 0, 0), e | {("u_lon", "v")}, (0, 1, 0, 0), 0.0) == 0.5


def test_pipeline_roundtrip(tmp_path):
    manifest = {
        "output_dir": "out",
        "seed": 4,
        "inputs": {"scenario": "planted-course"},
        "config": {"cluster-modes": {"n_modes": 3}, "gaze": {"v_fix": 2}},
    }
    report = decomp.run(manifest, tmp_path)
    assert report["subgoals"]["n_clusters"] == 3
    assert report["viterbi"]["planted_accuracy"] >= 0.9
    assert json.loads((tmp_path / "out" / "report.json").read_text()) == report
    traj = decomp.load_trajectory(tmp_path / "out" / "trajectories" / "traj_000.csv")
    assert traj.shape[1] == len(decomp.TRAJECTORY_COLUMNS)
    assert math.isclose(traj[1, 0] - traj[0, 0], 0.02)

    (tmp_path / "m.json").write_text(json.dumps({**manifest, "output_dir": "again"}))
    assert decomp.run_manifest(tmp_path / "m.json") == report


def test_bad_manifest(tmp_path):
    with pytest.raises(decomp.ValidationError):
        decomp.run({"output_dir": "o", "stages": ["nope"]}, tmp_path)
