import math

import numpy as np
import pytest

from rmgauss.compare import compare_runs, load_run, path_distances, write_compare_report
from rmgauss.errors import ConfigError, IncompatibleRunsError
from rmgauss.outputs import (
    read_path_csv,
    read_summary_json,
    read_trace_csv,
    write_path_csv,
    write_spectrum_csv,
    write_summary_json,
    write_trace_csv,
)


def make_run(directory, n_interior, mean_fn, epsilon=0.01, sigma_total=None, potential="quartic", compare=None):
    directory.mkdir(parents=True, exist_ok=True)
    t = np.linspace(0.0, 1.0, n_interior + 2)
    m0 = 2.0 * t
    mean = mean_fn(t)
    write_path_csv(str(directory / "path.csv"), mean - m0, m0)
    summary = {
        "problem": {"mode": "path", "potential": potential, "epsilon": epsilon,
                    "n_interior": n_interior, "m_minus": 0.0, "m_plus": 2.0},
    }
    if sigma_total is not None:
        summary["rm"] = {"sigma_total": sigma_total}
    if compare is not None:
        summary["config"] = {"compare": compare}
    write_summary_json(str(directory / "summary.json"), summary)
    return str(directory)


def test_path_csv_format(tmp_path):
    path = tmp_path / "path.csv"
    write_path_csv(str(path), np.array([0.0, 1.0 / 3.0, 0.0]), np.array([0.0, 1.0, 2.0]))
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == "t,x,m0,mean"
    assert lines[1] == "0,0,0,0"
    assert lines[2] == "0.5,0.33333333333333331,1,1.3333333333333333"
    assert lines[3] == "1,0,2,2"
    columns = read_path_csv(str(path))
    assert columns["x"][1] == 1.0 / 3.0


def test_trace_csv_blank_kl(tmp_path):
    path = tmp_path / "trace.csv"
    rows = [
        {"n": 1, "sigma": 0, "a": 1 / 11, "truncated": False, "norm_x": 0.25, "kl_estimate": math.nan},
        {"n": 2, "sigma": 1, "a": 1 / 12, "truncated": True, "norm_x": 0.5, "kl_estimate": 3.5},
    ]
    write_trace_csv(str(path), rows)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "n,sigma,a,truncated,norm_x,kl_estimate"
    assert lines[1].endswith(",0,0.25,")
    assert lines[2].endswith(",1,0.5,3.5")
    back = read_trace_csv(str(path))
    assert math.isnan(back["kl_estimate"][0])
    assert back["a"][0] == 1 / 11


def test_spectrum_csv(tmp_path):
    path = tmp_path / "spectrum.csv"
    write_spectrum_csv(str(path), np.array([-2.5, 10.0]))
    assert path.read_text(encoding="utf-8") == "index,eigenvalue\n1,-2.5\n2,10\n"


def test_summary_json_handles_numpy(tmp_path):
    path = tmp_path / "summary.json"
    write_summary_json(str(path), {"n": np.int64(3), "x": np.float64(0.5), "v": np.arange(2)})
    assert read_summary_json(str(path)) == {"n": 3, "x": 0.5, "v": [0, 1]}


def test_identical_runs_have_zero_distance(tmp_path):
    run = make_run(tmp_path / "a", 49, lambda t: 2.0 * t**2, sigma_total=3)
    report = compare_runs(run, run)
    assert report.h1_distance == 0.0 and report.l2_distance == 0.0
    assert report.sigma_ratio == 1.0
    assert report.passed


def test_resolutions_compared_on_finer_grid(tmp_path):
    coarse = make_run(tmp_path / "coarse", 99, lambda t: 2.0 * t**2, sigma_total=4)
    fine = make_run(tmp_path / "fine", 199, lambda t: 2.0 * t**2, sigma_total=6)
    report = compare_runs(coarse, fine)
    assert report.n_interior_a == 99 and report.n_interior_b == 199
    assert report.l2_distance < 1e-4
    assert report.h1_distance < 2e-2
    assert report.sigma_ratio == pytest.approx(7 / 5)
    assert report.passed


def test_distances_of_known_difference(tmp_path):
    a = make_run(tmp_path / "a", 199, lambda t: 2.0 * t)
    b = make_run(tmp_path / "b", 199, lambda t: 2.0 * t + 0.1 * np.sin(np.pi * t))
    report = compare_runs(a, b, tol_h1=0.1)
    assert report.h1_distance == pytest.approx(0.1 * np.pi / np.sqrt(2), rel=1e-3)
    assert report.l2_distance == pytest.approx(0.1 / np.sqrt(2), rel=1e-3)
    assert not report.passed_h1
    assert not report.passed


def test_truncation_counts_outside_factor_fail(tmp_path):
    a = make_run(tmp_path / "a", 49, lambda t: 2.0 * t, sigma_total=0)
    b = make_run(tmp_path / "b", 49, lambda t: 2.0 * t, sigma_total=5)
    report = compare_runs(a, b)
    assert report.h1_distance == 0.0
    assert report.sigma_ratio == 6.0
    assert not report.passed_sigma and not report.passed


def test_recorded_compare_settings_apply(tmp_path):
    a = make_run(tmp_path / "a", 99, lambda t: 2.0 * t, sigma_total=0,
                 compare={"tol_h1": 0.1, "tol_l2": 0.5, "sigma_factor": 10.0})
    b = make_run(tmp_path / "b", 99, lambda t: 2.0 * t + 0.2 * np.sin(np.pi * t), sigma_total=5)

    recorded = compare_runs(a, b)
    assert (recorded.tol_h1, recorded.tol_l2, recorded.sigma_factor) == (0.1, 0.5, 10.0)
    assert not recorded.passed_h1 and recorded.passed_l2 and recorded.passed_sigma

    # without a recorded block the defaults pass the same pair on H1
    defaults = compare_runs(b, a)
    assert defaults.tol_h1 == 0.5 and defaults.passed_h1 and not defaults.passed_sigma


def test_explicit_tolerances_override_recorded(tmp_path):
    a = make_run(tmp_path / "a", 99, lambda t: 2.0 * t, compare={"tol_h1": 0.1})
    b = make_run(tmp_path / "b", 99, lambda t: 2.0 * t + 0.2 * np.sin(np.pi * t))
    report = compare_runs(a, b, tol_h1=1.0)
    assert report.tol_h1 == 1.0 and report.passed


def test_bad_recorded_compare_settings(tmp_path):
    a = make_run(tmp_path / "a", 9, lambda t: 2.0 * t, compare={"tol_h1": -1.0})
    with pytest.raises(ConfigError, match="compare settings"):
        load_run(a)


def test_incompatible_runs_name_the_field(tmp_path):
    a = make_run(tmp_path / "a", 49, lambda t: 2.0 * t, epsilon=0.01)
    b = make_run(tmp_path / "b", 49, lambda t: 2.0 * t, epsilon=0.1)
    with pytest.raises(IncompatibleRunsError) as err:
        compare_runs(a, b)
    assert err.value.field == "epsilon"


def test_csv_file_accepted_directly(tmp_path):
    a = make_run(tmp_path / "a", 49, lambda t: 2.0 * t)
    report = compare_runs(str(tmp_path / "a" / "path.csv"), a)
    assert report.h1_distance == 0.0


def test_bvp_path_used_when_no_rm_path(tmp_path):
    run = tmp_path / "bvp"
    run.mkdir()
    t = np.linspace(0.0, 1.0, 21)
    write_path_csv(str(run / "bvp_path.csv"), np.zeros(21), 2.0 * t)
    loaded = load_run(str(run))
    assert loaded.is_path
    assert loaded.metadata["n_interior"] == 19
    assert loaded.sigma_total is None


def test_scalar_runs_compare_final_states(tmp_path):
    for name, x in (("a", 0.95), ("b", 0.94)):
        (tmp_path / name).mkdir()
        write_summary_json(str(tmp_path / name / "summary.json"), {
            "problem": {"mode": "scalar", "potential": "double_well", "epsilon": 0.1},
            "rm": {"final_x": x, "sigma_total": 2},
        })
    report = compare_runs(str(tmp_path / "a"), str(tmp_path / "b"), tol_h1=0.05)
    assert report.mode == "scalar"
    assert report.h1_distance == pytest.approx(0.01)
    assert report.passed


def test_missing_run(tmp_path):
    with pytest.raises(ConfigError):
        load_run(str(tmp_path / "nothing"))


def test_report_written(tmp_path):
    run = make_run(tmp_path / "a", 9, lambda t: 2.0 * t)
    path = write_compare_report(str(tmp_path / "report.json"), compare_runs(run, run))
    report = read_summary_json(path)
    assert report["passed"] is True
    assert report["h1_distance"] == 0.0


def test_path_distances_symmetric():
    a = np.linspace(0, 2, 51) ** 2 / 2
    b = np.linspace(0, 2, 101)
    assert path_distances(a, b) == pytest.approx(path_distances(b, a))
