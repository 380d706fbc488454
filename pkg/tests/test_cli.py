import json

import numpy as np
import pytest

from cmspectra.cli import ConfigError, ExperimentConfig, load_config, main


def run(argv):
    return main(argv)


def read_report(out):
    return json.loads((out / "report.json").read_text())


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(degree_spec="weird").validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(mode="banana").validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(degree_spec="explicit").validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(range=[2.0, -2.0]).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"not_a_field": 1})
    assert ExperimentConfig().validate().hash() == ExperimentConfig().hash()


def test_load_config_flags_win(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"n": 50, "d": 4, "seed": 9}))
    cfg = load_config(str(path), {"seed": 11, "d": None})
    assert cfg.n == 50
    assert cfg.d == 4
    assert cfg.seed == 11


def test_load_config_bad_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(bad), {})


def test_spectrum_dense_outputs(tmp_path):
    out = tmp_path / "out"
    code = run(["spectrum", "--n", "200", "--d", "8", "--seed", "1",
                "--out", str(out)])
    assert code == 0
    report = read_report(out)
    assert report["ks_distance"] is not None
    files = {p.name for p in out.iterdir()}
    assert "report.json" in files
    tag = report["config_hash"]
    assert f"eigenvalues_{tag}.txt" in files
    assert f"histogram_{tag}.csv" in files
    assert f"moments_{tag}.csv" in files
    eigs = np.loadtxt(out / f"eigenvalues_{tag}.txt")
    assert eigs.size == 200
    assert report["moments"]["2"] == pytest.approx(np.mean(eigs ** 2))


def test_spectrum_deterministic_given_seed(tmp_path):
    reports = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert run(["spectrum", "--n", "100", "--d", "6", "--seed", "5",
                    "--out", str(out)]) == 0
        rep = read_report(out)
        rep.pop("timings")
        reports.append(rep)
    assert reports[0] == reports[1]


def test_spectrum_seed_changes_output(tmp_path):
    ks = []
    for seed in ("3", "4"):
        out = tmp_path / seed
        run(["spectrum", "--n", "100", "--d", "6", "--seed", seed,
             "--out", str(out)])
        ks.append(read_report(out)["ks_distance"])
    assert ks[0] != ks[1]


def test_spectrum_operator_mode(tmp_path):
    out = tmp_path / "out"
    code = run(["spectrum", "--n", "300", "--d", "10", "--mode", "operator",
                "--probes", "50", "--seed", "2", "--k-list", "1,2",
                "--out", str(out)])
    assert code == 0
    report = read_report(out)
    assert report["ks_distance"] is None
    assert set(report["moments"]) == {"1", "2"}
    assert "std_error" in report["moments"]["2"]


def test_spectrum_assert_exit_codes(tmp_path):
    base = ["spectrum", "--n", "400", "--d", "20", "--seed", "0"]
    ok = run(base + ["--out", str(tmp_path / "ok"), "--assert",
                     "--max-ks", "0.5"])
    bad = run(base + ["--out", str(tmp_path / "bad"), "--assert",
                      "--max-ks", "0.0001"])
    assert ok == 0
    assert bad == 3


def test_moments_table_and_assert(tmp_path):
    out = tmp_path / "out"
    code = run(["moments", "--n", "400", "--d", "20", "--seed", "1",
                "--k-list", "1,2,3,4", "--out", str(out), "--assert",
                "--max-abs-error", "0.5"])
    assert code == 0
    report = read_report(out)
    ks = [row["k"] for row in report["moment_table"]]
    assert ks == [1, 2, 3, 4]
    csv = (out / f"moments_{report['config_hash']}.csv").read_text()
    assert csv.startswith("k,empirical,reference,abs_error")
    assert run(["moments", "--n", "400", "--d", "20", "--seed", "1",
                "--out", str(tmp_path / "o2"), "--assert",
                "--max-abs-error", "0.0"]) == 3


def test_prune_command(tmp_path):
    out = tmp_path / "out"
    degrees = _write_degrees(tmp_path, [60] * 1950 + [2] * 50)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "degree_spec": "explicit", "degrees_file": str(degrees),
        "C": 1.0, "epsilon": 0.05, "seed": 4}))
    code = run(["prune", "--config", str(cfg), "--out", str(out), "--assert"])
    assert code == 0
    report = read_report(out)
    summary = report["prune_summary"]
    assert summary["final_S"] == 0
    assert summary["removed_edge_count"] >= 1
    assert report["bounds"]["vertices_ok"]
    traj = (out / f"trajectory_{report['config_hash']}.csv").read_text()
    assert traj.startswith("t,S_t,D_t,action")


def test_oracle_command(tmp_path):
    out = tmp_path / "out"
    code = run(["oracle", "--degree-spec", "explicit", "--degrees-file",
                str(_write_degrees(tmp_path, [2, 2, 2])), "--samples", "2000",
                "--k-list", "1,2,3", "--seed", "8", "--out", str(out),
                "--assert"])
    assert code == 0
    report = read_report(out)
    assert report["matching_count"] == 15
    assert all(row["within_3se"] for row in report["comparison"])


def _write_degrees(tmp_path, degrees):
    path = tmp_path / "degrees.txt"
    path.write_text("\n".join(str(d) for d in degrees) + "\n")
    return path


def test_sweep_command(tmp_path):
    out = tmp_path / "out"
    code = run(["sweep", "--n", "150", "--sweep-d", "4,16", "--seed", "0",
                "--out", str(out)])
    assert code == 0
    report = read_report(out)
    assert [c["value"] for c in report["cells"]] == [4, 16]
    # denser graphs track the semicircle better
    assert report["cells"][1]["ks_distance"] < report["cells"][0]["ks_distance"]
    csv = (out / f"sweep_{report['config_hash']}.csv").read_text()
    assert csv.startswith("param,value,ks_distance,m2,m4")


def test_sweep_empty_grid_is_config_error(tmp_path):
    assert run(["sweep", "--n", "100", "--out", str(tmp_path / "o")]) == 2


def test_check_condition_command(tmp_path, capsys):
    out = tmp_path / "out"
    code = run(["check-condition", "--degree-spec", "two_valued", "--n", "1000",
                "--d1", "10", "--d2", "200", "--C", "1.0", "--epsilon", "0.6",
                "--seed", "0", "--out", str(out)])
    assert code == 0
    report = read_report(out)
    assert report["condition_report"]["fraction_below"] == pytest.approx(0.5, abs=0.1)
    assert set(report["degree_moment_diagnostics"]) == {"1", "2", "3", "4"}
    printed = json.loads(capsys.readouterr().out)
    assert printed == report["condition_report"]


def test_validation_error_exit_code(tmp_path):
    assert run(["spectrum", "--degree-spec", "bogus",
                "--out", str(tmp_path / "o")]) == 2


def test_no_subtract_flag_changes_spectrum(tmp_path):
    eigs = {}
    for flag, sub in ((True, "a"), (False, "b")):
        argv = ["spectrum", "--n", "100", "--d", "4", "--seed", "0",
                "--out", str(tmp_path / sub)]
        if not flag:
            argv.append("--no-subtract-rank1")
        run(argv)
        rep = read_report(tmp_path / sub)
        eigs[flag] = np.loadtxt(tmp_path / sub
                                / f"eigenvalues_{rep['config_hash']}.txt")
    assert not np.allclose(eigs[True], eigs[False])
