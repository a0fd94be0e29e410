import json
import math

import numpy as np
import pytest

from primerace.cli import main
from primerace.zeros import ComponentMeta, load_zero_file

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_race_rejects_unsupported_family_parameter(capsys):
    code, out, err = run(
        capsys, "race", "--family", "sum2sq", "--D", "5", "--xmax", "100",
        "--out", "/tmp/x.csv",
    )
    assert code == 1
    assert "D in {2, 3, 4}" in err
    assert out == ""


def test_race_missing_required_params(capsys):
    code, _, err = run(
        capsys, "race", "--family", "dirichlet", "--xmax", "100", "--out", "/tmp/x.csv"
    )
    assert code == 1 and "--q" in err


def test_race_report_and_determinism(tmp_path, capsys):
    out = tmp_path / "a.csv"
    args = ["race", "--family", "dirichlet", "--q", "4", "--a", "3", "--b", "1",
            "--xmax", "20000", "--quiet", "--workers", "1", "--out", str(out)]
    doc1 = run_json(capsys, *args)
    bytes1 = out.read_bytes()
    doc2 = run_json(capsys, *args)
    assert out.read_bytes() == bytes1
    assert doc1["out_sha256"] == doc2["out_sha256"]
    # reports identical apart from the timestamp (excluded from the digest)
    assert doc1["digest_sha256"] == doc2["digest_sha256"]
    assert doc1["density_nonneg"] > 0.9
    assert doc1["phi_q"] == 2
    assert doc1["predicted_mean_rh"] == 2.0


def test_zeros_validation_and_output(tmp_path, capsys):
    code, _, err = run(capsys, "zeros", "--lfunc", "zeta", "--tmax", "-1",
                       "--out", str(tmp_path / "z.csv"))
    assert code == 1 and "positive" in err

    code, _, err = run(capsys, "zeros", "--lfunc", "dirichlet:200", "--tmax", "10",
                       "--out", str(tmp_path / "z.csv"))
    assert code == 1 and "q = 100" in err

    path = tmp_path / "zz.csv"
    doc = run_json(capsys, "zeros", "--lfunc", "zeta", "--tmax", "30", "--out", str(path))
    assert doc["n_zeros"] == 3
    zs = load_zero_file(path)
    assert zs.labels == ("zeta",)
    assert np.allclose(zs.gammas, [14.134725142, 21.022039639, 25.010857580], atol=1e-6)


def test_dist_pipeline_and_digest_check(tmp_path, capsys):
    zf = tmp_path / "zz.csv"
    run_json(capsys, "zeros", "--lfunc", "zeta", "--tmax", "60", "--out", str(zf))
    out = tmp_path / "sum.json"
    doc = run_json(
        capsys, "dist", "--zeros", str(zf), "--T", "60", "--method", "both",
        "--n", "20000", "--seed", "5", "--out", str(out),
    )
    assert doc["mean"] == -1.0  # from the component metadata
    assert 0.0 <= doc["delta_estimate"] <= 1.0
    assert abs(doc["delta_estimate"] - doc["fourier"]["delta"]) < 0.05
    saved = json.loads(out.read_text())
    assert saved["digest_sha256"] == doc["digest_sha256"]

    doc2 = run_json(
        capsys, "dist", "--zeros", str(zf), "--T", "60", "--method", "both",
        "--n", "20000", "--seed", "5", "--out", str(out),
    )
    assert doc2["digest_sha256"] == doc["digest_sha256"]  # deterministic rerun

    code, _, err = run(
        capsys, "dist", "--zeros", str(zf), "--T", "60", "--expect-digest", "f00",
    )
    assert code == 1 and "digest mismatch" in err


def test_dist_empty_zero_file(tmp_path, capsys):
    zf = tmp_path / "empty.csv"
    zf.write_text("# beta0=0.5\n# component=c weight=1 central_order=0 second_moment_pole=-1\n")
    doc = run_json(
        capsys, "dist", "--zeros", str(zf), "--T", "100", "--mean", "-1",
        "--method", "both", "--n", "1000",
    )
    assert doc["delta_estimate"] == 0.0
    assert doc["fourier"]["delta"] == 0.0


def test_compare_beta0_mismatch(tmp_path, capsys):
    traj = tmp_path / "t.csv"
    run_json(capsys, "race", "--family", "zeta", "--xmax", "5000", "--quiet",
             "--workers", "1", "--out", str(traj))
    zf = tmp_path / "z.csv"
    zf.write_text(
        "# beta0=0.75\n# component=c weight=1 central_order=0 second_moment_pole=0\n"
        "3.0,c,1\n"
    )
    code, _, err = run(
        capsys, "compare", "--trajectory", str(traj), "--zeros", str(zf),
        "--T", "10", "--mean", "0", "--ymin", "2", "--ymax", "8",
    )
    assert code == 1 and "beta0 mismatch" in err


def test_compare_report(tmp_path, capsys):
    traj = tmp_path / "t.csv"
    run_json(capsys, "race", "--family", "zeta", "--xmax", "200000", "--quiet",
             "--workers", "1", "--out", str(traj))
    zf = tmp_path / "zz.csv"
    run_json(capsys, "zeros", "--lfunc", "zeta", "--tmax", "60", "--out", str(zf))
    doc = run_json(
        capsys, "compare", "--trajectory", str(traj), "--zeros", str(zf),
        "--T", "60", "--ymin", str(math.log(1e3)), "--ymax", str(math.log(2e5)),
    )
    assert doc["rms_diff"] > 0
    assert doc["correlation"] is not None


def test_density_outputs(tmp_path, capsys):
    zf = tmp_path / "zz.csv"
    run_json(capsys, "zeros", "--lfunc", "zeta", "--tmax", "60", "--out", str(zf))
    prof = tmp_path / "fp.csv"
    dens = tmp_path / "dens.csv"
    doc = run_json(
        capsys, "density", "--zeros", str(zf), "--T", "60",
        "--out-profile", str(prof), "--out-density", str(dens),
    )
    assert doc["written"] == [str(prof), str(dens)]
    header = prof.read_text().splitlines()
    assert header[4] == "xi,re,im"
    first = header[5].split(",")
    assert float(first[0]) == 0.0 and float(first[1]) == 1.0
    rows = [ln for ln in dens.read_text().splitlines() if not ln.startswith("#")][1:]
    t, phi = np.array([[float(v) for v in r.split(",")] for r in rows]).T
    assert abs(np.trapezoid(phi, t) - 1.0) < 1e-3


def test_config_file_merging(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "dirichlet", "q": 4, "a": 3, "b": 1,
                               "quiet": True, "workers": 1}))
    out = tmp_path / "t.csv"
    doc = run_json(capsys, "race", "--config", str(cfg), "--xmax", "10000",
                   "--out", str(out))
    assert doc["family"] == "dirichlet(4;3,1)"
    # explicit flags override the config file
    doc2 = run_json(capsys, "race", "--config", str(cfg), "--xmax", "10000",
                    "--b", "1", "--a", "1", "--b", "3", "--out", str(out))
    assert doc2["family"] == "dirichlet(4;1,3)"


def test_unwritable_output_fails(capsys):
    code, _, err = run(
        capsys, "zeros", "--lfunc", "zeta", "--tmax", "20",
        "--out", "/nonexistent-dir/z.csv",
    )
    assert code == 1
