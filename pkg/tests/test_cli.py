import json

import pytest
import yaml

from collabradar.cli import main
from collabradar.experiments import dump_spec, standard_spec

SCHEMAS = {
    "auc.csv": "system,auc,ci_low,ci_high,n_trials",
    "moments.csv": "hypothesis,closed_form,monte_carlo,std_error,z_score",
    "cross_covariance.csv": "hypothesis,i,j,kind,re,im,z_score,passed",
    "design_weights.csv": "l,row,col,w_re,w_im",
    "roc_collab.csv": "pfa,pd",
}


def read_csv(p):
    lines = p.read_text().splitlines()
    assert lines[0].startswith("# config_hash=") and "seed=" in lines[0]
    return lines


def test_validate_config(tmp_path, capsys):
    assert main(["validate-config", "--out", str(tmp_path)]) == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["passed"] and s["results"]["n_w"] == 20
    assert "PASS" in capsys.readouterr().out


def test_malformed_config_exit_2(tmp_path, capsys):
    d = standard_spec().to_dict()
    d["config"]["sigma_beta_sq"] = "loud"
    p = tmp_path / "bad.yaml"
    p.write_text(yaml.safe_dump(d))
    assert main(["validate-config", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "sigma_beta_sq" in capsys.readouterr().err


def test_invalid_yaml_exit_2(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("config: [unclosed")
    assert main(["validate-config", "--config", str(p), "--out", str(tmp_path / "o")]) == 2


def test_missing_file_exit_3(tmp_path, capsys):
    assert main(["validate-config", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)]) == 3
    assert "I/O error" in capsys.readouterr().err


def test_inconsistent_dimensions_exit_2(tmp_path, capsys):
    spec = standard_spec()
    spec.config = spec.config.replace(n_transmitters=4)
    p = tmp_path / "s.yaml"
    dump_spec(spec, p)
    assert main(["validate-config", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert "mac_gain" in capsys.readouterr().err


def test_design_weights_outputs(tmp_path):
    assert main(["design-weights", "--out", str(tmp_path)]) == 0
    lines = read_csv(tmp_path / "design_weights.csv")
    assert lines[1] == SCHEMAS["design_weights.csv"] and len(lines) == 2 + 20
    d = json.loads((tmp_path / "design.json").read_text())
    assert d["lambda_max_multiplicity"] == 2 and d["power"] == pytest.approx(1.0)


def test_validate_moments(tmp_path):
    assert main(["validate-moments", "--trials", "20000", "--out", str(tmp_path)]) == 0
    for name in ("moments.csv", "cross_covariance.csv"):
        assert read_csv(tmp_path / name)[1] == SCHEMAS[name]
    s = json.loads((tmp_path / "summary.json").read_text())
    assert {c["name"] for c in s["checks"]} >= {"var_H0_within_5se", "var_H1_within_5se", "cross_covariance_4se"}


def test_roc_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["roc", "--trials", "2000", "--seed", "17"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    assert read_csv(a / "auc.csv")[1] == SCHEMAS["auc.csv"]
    assert read_csv(a / "roc_collab.csv")[1] == SCHEMAS["roc_collab.csv"]


def test_seed_changes_output(tmp_path):
    main(["roc", "--trials", "1000", "--seed", "1", "--out", str(tmp_path / "a")])
    main(["roc", "--trials", "1000", "--seed", "2", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "roc_collab.csv").read_text() != (tmp_path / "b" / "roc_collab.csv").read_text()


def test_reproduce_figure3_small(tmp_path):
    rc = main(["reproduce", "--figure", "3", "--trials", "1000", "--out", str(tmp_path)])
    assert rc in (0, 1)
    lines = read_csv(tmp_path / "fig3_auc.csv")
    assert lines[1] == "system,sigma_alpha_sq,auc,ci_low,ci_high" and len(lines) == 2 + 6
    assert (tmp_path / "fig3_subspace_sigma_alpha_sq_4.csv").exists()


def test_bad_trials_exit_2(tmp_path):
    assert main(["roc", "--trials", "0", "--out", str(tmp_path)]) == 2
