import json
import subprocess
import sys

import numpy as np
import pytest

from mediation import Binary, Dataset, write_csv
from mediation.cli import main
from mediation.glm import MediatorModel
from mediation.survival import CoxOutcome


@pytest.fixture(scope="module")
def survival_csv(tmp_path_factory):
    d = tmp_path_factory.mktemp("surv")
    assert main(["simulate", "--design", "survival", "--strength", "strong", "--n", "200", "--n-med", "5",
                 "--seed", "3", "--oracle-draws", "20000", "--out", str(d / "s.csv")]) == 0
    return d / "s.csv", d / "s.schema.json"


def _effects(csv, schema, out, *extra):
    return main(["effects", "--data", str(csv), "--schema", str(schema), "--scale", "restricted", "--L", "2000",
                 "--x-low", "auto", "--x-high", "auto", "--B", "100", "--seed", "7", "--out", str(out),
                 "--quiet", *extra])


def test_simulate_writes_csv_sidecar_and_schema(survival_csv):
    csv, schema = survival_csv
    side = json.loads(csv.with_suffix(".json").read_text())
    assert side["seed"] == 3
    assert side["oracle"]["scale"] == "restricted_mean_difference"
    assert json.loads(schema.read_text())["outcome_type"] == "survival"
    assert csv.read_text().splitlines()[0].startswith("x,m1")


def test_effects_json(survival_csv, tmp_path):
    csv, schema = survival_csv
    assert _effects(csv, schema, tmp_path / "e.json") == 0
    doc = json.loads((tmp_path / "e.json").read_text())
    assert doc["scale"] == "restricted_mean_difference"
    row = doc["exposures"][0]
    for name in ("direct", "indirect", "total"):
        assert row[name]["ci_low"] <= row[name]["estimate"] <= row[name]["ci_high"]
        assert 0 <= row[name]["p_value"] <= 1
    assert row["point"]["intervention"] == {"exposure_index": 0, "x_low": 0.0, "x_high": 1.0}
    assert doc["metadata"]["spec_version"] == "1.0"
    assert "workers" not in doc["metadata"]["config"]


def test_effects_identical_across_workers(survival_csv, tmp_path):
    csv, schema = survival_csv
    _effects(csv, schema, tmp_path / "a.json", "--workers", "1")
    _effects(csv, schema, tmp_path / "b.json", "--workers", "2")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_dump_replicates(survival_csv, tmp_path):
    csv, schema = survival_csv
    _effects(csv, schema, tmp_path / "e.json", "--dump-replicates", str(tmp_path / "r.csv"))
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "exposure,replicate,direct,indirect,total"
    assert len(lines) == 101


def test_fit_round_trips_models(survival_csv, tmp_path):
    csv, schema = survival_csv
    assert main(["fit", "--data", str(csv), "--schema", str(schema), "--out", str(tmp_path / "f.json")]) == 0
    doc = json.loads((tmp_path / "f.json").read_text())
    med = MediatorModel.from_dict(doc["mediator_model"])
    out = CoxOutcome.from_dict(doc["outcome_model"])
    assert med.r == 5 and out.alpha_m.shape == (5,)


def test_bench_bias_small(tmp_path):
    out = tmp_path / "bias.csv"
    assert main(["bench", "--study", "bias", "--prevalence-grid", "0.2,0.4", "--runs", "5", "--n", "200",
                 "--truth-n", "5000", "--out", str(out), "--quiet"]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 2 * 3
    assert {ln.split(",")[0] for ln in lines[1:]} == {"numeric", "rare_disease", "probit"}


def test_bench_null_small(tmp_path):
    out = tmp_path / "null.csv"
    assert main(["bench", "--study", "null", "--n", "100", "--runs", "3", "--B", "100", "--out", str(out),
                 "--quiet"]) == 0
    assert "coverage" in out.read_text().splitlines()[0]


def test_unknown_flag_is_config_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["effects", "--bogus"])
    assert exc.value.code == 2
    assert json.loads(capsys.readouterr().err.splitlines()[-1])["error"] == "ConfigError"


def test_incompatible_scale_is_config_error(survival_csv, tmp_path, capsys):
    csv, schema = survival_csv
    rc = main(["effects", "--data", str(csv), "--schema", str(schema), "--scale", "odds", "--B", "100",
               "--out", str(tmp_path / "x.json")])
    assert rc == 2


def test_missing_data_file_is_data_error(survival_csv, tmp_path):
    _, schema = survival_csv
    rc = main(["fit", "--data", str(tmp_path / "none.csv"), "--schema", str(schema)])
    assert rc == 3


def test_separated_logistic_is_numerical_error(tmp_path):
    x = np.arange(-10.0, 10.0)
    ds = Dataset(x, np.cos(x), Binary((x > 0).astype(float)))
    schema = write_csv(ds, tmp_path / "sep.csv")
    (tmp_path / "sep.json").write_text(json.dumps(schema.to_mapping()))
    rc = main(["fit", "--data", str(tmp_path / "sep.csv"), "--schema", str(tmp_path / "sep.json")])
    assert rc == 4


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "mediation", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
