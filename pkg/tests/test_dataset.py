import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mediation import (
    Binary,
    ColumnRoles,
    Continuous,
    Dataset,
    Intervention,
    Survival,
    default_intervention,
    load_csv,
    write_csv,
)
from mediation.errors import ConfigError, DataError
from mediation.sim import gen_pathway_example

SIMPLE = {"x": "exposure", "m": "mediator", "y": "outcome_value"}


def _write(path, text):
    path.write_text(text)
    return path


def test_four_row_csv(tmp_path):
    f = _write(tmp_path / "d.csv", "x,m,y\n0,1.5,2\n1,2.5,3\n2,2.0,5\n3,4.0,4\n")
    ds = load_csv(f, SIMPLE)
    assert (ds.n, ds.p, ds.r, ds.q) == (4, 1, 1, 0)
    assert ds.outcome_kind == "continuous"
    assert ds.mediators[:, 0].tolist() == [1.5, 2.5, 2.0, 4.0]


def test_all_censored_is_a_data_error(tmp_path):
    f = _write(tmp_path / "d.csv", "x,m,t,e\n0,1,5,0\n1,2,3,0\n")
    schema = {"x": "exposure", "m": "mediator", "t": "outcome_time", "e": "outcome_event"}
    with pytest.raises(DataError, match="no observed events"):
        load_csv(f, schema)


def test_pathway_shaped_csv_loads(tmp_path):
    ds = gen_pathway_example(470, seed=1)
    schema = write_csv(ds, tmp_path / "p.csv")
    back = load_csv(tmp_path / "p.csv", schema)
    assert (back.n, back.p, back.r, back.q) == (470, 5, 5, 0)
    assert back.outcome_kind == "survival"
    assert back.exposure_names == ds.exposure_names


@pytest.mark.parametrize(
    "body, match",
    [
        ("x,m\n1,2\n", "missing column"),
        ("x,m,y\n1,abc,2\n", "non-numeric"),
        ("x,m,y\n1,nan,2\n", "non-finite"),
        ("x,m,y\n1,inf,2\n", "non-finite"),
    ],
)
def test_bad_cells(tmp_path, body, match):
    f = _write(tmp_path / "d.csv", body)
    with pytest.raises(DataError, match=match):
        load_csv(f, SIMPLE)


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_csv(tmp_path / "nope.csv", SIMPLE)


def test_schema_validation():
    with pytest.raises(ConfigError):
        ColumnRoles({"x": "exposure", "y": "outcome_value"})
    with pytest.raises(ConfigError):
        ColumnRoles({"x": "exposure", "m": "mediator", "t": "outcome_time"})
    with pytest.raises(ConfigError):
        ColumnRoles({"x": "exposure", "m": "mediatr", "y": "outcome_value"})
    with pytest.raises(ConfigError):
        ColumnRoles({"x": "exposure", "m": "mediator", "y": "outcome_value"}, "survival")


def test_schema_from_toml_and_json(tmp_path):
    (tmp_path / "s.toml").write_text('outcome_type = "binary"\n[roles]\nx = "exposure"\nm = "mediator"\ny = "outcome_value"\n')
    (tmp_path / "s.json").write_text(json.dumps({**SIMPLE, "outcome_type": "binary"}))
    a = ColumnRoles.load(tmp_path / "s.toml")
    b = ColumnRoles.load(tmp_path / "s.json")
    assert a.to_mapping() == b.to_mapping()
    assert a.outcome_type == "binary"


def test_binary_outcome_must_be_01():
    with pytest.raises(DataError):
        Binary([0.0, 2.0])


def test_survival_time_must_be_positive():
    with pytest.raises(DataError):
        Survival([0.0, 1.0], [1.0, 1.0])


def test_layers_must_align():
    with pytest.raises(DataError):
        Dataset(np.zeros((3, 1)), np.zeros((4, 1)), Continuous(np.zeros(3)))


def test_arrays_are_read_only():
    ds = Dataset(np.arange(3.0), np.arange(3.0), Continuous(np.arange(3.0)))
    with pytest.raises(ValueError):
        ds.exposures[0, 0] = 5.0


def test_take_keeps_rows_together():
    ds = Dataset(np.arange(5.0), 10 + np.arange(5.0), Continuous(20 + np.arange(5.0)), np.arange(5.0) * -1)
    sub = ds.take([4, 4, 0])
    assert sub.exposures[:, 0].tolist() == [4, 4, 0]
    assert sub.mediators[:, 0].tolist() == [14, 14, 10]
    assert sub.outcome.values.tolist() == [24, 24, 20]
    assert sub.covariates[:, 0].tolist() == [-4, -4, 0]


def test_default_intervention_percentiles():
    x = np.arange(1.0, 101.0)
    ds = Dataset(x, x, Continuous(x))
    iv = default_intervention(ds, 0)
    # linear rule: position q (n - 1) in the sorted sample
    pos_lo, pos_hi = 0.025 * 99, 0.975 * 99
    assert iv.x_low == pytest.approx(1 + pos_lo, abs=1e-12) == pytest.approx(3.475)
    assert iv.x_high == pytest.approx(1 + pos_hi, abs=1e-12) == pytest.approx(97.525)


def test_binary_exposure_snaps_to_support():
    x = np.r_[np.zeros(99), 1.0]
    ds = Dataset(x, np.arange(100.0), Continuous(np.arange(100.0)))
    iv = default_intervention(ds, 0)
    assert (iv.x_low, iv.x_high) == (0.0, 1.0)


def test_constant_exposure_rejected():
    ds = Dataset(np.ones(5), np.arange(5.0), Continuous(np.arange(5.0)))
    with pytest.raises(DataError, match="constant"):
        default_intervention(ds, 0)


def test_equal_levels_warn():
    with pytest.warns(UserWarning):
        Intervention(0, 1.0, 1.0)


def test_exposure_lookup():
    ds = Dataset(np.eye(3), np.arange(3.0), Continuous(np.arange(3.0)), exposure_names=("a", "b", "c"))
    assert ds.exposure_index("b") == 1
    assert ds.exposure_index("2") == 2
    with pytest.raises(ConfigError):
        ds.exposure_index("zzz")


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 15).flatmap(lambda n: st.tuples(*[st.lists(finite, min_size=n, max_size=n) for _ in range(4)])))
def test_csv_round_trip_is_exact(tmp_path_factory, cols):
    x, m, c, y = (np.array(v) for v in cols)
    ds = Dataset(x, m, Continuous(y), c)
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    schema = write_csv(ds, path)
    back = load_csv(path, schema)
    for a, b in ((ds.exposures, back.exposures), (ds.mediators, back.mediators),
                 (ds.covariates, back.covariates), (ds.outcome.values, back.outcome.values)):
        assert np.array_equal(a, b)
