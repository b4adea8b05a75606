import json

import numpy as np
import pytest

from effham import validate
from effham.errors import ConfigError


def test_fixtures_load():
    sc = validate.load_scalars()
    assert sc[("cos1", "E0")] < 0
    assert sc[("zero", "E0")] == pytest.approx(0.0, abs=1e-12)
    prof = validate.load_profile("cos1")
    assert prof["x"].size == 257 and np.all(prof["f_max"] > prof["f_min"])
    assert prof["lambda"] == pytest.approx(1 - sc[("cos1", "E0")])


def test_fixture_routes_agree():
    import csv
    with open(f"{validate.FIXTURES}/hopf_cole_scalars.csv") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        if row["quantity"] != "profile_fd_deviation":
            assert float(row["route_disagreement"]) < 1e-6, row
        else:
            assert float(row["value"]) < 1e-4, row


def test_report_json_and_markdown(tmp_path):
    rep = validate.CheckReport("x/y", "pass", {"a": 1.0, "b": np.float64(2.0), "c": float("inf")}, {"a": 1e-3})
    pj, pm = validate.write_reports([rep], tmp_path)
    d = json.loads(open(pj).read())
    assert d[0]["measured"]["c"] == "inf" and d[0]["status"] == "pass"
    assert "| x/y | pass |" in open(pm).read()


def test_unknown_suite():
    with pytest.raises(ConfigError):
        validate.run_suite("nope")


def test_class_suite_double_run():
    reps = validate.run_suite("class", double_run=True)
    assert len(reps) == len(validate.acceptance_environments())
    assert all(r.passed and r.measured["reproducible"] for r in reps)


def test_failure_is_reported_not_raised():
    from effham.env import ClassParams, from_string
    bad = {"tight": from_string("p^2", validate.cosine([1.0]), cls=ClassParams(alpha1=1.0))}
    reps = validate.run_suite("class", bad)
    assert reps[0].status == "fail" and "failed: class conditions" in reps[0].notes


def test_riccati_check():
    assert validate.check_riccati_bridge().passed
