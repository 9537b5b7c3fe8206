import csv
import json
from datetime import datetime, timezone

import pytest

from translation_lre.reports import BoundReport, decode_value, encode_value, read_json_report, write_reports

STARTED = datetime(2024, 1, 1, tzinfo=timezone.utc)


def _reports():
    return [
        BoundReport("bounds", 0, {"n": 60, "d": 3, "gamma": 1.2412}, bound=2 ** 200 + 1, bound_log=12.5,
                    oracle=-3.25, margin=15.75, passed=True, seed=2 ** 63 + 5, wall_time=0.5),
        BoundReport("bounds", 1, {"n": 8, "d": 1}, passed=False, seed=3, error="DomainError: too small"),
    ]


def test_exact_integers_survive_as_strings():
    assert encode_value(2 ** 200) == str(2 ** 200)
    assert decode_value(str(2 ** 200)) == 2 ** 200
    assert encode_value(0.1) == 0.1
    assert encode_value(True) is True
    assert encode_value([1, 0.5]) == ["1", 0.5]
    assert decode_value("-7") == -7
    assert decode_value("log depth") == "log depth"
    with pytest.raises(TypeError):
        encode_value(object())


def test_write_and_read_json(tmp_path):
    reports = _reports()
    paths = write_reports("bounds", reports, str(tmp_path), "both", 7, {"seed": 7}, STARTED)
    assert sorted(paths) == sorted(str(tmp_path / name) for name in ("bounds.json", "bounds.csv", "bounds.meta.json"))
    assert read_json_report(str(tmp_path / "bounds.json")) == reports

    document = json.loads((tmp_path / "bounds.json").read_text(encoding="utf-8"))
    assert document["passed"] is False
    assert document["rows"][0]["bound"] == str(2 ** 200 + 1)

    meta = json.loads((tmp_path / "bounds.meta.json").read_text(encoding="utf-8"))
    assert meta["wall_times"] == [0.5, 0.0]
    assert meta["started"] == STARTED.isoformat()


def test_csv_columns_and_float_repr(tmp_path):
    write_reports("bounds", _reports(), str(tmp_path), "csv", 7, {}, STARTED)
    assert not (tmp_path / "bounds.json").exists()
    with open(tmp_path / "bounds.csv", newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0])[:9] == ["command", "cell", "bound", "bound_log", "oracle", "margin", "passed", "seed", "error"]
    assert rows[0]["param.gamma"] == "1.2412"
    assert rows[0]["oracle"] == "-3.25"
    assert rows[1]["bound"] == ""
    assert rows[1]["error"] == "DomainError: too small"


def test_reports_are_byte_identical_across_runs(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    write_reports("bounds", _reports(), str(first), "both", 7, {}, STARTED)
    write_reports("bounds", _reports(), str(second), "both", 7, {}, datetime.now(timezone.utc))
    for name in ("bounds.json", "bounds.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
