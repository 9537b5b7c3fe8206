# translation_lre/reports.py

"""
Report rows and their CSV / JSON writers.

Exact integers are written as decimal strings so arbitrarily large counts
survive; reals use the shortest round-trip repr. Wall times and timestamps go
to a separate metadata file so reruns give byte-identical reports.
"""

import csv
import json
import logging
import os
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import scipy

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ("command", "cell", "bound", "bound_log", "oracle", "margin", "passed", "seed", "error")


@dataclass
class BoundReport:
    """One sweep cell: a bound, the oracle it must dominate, and the verdict."""
    command: str
    cell: int
    parameters: Dict[str, Any]
    bound: Any = None
    bound_log: Optional[float] = None
    oracle: Any = None
    margin: Any = None
    passed: bool = False
    seed: Optional[int] = None
    error: Optional[str] = None
    wall_time: float = field(default=0.0, compare=False)

    def to_row(self) -> Dict[str, Any]:
        row = {
            "command": self.command,
            "cell": self.cell,
            "bound": encode_value(self.bound),
            "bound_log": encode_value(self.bound_log),
            "oracle": encode_value(self.oracle),
            "margin": encode_value(self.margin),
            "passed": self.passed,
            "seed": encode_value(self.seed),
            "error": self.error,
        }
        row.update({f"param.{key}": encode_value(value) for key, value in self.parameters.items()})
        return row

    @classmethod
    def from_row(cls, row: Dict[str, Any]) -> "BoundReport":
        parameters = {key[len("param."):]: decode_value(value) for key, value in row.items()
                      if key.startswith("param.")}
        return cls(
            command=row["command"],
            cell=int(row["cell"]),
            parameters=parameters,
            bound=decode_value(row.get("bound")),
            bound_log=decode_value(row.get("bound_log")),
            oracle=decode_value(row.get("oracle")),
            margin=decode_value(row.get("margin")),
            passed=row.get("passed") in (True, "True", "true"),
            seed=decode_value(row.get("seed")),
            error=row.get("error") or None,
        )


def encode_value(value: Any) -> Any:
    """Exact integers become decimal strings; reals stay JSON numbers."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (list, tuple)):
        return [encode_value(item) for item in value]
    raise TypeError(f"cannot encode report value of type {type(value).__name__}")


def decode_value(value: Any) -> Any:
    if isinstance(value, str):
        if value.lstrip("-").isdigit():
            return int(value)
        try:
            return float(value)
        except ValueError:
            return value
    if isinstance(value, list):
        return [decode_value(item) for item in value]
    return value


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return json.dumps(value)
    return str(value)


def write_reports(command: str, reports: Sequence[BoundReport], out_dir: str, output_format: str,
                  seed: int, config: Dict[str, Any], started: datetime) -> List[str]:
    """Write <command>.json / <command>.csv plus <command>.meta.json; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    rows = [report.to_row() for report in reports]
    stem = os.path.join(out_dir, command)
    paths = []

    if output_format in ("json", "both"):
        document = {
            "command": command,
            "seed": str(seed),
            "passed": all(report.passed for report in reports),
            "rows": rows,
        }
        with open(stem + ".json", 'w', encoding='utf-8') as f:
            json.dump(document, f, indent=2, ensure_ascii=False)
            f.write("\n")
        paths.append(stem + ".json")

    if output_format in ("csv", "both"):
        columns = list(REPORT_COLUMNS)
        for row in rows:
            columns.extend(key for key in row if key not in columns)
        with open(stem + ".csv", 'w', encoding='utf-8', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=columns)
            writer.writeheader()
            for row in rows:
                writer.writerow({key: _csv_cell(row.get(key)) for key in columns})
        paths.append(stem + ".csv")

    meta = {
        "command": command,
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "wall_times": [report.wall_time for report in reports],
        "total_wall_time": sum(report.wall_time for report in reports),
        "versions": {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__},
        "config": config,
    }
    with open(stem + ".meta.json", 'w', encoding='utf-8') as f:
        json.dump(meta, f, indent=2, ensure_ascii=False, default=str)
    paths.append(stem + ".meta.json")

    logger.info(f"Wrote {len(reports)} {command} rows to {out_dir}")
    return paths


def read_json_report(path: str) -> List[BoundReport]:
    with open(path, 'r', encoding='utf-8') as f:
        document = json.load(f)
    return [BoundReport.from_row(row) for row in document["rows"]]
