"""Report records and their JSON / CSV serializations (schema ``mlsq/1``)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

SCHEMA = "mlsq/1"
CSV_COLUMNS = ("check", "instance", "instance_seed", "lhs", "rhs", "slack", "ratio", "pass")


def _clean(value):
    """JSON-safe copy: non-finite floats become strings, numpy scalars become Python."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


@dataclass
class Record:
    check: str
    instance: int
    instance_seed: Optional[int]
    lhs: float
    rhs: float
    slack: float
    passed: Optional[bool]
    ratio: Optional[float] = None
    extra: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def as_dict(self) -> dict:
        out = {
            "check": self.check,
            "instance": self.instance,
            "instance_seed": self.instance_seed,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
        }
        if self.ratio is not None:
            out["ratio"] = self.ratio
        out.update(self.extra)
        return out


@dataclass
class CheckReport:
    check: str
    records: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def asserted(self) -> list:
        return [r for r in self.records if r.passed is not None]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.asserted)

    def aggregate(self) -> dict:
        ratios = [r.ratio for r in self.records if r.ratio is not None]
        margins = [r.margin for r in self.records if r.passed is not None]
        return {
            "count": len(self.records),
            "asserted": len(self.asserted),
            "pass_count": sum(1 for r in self.asserted if r.passed),
            "max_ratio": max(ratios) if ratios else None,
            "min_margin": min(margins) if margins else None,
            "passed": self.passed,
        }

    def as_dict(self) -> dict:
        out = {
            "check": self.check,
            "aggregate": self.aggregate(),
            "records": [r.as_dict() for r in self.records],
        }
        if self.notes:
            out["notes"] = self.notes
        return out


@dataclass
class VerificationReport:
    config_digest: str
    checks: list = field(default_factory=list)
    seed: Optional[int] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return dump_json(self.as_dict())

    def to_csv(self) -> str:
        rows = [r for c in self.checks for r in c.records]
        return records_csv(rows)


def dump_json(payload: dict) -> str:
    return json.dumps(_clean(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def records_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        row = r.as_dict() if isinstance(r, Record) else dict(r)
        writer.writerow([_csv_cell(row.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_artifacts(out_dir, stem: str, json_text: str, csv_text: Optional[str]) -> list:
    """Write ``<stem>.json`` (and ``<stem>.csv``) into ``out_dir``; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{stem}.json"]
    paths[0].write_text(json_text, encoding="utf-8")
    if csv_text is not None:
        paths.append(out / f"{stem}.csv")
        paths[1].write_text(csv_text, encoding="utf-8")
    return paths
