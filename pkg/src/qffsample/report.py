"""CSV and JSON emission with stable field order and 12 significant digits."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import fields

from .bench import ScalingTable
from .errors import ValidationError
from .sampler import TrialReport

SCHEMA = "QSR1"
FORMATS = ("csv", "json")


def fmt_float(x: float) -> float | str:
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return float(f"{x:.12g}")


def normalize(obj):
    """Round floats to 12 significant digits and turn tuples and numpy scalars into JSON types."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        return fmt_float(obj)
    if hasattr(obj, "item") and not hasattr(obj, "__len__"):
        return normalize(obj.item())
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if hasattr(obj, "tolist"):
        return normalize(obj.tolist())
    raise ValidationError(f"cannot serialise {type(obj).__name__}")


TRIAL_FIELDS = tuple(f.name for f in fields(TrialReport))


def _trial_doc(rep: TrialReport) -> dict:
    doc = {"schema": SCHEMA, "kind": "trial"}
    for name in TRIAL_FIELDS:
        doc[name] = normalize(getattr(rep, name))
    return doc


def _table_doc(tab: ScalingTable) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "table",
        "family": tab.family,
        "columns": tab.columns,
        "rows": [normalize({c: row.get(c) for c in tab.columns}) for row in tab.rows],
        "slopes": normalize({q: tab.slopes.get(q) for q in tab.quantities}),
    }


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (list, dict)):
        return json.dumps(normalize(v), separators=(",", ":"))
    return str(v)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def emit_report(obj, fmt: str = "json") -> str:
    """Serialise a :class:`TrialReport`, a :class:`ScalingTable`, a list of reports or a list of row dicts."""
    if fmt not in FORMATS:
        raise ValidationError(f"unknown format {fmt!r}")
    if isinstance(obj, TrialReport):
        doc = _trial_doc(obj)
        if fmt == "json":
            return json.dumps(doc, indent=2) + "\n"
        cols = list(doc)
        return _csv(cols, [doc])
    if isinstance(obj, ScalingTable):
        if fmt == "json":
            return json.dumps(_table_doc(obj), indent=2) + "\n"
        rows = list(obj.rows)
        if rows:
            rows.append({"family": obj.family, "n": "slope", **{q: obj.slopes.get(q) for q in obj.quantities}})
        return _csv(obj.columns, rows)
    if isinstance(obj, list):
        if all(isinstance(r, TrialReport) for r in obj):
            docs = [_trial_doc(r) for r in obj]
            if fmt == "json":
                return json.dumps({"schema": SCHEMA, "kind": "trials", "trials": docs}, indent=2) + "\n"
            cols = ["schema", "kind", *TRIAL_FIELDS]
            return _csv(cols, docs)
        if all(isinstance(r, dict) for r in obj):
            cols = list(obj[0]) if obj else []
            if fmt == "json":
                return json.dumps({"schema": SCHEMA, "kind": "rows", "rows": normalize(obj)}, indent=2) + "\n"
            return _csv(cols, obj)
    if isinstance(obj, dict):
        if fmt == "json":
            return json.dumps({"schema": SCHEMA, "kind": "record", **normalize(obj)}, indent=2) + "\n"
        return _csv(list(obj), [obj])
    raise ValidationError(f"cannot emit {type(obj).__name__}")


def parse_trial(text: str) -> TrialReport:
    """Inverse of ``emit_report(report, "json")``."""
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA or doc.get("kind") != "trial":
        raise ValidationError("not a QSR1 trial report")
    return TrialReport(**{name: doc[name] for name in TRIAL_FIELDS})
