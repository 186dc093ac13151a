"""Input parsing and result serialization (JSON or CSV, 15 significant digits)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any

from .decomposition import PrimitiveComponent
from .errors import ParseError
from .special import PeriodicSequence
from .zerocount import DensityRow, MomentResult, Theorem3Result, ZeroReport


def _value(entry, index: int) -> complex:
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(entry)
    if (isinstance(entry, (list, tuple)) and len(entry) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)):
        return complex(entry[0], entry[1])
    raise ParseError(f"values[{index}]: expected [re, im], got {entry!r}")


def parse_sequence(doc: Any) -> PeriodicSequence:
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object with fields 'q' and 'values'")
    for key in ("q", "values"):
        if key not in doc:
            raise ParseError(f"missing field '{key}'")
    q = doc["q"]
    if not isinstance(q, int) or isinstance(q, bool):
        raise ParseError(f"field 'q': expected an integer, got {q!r}")
    if q <= 0:
        raise ParseError(f"field 'q': must be positive, got {q}")
    values = doc["values"]
    if not isinstance(values, list):
        raise ParseError("field 'values': expected a list")
    if len(values) != q:
        raise ParseError(f"field 'values': q = {q} but {len(values)} values given")
    return PeriodicSequence([_value(v, i) for i, v in enumerate(values)])


def parse_sequence_text(text: str) -> PeriodicSequence:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_sequence(doc)


def parse_sequence_file(path) -> PeriodicSequence:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_sequence_text(text)


# ---------------------------------------------------------------------------
# records


def _num(x):
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.15g}")
    if isinstance(x, complex):
        return [_num(x.real), _num(x.imag)]
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    return _num(obj)


def _component_record(c: PrimitiveComponent) -> dict:
    return {
        "conductor": c.psi.conductor,
        "psi_label": list(c.psi.inducer.label),
        "poly": {str(k): v for k, v in sorted(c.poly.coefficients.items())},
    }


def to_record(result) -> Any:
    """Plain JSON-ready structure with a fixed field order."""
    if isinstance(result, ZeroReport):
        return {
            "count": result.count_with_multiplicity,
            "distinct": [{"s": z, "multiplicity": m} for z, m in result.distinct],
            "boundaryMinModulus": result.boundary_min_modulus,
            "refinementDepth": result.refinement_depth,
            "unresolved": [{"s": z, "multiplicity": m} for z, m in result.unresolved],
        }
    if isinstance(result, MomentResult):
        return {
            "sigma": result.sigma,
            "T": result.T,
            "integralValue": result.integral_value,
            "mainTerm": result.main_term,
            "relativeGap": result.relative_gap,
        }
    if isinstance(result, Theorem3Result):
        return {"u": result.u, "T": result.T, "sigmaCap": result.sigma_cap,
                "count": result.count, "ratio": result.ratio}
    if isinstance(result, DensityRow):
        return dict(result._asdict())
    if isinstance(result, PeriodicSequence):
        return result.to_json()
    if isinstance(result, PrimitiveComponent):
        return _component_record(result)
    if hasattr(result, "to_json"):
        return result.to_json()
    if isinstance(result, list):
        if result and all(isinstance(c, PrimitiveComponent) for c in result):
            return {"components": [_component_record(c) for c in result]}
        return [to_record(r) for r in result]
    if is_dataclass(result):
        return asdict(result)
    return result


def _rows(record) -> list[dict]:
    if isinstance(record, list):
        return [r if isinstance(r, dict) else {"value": r} for r in record]
    if isinstance(record, dict):
        if "distinct" in record and "count" in record:
            return [{"re": z["s"][0], "im": z["s"][1], "multiplicity": z["multiplicity"]}
                    for z in record["distinct"]]
        if "components" in record:
            return [{"conductor": c["conductor"], "psi_label": " ".join(map(str, c["psi_label"])),
                     "k": k, "re": v[0], "im": v[1]}
                    for c in record["components"] for k, v in c["poly"].items()]
        if "certificates" in record:
            return [{k: (" ".join(map(str, v)) if isinstance(v, list) else v) for k, v in c.items()}
                    for c in record["certificates"]]
        return [{k: v for k, v in record.items() if not isinstance(v, (list, dict))}]
    return [{"value": record}]


def emit(result, fmt: str = "json") -> bytes:
    record = _clean(to_record(result))
    if fmt == "json":
        return (json.dumps(record, indent=2) + "\n").encode()
    if fmt == "csv":
        rows = _rows(record)
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        return buf.getvalue().encode()
    raise ValueError(f"unknown format {fmt!r}")
