"""Text formats: CSV grids, JSON forms and profiles, and report serialization.

Every float is written with 17 significant digits so that a parse/write round
trip reproduces the double exactly. Infinite values are written as ``inf`` and
``-inf`` (in JSON reports as the strings ``"inf"`` and ``"-inf"``).
"""
from __future__ import annotations

import dataclasses
import enum
import json
import math
import re
from pathlib import Path

import numpy as np

from .exceptions import InputError, ParseError, SchemaError
from .grid import GridFn, GridSpec
from .homogeneous import MaxMinForm, MinMaxForm, RayProfile, SublinearForm, SuperlinearForm

FORM_KINDS = {
    "maxmin": MaxMinForm,
    "minmax": MinMaxForm,
    "sublinear": SublinearForm,
    "superlinear": SuperlinearForm,
}

_HEADER = re.compile(r"#\s*(.*)")


def format_float(v: float) -> str:
    v = float(v)
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return format(v, ".17g")


def _parse_value(token: str, line: int) -> float:
    try:
        v = float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}", line=line) from None
    if math.isnan(v):
        raise ParseError("NaN is not an extended real", line=line)
    return v


def _parse_header(text: str) -> dict:
    m = _HEADER.fullmatch(text.strip())
    if not m:
        raise ParseError("expected a header '# dims=.. origin=.. spacing=.. counts=..'", line=1)
    fields = {}
    for item in m.group(1).split():
        key, sep, val = item.partition("=")
        if not sep:
            raise ParseError(f"malformed header field {item!r}", line=1)
        fields[key.strip().lower()] = val.strip()
    missing = {"dims", "origin", "spacing", "counts"} - set(fields)
    if missing:
        raise ParseError(f"header lacks {', '.join(sorted(missing))}", line=1)
    try:
        dims = int(fields["dims"])
        origin = [float(v) for v in fields["origin"].split(",")]
        spacing = [float(v) for v in fields["spacing"].split(",")]
        counts = [int(v) for v in fields["counts"].split(",")]
    except ValueError as exc:
        raise ParseError(f"malformed header value ({exc})", line=1) from None
    if dims not in (1, 2) or not (len(origin) == len(spacing) == len(counts) == dims):
        raise ParseError(f"header declares dims={dims} but gives {len(origin)}/{len(spacing)}/{len(counts)} axis entries",
                         line=1)
    return {"origin": origin, "spacing": spacing, "counts": counts}


def parse_grid_csv(text: str) -> GridFn:
    """Parse a grid: one header line, then one value per line in row-major order.

    Blank lines are skipped. Errors carry the 1-based line number.
    """
    lines = str(text).splitlines()
    if not lines:
        raise ParseError("empty input", line=1)
    head = _parse_header(lines[0])
    try:
        spec = GridSpec(head["origin"], head["spacing"], head["counts"])
    except InputError as exc:
        raise ParseError(str(exc), line=1) from None
    values = []
    last = 1
    for number, raw in enumerate(lines[1:], start=2):
        token = raw.split("#", 1)[0].strip().rstrip(",")
        if not token:
            continue
        last = number
        if len(values) == spec.size:
            raise ParseError(f"more than the {spec.size} values declared by counts", line=number)
        values.append(_parse_value(token, number))
    if len(values) != spec.size:
        raise ParseError(f"expected {spec.size} values, got {len(values)}", line=last + 1)
    return GridFn(spec, values)


def write_grid_csv(fn: GridFn) -> str:
    spec = fn.spec
    join = lambda xs: ",".join(format_float(x) for x in xs)  # noqa: E731
    head = f"# dims={spec.dims} origin={join(spec.origin)} spacing={join(spec.spacing)} counts={','.join(map(str, spec.counts))}"
    return "\n".join([head] + [format_float(v) for v in fn.values]) + "\n"


def read_grid(path) -> GridFn:
    return parse_grid_csv(Path(path).read_text())


def save_grid(fn: GridFn, path) -> None:
    Path(path).write_text(write_grid_csv(fn))


# --- forms and profiles ------------------------------------------------------


def _load(text):
    if isinstance(text, dict):
        return text
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(obj, dict):
        raise SchemaError("expected a JSON object")
    return obj


def parse_form_json(text):
    """Build a p.h. form from its JSON object.

    ``{"kind": "maxmin"|"minmax"|"sublinear"|"superlinear", "dim": n, "rows": [...]}``;
    sublinear and superlinear forms take exactly one row of generators.
    """
    obj = _load(text)
    kind = obj.get("kind")
    if kind not in FORM_KINDS:
        raise SchemaError(f"unknown form kind {kind!r}; expected one of {sorted(FORM_KINDS)}")
    rows = obj.get("rows")
    if not isinstance(rows, list) or not rows or any(not isinstance(r, list) or not r for r in rows):
        raise SchemaError("rows must be a nonempty list of nonempty lists of functionals")
    dim = obj.get("dim")
    if dim is not None:
        bad = [a for row in rows for a in row if not isinstance(a, list) or len(a) != dim]
        if bad:
            raise SchemaError(f"functional {bad[0]!r} does not have the declared dimension {dim}")
    try:
        if kind in ("sublinear", "superlinear"):
            if len(rows) != 1:
                raise SchemaError(f"a {kind} form takes a single row, got {len(rows)}")
            return FORM_KINDS[kind](tuple(tuple(a) for a in rows[0]))
        return FORM_KINDS[kind](tuple(tuple(tuple(a) for a in row) for row in rows))
    except SchemaError:
        raise
    except (InputError, TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from None


def form_to_json(form) -> str:
    return dumps(form.to_dict())


def parse_profile_json(text) -> RayProfile:
    """``{"M": m, "values": [...]}``; ``dim`` defaults to 1 when ``M == 2``, else 2."""
    obj = _load(text)
    if "M" not in obj or "values" not in obj:
        raise SchemaError("profile JSON needs 'M' and 'values'")
    M = obj["M"]
    dim = obj.get("dim", 1 if M == 2 else 2)
    try:
        # reports write infinities as strings; float() accepts both spellings
        values = [float(v) for v in obj["values"]]
        return RayProfile(int(M), tuple(values), int(dim))
    except (InputError, TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from None


def profile_to_json(profile: RayProfile) -> str:
    return dumps(profile.to_dict())


# --- reports -----------------------------------------------------------------


def to_plain(obj):
    """Convert results to JSON-ready builtins (dicts, lists, str, int, float, bool)."""
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    if isinstance(obj, enum.Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_plain({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)})
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ", "
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj) if math.isfinite(obj) else json.dumps(format_float(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(k)}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{" + pad + sep.join(items) + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON: sorted keys, 17-digit floats, infinities as strings."""
    return _encode(to_plain(obj), indent, 0)
