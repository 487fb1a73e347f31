"""CSV layouts emitted by the command line, with a validator and a deterministic writer.

Every CSV the CLI writes is declared here; ``validate_csv`` checks a file
against its layout (detected from the header when no name is given).
"""

import csv
import io
import math
from pathlib import Path

# column -> type; a trailing "?" allows an empty cell
SCHEMAS = {
    "metrics": {
        "scenario": "str", "planner": "str", "k": "int?", "status": "str",
        "Fuel": "float?", "Safety": "float?", "Length": "float?", "F/D": "float?", "States": "int?",
    },
    "padding": {
        "channel": "int", "edge_id": "int", "x0": "float", "y0": "float", "x1": "float", "y1": "float",
        "offset": "float", "sigma": "float", "n_samples": "int", "scheme": "str",
    },
    "channels": {
        "channel": "int", "signature": "str", "n_triangles": "int", "feasible": "bool",
        "min_usable_length": "float", "clamped_edges": "int",
    },
    "contingency": {
        "kind": "str", "station": "int?", "s": "float?", "turn": "str", "clearance": "float",
        "collided": "bool?", "trials": "int?", "collisions": "int?",
    },
    "mesh_vertices": {"vertex": "int", "x": "float", "y": "float"},
    "mesh_triangles": {"triangle": "int", "v0": "int", "v1": "int", "v2": "int", "label": "str"},
    "mesh_edges": {"edge_id": "int", "v0": "int", "v1": "int", "kind": "str"},
}


class SchemaError(ValueError):
    pass


def format_value(v):
    """Stable text for a cell: ints verbatim, floats with 10 significant digits."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        out = format(v, ".10g")
        return "0" if out == "-0" else out
    if hasattr(v, "item"):  # numpy scalar
        return format_value(v.item())
    return str(v)


def render_csv(schema, rows):
    cols = list(SCHEMAS[schema])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        extra = set(r) - set(cols)
        if extra:
            raise SchemaError(f"{schema}: unexpected columns {sorted(extra)}")
        w.writerow([format_value(r.get(c)) for c in cols])
    return buf.getvalue()


def write_csv(path, schema, rows):
    text = render_csv(schema, rows)
    Path(path).write_text(text)
    validate_csv(path, schema)
    return Path(path)


def _check_cell(value, kind):
    optional = kind.endswith("?")
    kind = kind.rstrip("?")
    if value == "":
        return optional
    try:
        if kind == "int":
            int(value)
        elif kind == "float":
            float(value)
        elif kind == "bool":
            return value in ("0", "1")
    except ValueError:
        return False
    return True


def detect_schema(header):
    for name, cols in SCHEMAS.items():
        if list(cols) == list(header):
            return name
    return None


def validate_csv(path, schema=None):
    """Check a CSV against a declared layout; returns ``(schema_name, rows)``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        rows = list(reader)
    name = schema or detect_schema(header)
    if name is None:
        raise SchemaError(f"{path}: header {header} matches no known schema")
    cols = SCHEMAS[name]
    if list(cols) != header:
        raise SchemaError(f"{path}: header {header} != {list(cols)} for schema {name!r}")
    kinds = list(cols.values())
    for n, row in enumerate(rows, start=2):
        if len(row) != len(kinds):
            raise SchemaError(f"{path}:{n}: expected {len(kinds)} cells, got {len(row)}")
        for col, val, kind in zip(header, row, kinds):
            if not _check_cell(val, kind):
                raise SchemaError(f"{path}:{n}: column {col!r} value {val!r} is not {kind}")
    return name, [dict(zip(header, r)) for r in rows]
