"""Point-cloud files (ASCII PLY, plain XYZ) and result tables (CSV, JSON lines)."""
from __future__ import annotations

import csv
import json
import math
import os
from typing import Iterable

import numpy as np

from .model import PointCloud

RESULT_COLUMNS = (
    "experiment", "method", "sweep_value", "trial", "perm_error_rate", "nmse_x",
    "nmse_x_db", "optimality_gap", "reconstruction_mse", "elapsed_ms",
)
FLOAT_COLUMNS = RESULT_COLUMNS[4:]


class PointCloudParseError(ValueError):
    def __init__(self, path, line, message):
        self.path, self.line = path, line
        where = f"{path}:{line}" if line else str(path)
        super().__init__(f"{where}: {message}")


class UnsupportedFormat(PointCloudParseError):
    pass


def _parse_ply(path, lines):
    if lines[0].strip() != "ply":
        raise PointCloudParseError(path, 1, "missing 'ply' magic line")
    fmt = None
    elements = []  # [name, count, [properties]]
    end = None
    for no, raw in enumerate(lines[1:], start=2):
        tok = raw.split()
        if not tok or tok[0] in ("comment", "obj_info"):
            continue
        if tok[0] == "format":
            if len(tok) != 3:
                raise PointCloudParseError(path, no, f"malformed format line {raw.strip()!r}")
            if tok[1] != "ascii":
                raise UnsupportedFormat(path, no, f"PLY format {tok[1]!r} is not supported (ascii only)")
            if tok[2] != "1.0":
                raise PointCloudParseError(path, no, f"unknown PLY version {tok[2]!r}")
            fmt = tok[1]
        elif tok[0] == "element":
            if len(tok) != 3:
                raise PointCloudParseError(path, no, f"malformed element line {raw.strip()!r}")
            try:
                count = int(tok[2])
            except ValueError:
                raise PointCloudParseError(path, no, f"element count {tok[2]!r} is not an integer") from None
            elements.append([tok[1], count, []])
        elif tok[0] == "property":
            if not elements:
                raise PointCloudParseError(path, no, "property before any element")
            if len(tok) >= 2 and tok[1] == "list":
                if len(tok) != 5:
                    raise PointCloudParseError(path, no, "malformed list property")
                elements[-1][2].append(("list", tok[4]))
            elif len(tok) == 3:
                elements[-1][2].append(("scalar", tok[2]))
            else:
                raise PointCloudParseError(path, no, f"malformed property line {raw.strip()!r}")
        elif tok[0] == "end_header":
            end = no
            break
        else:
            raise PointCloudParseError(path, no, f"unexpected header keyword {tok[0]!r}")
    if end is None:
        raise PointCloudParseError(path, len(lines), "header has no end_header")
    if fmt is None:
        raise PointCloudParseError(path, end, "header has no format line")
    # body: skip elements preceding 'vertex'
    no = end
    for name, count, props in elements:
        if name != "vertex":
            no += count
            continue
        names = [p[1] for p in props]
        if any(p[0] == "list" for p in props):
            raise PointCloudParseError(path, end, "list properties on vertex are not supported")
        try:
            cols = [names.index(c) for c in ("x", "y", "z")]
        except ValueError:
            raise PointCloudParseError(path, end, "vertex element lacks x, y and z properties") from None
        pts = np.empty((count, 3))
        for i in range(count):
            no += 1
            if no > len(lines):
                raise PointCloudParseError(path, no, f"file ends after {i} of {count} vertices")
            tok = lines[no - 1].split()
            if len(tok) != len(props):
                raise PointCloudParseError(path, no, f"expected {len(props)} values, found {len(tok)}")
            try:
                pts[i] = [float(tok[c]) for c in cols]
            except ValueError:
                raise PointCloudParseError(path, no, f"non-numeric vertex row {lines[no - 1].strip()!r}") from None
        return pts
    raise PointCloudParseError(path, end, "no vertex element")


def _parse_xyz(path, lines):
    rows = []
    for no, raw in enumerate(lines, start=1):
        tok = raw.split()
        if not tok or tok[0].startswith("#"):
            continue
        if len(tok) != 3:
            raise PointCloudParseError(path, no, f"expected 3 coordinates, found {len(tok)}")
        try:
            rows.append([float(v) for v in tok])
        except ValueError:
            raise PointCloudParseError(path, no, f"non-numeric row {raw.strip()!r}") from None
    if not rows:
        raise PointCloudParseError(path, 0, "no points found")
    return np.array(rows)


def load_point_cloud(path) -> PointCloud:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw.startswith(b"ply"):
        for no, line in enumerate(raw[:4096].splitlines(), start=1):
            if line.startswith(b"end_header"):
                break
            if line.startswith(b"format") and b"binary" in line:
                fmt = line.decode("ascii", errors="replace").strip()
                raise UnsupportedFormat(path, no, f"{fmt!r} is not supported (ascii only)")
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise UnsupportedFormat(path, 0, f"file is not text ({exc.reason})") from None
    lines = text.splitlines()
    if not lines:
        raise PointCloudParseError(path, 0, "empty file")
    pts = _parse_ply(path, lines) if lines[0].strip() == "ply" else _parse_xyz(path, lines)
    if not np.all(np.isfinite(pts)):
        raise PointCloudParseError(path, 0, "non-finite coordinates")
    return PointCloud(pts)


def save_point_cloud(cloud, path, fmt: str = None) -> None:
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    fmt = fmt or ("ply" if str(path).lower().endswith(".ply") else "xyz")
    with open(path, "w") as fh:
        if fmt == "ply":
            fh.write("ply\nformat ascii 1.0\n")
            fh.write(f"element vertex {pts.shape[0]}\n")
            fh.write("property double x\nproperty double y\nproperty double z\nend_header\n")
        elif fmt != "xyz":
            raise ValueError(f"unknown point-cloud format {fmt!r}")
        for x, y, z in pts:
            fh.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")


def format_value(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".9g")
    return str(value)


def write_results(rows: Iterable, path, fmt: str = "csv") -> None:
    """Write result rows (mappings or objects with ``as_record``) as CSV or JSON lines."""
    records = [r.as_record() if hasattr(r, "as_record") else dict(r) for r in rows]
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RESULT_COLUMNS)
            for rec in records:
                w.writerow([format_value(rec[c]) for c in RESULT_COLUMNS])
    elif fmt == "jsonl":
        with open(path, "w") as fh:
            for rec in records:
                out = {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                       for k, v in rec.items()}
                fh.write(json.dumps(out, sort_keys=False) + "\n")
    else:
        raise ValueError(f"unknown result format {fmt!r}")


def read_results(path):
    """Parse a results CSV back into dicts with numeric columns as floats."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise ValueError(f"{os.fspath(path)}: unexpected header {reader.fieldnames}")
        out = []
        for rec in reader:
            rec["trial"] = int(rec["trial"])
            rec["sweep_value"] = float(rec["sweep_value"])
            for c in FLOAT_COLUMNS:
                rec[c] = float(rec[c])
            out.append(rec)
        return out
