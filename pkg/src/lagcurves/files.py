"""Reading and writing curve, profile, variation and report files.

Numbers are written with 17 significant digits so doubles round-trip
exactly. Malformed input raises :class:`ParseError` with a line and column.
"""

import csv
import io
import json
import re
from pathlib import Path

import numpy as np

from .classify import ClassCase, generate
from .curves import Sampled
from .errors import InvalidParameters, IoError, ParseError
from .exprs import compile_expression
from .geodesics import Bump, BumpSum, make_admissible
from .reconstruct import CurvatureProfile, Tabulated


def fmt(x):
    return "%.17g" % x


def _read_text(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from None


def _position(text, key):
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if not m:
        return 1, 1
    line = text.count("\n", 0, m.start()) + 1
    col = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1
    return line, col


def parse_json(text, source="<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: {exc.msg}", exc.lineno, exc.colno) from None


def _require(obj, key, text, kind=None):
    if not isinstance(obj, dict):
        raise ParseError("top-level value must be an object", 1, 1)
    if key not in obj:
        raise ParseError(f"missing key {key!r}", 1, 1)
    v = obj[key]
    if kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"{key!r} must be a number", *_position(text, key))
        return float(v)
    return v


def _check_keys(obj, allowed, text):
    for k in obj:
        if k not in allowed:
            raise ParseError(f"unknown key {k!r}", *_position(text, k))


SAMPLE_KEYS = {"kind", "t0", "h", "points", "accuracy", "stride"}
CLASSIFIED_KEYS = {"kind", "case", "mu", "nu", "window"}


def curve_from_dict(obj, text=""):
    kind = _require(obj, "kind", text)
    if kind == "samples":
        _check_keys(obj, SAMPLE_KEYS, text)
        t0 = _require(obj, "t0", text, float)
        h = _require(obj, "h", text, float)
        pts = _require(obj, "points", text)
        if not isinstance(pts, list) or not all(
                isinstance(p, list) and len(p) == 4
                and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in p) for p in pts):
            raise ParseError("'points' must be a list of [x1, x2, x3, x4] rows", *_position(text, "points"))
        try:
            return Sampled(t0, h, pts, int(obj.get("accuracy", 4)), int(obj.get("stride", 1)))
        except ValueError as exc:
            raise ParseError(str(exc), *_position(text, "points")) from None
    if kind == "classified":
        _check_keys(obj, CLASSIFIED_KEYS, text)
        tag = _require(obj, "case", text)
        mu = obj.get("mu")
        nu = obj.get("nu")
        window = tuple(obj.get("window", (-2.0, 2.0)))
        try:
            return generate(ClassCase(tag, mu, nu), window=window)
        except InvalidParameters as exc:
            raise ParseError(str(exc), *_position(text, "case")) from None
    raise ParseError(f"unknown curve kind {kind!r}", *_position(text, "kind"))


def load_curve(path):
    """Curve from a samples file or a classified-case file."""
    text = _read_text(path)
    return curve_from_dict(parse_json(text, str(path)), text)


def sampled_to_dict(curve):
    return {"kind": "samples", "t0": curve.t0, "h": curve.h,
            "points": curve.points.tolist(), "accuracy": curve.accuracy, "stride": curve.stride}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj):
    """Deterministic JSON; floats use the shortest round-trip repr."""
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def save_json(path, obj):
    _write(path, dumps(obj))


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


def save_csv(path, header, rows):
    _write(path, csv_text(header, rows))


def load_csv(path):
    """Header and float rows of a CSV file."""
    text = _read_text(path)
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ParseError(f"{path}: empty file", 1, 1)
    out = []
    for i, r in enumerate(rows[1:], start=2):
        try:
            out.append([float(x) for x in r])
        except ValueError:
            raise ParseError(f"{path}: non-numeric field", i, 1) from None
    return rows[0], np.array(out)


def save_obj(path, vertices, faces):
    lines = ["v %s %s %s" % tuple(fmt(x) for x in v) for v in vertices]
    lines += ["f " + " ".join(str(int(i)) for i in f) for f in faces]
    _write(path, "\n".join(lines) + "\n")


def _write(path, text):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from None


# profiles and variations


def _scalar_function(value, text, key):
    if isinstance(value, bool):
        raise ParseError(f"{key!r}: booleans are not functions", *_position(text, key))
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return compile_expression(value)
        except ParseError as exc:
            line, col = _position(text, key)
            raise ParseError(f"{key!r}: {exc}", line, col) from None
    if isinstance(value, dict) and set(value) == {"s", "values"}:
        s, v = np.asarray(value["s"], float), np.asarray(value["values"], float)
        if s.ndim != 1 or s.shape != v.shape or len(s) < 4 or np.any(np.diff(s) <= 0):
            raise ParseError(f"{key!r}: table needs >= 4 increasing nodes", *_position(text, key))
        return Tabulated(s, v)
    raise ParseError(f"{key!r}: expected a number, an expression or a table", *_position(text, key))


PROFILE_KEYS = {"k1", "k2", "k3", "k4"}


def load_profile(path):
    """Curvature profile: each of k2, k3, k4 (and optional k1) is a number,
    an expression in ``s`` or ``{"s": [...], "values": [...]}``."""
    text = _read_text(path)
    obj = parse_json(text, str(path))
    if not isinstance(obj, dict):
        raise ParseError("top-level value must be an object", 1, 1)
    _check_keys(obj, PROFILE_KEYS, text)
    f = {k: _scalar_function(_require(obj, k, text), text, k) for k in ("k2", "k3", "k4")}
    k1 = _scalar_function(obj["k1"], text, "k1") if obj.get("k1") is not None else None
    return CurvatureProfile(f["k2"], f["k3"], f["k4"], k1)


BUMP_KEYS = {"center", "radius", "n", "amplitude"}


def _component(value, text, key):
    if value is None or (isinstance(value, (int, float)) and not isinstance(value, bool) and value == 0):
        return None
    if isinstance(value, dict) and "bump" in value:
        value = [value]
    if isinstance(value, list):
        bumps = []
        for item in value:
            b = item.get("bump") if isinstance(item, dict) else None
            if not isinstance(b, dict) or not set(b) <= BUMP_KEYS or not {"center", "radius"} <= set(b):
                raise ParseError(f"{key!r}: expected {{'bump': {{center, radius, n, amplitude}}}}",
                                 *_position(text, key))
            try:
                bumps.append(Bump(b["center"], b["radius"], b.get("n", 8), b.get("amplitude", 1.0)))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{key!r}: {exc}", *_position(text, key)) from None
        return bumps[0] if len(bumps) == 1 else BumpSum(bumps)
    if isinstance(value, str):
        return _scalar_function(value, text, key)
    raise ParseError(f"{key!r}: unsupported component", *_position(text, key))


VARIATION_KEYS = {"support", "v1", "v3", "v4"}


def load_variation(path):
    """Admissible variation; v2 is derived from v3 and v4."""
    text = _read_text(path)
    obj = parse_json(text, str(path))
    if not isinstance(obj, dict):
        raise ParseError("top-level value must be an object", 1, 1)
    _check_keys(obj, VARIATION_KEYS, text)
    comps = {k: _component(obj.get(k), text, k) for k in ("v1", "v3", "v4")}
    support = obj.get("support")
    if support is not None and not (isinstance(support, list) and len(support) == 2):
        raise ParseError("'support' must be [a, b]", *_position(text, "support"))
    for k, f in comps.items():
        if callable(f) and not hasattr(f, "support") and support is None:
            raise ParseError(f"{k!r}: expressions need an explicit support", *_position(text, k))
    return make_admissible(comps["v3"], comps["v4"], comps["v1"], support)
