"""Problem files, field descriptions and deterministic JSON output.

A problem file is a JSON document::

    {
      "space": {"kind": "symbolic-circle"}            # or
               {"kind": "circle-grid", "grid": 4096},
      "fields": {"a": <field description>, ...},
      "task": "classify",
      "form": {"alpha": "a", "f": "f"},                # alpha may be a list
      "params": {"eps": 0.1, "lambda_min": 1e-6, "lambda_max": 0.1,
                 "points": 200, "seed": 42}
    }

Field descriptions are either symbolic scalars::

    {"kind": "scalar_symbolic", "expr": "(z-0.5)^2",
     "zeros": [{"at": 0.5, "order": 2, "left": "+", "right": "+", "coeff": 1.0}]}

(one-sided zeros may be listed under ``"germs"`` as
``{"at", "side", "order", "sign", "coeff"}``; orders may be fractions)

or sampled matrix fields stored as little-endian float64, real and
imaginary parts interleaved, fiber-major (each fiber row-major)::

    {"kind": "sampled", "dim": 2, "grid": 4096, "data": "alpha.bin"}

Relative data paths are resolved against the problem file's directory.
"""

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ParseError, TformsError, ValidationError
from .fields import DEFAULT_GRID, Field, Germ, GermField, germs_from_zero
from .linalg import MAX_DIM

TASKS = ("classify", "congruence", "split", "metabolizer", "density", "check")
SPACE_KINDS = ("symbolic-circle", "circle-grid")
PARAM_RANGES = {
    "eps": (0.0, 1.0),
    "lambda_min": (0.0, 1.0),
    "lambda_max": (0.0, 1.0),
    "points": (2, 100000),
    "seed": (0, 2**63 - 1),
    "grid": (16, 2**22),
}


@dataclass
class Problem:
    task: str
    grid: int
    fields: dict
    form: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    path: str = ""


# ---------------------------------------------------------------------------
# deterministic JSON


def to_plain(obj):
    """Recursively convert numpy scalars, fractions and tuples to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_plain(obj.real), to_plain(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    """Sorted-key JSON; floats use the shortest round-trip repr (at most 17 digits)."""
    return json.dumps(to_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# sampled binary format


def read_sampled(path, dim, grid):
    raw = np.fromfile(path, dtype="<f8")
    want = grid * dim * dim * 2
    if raw.size != want:
        raise ValidationError(f"{path}: expected {want} float64 values, found {raw.size}", "data")
    z = raw[0::2] + 1j * raw[1::2]
    return Field(grid, z.reshape(grid, dim, dim))


def write_sampled(path, F):
    """Write a :class:`Field` in the sampled binary layout; returns its description."""
    d = F.data
    out = np.empty(d.size * 2, dtype="<f8")
    out[0::2] = d.real.ravel()
    out[1::2] = d.imag.ravel()
    out.tofile(path)
    return {"kind": "sampled", "dim": int(F.dim), "grid": int(F.n), "data": os.path.basename(path)}


# ---------------------------------------------------------------------------
# parsing


def _locate(text, needle, offset):
    """1-based (line, column) of ``offset`` characters into the first occurrence of ``needle``."""
    pos = text.find(needle)
    if pos < 0:
        return 1, offset + 1
    pos += 1 + offset  # skip the opening quote
    line = text.count("\n", 0, pos) + 1
    col = pos - text.rfind("\n", 0, pos)
    return line, col


def _sign(v, where):
    if v in ("+", 1, "1", "+1"):
        return 1
    if v in ("-", -1, "-1"):
        return -1
    raise ValidationError(f"sign must be '+' or '-', got {v!r}", where)


def _order(v, where):
    try:
        p = Fraction(str(v)).limit_denominator(64)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"order must be a positive number, got {v!r}", where) from None
    if p <= 0:
        raise ValidationError(f"order must be positive, got {v!r}", where)
    return p


def _number(d, key, where, default=None, positive=False):
    if key not in d:
        if default is None:
            raise ValidationError(f"missing '{key}'", f"{where}.{key}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ValidationError(f"'{key}' must be a finite number", f"{where}.{key}")
    if positive and v <= 0:
        raise ValidationError(f"'{key}' must be positive", f"{where}.{key}")
    return v


def parse_field(desc, name, text="", base="."):
    """Build a :class:`GermField` or :class:`Field` from a field description."""
    where = f"fields.{name}"
    if not isinstance(desc, dict):
        raise ValidationError("field description must be an object", where)
    kind = desc.get("kind")
    if kind == "scalar_symbolic":
        expr = desc.get("expr")
        if not isinstance(expr, str):
            raise ValidationError("'expr' must be a string", f"{where}.expr")
        zeros = desc.get("zeros", [])
        if not isinstance(zeros, list):
            raise ValidationError("'zeros' must be a list", f"{where}.zeros")
        germs = []
        for i, zd in enumerate(zeros):
            w = f"{where}.zeros[{i}]"
            if not isinstance(zd, dict):
                raise ValidationError("zero must be an object", w)
            at = _number(zd, "at", w)
            if not 0 <= at < 1:
                raise ValidationError("'at' must lie in [0, 1)", f"{w}.at")
            coeff = _number(zd, "coeff", w, default=1.0)
            if coeff == 0:
                raise ValidationError("'coeff' must be nonzero", f"{w}.coeff")
            germs += germs_from_zero(
                float(at),
                _order(zd.get("order"), f"{w}.order"),
                _sign(zd.get("left"), f"{w}.left"),
                _sign(zd.get("right"), f"{w}.right"),
                float(coeff),
                coeff_left=zd.get("coeff_left"),
                coeff_right=zd.get("coeff_right"),
            )
        one_sided = desc.get("germs", [])
        if not isinstance(one_sided, list):
            raise ValidationError("'germs' must be a list", f"{where}.germs")
        for i, gd in enumerate(one_sided):
            w = f"{where}.germs[{i}]"
            if not isinstance(gd, dict):
                raise ValidationError("germ must be an object", w)
            try:
                germs.append(Germ(float(_number(gd, "at", w)), gd.get("side"), _order(gd.get("order"), f"{w}.order"),
                                  _sign(gd.get("sign"), f"{w}.sign"), float(_number(gd, "coeff", w, default=1.0))))
            except ValidationError as e:
                raise ValidationError(str(e), f"{w}.{e.field}" if e.field and not e.field.startswith(w) else e.field) from None
        try:
            return GermField(expr, germs)
        except ParseError as e:
            line, col = _locate(text, json.dumps(expr), e.column)
            raise ParseError(f"{where}.expr: {e.message}", line, col) from None
        except ValidationError as e:
            raise ValidationError(str(e), e.field if e.field and e.field.startswith("fields.") else where) from None
    if kind == "sampled":
        dim = _number(desc, "dim", where, positive=True)
        grid = _number(desc, "grid", where, positive=True)
        if int(dim) != dim or not 1 <= dim <= MAX_DIM:
            raise ValidationError(f"'dim' must be an integer in 1..{MAX_DIM}", f"{where}.dim")
        if int(grid) != grid or grid < 16:
            raise ValidationError("'grid' must be an integer >= 16", f"{where}.grid")
        path = desc.get("data")
        if not isinstance(path, str):
            raise ValidationError("'data' must be a file path", f"{where}.data")
        full = path if os.path.isabs(path) else os.path.join(base, path)
        if not os.path.exists(full):
            raise ValidationError(f"data file not found: {path}", f"{where}.data")
        try:
            return read_sampled(full, int(dim), int(grid))
        except ValidationError as e:
            raise ValidationError(str(e), f"{where}.data") from None
    raise ValidationError(f"unknown field kind {kind!r}", f"{where}.kind")


def parse_problem(text, path="", grid=None, require_task=True):
    """Parse and validate a problem file's text."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", e.lineno, e.colno) from None
    if not isinstance(doc, dict):
        raise ValidationError("problem must be a JSON object", "<root>")
    task = doc.get("task")
    if task is None and not require_task:
        task = "classify"
    if task not in TASKS:
        raise ValidationError(f"task must be one of {', '.join(TASKS)}", "task")
    space = doc.get("space", {"kind": "circle-grid", "grid": DEFAULT_GRID})
    if not isinstance(space, dict) or space.get("kind") not in SPACE_KINDS:
        raise ValidationError(f"space.kind must be one of {', '.join(SPACE_KINDS)}", "space.kind")
    n = int(_number(space, "grid", "space", default=DEFAULT_GRID, positive=True))
    if grid is not None:
        n = int(grid)
    lo, hi = PARAM_RANGES["grid"]
    if not lo <= n <= hi:
        raise ValidationError(f"grid must lie in [{lo}, {hi}]", "space.grid")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ValidationError("'params' must be an object", "params")
    for key, val in params.items():
        if key not in PARAM_RANGES:
            continue
        lo, hi = PARAM_RANGES[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not lo <= val <= hi:
            raise ValidationError(f"{key} must lie in [{lo}, {hi}]", f"params.{key}")
    if params.get("suite", "all") not in ("linalg", "forms", "classify", "all"):
        raise ValidationError("suite must be one of linalg, forms, classify, all", "params.suite")
    if "lambda_min" in params and "lambda_max" in params and params["lambda_min"] >= params["lambda_max"]:
        raise ValidationError("lambda_min must be below lambda_max", "params.lambda_min")
    base = os.path.dirname(os.path.abspath(path)) if path else "."
    raw_fields = doc.get("fields", {})
    if not isinstance(raw_fields, dict):
        raise ValidationError("'fields' must be an object", "fields")
    fields = {name: parse_field(desc, name, text, base) for name, desc in raw_fields.items()}
    for name, F in fields.items():
        if isinstance(F, Field) and F.n != n:
            raise ValidationError(f"sampled field has grid {F.n} but the space uses {n}", f"fields.{name}.grid")
    form = doc.get("form", {})
    if task not in ("check",):
        form = _resolve_form(form, fields)
    return Problem(task, n, fields, form, params, path)


def _resolve_form(form, fields):
    if not isinstance(form, dict) or "alpha" not in form:
        if len(fields) == 1:
            form = {"alpha": next(iter(fields))}
        else:
            raise ValidationError("'form.alpha' must name a field", "form.alpha")
    out = {}
    for key in ("alpha", "f"):
        ref = form.get(key)
        if ref is None:
            continue
        names = ref if isinstance(ref, list) else [ref]
        for nm in names:
            if nm not in fields:
                raise ValidationError(f"unknown field {nm!r}", f"form.{key}")
        out[key] = [fields[nm] for nm in names] if isinstance(ref, list) else fields[ref]
    return out


def load_problem(path, grid=None, require_task=True):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ValidationError(f"cannot read problem file: {e.strerror}", "path") from None
    return parse_problem(text, path, grid, require_task)


def build_form(problem):
    """The :class:`~tforms.forms.TorsionForm` described by ``problem.form``."""
    from .forms import TorsionForm, discriminant
    from .torsion import TorsionObject

    alpha = problem.form["alpha"]
    if isinstance(alpha, list):
        if not all(isinstance(a, GermField) for a in alpha):
            raise ValidationError("a list alpha must consist of symbolic scalars", "form.alpha")
        alpha = tuple(alpha)
    f = problem.form.get("f")
    try:
        if f is None:
            return discriminant(alpha)
        if isinstance(f, GermField) and not isinstance(alpha, GermField):
            raise ValidationError("a symbolic f needs a symbolic scalar alpha", "form.f")
        if isinstance(f, Field) and not isinstance(alpha, Field):
            alpha = TorsionObject(alpha).sampled(f.n)
        return TorsionForm(TorsionObject(alpha), f)
    except ValidationError:
        raise
    except TformsError as e:
        raise ValidationError(f"{type(e).__name__}: {e}", "form") from None
