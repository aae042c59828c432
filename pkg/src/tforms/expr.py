"""Scalar expression grammar for symbolic circle fields.

Expressions are written in ``z`` (the circle coordinate in [0, 1)) with
``+ - * /``, integer powers ``^`` (or ``**``), numeric constants, ``pi``, and
the functions

    abs(e)  sqrt(e)  sin(e)  cos(e)  posp(e)  negp(e)
    piecewise(e0, b1, e1, b2, e2, ...)

``piecewise`` takes ``e0`` on z < b1, ``e1`` on b1 <= z < b2 and so on; the
breakpoints must be increasing numeric constants.  ``posp(e)`` is ``e`` where
``e > 0`` and 1 elsewhere, ``negp(e)`` is ``e`` where ``e < 0`` and -1
elsewhere.  Parsing goes through :mod:`ast` with a node whitelist, so error
positions refer to the original text.
"""

import ast

import numpy as np

from .errors import ParseError

_FUNCS = {"abs", "sqrt", "sin", "cos", "posp", "negp", "piecewise"}


def _column_map(text):
    """Map columns of the ``^``-to-``**`` rewritten text back to the input."""
    cols = []
    for i, ch in enumerate(text):
        cols.append(i)
        if ch == "^":
            cols.append(i)
    cols.append(len(text))
    return cols


class Expr:
    """A parsed, vectorized scalar expression in ``z``."""

    __slots__ = ("text", "_fn", "breakpoints")

    def __init__(self, text):
        if not isinstance(text, str):
            raise ParseError("expression must be a string", 1, 0)
        self.text = text.strip()
        src = self.text.replace("^", "**")
        cols = _column_map(self.text)
        try:
            tree = ast.parse(src, mode="eval")
        except SyntaxError as exc:
            col = cols[min(max((exc.offset or 1) - 1, 0), len(cols) - 1)]
            raise ParseError(f"malformed expression: {exc.msg}", exc.lineno or 1, col) from None
        self.breakpoints = []
        self._fn = self._compile(tree.body, cols)
        self.breakpoints = sorted(set(self.breakpoints))

    def __repr__(self):
        return f"Expr({self.text!r})"

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self._fn(z)
        return np.broadcast_to(np.asarray(out, dtype=float), z.shape).copy()

    def _fail(self, node, msg, cols):
        col = cols[min(getattr(node, "col_offset", 0), len(cols) - 1)]
        raise ParseError(msg, getattr(node, "lineno", 1), col)

    def _const(self, node, cols):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self._const(node.operand, cols)
            return -v if isinstance(node.op, ast.USub) else v
        self._fail(node, "expected a numeric constant", cols)

    def _compile(self, node, cols):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                self._fail(node, "only numeric constants are allowed", cols)
            v = float(node.value)
            return lambda z: v
        if isinstance(node, ast.Name):
            if node.id == "z":
                return lambda z: z
            if node.id == "pi":
                return lambda z: np.pi
            self._fail(node, f"unknown name {node.id!r}", cols)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = self._compile(node.operand, cols)
            if isinstance(node.op, ast.USub):
                return lambda z: -inner(z)
            return inner
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                k = self._const(node.right, cols)
                if k != int(k):
                    self._fail(node.right, "only integer powers are allowed (use sqrt)", cols)
                k = int(k)
                base = self._compile(node.left, cols)
                return lambda z: base(z) ** k if k >= 0 else 1.0 / base(z) ** (-k)
            left = self._compile(node.left, cols)
            right = self._compile(node.right, cols)
            if isinstance(node.op, ast.Add):
                return lambda z: left(z) + right(z)
            if isinstance(node.op, ast.Sub):
                return lambda z: left(z) - right(z)
            if isinstance(node.op, ast.Mult):
                return lambda z: left(z) * right(z)
            if isinstance(node.op, ast.Div):
                return lambda z: left(z) / right(z)
            self._fail(node, "unsupported operator", cols)
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
                self._fail(node, "unknown function", cols)
            if node.keywords:
                self._fail(node, "keyword arguments are not allowed", cols)
            name = node.func.id
            if name == "piecewise":
                return self._piecewise(node, cols)
            if len(node.args) != 1:
                self._fail(node, f"{name} takes one argument", cols)
            arg = self._compile(node.args[0], cols)
            if name == "abs":
                return lambda z: np.abs(arg(z))
            if name == "sqrt":
                return lambda z: np.sqrt(arg(z))
            if name == "sin":
                return lambda z: np.sin(arg(z))
            if name == "cos":
                return lambda z: np.cos(arg(z))
            if name == "posp":
                def posp(z):
                    v = arg(z)
                    return np.where(v > 0, v, 1.0)
                return posp
            if name == "negp":
                def negp(z):
                    v = arg(z)
                    return np.where(v < 0, v, -1.0)
                return negp
        self._fail(node, f"unsupported syntax ({type(node).__name__})", cols)

    def _piecewise(self, node, cols):
        args = node.args
        if len(args) < 3 or len(args) % 2 == 0:
            self._fail(node, "piecewise needs e0, b1, e1, ... with an odd argument count", cols)
        pieces = [self._compile(a, cols) for a in args[0::2]]
        bps = [self._const(a, cols) for a in args[1::2]]
        for i in range(1, len(bps)):
            if bps[i] <= bps[i - 1]:
                self._fail(args[2 * i + 1], "piecewise breakpoints must increase", cols)
        self.breakpoints.extend(bps)

        def fn(z):
            z = np.asarray(z, dtype=float)
            idx = np.searchsorted(bps, z, side="right")
            out = np.zeros(np.shape(z))
            for i, piece in enumerate(pieces):
                sel = idx == i
                if np.any(sel):
                    out[sel] = np.broadcast_to(piece(z[sel]) if np.ndim(z) else piece(z), np.shape(out[sel]))
            return out

        return fn
