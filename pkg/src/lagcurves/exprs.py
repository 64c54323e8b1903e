"""Safe arithmetic expressions in one variable for profile and variation files.

Allowed: numbers, the variable ``s``, ``pi``, ``e``, the operators
``+ - * / **`` and the functions sin, cos, tan, sinh, cosh, tanh, exp, log,
sqrt. The compiled function accepts floats, arrays and :class:`Taylor`
values.
"""

import ast
import operator

import numpy as np

from .errors import ParseError

FUNCTIONS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
}
CONSTANTS = {"pi": np.pi, "e": np.e}
BINARY = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow,
}
UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def _build(node, text):
    if isinstance(node, ast.Expression):
        return _build(node.body, text)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        v = float(node.value)
        return lambda s: v
    if isinstance(node, ast.Name):
        if node.id == "s":
            return lambda s: s
        if node.id in CONSTANTS:
            v = CONSTANTS[node.id]
            return lambda s: v
    if isinstance(node, ast.BinOp) and type(node.op) in BINARY:
        op = BINARY[type(node.op)]
        a, b = _build(node.left, text), _build(node.right, text)
        return lambda s: op(a(s), b(s))
    if isinstance(node, ast.UnaryOp) and type(node.op) in UNARY:
        op = UNARY[type(node.op)]
        a = _build(node.operand, text)
        return lambda s: op(a(s))
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in FUNCTIONS and len(node.args) == 1 and not node.keywords):
        f = FUNCTIONS[node.func.id]
        a = _build(node.args[0], text)
        return lambda s: f(a(s))
    col = getattr(node, "col_offset", 0) + 1
    raise ParseError(f"unsupported element in expression {text!r}", 1, col)


def compile_expression(text):
    """Function of ``s`` for an expression string."""
    if not isinstance(text, str):
        raise ParseError("expression must be a string", 1, 1)
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"bad expression {text!r}: {exc.msg}", exc.lineno or 1, exc.offset or 1) from None
    return _build(tree, text)
