"""
Small arithmetic sublanguage for user-supplied vector fields.

A vector expression is a comma-separated list of scalar expressions, e.g.
``"1, x1"`` or ``"exp(2*x1)*cos(2*x2), -exp(2*x1)*sin(2*x2)"``.  Allowed are
numbers, ``pi``, ``e``, the variables in scope, the binary operators
``+ - * / **`` and the functions ``cos sin exp sqrt``.  Boundary expressions may
additionally use ``nu1 nu2 tau1 tau2`` (edge normal and tangent).

Parsing goes through Python's ``ast`` module with a whitelist and builds a
sympy expression, which gives exact partial derivatives for free.
"""
import ast

import numpy as np
import sympy as sp

from .errors import InvalidSpec

SPACE_VARIABLES = ("x1", "x2", "x3")
BOUNDARY_VARIABLES = ("nu1", "nu2", "tau1", "tau2")

_FUNCTIONS = {"cos": sp.cos, "sin": sp.sin, "exp": sp.exp, "sqrt": sp.sqrt}
_CONSTANTS = {"pi": sp.pi, "e": sp.E}
_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a ** b,
}


def _to_sympy(node, symbols):
    if isinstance(node, ast.Expression):
        return _to_sympy(node.body, symbols)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return sp.nsimplify(node.value) if isinstance(node.value, int) else sp.Float(node.value)
    if isinstance(node, ast.Name):
        if node.id in symbols:
            return symbols[node.id]
        if node.id in _CONSTANTS:
            return _CONSTANTS[node.id]
        raise InvalidSpec(f"unknown name {node.id!r} in expression")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        arg = _to_sympy(node.operand, symbols)
        return -arg if isinstance(node.op, ast.USub) else arg
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_to_sympy(node.left, symbols), _to_sympy(node.right, symbols))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
            and node.func.id in _FUNCTIONS and len(node.args) == 1 and not node.keywords:
        return _FUNCTIONS[node.func.id](_to_sympy(node.args[0], symbols))
    raise InvalidSpec(f"unsupported syntax in expression: {ast.dump(node)[:60]}")


def parse_components(text, variables=SPACE_VARIABLES[:2]):
    """Parse ``text`` into a list of sympy expressions in the given variables."""
    symbols = {name: sp.Symbol(name, real=True) for name in variables}
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise InvalidSpec(f"cannot parse expression {text!r}: {exc.msg}") from None
    body = tree.body
    items = body.elts if isinstance(body, ast.Tuple) else [body]
    return [_to_sympy(item, symbols) for item in items], [symbols[v] for v in variables]


def _vectorize(fn, shape):
    def call(*args):
        out = fn(*args)
        return np.broadcast_to(np.asarray(out, dtype=float), shape)
    return call


class VectorExpression:
    """Compiled vector expression with exact partial derivatives."""

    def __init__(self, text, variables=SPACE_VARIABLES[:2]):
        self.text = text
        self.variables = tuple(variables)
        self.components, self.symbols = parse_components(text, variables)
        self._value = [sp.lambdify(self.symbols, c, "numpy") for c in self.components]
        self._partials = [[sp.lambdify(self.symbols, sp.diff(c, s), "numpy") for s in self.symbols]
                          for c in self.components]

    @property
    def size(self):
        return len(self.components)

    def _args(self, x):
        x = np.asarray(x, dtype=float)
        return x, [x[..., k] for k in range(len(self.variables))]

    def value(self, x):
        """Evaluate at ``x`` of shape ``(..., len(variables))``."""
        x, args = self._args(x)
        shape = x.shape[:-1]
        return np.stack([_vectorize(f, shape)(*args) for f in self._value], axis=-1)

    def jacobian(self, x):
        x, args = self._args(x)
        shape = x.shape[:-1]
        rows = [np.stack([_vectorize(f, shape)(*args) for f in row], axis=-1)
                for row in self._partials]
        return np.stack(rows, axis=-2)
