"""Named analytic fields and 2-forms for the CLI and the verification suites."""
import numpy as np

from .calculus import AnalyticField
from .counterexamples import harmonic_lambda_field, intro_family, scalar_lambda_family, two_form_family
from .errors import InvalidParameter
from .expressions import VectorExpression


def _from_expression(text, dim, name):
    expr = VectorExpression(text, ("x1", "x2", "x3")[:dim])
    return AnalyticField(dim, expr.value, expr.jacobian, name)


def _linear():
    return AnalyticField(2, lambda x: np.array(x, dtype=float, copy=True),
                         lambda x: np.broadcast_to(np.eye(2), x.shape[:-1] + (2, 2)).copy(),
                         "linear")


def _constant():
    return AnalyticField(2, lambda x: np.broadcast_to([1.0, -2.0], x.shape).copy(),
                         lambda x: np.zeros(x.shape[:-1] + (2, 2)), "constant")


_FIXED = {
    "linear": _linear,
    "swap": lambda: AnalyticField(2, harmonic_lambda_field().value,
                                  harmonic_lambda_field().partials, "swap"),
    "harmonic_lambda": harmonic_lambda_field,
    "constant": _constant,
    "shear": lambda: _from_expression("1, x1", 2, "shear"),
    "smooth_lambda": lambda: _from_expression("1 + x2**2/10, sin(x1)/5", 2, "smooth_lambda"),
    "trig2": lambda: _from_expression("sin(x1)*cos(2*x2), x1**2*x2 - exp(x2)", 2, "trig2"),
    "poly3": lambda: _from_expression("x1*x2 + x3**2, sin(x1)*x3, exp(x2) - x1*x3", 3, "poly3"),
}

DEFAULT_CORPUS = ("linear", "swap", "constant", "shear", "smooth_lambda", "trig2", "poly3",
                  "intro_family:1", "intro_family:3", "scalar_lambda_family:2")


def field_names():
    return sorted(_FIXED) + ["intro_family:<n>", "scalar_lambda_family:<n>", "expr:<components>"]


def lookup_field(name: str) -> AnalyticField:
    """Resolve ``name`` to an analytic vector field.

    Accepts the fixed names above, ``intro_family:<n>``, ``scalar_lambda_family:<n>``
    and ``expr:<comma separated components in x1, x2[, x3]>``.
    """
    if name in _FIXED:
        return _FIXED[name]()
    head, _, tail = name.partition(":")
    if head == "intro_family" and tail:
        return intro_family(int(tail))
    if head == "scalar_lambda_family" and tail:
        return scalar_lambda_family(int(tail))
    if head == "expr" and tail:
        dim = 3 if "x3" in tail else 2
        return _from_expression(tail, dim, name)
    raise InvalidParameter(f"unknown field {name!r}")


def lookup_form(name: str):
    """``two_form_family:<n>:<sign>`` with sign in {+1, -1}."""
    parts = name.split(":")
    if len(parts) == 3 and parts[0] == "two_form_family":
        return two_form_family(int(parts[1]), int(parts[2]))
    raise InvalidParameter(f"unknown 2-form {name!r}")
