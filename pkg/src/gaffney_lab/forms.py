"""
2-forms in R^3, just enough calculus for the 2-form counterexample.

A 2-form ``w12 dx1^dx2 + w13 dx1^dx3 + w23 dx2^dx3`` is identified with the
vector ``v = (w23, -w13, w12)``.  Under this single identification

* ``d w``     has coefficient ``div v``  (on ``dx1^dx2^dx3``),
* ``delta w`` has coefficients ``curl v`` (as a 1-form),

which pins the sign conventions.  Coefficients are stored in the order
``(w12, w13, w23)``.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["TwoForm3", "to_vector", "from_vector", "d_two_form", "delta_two_form",
           "wedge_dx3", "gradient_energy"]

# row k of _IDENT maps coefficients (w12, w13, w23) to component k of v
_IDENT = np.array([[0.0, 0.0, 1.0],
                   [0.0, -1.0, 0.0],
                   [1.0, 0.0, 0.0]])


@dataclass(frozen=True)
class TwoForm3:
    """``value(x) -> (..., 3)`` coefficients, ``partials(x) -> (..., 3, 3)`` with ``[coef, x_j]``."""

    value: Callable[[np.ndarray], np.ndarray]
    partials: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))

    def jacobian(self, x):
        return self.partials(np.asarray(x, dtype=float))

    def check_partials(self, points, step=1e-6) -> float:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        exact = self.jacobian(points)
        fd = np.empty_like(exact)
        for j in range(3):
            dx = np.zeros(3)
            dx[j] = step
            fd[..., :, j] = (self(points + dx) - self(points - dx)) / (2 * step)
        scale = np.maximum(np.abs(exact).max(axis=(-2, -1)), 1.0)
        return float((np.abs(exact - fd).max(axis=(-2, -1)) / scale).max())


def to_vector(coefficients):
    return np.asarray(coefficients, dtype=float) @ _IDENT.T


def from_vector(v):
    # _IDENT is a signed permutation and symmetric, hence its own inverse
    return np.asarray(v, dtype=float) @ _IDENT.T


def _vector_jacobian(w, x):
    return np.einsum("kc,...cj->...kj", _IDENT, w.jacobian(x))


def d_two_form(w: TwoForm3, x):
    """Coefficient of ``dx1^dx2^dx3`` in ``d w``: ``d1 w23 - d2 w13 + d3 w12``."""
    g = _vector_jacobian(w, x)
    return np.trace(g, axis1=-2, axis2=-1)


def delta_two_form(w: TwoForm3, x):
    """The three coefficients of the 1-form ``delta w`` (curl of the identified vector)."""
    g = _vector_jacobian(w, x)
    return np.stack([g[..., 2, 1] - g[..., 1, 2],
                     g[..., 0, 2] - g[..., 2, 0],
                     g[..., 1, 0] - g[..., 0, 1]], axis=-1)


def wedge_dx3(w: TwoForm3, x):
    """``dx3 ^ w = w12 dx1^dx2^dx3``; returns ``w12``."""
    return w(x)[..., 0]


def gradient_energy(w: TwoForm3, x):
    """Pointwise ``|grad w|^2``, the sum of squared partials of all coefficients."""
    return (w.jacobian(x) ** 2).sum(axis=(-2, -1))
