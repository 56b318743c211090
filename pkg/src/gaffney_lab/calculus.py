"""
Vector fields and the first-order operators grad, curl and div.

Conventions (0-based indices throughout):

* ``jacobian[..., i, j]`` is the partial derivative of component ``i`` with
  respect to ``x_j``;
* the generalized curl and cross product are stored as flat arrays over the
  pairs ``(i, j)``, ``i < j``, in lexicographic order ``(0,1), (0,2), ..., (1,2), ...``;
  ``curl[i, j] = d w_j / d x_i - d w_i / d x_j`` and ``cross(a, b)[i, j] = a_i b_j - a_j b_i``.

Analytic fields carry hand-written partial derivatives.  ``FemField`` is the
continuous piecewise-linear field given by nodal values on a mesh; its
gradient is constant on each triangle.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import InvalidInput, OutOfDomain
from .mesh import Edge, Mesh

__all__ = [
    "AnalyticField", "ScalarField", "FemField", "pair_indices", "cross",
    "curl_from_grad", "div_from_grad", "grad_at", "curl_at", "div_at",
    "identity_rhs", "pointwise_identity_residual", "tangential_derivative",
    "p1_gradients", "interpolate",
]


@lru_cache(maxsize=None)
def pair_indices(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


def cross(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[-1]:
        raise InvalidInput(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    pairs = pair_indices(a.shape[-1])
    return np.stack([a[..., i] * b[..., j] - a[..., j] * b[..., i] for i, j in pairs], axis=-1)


def curl_from_grad(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    pairs = pair_indices(g.shape[-1])
    return np.stack([g[..., j, i] - g[..., i, j] for i, j in pairs], axis=-1)


def div_from_grad(g) -> np.ndarray:
    return np.trace(np.asarray(g, dtype=float), axis1=-2, axis2=-1)


def identity_rhs(g) -> np.ndarray:
    """``2 sum_{i<j} (d_i w_i d_j w_j - d_j w_i d_i w_j)``."""
    g = np.asarray(g, dtype=float)
    total = np.zeros(g.shape[:-2])
    for i, j in pair_indices(g.shape[-1]):
        total = total + g[..., i, i] * g[..., j, j] - g[..., i, j] * g[..., j, i]
    return 2 * total


@dataclass(frozen=True)
class AnalyticField:
    """Closed-form vector field in R^n with exact first partials.

    ``value`` and ``jacobian`` are vectorized over leading axes of ``x``.
    """

    dim: int
    value: Callable[[np.ndarray], np.ndarray]
    partials: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))

    def jacobian(self, x):
        return self.partials(np.asarray(x, dtype=float))

    def check_partials(self, points, step=1e-6) -> float:
        """Largest relative deviation of the supplied partials from central differences."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        exact = self.jacobian(points)
        fd = np.empty_like(exact)
        for j in range(self.dim):
            dx = np.zeros(self.dim)
            dx[j] = step
            fd[..., :, j] = (self(points + dx) - self(points - dx)) / (2 * step)
        scale = np.maximum(np.abs(exact).max(axis=(-2, -1)), 1.0)
        return float((np.abs(exact - fd).max(axis=(-2, -1)) / scale).max())


@dataclass(frozen=True)
class ScalarField:
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]

    def __mul__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(
            lambda x: self.value(x) * other.value(x),
            lambda x: (self.gradient(x) * np.asarray(other.value(x))[..., None]
                       + np.asarray(self.value(x))[..., None] * other.gradient(x)),
        )


def p1_gradients(mesh: Mesh) -> np.ndarray:
    """Gradients of the three barycentric functions on every triangle, shape ``(T, 3, 2)``."""
    p = mesh.vertices[mesh.triangles]
    twice_area = 2 * mesh.signed_areas
    nxt = np.roll(p, -1, axis=1)
    prv = np.roll(p, -2, axis=1)
    g = np.stack([nxt[..., 1] - prv[..., 1], prv[..., 0] - nxt[..., 0]], axis=-1)
    return g / twice_area[:, None, None]


@dataclass(frozen=True, eq=False)
class FemField:
    """Continuous piecewise-linear vector field on ``mesh`` with nodal values ``(V, 2)``."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(self.mesh.n_vertices, 2)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    dim = 2

    @property
    def dofs(self) -> np.ndarray:
        """Interleaved DOF vector: first and second component per vertex."""
        return self.values.reshape(-1).copy()

    @classmethod
    def from_dofs(cls, mesh: Mesh, u) -> "FemField":
        return cls(mesh, np.asarray(u, dtype=float).reshape(-1, 2))

    def triangle_jacobians(self) -> np.ndarray:
        """Constant Jacobian on every triangle, shape ``(T, 2, 2)``."""
        g = p1_gradients(self.mesh)
        return np.einsum("tai,taj->tij", self.values[self.mesh.triangles], g)

    def locate(self, x, tol=1e-12) -> tuple[int, np.ndarray]:
        """Lowest-index triangle containing ``x`` and the barycentric coordinates there."""
        x = np.asarray(x, dtype=float)
        p = self.mesh.vertices[self.mesh.triangles]
        g = p1_gradients(self.mesh)
        bary = np.einsum("tad,td->ta", g, x - p[:, 0])
        bary[:, 0] = 1 - bary[:, 1] - bary[:, 2]
        inside = np.flatnonzero((bary >= -tol).all(axis=1))
        if len(inside) == 0:
            raise OutOfDomain(f"point {x.tolist()} lies outside the mesh")
        return int(inside[0]), bary[inside[0]]

    def __call__(self, x):
        t, bary = self.locate(x)
        return bary @ self.values[self.mesh.triangles[t]]

    def jacobian(self, x):
        t, _ = self.locate(x)
        g = p1_gradients(self.mesh)[t]
        return self.values[self.mesh.triangles[t]].T @ g


def grad_at(f, x) -> np.ndarray:
    return np.asarray(f.jacobian(x), dtype=float)


def curl_at(f, x) -> np.ndarray:
    return curl_from_grad(grad_at(f, x))


def div_at(f, x):
    return div_from_grad(grad_at(f, x))


def pointwise_identity_residual(f, x) -> np.ndarray:
    """``|curl|^2 + |div|^2 - |grad|^2`` minus its closed form in products of partials."""
    g = grad_at(f, x)
    lhs = (curl_from_grad(g) ** 2).sum(-1) + div_from_grad(g) ** 2 - (g ** 2).sum((-2, -1))
    return lhs - identity_rhs(g)


def tangential_derivative(f: ScalarField, mesh: Mesh, edge: Edge, i: int, j: int, x,
                          tol=1e-12) -> float:
    """``nu_j df/dx_i - nu_i df/dx_j`` at a point ``x`` of a boundary edge."""
    if not i < j:
        raise InvalidInput(f"need i < j, got ({i}, {j})")
    x = np.asarray(x, dtype=float)
    a, b = mesh.vertices[list(edge.endpoints)]
    t = np.dot(x - a, b - a) / np.dot(b - a, b - a)
    if t < -tol or t > 1 + tol or np.linalg.norm(a + t * (b - a) - x) > tol * max(1.0, edge.length):
        raise OutOfDomain(f"point {x.tolist()} is not on edge {edge.endpoints}")
    grad = np.asarray(f.gradient(x), dtype=float)
    nu = edge.normal
    return float(nu[j] * grad[i] - nu[i] * grad[j])


def interpolate(f: AnalyticField, mesh: Mesh) -> FemField:
    """Nodal interpolant of a 2D field."""
    if f.dim != 2:
        raise InvalidInput("only planar fields can be interpolated")
    return FemField(mesh, f(mesh.vertices))
