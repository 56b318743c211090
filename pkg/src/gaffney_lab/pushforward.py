"""
Pushforward of vector fields and local rectification of a nonvanishing field.

``pushforward(phi, w, y) = grad phi(phi^-1(y)) @ w(phi^-1(y))``.

:func:`rectify_flow` builds the chart ``Psi(x) = flow of lambda for time x1
started at x0 + A (0, x2, ..., xn)`` with a rotation ``A`` whose first column
is ``lambda(x0)/|lambda(x0)|``.  Its inverse ``Phi`` satisfies
``Phi(x0) = 0``, ``grad Phi(x0) = A^T`` and ``Phi_*(lambda) = e1`` (for
``|lambda(x0)| = 1``; otherwise lambda is rescaled by the constant
``1/|lambda(x0)|`` first).  The flow and its Jacobian are integrated together
with classical RK4 (state plus variational equation).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .calculus import AnalyticField, curl_from_grad, div_from_grad
from .errors import InvalidInput, InversionFailure, ShrinkRadius

__all__ = ["SmoothMap", "affine_map", "compose", "pushforward", "pushed_field",
           "orthogonal_invariance_residual", "rotation_with_first_column", "FlowMap",
           "rectify_flow", "rectification_residual"]

NEWTON_TOL = 1e-10
NEWTON_MAXITER = 50


def _newton(fun, jac, y, guess):
    y = np.asarray(y, dtype=float)
    x = np.array(guess, dtype=float)
    scale = 1.0 + np.linalg.norm(y)
    r = fun(x) - y
    rnorm = np.linalg.norm(r)
    for _ in range(NEWTON_MAXITER):
        if rnorm <= 1e-14 * scale:
            break
        step = np.linalg.solve(jac(x), r)
        t = 1.0
        while True:
            x_new = x - t * step
            r_new = fun(x_new) - y
            if np.linalg.norm(r_new) < rnorm or t < 1e-4:
                break
            t *= 0.5
        done = np.linalg.norm(t * step) <= 1e-15 * (1 + np.linalg.norm(x))
        x, r, rnorm = x_new, r_new, np.linalg.norm(r_new)
        if done:
            break
    if rnorm > NEWTON_TOL * scale:
        raise InversionFailure(f"Newton inversion did not converge at {y.tolist()} "
                               f"(residual {rnorm:.3e})")
    return x


@dataclass(frozen=True)
class SmoothMap:
    """Diffeomorphism with Jacobian and optional exact inverse; points have shape ``(n,)``."""

    dim: int
    forward: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = ""

    def __call__(self, x):
        return np.asarray(self.forward(np.asarray(x, dtype=float)), dtype=float)

    def invert(self, y, guess=None):
        y = np.asarray(y, dtype=float)
        if self.inverse is not None:
            return np.asarray(self.inverse(y), dtype=float)
        return _newton(self, self.jacobian, y, y if guess is None else guess)


def affine_map(A, b=None) -> SmoothMap:
    A = np.asarray(A, dtype=float)
    b = np.zeros(len(A)) if b is None else np.asarray(b, dtype=float)
    Ainv = np.linalg.inv(A)
    return SmoothMap(len(A), lambda x: A @ x + b, lambda x: A, lambda y: Ainv @ (y - b), "affine")


def compose(outer: SmoothMap, inner: SmoothMap) -> SmoothMap:
    """``outer o inner``."""
    return SmoothMap(
        inner.dim,
        lambda x: outer(inner(x)),
        lambda x: outer.jacobian(inner(x)) @ inner.jacobian(x),
        lambda y: inner.invert(outer.invert(y)),
        f"{outer.name}o{inner.name}",
    )


def pushforward(m: SmoothMap, f, y) -> np.ndarray:
    x = m.invert(y)
    return m.jacobian(x) @ np.asarray(f(x), dtype=float)


def pushed_field(m: SmoothMap, f) -> AnalyticField:
    """``m_*(f)`` as a field; only values are available (no partials)."""
    def value(y):
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            return pushforward(m, f, y)
        return np.stack([pushforward(m, f, p) for p in y.reshape(-1, m.dim)]).reshape(y.shape)

    def partials(y):
        raise NotImplementedError("pushed fields carry values only")

    return AnalyticField(m.dim, value, partials, f"{m.name}_*({getattr(f, 'name', '')})")


def orthogonal_invariance_residual(A, b, f: AnalyticField, u):
    """Differences of ``|grad|^2, |curl|^2, |div|^2`` between ``f`` at ``u`` and its
    pushforward by ``psi(u) = A u + b`` at ``psi(u)``."""
    A = np.asarray(A, dtype=float)
    n = len(A)
    if A.shape != (n, n) or np.abs(A.T @ A - np.eye(n)).max() > 1e-12:
        raise InvalidInput("A must be an orthogonal matrix")
    u = np.asarray(u, dtype=float)
    g = f.jacobian(u)
    psi = affine_map(A, b)
    # pushed field y -> A f(A^T (y - b)); its Jacobian at psi(u) by the chain rule
    inv_jac = np.linalg.inv(psi.jacobian(u))
    gp = psi.jacobian(u) @ g @ inv_jac
    before = ((g ** 2).sum(), (curl_from_grad(g) ** 2).sum(), div_from_grad(g) ** 2)
    after = ((gp ** 2).sum(), (curl_from_grad(gp) ** 2).sum(), div_from_grad(gp) ** 2)
    return tuple(float(abs(a - c)) for a, c in zip(before, after))


def rotation_with_first_column(a) -> np.ndarray:
    """Positively oriented orthonormal basis whose first column is ``a/|a|``.

    Completed by Gram-Schmidt over the coordinate axes in index order.
    """
    a = np.asarray(a, dtype=float)
    n = len(a)
    cols = [a / np.linalg.norm(a)]
    for k in range(n):
        if len(cols) == n:
            break
        v = np.eye(n)[k]
        for c in cols:
            v = v - (v @ c) * c
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            cols.append(v / norm)
    A = np.column_stack(cols)
    if np.linalg.det(A) < 0:
        A[:, -1] *= -1
    return A


@dataclass(frozen=True, eq=False)
class FlowMap:
    """Flow chart ``Psi`` around ``x0`` and its inverse ``Phi``; see module docstring."""

    field: AnalyticField
    x0: np.ndarray
    rotation: np.ndarray
    scale: float
    step: float
    radius: float

    @property
    def dim(self):
        return len(self.x0)

    def _rhs(self, y, J):
        return self.field(y) / self.scale, (self.field.jacobian(y) / self.scale) @ J

    def psi_and_jacobian(self, x, step=None):
        """``Psi(x)`` and ``grad Psi(x)`` by RK4 on the flow plus variational equation."""
        x = np.asarray(x, dtype=float)
        h = self.step if step is None else step
        A = self.rotation
        y = self.x0 + A[:, 1:] @ x[1:]
        J = np.column_stack([self.field(y) / self.scale, A[:, 1:]])
        T = x[0]
        steps = max(1, math.ceil(abs(T) / h - 1e-12))
        dt = T / steps
        for _ in range(steps):
            k1y, k1J = self._rhs(y, J)
            k2y, k2J = self._rhs(y + 0.5 * dt * k1y, J + 0.5 * dt * k1J)
            k3y, k3J = self._rhs(y + 0.5 * dt * k2y, J + 0.5 * dt * k2J)
            k4y, k4J = self._rhs(y + dt * k3y, J + dt * k3J)
            y = y + dt / 6 * (k1y + 2 * k2y + 2 * k3y + k4y)
            J = J + dt / 6 * (k1J + 2 * k2J + 2 * k3J + k4J)
        return y, J

    def psi(self, x):
        return self.psi_and_jacobian(x)[0]

    def phi(self, y, guess=None):
        """Inverse chart by damped Newton on ``Psi`` using the integrated Jacobian."""
        y = np.asarray(y, dtype=float)
        if guess is None:
            guess = self.rotation.T @ (y - self.x0)
        return _newton(self.psi, lambda x: self.psi_and_jacobian(x)[1], y, guess)

    def as_map(self) -> SmoothMap:
        """``Phi`` as a :class:`SmoothMap` (forward Phi, exact inverse Psi)."""
        return SmoothMap(
            self.dim,
            self.phi,
            lambda x: np.linalg.inv(self.psi_and_jacobian(self.phi(x))[1]),
            self.psi,
            "Phi",
        )

    def grid(self, per_axis=5):
        s = np.linspace(-self.radius, self.radius, per_axis)
        mesh = np.meshgrid(*([s] * self.dim), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)


def _box_check(fm: FlowMap, margin):
    limit = fm.radius * (1 + margin)
    base = np.linalg.norm(fm.field(fm.x0))
    for p in fm.grid():
        y, J = fm.psi_and_jacobian(p)
        if np.abs(y - fm.x0).max() > limit:
            return False
        if np.linalg.det(J) <= 0.1 or np.linalg.norm(fm.field(y)) < 0.25 * base:
            return False
    return True


def rectify_flow(lam: AnalyticField, x0, r: float, margin: float = 1.0,
                 tol: float = 1e-10) -> FlowMap:
    """Build the flow chart of ``lam`` around ``x0`` on the parameter box ``|x_i| <= r``.

    The ODE step is halved until halving it again moves ``Psi`` by less than
    ``tol`` on a grid of the box.  The images must stay in the box of radius
    ``r (1 + margin)`` around ``x0`` with ``det grad Psi`` bounded away from 0;
    otherwise :class:`ShrinkRadius` reports the largest admissible radius found by halving.
    """
    x0 = np.asarray(x0, dtype=float)
    l0 = np.asarray(lam(x0), dtype=float)
    scale = float(np.linalg.norm(l0))
    if not scale > 0:
        raise InvalidInput(f"lambda vanishes at the base point {x0.tolist()}")
    A = rotation_with_first_column(l0)

    def build(radius):
        h = radius / 2
        fm = FlowMap(lam, x0, A, scale, h, radius)
        pts = fm.grid(3)
        while True:
            coarse = np.array([fm.psi(p) for p in pts])
            fine = np.array([fm.psi_and_jacobian(p, h / 2)[0] for p in pts])
            if np.abs(coarse - fine).max() < tol or h < radius * 2.0 ** -20:
                return FlowMap(lam, x0, A, scale, h, radius)
            h /= 2
            fm = FlowMap(lam, x0, A, scale, h, radius)

    fm = build(r)
    if _box_check(fm, margin):
        return fm
    radius = r
    while radius > r * 2.0 ** -10:
        radius /= 2
        if _box_check(build(radius), margin):
            raise ShrinkRadius(f"flow leaves the safety box for r={r}; largest admissible "
                               f"radius found is {radius:.6g}", radius)
    raise ShrinkRadius(f"no admissible radius found below r={r}", 0.0)


def rectification_residual(fm: FlowMap, lam, pts) -> float:
    """``max |Phi_*(lam)(p) / |lam(x0)| - e1|`` over parameter points ``pts``."""
    phi = fm.as_map()
    e1 = np.eye(fm.dim)[0]
    worst = 0.0
    for p in np.atleast_2d(np.asarray(pts, dtype=float)):
        v = pushforward(phi, lam, p) / fm.scale
        worst = max(worst, float(np.linalg.norm(v - e1)))
    return worst
