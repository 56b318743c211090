"""
Gauss-Legendre rules on intervals, triangles and boxes with order doubling.

Every ``integrate_*`` routine evaluates the rule at orders 2, 4, 8, ... and
stops once two successive orders agree to ``rtol`` (plus a tiny absolute
floor for integrals that vanish).
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["QuadResult", "gauss01", "triangle_rule", "integrate_mesh",
           "integrate_segment", "integrate_box"]


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray | float
    error: float
    order: int
    converged: bool


@lru_cache(maxsize=None)
def gauss01(q):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (x + 1), 0.5 * w


@lru_cache(maxsize=None)
def triangle_rule(q):
    """Collapsed (Duffy) product rule on the reference triangle.

    Returns barycentric coordinates of shape ``(q*q, 3)`` and weights that sum
    to 1, so that the integral over a triangle is ``area * sum(w * f)``.
    """
    x, w = gauss01(q)
    xi, eta = np.meshgrid(x, x, indexing="ij")
    wx, wy = np.meshgrid(w, w, indexing="ij")
    s = xi.ravel()
    t = (eta * (1 - xi)).ravel()
    weights = 2 * (wx * wy * (1 - xi)).ravel()
    bary = np.column_stack([1 - s - t, s, t])
    return bary, weights


def _escalate(rule, rtol, atol, start, max_order):
    prev = None
    q = start
    while True:
        val = rule(q)
        if prev is not None:
            err = float(np.max(np.abs(np.asarray(val - prev))))
            scale = float(np.max(np.abs(val)))
            if err <= rtol * scale + atol:
                return QuadResult(val, err, q, True)
            if 2 * q > max_order:
                return QuadResult(val, err, q, False)
        prev = val
        q *= 2


def integrate_mesh(func, mesh, rtol=1e-10, atol=1e-300, start=2, max_order=128):
    """Integrate ``func(points) -> (N,) or (N, m)`` over all triangles of ``mesh``."""
    corners = mesh.vertices[mesh.triangles]
    areas = mesh.signed_areas

    def rule(q):
        bary, w = triangle_rule(q)
        pts = np.einsum("qa,tad->tqd", bary, corners).reshape(-1, 2)
        vals = np.asarray(func(pts), dtype=float)
        vals = vals.reshape(len(areas), len(w), *vals.shape[1:])
        return np.einsum("tq...,q,t->...", vals, w, areas)

    return _escalate(rule, rtol, atol, start, max_order)


def integrate_segment(func, a, b, rtol=1e-10, atol=1e-300, start=2, max_order=256):
    """Integrate ``func`` along the straight segment from ``a`` to ``b`` (arc length)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    length = np.linalg.norm(b - a)

    def rule(q):
        x, w = gauss01(q)
        pts = a + np.outer(x, b - a)
        vals = np.asarray(func(pts), dtype=float)
        return length * np.einsum("q...,q->...", vals, w)

    return _escalate(rule, rtol, atol, start, max_order)


def integrate_box(func, lo, hi, rtol=1e-10, atol=1e-300, start=2, max_order=128):
    """Tensor Gauss-Legendre over the axis-aligned box ``[lo, hi]``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    dim = len(lo)

    def rule(q):
        x, w = gauss01(q)
        grids = np.meshgrid(*([x] * dim), indexing="ij")
        pts = lo + np.stack([g.ravel() for g in grids], axis=-1) * (hi - lo)
        wgrid = np.ones(1)
        for _ in range(dim):
            wgrid = np.multiply.outer(wgrid, w).ravel()
        vals = np.asarray(func(pts), dtype=float)
        return np.prod(hi - lo) * np.einsum("q...,q->...", vals, wgrid)

    return _escalate(rule, rtol, atol, start, max_order)
