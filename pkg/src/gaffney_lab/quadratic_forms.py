"""
Exact P1 matrices of the energies entering the Gaffney inequality.

For a DOF vector ``u`` (interleaved per vertex) of a continuous piecewise
linear field ``w``::

    u.T @ A @ u == int |grad w|^2
    u.T @ D @ u == int |curl w|^2 + |div w|^2
    u.T @ M @ u == int |w|^2
    u.T @ T @ u == int_boundary |w|^2

All element integrals are closed form, so these hold to rounding.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from .calculus import FemField, curl_from_grad, div_from_grad, p1_gradients
from .errors import AssemblyError, InvalidInput
from .mesh import Mesh
from .quadrature import integrate_mesh

__all__ = ["QuadraticForms", "GaffneyQuotient", "assemble", "quotient", "ibp_identity_sides",
           "ibp_identity_residual", "export_coo", "analytic_energies"]


@dataclass(frozen=True, eq=False)
class QuadraticForms:
    A: sps.csr_matrix
    D: sps.csr_matrix
    M: sps.csr_matrix
    T: sps.csr_matrix


@dataclass(frozen=True)
class GaffneyQuotient:
    numerator: float
    denominator: float
    ratio: float


def _local_dofs(triangles):
    return (2 * triangles[:, :, None] + np.arange(2)).reshape(len(triangles), 6)


def _scatter(local, dofs, n):
    rows = np.repeat(dofs, local.shape[-1], axis=1).ravel()
    cols = np.tile(dofs, (1, local.shape[-1])).ravel()
    return sps.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def assemble(m: Mesh) -> QuadraticForms:
    areas = m.signed_areas
    scale = m.h ** 2
    bad = np.flatnonzero(~(areas > 1e-14 * scale))
    if len(bad):
        raise AssemblyError(f"degenerate or inverted triangle {int(bad[0])} "
                            f"(vertices {m.triangles[bad[0]].tolist()}, area {areas[bad[0]]:.3e})")
    n = 2 * m.n_vertices
    g = p1_gradients(m)
    dofs = _local_dofs(m.triangles)
    n_tri = len(areas)

    # scalar P1 stiffness, copied onto both components
    k = np.einsum("tad,tbd->tab", g, g) * areas[:, None, None]
    A_loc = np.zeros((n_tri, 6, 6))
    A_loc[:, 0::2, 0::2] = k
    A_loc[:, 1::2, 1::2] = k

    div_vec = g.reshape(n_tri, 6)
    curl_vec = np.stack([-g[:, :, 1], g[:, :, 0]], axis=-1).reshape(n_tri, 6)
    D_loc = (np.einsum("ti,tj->tij", div_vec, div_vec)
             + np.einsum("ti,tj->tij", curl_vec, curl_vec)) * areas[:, None, None]

    mass = (np.ones((3, 3)) + np.eye(3)) / 12.0
    M_loc = np.zeros((n_tri, 6, 6))
    M_loc[:, 0::2, 0::2] = mass * areas[:, None, None]
    M_loc[:, 1::2, 1::2] = mass * areas[:, None, None]

    edges = np.array([e.endpoints for e in m.boundary_edges], dtype=np.int64)
    lengths = np.array([e.length for e in m.boundary_edges])
    edge_dofs = (2 * edges[:, :, None] + np.arange(2)).reshape(len(edges), 4)
    emass = (np.ones((2, 2)) + np.eye(2)) / 6.0
    T_loc = np.zeros((len(edges), 4, 4))
    T_loc[:, 0::2, 0::2] = emass * lengths[:, None, None]
    T_loc[:, 1::2, 1::2] = emass * lengths[:, None, None]

    return QuadraticForms(_scatter(A_loc, dofs, n), _scatter(D_loc, dofs, n),
                          _scatter(M_loc, dofs, n), _scatter(T_loc, edge_dofs, n))


def quotient(q: QuadraticForms, u) -> GaffneyQuotient:
    u = np.asarray(u, dtype=float)
    if not np.any(u):
        raise InvalidInput("the quotient is undefined for the zero field")
    num = float(u @ (q.A @ u))
    den = float(u @ (q.D @ u) + u @ (q.M @ u))
    return GaffneyQuotient(num, den, num / den)


def ibp_identity_sides(m: Mesh, f: FemField) -> dict:
    """Both sides of the two integration-by-parts identities for a P1 field.

    ``lemma``: boundary integral of ``w1 (d2 w2 nu1 - d1 w2 nu2)`` against the
    area integral of ``d1 w1 d2 w2 - d1 w2 d2 w1``.

    ``energy``: ``int (|curl|^2 + |div|^2 - |grad|^2)`` against the boundary
    sum ``-int w1 t12[w2] + int w2 t12[w1]`` with the tangential derivative
    ``t12[g] = nu2 d1 g - nu1 d2 g``.
    """
    J = f.triangle_jacobians()
    areas = m.signed_areas
    lemma_area = float(np.sum(areas * (J[:, 0, 0] * J[:, 1, 1] - J[:, 1, 0] * J[:, 0, 1])))
    energy_area = float(np.sum(areas * ((curl_from_grad(J) ** 2).sum(-1) + div_from_grad(J) ** 2
                                        - (J ** 2).sum((-2, -1)))))
    lemma_bdry = 0.0
    energy_bdry = 0.0
    for e in m.boundary_edges:
        Jt = J[m.boundary_triangle(e)]
        nu1, nu2 = e.normal
        mean = 0.5 * (f.values[e.endpoints[0]] + f.values[e.endpoints[1]])
        lemma_bdry += e.length * mean[0] * (Jt[1, 1] * nu1 - Jt[1, 0] * nu2)
        t12 = nu2 * Jt[:, 0] - nu1 * Jt[:, 1]
        energy_bdry += e.length * (-mean[0] * t12[1] + mean[1] * t12[0])
    return {"lemma": (lemma_bdry, lemma_area), "energy": (energy_area, energy_bdry)}


def ibp_identity_residual(m: Mesh, f: FemField) -> float:
    """Largest absolute mismatch over the two identities in :func:`ibp_identity_sides`."""
    sides = ibp_identity_sides(m, f)
    return max(abs(a - b) for a, b in sides.values())


def export_coo(matrix, fh):
    """Write ``row col value`` lines sorted by (row, col), 17 significant digits."""
    c = sps.coo_matrix(matrix)
    c.sum_duplicates()
    order = np.lexsort((c.col, c.row))
    for r, k, v in zip(c.row[order], c.col[order], c.data[order]):
        fh.write(f"{r} {k} {v:.17g}\n")


def analytic_energies(field, m: Mesh, rtol=1e-10):
    """Quadrature of ``|grad|^2``, ``|curl|^2 + |div|^2`` and ``|w|^2`` of an analytic planar field."""
    def dens(x):
        g = field.jacobian(x)
        return np.stack([(g ** 2).sum((-2, -1)),
                         (curl_from_grad(g) ** 2).sum(-1) + div_from_grad(g) ** 2,
                         (field(x) ** 2).sum(-1)], axis=-1)

    res = integrate_mesh(dens, m, rtol=rtol)
    grad, curl_div, mass = res.value
    return float(grad), float(curl_div), float(mass)
