"""
Discrete optimal Gaffney constants via constrained generalized eigenproblems.

With ``Z`` spanning the admissible DOF space, the best constant for the
discrete space is the top eigenvalue of

    (Z^T A Z) v = mu (Z^T (D + M) Z) v,

the maximum of the Gaffney quotient over admissible fields.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .boundary import BoundarySpec, node_constraints, nullspace_basis
from .errors import EmptyConstraintSpace, InvalidInput, InvalidParameter
from .mesh import Mesh, generate_domain, refine
from .quadratic_forms import assemble

__all__ = ["GevpResult", "GaffneyEstimate", "TraceEstimate", "StudyResult", "solve_gevp",
           "gaffney_constant", "refinement_study", "trace_constant"]


@dataclass(frozen=True, eq=False)
class GevpResult:
    eigenvalues: np.ndarray   # descending
    eigenvectors: np.ndarray  # columns, B-orthonormal


def _dense(M):
    return M.toarray() if hasattr(M, "toarray") else np.asarray(M, dtype=float)


def solve_gevp(A, B) -> GevpResult:
    """All eigenpairs of ``A v = mu B v`` for symmetric ``A`` and positive definite ``B``.

    ``B = L L^T`` is factored by Cholesky and the standard symmetric problem
    ``L^-1 A L^-T y = mu y`` is solved; ``v = L^-T y``.
    """
    A = _dense(A)
    B = _dense(B)
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise InvalidInput(f"incompatible shapes {A.shape} and {B.shape}")
    L, info = lapack.dpotrf(B, lower=1, clean=1)
    if info > 0:
        raise InvalidInput(f"B is not positive definite: Cholesky fails at pivot {info}")
    if info < 0:
        raise InvalidInput(f"invalid argument {-info} passed to Cholesky")
    X = sla.solve_triangular(L, A, lower=True)
    C = sla.solve_triangular(L, X.T, lower=True)
    C = 0.5 * (C + C.T)
    mu, Y = np.linalg.eigh(C)
    V = sla.solve_triangular(L, Y, lower=True, trans="T")
    return GevpResult(mu[::-1].copy(), V[:, ::-1].copy())


@dataclass(frozen=True, eq=False)
class GaffneyEstimate:
    level: int
    h: float
    F: int
    lambda_max: float
    eigenfield: np.ndarray  # full DOF vector Z v, unit in the (D + M) norm
    residual: float
    multiplicity: int


def gaffney_constant(m: Mesh, spec: BoundarySpec, level: int = 1) -> GaffneyEstimate:
    """Largest Gaffney quotient over the admissible P1 fields on ``m``."""
    basis = nullspace_basis(node_constraints(spec, m), m)
    if basis.F == 0:
        raise EmptyConstraintSpace("the boundary conditions leave no free degrees of freedom")
    q = assemble(m)
    Z = basis.Z
    Ar = _dense(Z.T @ q.A @ Z)
    Br = _dense(Z.T @ (q.D + q.M) @ Z)
    res = solve_gevp(Ar, Br)
    lam = float(res.eigenvalues[0])
    v = res.eigenvectors[:, 0]
    residual = float(np.linalg.norm(Ar @ v - lam * (Br @ v)))
    mult = int(np.sum(res.eigenvalues >= lam - 1e-9 * max(1.0, abs(lam))))
    return GaffneyEstimate(level, m.h, basis.F, lam, np.asarray(Z @ v), residual, mult)


@dataclass(frozen=True, eq=False)
class StudyResult:
    estimates: list[GaffneyEstimate]

    @property
    def lambda_max(self) -> np.ndarray:
        return np.array([e.lambda_max for e in self.estimates])

    @property
    def differences(self) -> np.ndarray:
        return np.diff(self.lambda_max)

    def rows(self):
        return [(e.level, e.h, e.F, e.lambda_max, e.residual) for e in self.estimates]


def refinement_study(domain: str | Mesh, spec: BoundarySpec, levels: int, k: int = 2) -> StudyResult:
    """Estimates on ``levels`` successively red-refined meshes, starting from ``domain``."""
    if levels < 1:
        raise InvalidParameter(f"levels must be >= 1, got {levels}")
    m = domain if isinstance(domain, Mesh) else generate_domain(domain, k)
    out = []
    for level in range(1, levels + 1):
        if level > 1:
            m = refine(m)
        out.append(gaffney_constant(m, spec, level))
    return StudyResult(out)


@dataclass(frozen=True, eq=False)
class TraceEstimate:
    eps: float
    c: float
    witness: np.ndarray
    saturation: float  # |x^T T x - eps x^T A x - (c/eps) x^T M x| / x^T M x at the witness


def trace_constant(m: Mesh, eps: float) -> TraceEstimate:
    """Smallest ``c`` with ``int_bdry |w|^2 <= eps int |grad w|^2 + (c/eps) int |w|^2`` on P1."""
    if not eps > 0:
        raise InvalidParameter(f"eps must be positive, got {eps}")
    q = assemble(m)
    res = solve_gevp(_dense(q.T - eps * q.A), _dense(q.M))
    top = float(res.eigenvalues[0])
    c = eps * max(top, 0.0)
    x = res.eigenvectors[:, 0]
    mass = float(x @ (q.M @ x))
    gap = float(x @ (q.T @ x) - eps * (x @ (q.A @ x)) - (c / eps) * mass)
    return TraceEstimate(float(eps), c, x, abs(gap) / mass)
