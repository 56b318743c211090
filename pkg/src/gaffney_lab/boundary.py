"""
Boundary conditions on tagged segments and their exact nodal enforcement.

In the plane each non-free condition confines the boundary value of a field
to a line:

==============  ===================  ================
kind            condition            admissible line
==============  ===================  ================
tangential0     nu x w = 0           span(nu)
normal0         <nu; w> = 0          span(tau)
cross_lambda    lambda x w = 0       span(lambda)
scalar_lambda   <lambda; w> = 0      span(lambda_perp)
free            none                 R^2
==============  ===================  ================

At a vertex where several lines meet they are merged when their directions
are dependent (``|det| <= 1e-10``) and the node is pinned to zero otherwise.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sps

from .errors import InvalidSpec
from .expressions import VectorExpression
from .mesh import Mesh

__all__ = ["Condition", "BoundarySpec", "LambdaReport", "NodeConstraint", "NullspaceBasis",
           "validate_lambda", "node_constraints", "nullspace_basis", "DEPENDENCE_TOL",
           "LAMBDA_MIN"]

KINDS = ("tangential0", "normal0", "cross_lambda", "scalar_lambda", "free")
DEPENDENCE_TOL = 1e-10
LAMBDA_MIN = 1e-8
_EDGE_SAMPLES = (0.0, 0.5 - 0.5 / np.sqrt(3), 0.5, 0.5 + 0.5 / np.sqrt(3), 1.0)


def _make_lambda(source):
    """Turn ``"nu"``, ``"tau"``, ``"expr:..."`` or a bare expression, a constant pair or a callable into ``lam(x, nu, tau)``."""
    if callable(source):
        return source
    if isinstance(source, str):
        if source == "nu":
            return lambda x, nu, tau: np.asarray(nu, dtype=float)
        if source == "tau":
            return lambda x, nu, tau: np.asarray(tau, dtype=float)
        text = source[5:] if source.startswith("expr:") else source
        try:
            expr = VectorExpression(text, ("x1", "x2", "nu1", "nu2", "tau1", "tau2"))
        except ValueError as exc:
            raise InvalidSpec(f"unknown lambda {source!r}: {exc}") from exc
        if expr.size != 2:
            raise InvalidSpec(f"lambda expression needs 2 components: {source!r}")
        return lambda x, nu, tau: expr.value(np.concatenate([x, nu, tau]))
    const = np.asarray(source, dtype=float)
    if const.shape != (2,):
        raise InvalidSpec(f"constant lambda must have 2 components, got {source!r}")
    return lambda x, nu, tau: const


@dataclass(frozen=True)
class Condition:
    kind: str
    lam: Callable | None = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown condition kind {self.kind!r}")
        if self.kind in ("cross_lambda", "scalar_lambda") and self.lam is None:
            raise InvalidSpec(f"{self.kind} needs a lambda")

    @classmethod
    def tangential0(cls):
        return cls("tangential0")

    @classmethod
    def normal0(cls):
        return cls("normal0")

    @classmethod
    def free(cls):
        return cls("free")

    @classmethod
    def cross_lambda(cls, lam):
        return cls("cross_lambda", _make_lambda(lam), lam if isinstance(lam, str) else repr(lam))

    @classmethod
    def scalar_lambda(cls, lam):
        return cls("scalar_lambda", _make_lambda(lam), lam if isinstance(lam, str) else repr(lam))

    @property
    def uses_lambda(self):
        return self.kind in ("cross_lambda", "scalar_lambda")

    def lambda_at(self, x, nu, tau):
        return np.asarray(self.lam(np.asarray(x, float), np.asarray(nu, float),
                                   np.asarray(tau, float)), dtype=float)

    def direction(self, x, nu, tau):
        """Unit direction of the admissible line at ``x``, or None for a free segment."""
        if self.kind == "free":
            return None
        if self.kind == "tangential0":
            u = np.asarray(nu, dtype=float)
        elif self.kind == "normal0":
            u = np.asarray(tau, dtype=float)
        else:
            lam = self.lambda_at(x, nu, tau)
            norm = np.hypot(lam[0], lam[1])
            if norm < LAMBDA_MIN:
                raise InvalidSpec(f"lambda vanishes at {np.asarray(x).tolist()}")
            u = lam if self.kind == "cross_lambda" else np.array([-lam[1], lam[0]])
            u = u / norm
        return _canonical(u)


def _canonical(u):
    u = np.asarray(u, dtype=float)
    u = u / np.hypot(u[0], u[1])
    if u[0] < -1e-12 or (abs(u[0]) <= 1e-12 and u[1] < 0):
        u = -u
    return u


class BoundarySpec:
    """One :class:`Condition` per segment tag."""

    def __init__(self, conditions: dict[int, Condition]):
        self.conditions = {int(k): v for k, v in conditions.items()}

    def __getitem__(self, tag):
        return self.conditions[tag]

    def __repr__(self):
        body = ", ".join(f"{k}: {c.kind}{'(' + c.label + ')' if c.label else ''}"
                         for k, c in sorted(self.conditions.items()))
        return f"BoundarySpec({{{body}}})"

    @classmethod
    def uniform(cls, segments, condition: Condition) -> "BoundarySpec":
        n = segments.segment_count if isinstance(segments, Mesh) else int(segments)
        return cls({tag: condition for tag in range(1, n + 1)})

    @classmethod
    def from_dict(cls, data: dict) -> "BoundarySpec":
        if set(data) != {"segments"}:
            raise InvalidSpec(f"boundary spec must have exactly the key 'segments', got {sorted(data)}")
        out = {}
        for tag, entry in data["segments"].items():
            kind = entry.get("kind")
            if kind in ("cross_lambda", "scalar_lambda"):
                if "lambda" not in entry:
                    raise InvalidSpec(f"segment {tag}: {kind} needs 'lambda'")
                out[int(tag)] = getattr(Condition, kind)(entry["lambda"])
            elif kind in KINDS:
                out[int(tag)] = Condition(kind)
            else:
                raise InvalidSpec(f"segment {tag}: unknown kind {kind!r}")
        return cls(out)

    @classmethod
    def from_json(cls, text: str) -> "BoundarySpec":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        segs = {}
        for tag, c in sorted(self.conditions.items()):
            entry = {"kind": c.kind}
            if c.uses_lambda:
                entry["lambda"] = c.label
            segs[str(tag)] = entry
        return {"segments": segs}


@dataclass(frozen=True)
class LambdaReport:
    min_norm: dict[int, float | None]
    flagged: tuple[int, ...]
    missing: tuple[int, ...]

    @property
    def ok(self):
        return not self.flagged and not self.missing

    def __str__(self):
        lines = []
        for tag, v in sorted(self.min_norm.items()):
            status = "FLAGGED" if tag in self.flagged else "ok"
            lines.append(f"segment {tag}: min|lambda| = {'-' if v is None else f'{v:.6g}'} {status}")
        for tag in self.missing:
            lines.append(f"segment {tag}: no condition given")
        return "\n".join(lines)


def validate_lambda(spec: BoundarySpec, m: Mesh) -> LambdaReport:
    """Minimum of ``|lambda|`` per segment over edge sample points."""
    tags = range(1, m.segment_count + 1)
    missing = tuple(t for t in tags if t not in spec.conditions)
    mins: dict[int, float | None] = {}
    for t in tags:
        c = spec.conditions.get(t)
        mins[t] = np.inf if c is not None and c.uses_lambda else None
    for e in m.boundary_edges:
        c = spec.conditions.get(e.segment_tag)
        if c is None or not c.uses_lambda:
            continue
        a, b = m.vertices[list(e.endpoints)]
        for s in _EDGE_SAMPLES:
            lam = c.lambda_at(a + s * (b - a), e.normal, e.tangent)
            mins[e.segment_tag] = min(mins[e.segment_tag], float(np.hypot(lam[0], lam[1])))
    flagged = tuple(t for t, v in mins.items() if v is not None and v < LAMBDA_MIN)
    return LambdaReport(mins, flagged, missing)


@dataclass(frozen=True, eq=False)
class NodeConstraint:
    vertex: int
    dim: int
    basis: np.ndarray  # (dim, 2), orthonormal rows


_FREE_BASIS = np.eye(2)


def node_constraints(spec: BoundarySpec, m: Mesh) -> list[NodeConstraint]:
    """Admissible subspace at every vertex of ``m``."""
    report = validate_lambda(spec, m)
    if not report.ok:
        raise InvalidSpec(f"invalid boundary specification:\n{report}")
    dirs: dict[int, list[np.ndarray]] = {}
    for e in m.boundary_edges:
        c = spec.conditions[e.segment_tag]
        for v in e.endpoints:
            u = c.direction(m.vertices[v], e.normal, e.tangent)
            if u is not None:
                dirs.setdefault(v, []).append(u)
    out = []
    for v in range(m.n_vertices):
        ds = dirs.get(v)
        if not ds:
            out.append(NodeConstraint(v, 2, _FREE_BASIS))
            continue
        first = ds[0]
        dependent = all(abs(first[0] * d[1] - first[1] * d[0]) <= DEPENDENCE_TOL for d in ds[1:])
        if dependent:
            out.append(NodeConstraint(v, 1, first[None, :]))
        else:
            out.append(NodeConstraint(v, 0, np.zeros((0, 2))))
    return out


@dataclass(frozen=True, eq=False)
class NullspaceBasis:
    n_dofs: int
    Z: sps.csr_matrix
    column_vertex: np.ndarray

    @property
    def F(self) -> int:
        return self.Z.shape[1]

    def project(self, u):
        """Orthogonal projection onto the admissible space, ``Z Z^T u``."""
        return self.Z @ (self.Z.T @ np.asarray(u, dtype=float))

    def representable(self, u, tol=1e-12) -> bool:
        u = np.asarray(u, dtype=float)
        return bool(np.linalg.norm(self.project(u) - u) <= tol * max(1.0, np.linalg.norm(u)))


def nullspace_basis(constraints: list[NodeConstraint], m: Mesh) -> NullspaceBasis:
    """Block-diagonal basis of the constrained DOF space (interleaved DOF ordering)."""
    rows, cols, vals, owner = [], [], [], []
    col = 0
    for nc in sorted(constraints, key=lambda c: c.vertex):
        for b in nc.basis:
            rows += [2 * nc.vertex, 2 * nc.vertex + 1]
            cols += [col, col]
            vals += [b[0], b[1]]
            owner.append(nc.vertex)
            col += 1
    n = 2 * m.n_vertices
    Z = sps.csr_matrix((vals, (rows, cols)), shape=(n, col))
    Z.eliminate_zeros()
    return NullspaceBasis(n, Z, np.array(owner, dtype=np.int64))
