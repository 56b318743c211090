import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaffney_lab.boundary import (BoundarySpec, Condition, node_constraints, nullspace_basis,
                                  validate_lambda)
from gaffney_lab.calculus import cross, interpolate
from gaffney_lab.counterexamples import intro_family
from gaffney_lab.errors import InvalidSpec
from gaffney_lab.mesh import generate_lshape, generate_regular_polygon, generate_structured_square

CORNERS = [0, 1, 2, 3]  # square corners are the first four vertices


def constraints_for(m, cond):
    return node_constraints(BoundarySpec.uniform(m, cond), m)


def test_validate_lambda_examples():
    m = generate_structured_square(2)
    r = validate_lambda(BoundarySpec.uniform(m, Condition.cross_lambda((1.0, 0.0))), m)
    assert r.ok and all(v == 1 for v in r.min_norm.values())
    r = validate_lambda(BoundarySpec.uniform(m, Condition.cross_lambda("nu")), m)
    assert r.ok and all(v == pytest.approx(1, abs=1e-15) for v in r.min_norm.values())
    r = validate_lambda(BoundarySpec.uniform(m, Condition.cross_lambda("expr:x1 - 0.5, 0")), m)
    assert not r.ok
    assert set(r.flagged) == {1, 3}  # bottom and top cross x1 = 1/2
    assert "FLAGGED" in str(r)


def test_validate_lambda_missing_segment():
    m = generate_structured_square(1)
    r = validate_lambda(BoundarySpec({1: Condition.free()}), m)
    assert r.missing == (2, 3, 4)
    assert not r.ok


def test_vanishing_lambda_rejected():
    m = generate_structured_square(2)
    with pytest.raises(InvalidSpec):
        constraints_for(m, Condition.cross_lambda("expr:x1 - 0.5, 0"))


def test_constant_lambda_constraints():
    m = generate_structured_square(3)
    cs = constraints_for(m, Condition.cross_lambda((1.0, 0.0)))
    bdry = set(m.boundary_vertices.tolist())
    for c in cs:
        if c.vertex in bdry:
            assert c.dim == 1
            assert np.array_equal(c.basis[0], [1.0, 0.0])
        else:
            assert c.dim == 2


def test_tangential_corners_are_pinned():
    m = generate_structured_square(3)
    cs = constraints_for(m, Condition.tangential0())
    for v in CORNERS:
        assert cs[v].dim == 0
    bottom_interior = [v for v in m.boundary_vertices if m.vertices[v][1] == 0 and v not in CORNERS]
    for v in bottom_interior:
        assert cs[v].dim == 1
        assert abs(cs[v].basis[0] @ [0.0, 1.0]) == 1


def test_normal0_uses_tangent():
    m = generate_structured_square(3)
    cs = constraints_for(m, Condition.normal0())
    for v in CORNERS:
        assert cs[v].dim == 0
    for e in m.boundary_edges:
        for v in e.endpoints:
            if v not in CORNERS:
                assert abs(cs[v].basis[0] @ e.tangent) == pytest.approx(1, abs=1e-15)


def test_nullspace_examples():
    m = generate_structured_square(2)
    free = nullspace_basis(constraints_for(m, Condition.free()), m)
    assert free.F == 2 * m.n_vertices
    assert np.array_equal(free.Z.toarray(), np.eye(2 * m.n_vertices))
    m1 = generate_structured_square(1)
    assert nullspace_basis(constraints_for(m1, Condition.cross_lambda((1.0, 0.0))), m1).F == 4
    assert nullspace_basis(constraints_for(m1, Condition.tangential0()), m1).F == 0


@pytest.mark.parametrize("cond", [Condition.tangential0(), Condition.normal0(),
                                  Condition.cross_lambda("expr:1 + x1, x2 - 2"),
                                  Condition.scalar_lambda("tau"), Condition.free()])
def test_basis_orthonormal(cond):
    m = generate_regular_polygon(5, 3)
    cs = node_constraints(BoundarySpec.uniform(m, cond), m)
    for c in cs:
        assert np.abs(c.basis @ c.basis.T - np.eye(c.dim)).max(initial=0) <= 1e-14
    Z = nullspace_basis(cs, m).Z.toarray()
    assert np.abs(Z.T @ Z - np.eye(Z.shape[1])).max() <= 1e-12


def test_columns_respect_cross_lambda():
    m = generate_structured_square(4)
    lam = Condition.cross_lambda("expr:1 + x1*x2, 2 - x1")
    spec = BoundarySpec.uniform(m, lam)
    basis = nullspace_basis(node_constraints(spec, m), m)
    Z = basis.Z.toarray()
    bdry = set(m.boundary_vertices.tolist())
    for col, v in zip(Z.T, basis.column_vertex):
        assert np.count_nonzero(col[[i for i in range(len(col)) if i // 2 != v]]) == 0
        if v in bdry:
            lv = np.array([1 + m.vertices[v][0] * m.vertices[v][1], 2 - m.vertices[v][0]])
            assert abs(cross(lv, col[2 * v:2 * v + 2])[0]) <= 1e-15 * np.linalg.norm(lv)


def test_scalar_lambda_direction():
    m = generate_structured_square(2)
    cs = constraints_for(m, Condition.scalar_lambda((1.0, 2.0)))
    for v in m.boundary_vertices:
        assert abs(cs[v].basis[0] @ [1.0, 2.0]) <= 1e-15


def _span(cs):
    return [np.abs(c.basis.T @ c.basis) for c in cs]


@settings(max_examples=20, deadline=None)
@given(c=st.floats(-50, 50).filter(lambda s: abs(s) > 1e-3))
def test_scale_invariance(c):
    m = generate_lshape(2)
    base = constraints_for(m, Condition.cross_lambda(lambda x, nu, tau: np.array([1 + x[0], x[1] - 3])))
    scaled = constraints_for(m, Condition.cross_lambda(
        lambda x, nu, tau: c * np.array([1 + x[0], x[1] - 3])))
    for a, b in zip(_span(base), _span(scaled)):
        assert np.allclose(a, b, atol=1e-14)


def test_opposite_directions_merge():
    m = generate_structured_square(2)
    spec = BoundarySpec({1: Condition.cross_lambda((1.0, 0.0)), 2: Condition.cross_lambda((-1.0, 0.0)),
                         3: Condition.cross_lambda((1.0, 0.0)), 4: Condition.cross_lambda((-2.0, 0.0))})
    cs = node_constraints(spec, m)
    for v in CORNERS:
        assert cs[v].dim == 1


def test_free_next_to_constrained():
    m = generate_structured_square(2)
    spec = BoundarySpec({1: Condition.tangential0(), 2: Condition.free(),
                         3: Condition.free(), 4: Condition.free()})
    cs = node_constraints(spec, m)
    # (0,0) and (1,0) touch the bottom side, (1,1) and (0,1) do not
    assert [cs[v].dim for v in CORNERS] == [1, 1, 2, 2]


def test_representability_follows_constraints():
    m = generate_structured_square(4)
    f = intro_family(2)
    u = interpolate(f, m).dofs
    along = BoundarySpec.uniform(m, Condition.cross_lambda(lambda x, nu, tau: f(x)))
    assert nullspace_basis(node_constraints(along, m), m).representable(u)
    tangential = BoundarySpec.uniform(m, Condition.tangential0())
    basis = nullspace_basis(node_constraints(tangential, m), m)
    assert not basis.representable(u)
    z = basis.Z @ np.random.default_rng(0).standard_normal(basis.F)
    assert basis.representable(z)


def test_spec_json_round_trip():
    text = ('{"segments": {"1": {"kind": "cross_lambda", "lambda": "nu"}, '
            '"2": {"kind": "normal0"}, "3": {"kind": "scalar_lambda", "lambda": "expr:1, x1"}, '
            '"4": {"kind": "free"}}}')
    spec = BoundarySpec.from_json(text)
    assert [spec[t].kind for t in (1, 2, 3, 4)] == ["cross_lambda", "normal0", "scalar_lambda", "free"]
    again = BoundarySpec.from_dict(spec.to_dict())
    assert again.to_dict() == spec.to_dict()
    m = generate_structured_square(2)
    a = node_constraints(spec, m)
    b = node_constraints(again, m)
    assert all(np.array_equal(x.basis, y.basis) for x, y in zip(a, b))


@pytest.mark.parametrize("data", [
    {"segments": {"1": {"kind": "sideways"}}},
    {"segments": {"1": {"kind": "cross_lambda"}}},
    {"segments": {"1": {"kind": "cross_lambda", "lambda": "expr:1, y"}}},
    {"segments": {"1": {"kind": "cross_lambda", "lambda": "expr:1, 2, 3"}}},
    {"segs": {}},
])
def test_bad_specs(data):
    with pytest.raises(InvalidSpec):
        BoundarySpec.from_dict(data)


def test_boundary_variables_in_expressions():
    m = generate_regular_polygon(6, 2)
    by_expr = constraints_for(m, Condition.cross_lambda("expr:nu1, nu2"))
    by_name = constraints_for(m, Condition.cross_lambda("nu"))
    assert all(np.array_equal(a.basis, b.basis) for a, b in zip(by_expr, by_name))
