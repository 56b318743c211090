"""The ten acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one ``criterion N PASS|FAIL`` line; the lines are repeated
in the ``acceptance criteria`` section of the pytest terminal summary.
"""
import numpy as np
import pytest

from gaffney_lab.boundary import BoundarySpec, Condition, node_constraints, nullspace_basis
from gaffney_lab.calculus import FemField, grad_at, pointwise_identity_residual
from gaffney_lab.counterexamples import (blowup_ratios, harmonic_lambda_field, scalar_lambda_family,
                                         two_form_family)
from gaffney_lab.forms import d_two_form, delta_two_form
from gaffney_lab.mesh import generate_domain, generate_lshape, generate_structured_square
from gaffney_lab.pushforward import (orthogonal_invariance_residual, rectification_residual,
                                     rectify_flow)
from gaffney_lab.quadratic_forms import analytic_energies, assemble, ibp_identity_residual
from gaffney_lab.registry import DEFAULT_CORPUS, lookup_field
from gaffney_lab.spectrum import gaffney_constant, refinement_study
from gaffney_lab.verification import random_orthogonal

SEED = 20160601


def test_criterion_01_blowup_law(acceptance):
    with acceptance(1, "blow-up ratio 2n^2 on the unit square", 5):
        rows = blowup_ratios("intro_family", "square", [1, 2, 4, 8])
        for r in rows:
            assert r.ratio_grad_mass == pytest.approx(2 * r.n ** 2, rel=1e-6)


def test_criterion_02_pointwise_identity(acceptance):
    with acceptance(2, "pointwise identity on analytic and nodal fields", 10):
        rng = np.random.default_rng(SEED)
        for name in DEFAULT_CORPUS:
            f = lookup_field(name)
            x = rng.uniform(-1, 1, (100, f.dim))
            g = grad_at(f, x)
            rel = np.abs(pointwise_identity_residual(f, x)) / (1 + (g ** 2).sum((-2, -1)))
            assert rel.max() <= 1e-12, name
        m = generate_structured_square(8)
        bary = m.vertices[m.triangles].mean(axis=1)
        for _ in range(50):
            f = FemField(m, rng.standard_normal((m.n_vertices, 2)))
            for x in bary:
                g = grad_at(f, x)
                assert abs(pointwise_identity_residual(f, x)) <= 1e-12 * (1 + (g ** 2).sum())


def test_criterion_03_ibp_identity(acceptance):
    with acceptance(3, "integration-by-parts identity on three meshes", 10):
        rng = np.random.default_rng(SEED)
        for name, k in (("square", 4), ("lshape", 2), ("hexagon", 2)):
            m = generate_domain(name, k)
            A = assemble(m).A
            for _ in range(50):
                f = FemField(m, rng.standard_normal((m.n_vertices, 2)))
                u = f.dofs
                assert ibp_identity_residual(m, f) <= 1e-11 * (1 + u @ (A @ u)), name


def test_criterion_04_constant_lambda(acceptance):
    with acceptance(4, "constant-lambda equality and lambda_max < 1", 60):
        rng = np.random.default_rng(SEED)
        m = generate_structured_square(8)
        q = assemble(m)
        for _ in range(50):
            vals = rng.standard_normal((m.n_vertices, 2))
            vals[m.boundary_vertices, 1] = 0
            u = vals.ravel()
            a = u @ (q.A @ u)
            assert abs(a - u @ (q.D @ u)) <= 1e-11 * a
        base = generate_structured_square(2)
        study = refinement_study(base, BoundarySpec.uniform(base, Condition.cross_lambda((1.0, 0.0))), 4)
        assert max(e.F for e in study.estimates) <= 2000
        assert np.all(study.lambda_max < 1)
        assert np.all(study.differences >= 0)


def test_criterion_05_classical_conditions(acceptance):
    with acceptance(5, "classical conditions stay bounded", 120):
        base = generate_structured_square(2)
        lam = refinement_study(base, BoundarySpec.uniform(base, Condition.tangential0()), 3).lambda_max
        assert lam[-1] <= 1.05
        lshape = generate_lshape(1)
        mixed = BoundarySpec({t: Condition.tangential0() if t % 2 else Condition.normal0()
                              for t in range(1, 7)})
        lam = refinement_study(lshape, mixed, 4).lambda_max
        assert np.all(np.isfinite(lam))
        assert abs(lam[-1] - lam[-2]) / abs(lam[-1]) < 0.1


def test_criterion_06_free_boundary(acceptance):
    with acceptance(6, "free boundary: lambda_max grows without bound", 60):
        base = generate_structured_square(2)
        lam = refinement_study(base, BoundarySpec.uniform(base, Condition.free()), 4).lambda_max
        assert np.all(np.diff(lam) > 0)
        assert lam[-1] / lam[0] >= 2


def test_criterion_07_orthogonal_invariance(acceptance):
    with acceptance(7, "orthogonal invariance in two and three dimensions", 5):
        rng = np.random.default_rng(SEED)
        fields = [lookup_field(name) for name in DEFAULT_CORPUS]
        for n in (2, 3):
            pool = [f for f in fields if f.dim == n]
            for _ in range(20):
                f = pool[rng.integers(len(pool))]
                A = random_orthogonal(rng, n)
                u = rng.uniform(-1, 1, n)
                res = orthogonal_invariance_residual(A, rng.standard_normal(n), f, u)
                assert max(res) <= 1e-10 * (1 + (f.jacobian(u) ** 2).sum())


def test_criterion_08_rectification(acceptance):
    with acceptance(8, "flow rectification", 10):
        shear = lookup_field("shear")
        fm = rectify_flow(shear, [0.0, 0.0], 0.5)
        for p in fm.grid(7):
            assert np.abs(fm.psi(p) - [p[0], p[1] + p[0] ** 2 / 2]).max() <= 1e-9
        smooth = lookup_field("smooth_lambda")
        fm2 = rectify_flow(smooth, [0.0, 0.0], 0.3)
        pts = np.vstack([fm2.grid(5), np.random.default_rng(SEED).uniform(-0.3, 0.3, (10, 2))])
        assert rectification_residual(fm2, smooth, pts) <= 1e-7
        for chart in (fm, fm2):
            J = np.linalg.inv(chart.psi_and_jacobian(np.zeros(2))[1])
            assert np.abs(J.T @ J - np.eye(2)).max() <= 1e-8
            assert abs(np.linalg.det(J) - 1) <= 1e-8


def test_criterion_09_interpolation_of_conditions(acceptance):
    def theta(t):
        return Condition.cross_lambda(lambda x, nu, tau: np.cos(t) * nu + np.sin(t) * tau)

    with acceptance(9, "lambda = nu and lambda = tau reproduce the classical conditions", 30):
        m = generate_structured_square(4)
        for t, classical in ((0.0, Condition.tangential0()), (np.pi / 2, Condition.normal0())):
            a = BoundarySpec.uniform(m, theta(t))
            b = BoundarySpec.uniform(m, classical)
            Za = nullspace_basis(node_constraints(a, m), m).Z.toarray()
            Zb = nullspace_basis(node_constraints(b, m), m).Z.toarray()
            assert np.allclose(np.abs(Za), np.abs(Zb), atol=1e-14)
            assert abs(gaffney_constant(m, a).lambda_max
                       - gaffney_constant(m, b).lambda_max) <= 1e-10


def test_criterion_10_counterexample_exclusions(acceptance):
    with acceptance(10, "counterexamples to the excluded conditions", 5):
        rng = np.random.default_rng(SEED)
        pts = rng.uniform(-1, 1, (200, 3))
        for n in (1, 2, 4, 8):
            assert np.all(scalar_lambda_family(n)(pts) @ [0.0, 0.0, 1.0] == 0)
        for r in blowup_ratios("scalar_lambda_family", "square", [1, 2, 4, 8]):
            assert r.ratio_grad_mass == pytest.approx(2 * r.n ** 2, rel=1e-6)
        closes = []
        for sign in (1, -1):
            w = two_form_family(3, sign)
            size = 1 + np.linalg.norm(w(pts), axis=-1)
            closes.append(bool(np.all(np.abs(d_two_form(w, pts)) <= 1e-12 * size)
                               and np.all(np.abs(delta_two_form(w, pts)).max(-1) <= 1e-12 * size)))
        assert closes.count(True) == 1
        m = generate_structured_square(4)
        grad, curl_div, _ = analytic_energies(harmonic_lambda_field(), m)
        assert grad == pytest.approx(2 * m.area, rel=1e-12)
        assert curl_div == 0
