import numpy as np
import pytest

from gaffney_lab.boundary import BoundarySpec, Condition, validate_lambda
from gaffney_lab.calculus import curl_at, div_at, grad_at, interpolate
from gaffney_lab.counterexamples import (blowup_ratios, harmonic_lambda_field, intro_family,
                                         scalar_lambda_family, two_form_family)
from gaffney_lab.errors import InvalidParameter
from gaffney_lab.forms import d_two_form, delta_two_form, wedge_dx3
from gaffney_lab.mesh import Mesh, generate_lshape, generate_structured_square
from gaffney_lab.quadratic_forms import analytic_energies, assemble, quotient

rng = np.random.default_rng(2024)
PTS2 = rng.uniform(-1, 1, (200, 2))
PTS3 = rng.uniform(-1, 1, (200, 3))


def test_intro_family_values():
    assert np.array_equal(intro_family(1)([0.0, 0.0]), [1.0, 0.0])
    for n in (1, 2, 5):
        f = intro_family(n)
        assert np.allclose((f(PTS2) ** 2).sum(-1), np.exp(2 * n * PTS2[:, 0]), rtol=1e-14)
        g2 = (grad_at(f, PTS2) ** 2).sum((-2, -1))
        assert np.allclose(g2, 2 * n ** 2 * np.exp(2 * n * PTS2[:, 0]), rtol=1e-13)


@pytest.mark.parametrize("n", [1, 3, 8])
def test_planar_families_are_curl_and_div_free(n):
    for f, pts in ((intro_family(n), PTS2), (scalar_lambda_family(n), PTS3)):
        size = 1 + np.linalg.norm(f(pts), axis=-1)
        assert np.all(np.abs(div_at(f, pts)) <= 1e-12 * size)
        assert np.all(np.abs(curl_at(f, pts)).max(-1) <= 1e-12 * size)


@pytest.mark.parametrize("n", [1, 4])
def test_scalar_lambda_family(n):
    f = scalar_lambda_family(n)
    w = f(PTS3)
    assert np.all(w[:, 2] == 0)
    g2 = (grad_at(f, PTS3) ** 2).sum((-2, -1))
    assert np.allclose(g2, 2 * n ** 2 * np.exp(2 * n * PTS3[:, 0]), rtol=1e-13)
    assert f.check_partials(PTS3[:20]) <= 1e-6


@pytest.mark.parametrize("n", [1, 3, 8])
def test_two_form_family(n):
    closes = []
    for sign in (1, -1):
        w = two_form_family(n, sign)
        assert np.all(wedge_dx3(w, PTS3) == 0)
        assert np.allclose((w(PTS3) ** 2).sum(-1), np.exp(2 * n * PTS3[:, 0]), rtol=1e-14)
        size = 1 + np.linalg.norm(w(PTS3), axis=-1)
        d = np.abs(d_two_form(w, PTS3))
        delta = np.abs(delta_two_form(w, PTS3)).max(-1)
        closes.append(bool(np.all(d <= 1e-12 * size) and np.all(delta <= 1e-12 * size)))
    assert closes.count(True) == 1


def test_harmonic_lambda_field():
    f = harmonic_lambda_field()
    assert np.all(div_at(f, PTS2) == 0)
    assert np.all(curl_at(f, PTS2) == 0)
    m = generate_lshape(2)
    grad, curl_div, mass = analytic_energies(f, m)
    assert grad == pytest.approx(2 * m.area, rel=1e-13)
    assert curl_div == 0
    assert mass > 0


def _shifted_square(k, shift):
    m = generate_structured_square(k)
    data = m.to_dict()
    data["vertices"] = (m.vertices + shift).tolist()
    return Mesh.from_dict(data)


def test_harmonic_lambda_on_shifted_square():
    m = _shifted_square(4, 1.0)
    f = harmonic_lambda_field()
    spec = BoundarySpec.uniform(m, Condition.cross_lambda(lambda x, nu, tau: f(x)))
    report = validate_lambda(spec, m)
    assert report.ok
    assert min(report.min_norm.values()) == pytest.approx(np.sqrt(2), abs=1e-15)
    # the field satisfies its own boundary condition and has zero curl and div energy
    u = interpolate(f, m).dofs
    q = assemble(m)
    assert u @ q.D @ u == pytest.approx(0, abs=1e-13)
    assert u @ q.A @ u == pytest.approx(2 * m.area, rel=1e-13)


def test_blowup_intro_family():
    rows = blowup_ratios("intro_family", "square", [1, 2, 4, 8])
    for r in rows:
        assert r.ratio_grad_mass == pytest.approx(2 * r.n ** 2, rel=1e-8)
        assert r.ratio_gaffney == pytest.approx(r.ratio_grad_mass, rel=1e-8)
        assert r.converged
        assert r.domain == "square"
    assert rows[3].ratio_grad_mass / rows[2].ratio_grad_mass == pytest.approx(4, rel=1e-6)


def test_blowup_scalar_lambda_family_on_cube():
    rows = blowup_ratios("scalar_lambda_family", "square", [1, 2, 4])
    for r in rows:
        assert r.domain == "cube"
        assert r.ratio_grad_mass == pytest.approx(2 * r.n ** 2, rel=1e-8)


def test_blowup_two_form_signs():
    closed = blowup_ratios("two_form_family:-1", "square", [1, 2])
    open_ = blowup_ratios("two_form_family:+1", "square", [1, 2])
    for r in closed:
        assert r.ratio_gaffney == pytest.approx(2 * r.n ** 2, rel=1e-8)
    for r in open_:
        assert r.curl_div_energy > 1


def test_blowup_unknown_family():
    with pytest.raises(InvalidParameter):
        blowup_ratios("nope", "square", [1])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_discrete_blowup(n):
    m = generate_structured_square(64)
    q = assemble(m)
    u = interpolate(intro_family(n), m).dofs
    assert quotient(q, u).ratio >= n ** 2
