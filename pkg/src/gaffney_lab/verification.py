"""Identity suites run by ``gaffney-lab verify``.

Each suite draws from a ``numpy.random.Generator`` seeded by the caller and
reports its worst relative residual against a fixed threshold.
"""
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from . import calculus
from .calculus import FemField, ScalarField
from .mesh import generate_domain, generate_structured_square
from .pushforward import orthogonal_invariance_residual, rectification_residual, rectify_flow
from .quadratic_forms import assemble, ibp_identity_residual
from .registry import DEFAULT_CORPUS, lookup_field

SUITES = ("pointwise-identity", "ibp-identity", "product-rule", "orthogonal-invariance",
          "rectification")


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    checks: int
    max_residual: float
    threshold: float

    @property
    def passed(self):
        return bool(self.max_residual <= self.threshold)


def random_orthogonal(rng, n):
    """Gram-Schmidt (via QR) of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def pointwise_identity_suite(rng, corpus=DEFAULT_CORPUS, points=100, fem_fields=50):
    worst, checks = 0.0, 0
    for name in corpus:
        f = lookup_field(name)
        x = rng.uniform(-1, 1, (points, f.dim))
        g = calculus.grad_at(f, x)
        rel = np.abs(calculus.pointwise_identity_residual(f, x)) / (1 + (g ** 2).sum((-2, -1)))
        worst = max(worst, float(rel.max()))
        checks += points
    m = generate_structured_square(8)
    bary = m.vertices[m.triangles].mean(axis=1)
    for _ in range(fem_fields):
        f = FemField(m, rng.standard_normal((m.n_vertices, 2)))
        for x in bary:
            g = calculus.grad_at(f, x)
            rel = abs(calculus.pointwise_identity_residual(f, x)) / (1 + (g ** 2).sum())
            worst = max(worst, float(rel))
        checks += len(bary)
    return SuiteResult("pointwise-identity", checks, worst, 1e-12)


def ibp_identity_suite(rng, fields=50):
    worst, checks = 0.0, 0
    for domain, k in (("square", 4), ("lshape", 2), ("hexagon", 2)):
        m = generate_domain(domain, k)
        A = assemble(m).A
        for _ in range(fields):
            f = FemField(m, rng.standard_normal((m.n_vertices, 2)))
            u = f.dofs
            worst = max(worst, float(ibp_identity_residual(m, f) / (1 + u @ (A @ u))))
            checks += 1
    return SuiteResult("ibp-identity", checks, worst, 1e-11)


def _poly_field(c):
    """Scalar polynomial with coefficient matrix ``c[i, j]`` of ``x^i y^j``."""
    P = np.polynomial.polynomial
    dx = P.polyder(c, axis=0)
    dy = P.polyder(c, axis=1)
    return ScalarField(lambda x: P.polyval2d(x[..., 0], x[..., 1], c),
                       lambda x: np.stack([P.polyval2d(x[..., 0], x[..., 1], dx),
                                           P.polyval2d(x[..., 0], x[..., 1], dy)], axis=-1))


def product_rule_suite(rng, pairs=50, degree=3):
    m = generate_domain("hexagon", 2)
    worst = 0.0
    for _ in range(pairs):
        cf = rng.standard_normal((degree + 1, degree + 1))
        cg = rng.standard_normal((degree + 1, degree + 1))
        f, g = _poly_field(cf), _poly_field(cg)
        fg = _poly_field(convolve2d(cf, cg))
        e = m.boundary_edges[rng.integers(len(m.boundary_edges))]
        a, b = m.vertices[list(e.endpoints)]
        x = a + rng.uniform() * (b - a)
        lhs = calculus.tangential_derivative(fg, m, e, 0, 1, x)
        rhs = (calculus.tangential_derivative(f, m, e, 0, 1, x) * g.value(x)
               + f.value(x) * calculus.tangential_derivative(g, m, e, 0, 1, x))
        scale = 1 + abs(lhs) + np.abs(fg.gradient(x)).max()
        worst = max(worst, abs(lhs - rhs) / scale)
    return SuiteResult("product-rule", pairs, float(worst), 1e-12)


def orthogonal_invariance_suite(rng, corpus=DEFAULT_CORPUS, tuples=20):
    worst, checks = 0.0, 0
    fields = [lookup_field(name) for name in corpus]
    for n in (2, 3):
        pool = [f for f in fields if f.dim == n]
        if not pool:
            continue
        for _ in range(tuples):
            f = pool[rng.integers(len(pool))]
            A = random_orthogonal(rng, n)
            b = rng.standard_normal(n)
            u = rng.uniform(-1, 1, n)
            res = orthogonal_invariance_residual(A, b, f, u)
            worst = max(worst, max(res) / (1 + (f.jacobian(u) ** 2).sum()))
            checks += 1
    return SuiteResult("orthogonal-invariance", checks, float(worst), 1e-10)


def rectification_suite(rng):
    """Closed-form shear flow, smooth-field residual and orientation of grad Phi(x0)."""
    shear = lookup_field("shear")
    fm = rectify_flow(shear, [0.0, 0.0], 0.5)
    pts = fm.grid(7)
    closed = max(float(np.abs(fm.psi(p) - [p[0], p[1] + p[0] ** 2 / 2]).max()) for p in pts)
    smooth = lookup_field("smooth_lambda")
    fm2 = rectify_flow(smooth, [0.0, 0.0], 0.3)
    extra = rng.uniform(-0.3, 0.3, (10, 2))
    resid = rectification_residual(fm2, smooth, np.vstack([fm2.grid(5), extra]))
    so = 0.0
    for f in (fm, fm2):
        J = np.linalg.inv(f.psi_and_jacobian(np.zeros(2))[1])
        so = max(so, float(np.abs(J.T @ J - np.eye(2)).max()), abs(np.linalg.det(J) - 1))
    # each check normalised by its own threshold
    worst = max(closed / 1e-9, resid / 1e-7, so / 1e-8)
    return SuiteResult("rectification", len(pts) + 35, worst, 1.0)


def run_suites(seed, suites=SUITES, corpus=DEFAULT_CORPUS):
    rng = np.random.default_rng(seed)
    runners = {
        "pointwise-identity": lambda: pointwise_identity_suite(rng, corpus),
        "ibp-identity": lambda: ibp_identity_suite(rng),
        "product-rule": lambda: product_rule_suite(rng),
        "orthogonal-invariance": lambda: orthogonal_invariance_suite(rng, corpus),
        "rectification": lambda: rectification_suite(rng),
    }
    return [runners[s]() for s in suites]
