"""
Closed-form families showing that the Gaffney inequality fails without an
admissible boundary condition, and the blow-up ratio runner.

The planar family ``w_n = (e^{n x1} cos(n x2), -e^{n x1} sin(n x2))`` is
curl- and divergence-free with ``|grad w_n|^2 = 2 n^2 |w_n|^2`` pointwise, so
the ratio of gradient energy to mass is ``2 n^2`` on every domain.
"""
from dataclasses import dataclass

import numpy as np

from .calculus import AnalyticField, curl_from_grad, div_from_grad
from .errors import InvalidParameter
from .forms import TwoForm3, d_two_form, delta_two_form
from .mesh import generate_domain
from .quadrature import integrate_box, integrate_mesh

__all__ = ["intro_family", "scalar_lambda_family", "two_form_family",
           "harmonic_lambda_field", "BlowupRow", "blowup_ratios", "FAMILIES"]


def _exp_cos_sin(x, n):
    e = np.exp(n * x[..., 0])
    return e, np.cos(n * x[..., 1]), np.sin(n * x[..., 1])


def intro_family(n: int) -> AnalyticField:
    if n < 1:
        raise InvalidParameter(f"family index must be >= 1, got {n}")

    def value(x):
        e, c, s = _exp_cos_sin(x, n)
        return np.stack([e * c, -e * s], axis=-1)

    def partials(x):
        e, c, s = _exp_cos_sin(x, n)
        return np.stack([np.stack([n * e * c, -n * e * s], axis=-1),
                         np.stack([-n * e * s, -n * e * c], axis=-1)], axis=-2)

    return AnalyticField(2, value, partials, f"intro_family:{n}")


def scalar_lambda_family(n: int) -> AnalyticField:
    """The planar family padded with a zero third component; orthogonal to ``(0, 0, 1)``."""
    if n < 1:
        raise InvalidParameter(f"family index must be >= 1, got {n}")

    def value(x):
        e, c, s = _exp_cos_sin(x, n)
        return np.stack([e * c, -e * s, np.zeros_like(e)], axis=-1)

    def partials(x):
        e, c, s = _exp_cos_sin(x, n)
        z = np.zeros_like(e)
        return np.stack([np.stack([n * e * c, -n * e * s, z], axis=-1),
                         np.stack([-n * e * s, -n * e * c, z], axis=-1),
                         np.stack([z, z, z], axis=-1)], axis=-2)

    return AnalyticField(3, value, partials, f"scalar_lambda_family:{n}")


def two_form_family(n: int, sign: int) -> TwoForm3:
    """``e^{n x1} cos(n x2) dx1^dx3 + sign * e^{n x1} sin(n x2) dx2^dx3``."""
    if sign not in (1, -1):
        raise InvalidParameter(f"sign must be +1 or -1, got {sign}")
    if n < 1:
        raise InvalidParameter(f"family index must be >= 1, got {n}")

    def value(x):
        e, c, s = _exp_cos_sin(x, n)
        return np.stack([np.zeros_like(e), e * c, sign * e * s], axis=-1)

    def partials(x):
        e, c, s = _exp_cos_sin(x, n)
        z = np.zeros_like(e)
        return np.stack([np.stack([z, z, z], axis=-1),
                         np.stack([n * e * c, -n * e * s, z], axis=-1),
                         np.stack([sign * n * e * s, sign * n * e * c, z], axis=-1)], axis=-2)

    return TwoForm3(value, partials, f"two_form_family:{n}:{sign:+d}")


def harmonic_lambda_field() -> AnalyticField:
    """``(x2, x1)``: curl- and divergence-free, nonvanishing away from the origin."""
    def value(x):
        return np.stack([x[..., 1], x[..., 0]], axis=-1)

    def partials(x):
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 1] = 1.0
        out[..., 1, 0] = 1.0
        return out

    return AnalyticField(2, value, partials, "harmonic_lambda")


FAMILIES = {
    "intro_family": lambda n: intro_family(n),
    "scalar_lambda_family": lambda n: scalar_lambda_family(n),
    "two_form_family:+1": lambda n: two_form_family(n, 1),
    "two_form_family:-1": lambda n: two_form_family(n, -1),
}


def _densities(member, x):
    """Columns: |grad|^2, |w|^2, |curl|^2 + |div|^2 (or |d|^2 + |delta|^2)."""
    g = member.jacobian(x)
    grad = (g ** 2).sum(axis=(-2, -1))
    mass = (member(x) ** 2).sum(axis=-1)
    if isinstance(member, TwoForm3):
        rest = d_two_form(member, x) ** 2 + (delta_two_form(member, x) ** 2).sum(-1)
    else:
        rest = (curl_from_grad(g) ** 2).sum(-1) + div_from_grad(g) ** 2
    return np.stack([grad, mass, rest], axis=-1)


@dataclass(frozen=True)
class BlowupRow:
    family: str
    domain: str
    n: int
    ratio_grad_mass: float
    ratio_gaffney: float
    quad_err: float
    curl_div_energy: float
    converged: bool


def blowup_ratios(family: str, domain: str, ns, rtol=1e-10) -> list[BlowupRow]:
    """Energy ratios of a registered family for each ``n`` in ``ns``.

    Planar families are integrated over the named 2D benchmark domain with
    composite triangle rules; 3D families over the unit cube.
    """
    if family not in FAMILIES:
        raise InvalidParameter(f"unknown family {family!r}; known: {sorted(FAMILIES)}")
    rows = []
    for n in ns:
        member = FAMILIES[family](int(n))
        planar = isinstance(member, AnalyticField) and member.dim == 2
        if planar:
            mesh = generate_domain(domain, 2)
            res = integrate_mesh(lambda x: _densities(member, x), mesh, rtol=rtol)
            dom = domain
        else:
            res = integrate_box(lambda x: _densities(member, x), [0, 0, 0], [1, 1, 1], rtol=rtol)
            dom = "cube"
        grad, mass, rest = res.value
        rows.append(BlowupRow(family, dom, int(n), float(grad / mass), float(grad / (rest + mass)),
                              float(res.error / max(abs(grad), 1e-300)), float(rest),
                              bool(res.converged)))
    return rows
