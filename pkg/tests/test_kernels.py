import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pointzeta.errors import DomainError
from pointzeta.kernels import (
    CartesianPoint,
    ImpurityConfig,
    SphericalPoint,
    angular_overlap,
    dirichlet_kernel,
    free_heat_kernel,
    heat_kernel,
    heat_kernel_erfc,
    heat_kernel_spherical,
    one_minus_overlap,
    vev_from_dirichlet_oracle,
)
from pointzeta.quadrature import ToleranceSpec, integrate_half_line, integrate_interval
from pointzeta.specfun import gamma
from pointzeta.stress import t_regularized

coord = st.floats(-3.0, 3.0)


def _point(x):
    return CartesianPoint(*x)


def _random_spherical(rng):
    return SphericalPoint(rng.uniform(0.2, 3.0), rng.uniform(0.05, math.pi - 0.05),
                          rng.uniform(0.0, 2 * math.pi))


# --- types ---------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    {"lam": -1.0}, {"lam": 1.0, "epsilon": -0.1}, {"lam": 1.0, "kappa": 0.0},
    {"lam": 1.0, "xi": math.nan},
])
def test_config_validation(kwargs):
    with pytest.raises(DomainError):
        ImpurityConfig(**kwargs)


def test_points_exclude_origin():
    with pytest.raises(DomainError):
        SphericalPoint(0.0)
    with pytest.raises(DomainError):
        CartesianPoint(0.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        SphericalPoint(1.0, 0.0)


# --- heat kernel ----------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.tuples(coord, coord, coord), st.tuples(coord, coord, coord), st.floats(0.01, 5.0))
def test_heat_kernel_symmetric(x, y, t):
    if np.linalg.norm(x) < 1e-2 or np.linalg.norm(y) < 1e-2:
        return
    cfg = ImpurityConfig(lam=0.7, epsilon=0.3)
    a = heat_kernel(_point(x), _point(y), t, cfg)
    b = heat_kernel(_point(y), _point(x), t, cfg)
    assert a == pytest.approx(b, rel=1e-13)


def test_heat_kernel_weak_coupling_limit():
    x, y = CartesianPoint(0.3, -0.2, 0.9), CartesianPoint(-0.5, 0.4, 0.1)
    cfg = ImpurityConfig(lam=1e-8, epsilon=0.4)
    for t in (0.05, 0.5, 3.0):
        d2 = float(np.sum((x.as_array() - y.as_array()) ** 2))
        free = math.exp(-0.16 * t) * (4 * math.pi * t) ** -1.5 * math.exp(-d2 / (4 * t))
        assert heat_kernel(x, y, t, cfg) == pytest.approx(free, rel=1e-6)


def test_heat_kernel_free_branch_is_exact():
    x, y = CartesianPoint(1, 0, 0), CartesianPoint(0, 2, 0)
    cfg = ImpurityConfig(lam=0.0, epsilon=0.2)
    assert heat_kernel(x, y, 0.8, cfg) == pytest.approx(free_heat_kernel(5.0, 0.8, 0.2), rel=1e-15)


def test_heat_kernel_epsilon_factorizes():
    x, y = CartesianPoint(0.4, 0.1, -0.3), CartesianPoint(1.2, 0.0, 0.5)
    for t in (0.1, 1.0, 4.0):
        a = heat_kernel(x, y, t, ImpurityConfig(lam=1.3, epsilon=0.7))
        b = heat_kernel(x, y, t, ImpurityConfig(lam=1.3, epsilon=0.0))
        assert a == pytest.approx(math.exp(-0.49 * t) * b, rel=1e-13)


def test_heat_kernel_quadrature_matches_closed_form():
    rng = np.random.default_rng(3)
    for _ in range(30):
        q, p = _random_spherical(rng), _random_spherical(rng)
        t = rng.uniform(0.01, 10)
        lam = float(rng.choice([0.1, 1.0, 10.0]))
        cfg = ImpurityConfig(lam=lam, epsilon=0.3)
        dist2 = float(np.sum((q.to_cartesian().as_array() - p.to_cartesian().as_array()) ** 2))
        ref = float(heat_kernel_erfc(dist2, q.r, p.r, t, lam, 0.3))
        assert heat_kernel_spherical(q, p, t, cfg) == pytest.approx(ref, rel=1e-10)


def test_heat_kernel_positive():
    rng = np.random.default_rng(11)
    for i in range(200):
        lam = (0.1, 1.0, 10.0)[i % 3]
        q, p = _random_spherical(rng), _random_spherical(rng)
        t = rng.uniform(0.01, 10.0)
        assert heat_kernel_spherical(q, p, t, ImpurityConfig(lam=lam)) > 0


def test_spherical_agrees_with_cartesian():
    rng = np.random.default_rng(5)
    cfg = ImpurityConfig(lam=0.8, epsilon=0.2)
    for _ in range(20):
        q, p = _random_spherical(rng), _random_spherical(rng)
        t = rng.uniform(0.05, 5)
        a = heat_kernel_spherical(q, p, t, cfg)
        b = heat_kernel(q.to_cartesian(), p.to_cartesian(), t, cfg)
        assert a == pytest.approx(b, rel=1e-12)


def test_angular_overlap_special_cases():
    th = 0.7
    assert angular_overlap(th, th, 0.0) == pytest.approx(1.0, rel=1e-15)
    assert angular_overlap(th, math.pi - th, math.pi) == pytest.approx(-1.0, rel=1e-15)
    assert one_minus_overlap(th, th, 0.0) == 0.0


def test_coincident_angles_reduce_to_radial_distance():
    cfg = ImpurityConfig(lam=0.0)
    q, p = SphericalPoint(1.0, 0.9, 2.0), SphericalPoint(1.7, 0.9, 2.0)
    assert heat_kernel_spherical(q, p, 0.6, cfg) == pytest.approx(
        free_heat_kernel(0.49, 0.6), rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 3.1), st.floats(0.01, 3.1), st.floats(-6.0, 6.0))
def test_one_minus_overlap_consistent(a, b, d):
    assert 1 - angular_overlap(a, b, d) == pytest.approx(one_minus_overlap(a, b, d), abs=1e-14)


def test_perturbative_part_bounded_on_the_diagonal():
    cfg = ImpurityConfig(lam=10.0)
    q = SphericalPoint(1.0, 1.0, 0.5)
    t = 0.3
    free = lambda p: free_heat_kernel(float(np.sum((q.to_cartesian().as_array()
                                                    - p.to_cartesian().as_array()) ** 2)), t)
    vals = []
    for h in (1e-1, 1e-2, 1e-3, 1e-4, 0.0):
        p = SphericalPoint(1.0 + h, 1.0, 0.5)
        vals.append(heat_kernel_spherical(q, p, t, cfg) - free(p))
    assert all(math.isfinite(v) for v in vals)
    assert abs(vals[-2] - vals[-1]) <= 1e-3 * abs(vals[-1])


def test_semigroup_property():
    # x, y on the polar axis; the angular integral over the intermediate point
    # reduces to one over cos(alpha)
    lam, eps = 1.0, 0.3
    a, b = 0.8, 1.5
    t, s = 0.4, 0.6

    def kern(r1, r2, c, tt):
        d2 = r1 ** 2 + r2 ** 2 - 2 * r1 * r2 * c
        return heat_kernel_erfc(d2, r1, r2, tt, lam, eps)

    def radial(rho):
        vals = []
        for rr in rho:
            inner = integrate_interval(
                lambda c: kern(a, rr, c, t) * kern(rr, b, c, s), -1.0, 1.0,
                ToleranceSpec(relative=1e-9, absolute=0.0))
            vals.append(2 * math.pi * rr ** 2 * inner.value)
        return np.array(vals)

    lhs = integrate_half_line(radial, ToleranceSpec(relative=1e-7, absolute=0.0), split=2.0).value
    rhs = heat_kernel(CartesianPoint(0, 0, a), CartesianPoint(0, 0, b), t + s,
                      ImpurityConfig(lam=lam, epsilon=eps))
    assert lhs == pytest.approx(rhs, rel=1e-4)


# --- Dirichlet kernel -----------------------------------------------------

def test_dirichlet_free_diagonal_closed_form():
    cfg = ImpurityConfig(lam=0.0, epsilon=0.5)
    q = SphericalPoint(1.0)
    for s in (1.7, 2.0, 3.5, 2.5 + 0.4j):
        ref = (4 * math.pi) ** -1.5 * gamma(s - 1.5) / gamma(s) * 0.5 ** (3 - 2 * s)
        got = dirichlet_kernel(s, q, q, cfg)
        assert abs(got - ref) <= 1e-10 * abs(ref)


def test_dirichlet_tolerance_self_consistency():
    cfg = ImpurityConfig(lam=1.0, epsilon=0.5)
    q, p = SphericalPoint(1.0, 1.0, 0.2), SphericalPoint(1.4, 0.6, 1.1)
    a = dirichlet_kernel(2.0, q, p, cfg, ToleranceSpec(relative=1e-8, absolute=0.0))
    b = dirichlet_kernel(2.0, q, p, cfg, ToleranceSpec(relative=1e-10, absolute=0.0))
    assert a == pytest.approx(b, rel=1e-8)


def test_dirichlet_symmetric():
    cfg = ImpurityConfig(lam=0.6, epsilon=0.4)
    q, p = SphericalPoint(0.7, 1.0, 0.2), SphericalPoint(1.9, 2.2, 4.0)
    for s in (1.2, 2.0, 3.3 + 1j):
        a, b = dirichlet_kernel(s, q, p, cfg), dirichlet_kernel(s, p, q, cfg)
        assert abs(a - b) <= 1e-10 * abs(a)


def test_dirichlet_domain_errors():
    q = SphericalPoint(1.0)
    with pytest.raises(DomainError):
        dirichlet_kernel(1.0, q, q, ImpurityConfig(lam=1.0, epsilon=0.5))
    with pytest.raises(DomainError):
        dirichlet_kernel(2.0, q, SphericalPoint(2.0), ImpurityConfig(lam=1.0, epsilon=0.0))


# --- finite-difference oracle -----------------------------------------------

def test_oracle_matches_integral_form():
    cfg = ImpurityConfig(lam=1.0, epsilon=0.5, kappa=1.0, xi=0.0)
    q = SphericalPoint(1.0)
    oracle = vev_from_dirichlet_oracle(7.0, q, cfg)
    ref = t_regularized(7.0, q, cfg)
    for a, b in zip(oracle.as_tuple(), ref.as_tuple()):
        assert abs(a - b) <= 1e-4 * abs(b)


def test_oracle_off_equator_and_complex_u():
    cfg = ImpurityConfig(lam=0.7, epsilon=0.6, kappa=1.3, xi=0.2)
    q = SphericalPoint(1.2, 1.0, 0.3)
    u = 7.5 + 0.5j
    oracle = vev_from_dirichlet_oracle(u, q, cfg)
    ref = t_regularized(u, q, cfg)
    for a, b in zip(oracle.as_tuple(), ref.as_tuple()):
        assert abs(a - b) <= 1e-4 * abs(b)
    assert oracle.tphph == pytest.approx(math.sin(1.0) ** 2 * oracle.tthth, rel=1e-5)


def test_oracle_affine_in_xi():
    cfg = ImpurityConfig(lam=1.0, epsilon=0.5)
    q = SphericalPoint(1.0)
    r0, r3, r1 = (vev_from_dirichlet_oracle(7.0, q, cfg.with_(xi=x)) for x in (0.0, 0.3, 1.0))
    for a, b, c in zip(r0.as_tuple(), r3.as_tuple(), r1.as_tuple()):
        assert abs(b - (a + 0.3 * (c - a))) <= 1e-6


def test_oracle_domain():
    q = SphericalPoint(1.0)
    with pytest.raises(DomainError):
        vev_from_dirichlet_oracle(6.0, q, ImpurityConfig(lam=1.0, epsilon=0.5))
    with pytest.raises(DomainError):
        vev_from_dirichlet_oracle(7.0, q, ImpurityConfig(lam=1.0, epsilon=0.0))
