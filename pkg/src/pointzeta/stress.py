"""Stress-energy VEV: regularized integrals, analytic continuation of T00,
its regular part at u = 0, and the renormalized closed forms.

Notation: q = (r, theta, phi), rho = 2 r / lam, y = 2 eps r, and
E(rho) = e**rho E1(rho) (:func:`pointzeta.specfun.exp_e`).
"""

from dataclasses import dataclass, fields
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

from .errors import DomainError, PoleError
from .quadrature import (
    DEFAULT_TOLERANCE,
    integrate_half_line,
    integrate_product_half_lines,
    require_converged,
)
from .specfun import exp_e, exp_e_n, frak_k, frak_k_array, rgamma

__all__ = [
    "StressTensorDiagonal",
    "LaurentAtOrigin",
    "ConformalSplit",
    "POLE_GUARD",
    "XI_CONFORMAL",
    "BRACKETS",
    "PREFACTORS",
    "t_regularized",
    "t00_continuation",
    "t00_pole_coefficient",
    "t00_laurent_at_zero",
    "t00_regular_part_elementary",
    "t_renormalized",
    "t00_renormalized",
    "conformal_parts",
    "bracket_value",
    "component_prefactor",
    "COMPONENTS",
    "PARTS",
]

POLE_GUARD = 1e-8
XI_CONFORMAL = 1.0 / 6.0
_FOUR_PI_32 = (4.0 * math.pi) ** 1.5


@dataclass(frozen=True)
class StressTensorDiagonal:
    """Nonvanishing components T_00, T_rr, T_thth, T_phph (coordinate basis)."""

    t00: complex
    trr: complex
    tthth: complex
    tphph: complex

    def _zip(self, other, op):
        return StressTensorDiagonal(*(op(getattr(self, f.name), getattr(other, f.name))
                                      for f in fields(self)))

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __mul__(self, c):
        return StressTensorDiagonal(*(c * getattr(self, f.name) for f in fields(self)))

    __rmul__ = __mul__

    def as_tuple(self):
        return (self.t00, self.trr, self.tthth, self.tphph)

    def real(self):
        return StressTensorDiagonal(*(complex(v).real for v in self.as_tuple()))

    def max_abs(self):
        return max(abs(v) for v in self.as_tuple())


@dataclass(frozen=True)
class LaurentAtOrigin:
    """f(u) = pole_coefficient / u + regular_value + O(u)."""

    pole_coefficient: float
    regular_value: float

    def __post_init__(self):
        if not (math.isfinite(self.pole_coefficient) and math.isfinite(self.regular_value)):
            raise DomainError("Laurent coefficients must be finite")


@dataclass(frozen=True)
class ConformalSplit:
    """T_ren(xi) = conformal + (xi - 1/6) * nonconformal."""

    conformal: StressTensorDiagonal
    nonconformal: StressTensorDiagonal

    def combine(self, xi):
        return self.conformal + (xi - XI_CONFORMAL) * self.nonconformal


def _check_u(u, lower):
    u = complex(u)
    if not u.real > lower:
        raise DomainError(f"requires Re u > {lower}, got u={u}")
    return u


def _check_regularized_cfg(cfg):
    if not cfg.epsilon > 0:
        raise DomainError("the regularized tensor needs an infrared cutoff epsilon > 0")


# --- regularized integral forms ---------------------------------------------

def _free_brackets(tau, u, xi, ex):
    """tau-only parts of the three brackets (00, rr, thth); ``ex`` = exp(-1/tau)."""
    b00 = ((0.25 - 2 * xi) + (0.25 + xi) * u / 2
           + ((0.5 - 2 * xi) * (tau ** 2 + 1) + (0.5 - 4 * xi) * tau + (0.25 + xi) * tau * u) * ex)
    brr = (-(0.25 - 2 * xi) + (0.25 - xi) * u / 2
           + ((0.5 - 4 * xi) * tau ** 2 + (0.5 - 2 * xi) * (tau + 1) + (0.25 - xi) * tau * u) * ex)
    bth = (-(0.25 - 2 * xi) + (0.25 - xi) * u / 2
           - ((0.5 - 4 * xi) * (tau + 1) * tau + (0.5 - 2 * xi) * (tau + 1) - (0.25 - xi) * tau * u) * ex)
    return b00, brr, bth


def _v_brackets(tau, v, u, xi):
    """v-integrand polynomials, signed so that bracket = free - rho * int e^{...} g."""
    w = tau + v + 1.0
    g00 = (0.5 - 2 * xi) * w ** 2 - tau / 2 + (0.25 + xi) * tau * u
    grr = (0.5 - 2 * xi) * (w ** 2 - tau) - 2 * xi * tau ** 2 + (0.25 - xi) * tau * u
    gth = -((0.5 - 2 * xi) * w ** 2 - 2 * xi * w * tau - (0.25 - xi) * tau * u)
    return g00, grr, gth


def t_regularized(u, q, cfg, tol=None):
    """Regularized VEV <T_mu nu> for Re u > 4 from its (tau, v) integral form.

    The tau-integrand carries tau**(u/2 - 3) at 0 and exp(-eps**2 r**2 tau) at
    infinity; the v-integral weight is exp(-(v+1)**2/tau - rho v).  With
    lam = 0 the v-terms and the exp(-1/tau) terms cancel exactly and are dropped.
    """
    tol = DEFAULT_TOLERANCE if tol is None else tol
    u = _check_u(u, 4)
    _check_regularized_cfg(cfg)
    r, xi = q.r, cfg.xi
    er2 = (cfg.epsilon * r) ** 2
    outer_scale = max(1.0, 1.0 / er2)

    def weight(tau):
        return np.exp((u / 2 - 3) * np.log(tau) - er2 * tau)

    if cfg.lam == 0:
        def f(tau):
            b = _free_brackets(tau, u, xi, 0.0)
            return weight(tau)[:, None] * np.stack([np.broadcast_to(x, tau.shape) for x in b], axis=-1)

        res = integrate_half_line(f, tol, split=1.0, scale=outer_scale, endpoint_power=u / 2 - 3)
    else:
        rho = 2.0 * r / cfg.lam

        def f2(tau, v):
            with np.errstate(under="ignore"):
                ex = math.exp(-1.0 / tau)
                free = np.array(_free_brackets(tau, u, xi, ex))
                gauss = np.exp(-((v + 1.0) ** 2) / tau - rho * v)
                g = np.stack(_v_brackets(tau, v, u, xi), axis=-1)
                # rho e^{-rho v} integrates to 1, which carries the tau-only part
                body = rho * np.exp(-rho * v)[:, None] * free - rho * gauss[:, None] * g
            return weight(np.array([tau]))[0] * body

        res = integrate_product_half_lines(
            f2, tol, outer_split=1.0, outer_scale=outer_scale,
            inner_scale=min(1.0, 1.0 / rho), outer_endpoint_power=u / 2 - 3)
    i00, irr, ith = require_converged(res, "regularized stress tensor").value
    pref = cfg.kappa ** u * rgamma((u + 1) / 2) / _FOUR_PI_32
    t00 = pref * r ** (u - 4) * i00
    trr = pref * r ** (u - 4) * irr
    tthth = pref * r ** (u - 2) * ith
    return StressTensorDiagonal(complex(t00), complex(trr), complex(tthth),
                                complex(math.sin(q.theta) ** 2 * tthth))


# --- analytic continuation of T00 -----------------------------------------

def _distance_to_poles(u):
    # poles at u = 4, 2, 0, -2, ...
    if u.real > 4 + 1:
        return abs(u - 4)
    k = min(math.floor((4 - u.real) / 2 + 0.5), 10 ** 9)
    k = max(k, 0)
    return abs(u - (4 - 2 * k))


def t00_continuation(u, q, cfg, tol=None):
    """Meromorphic continuation of the regularized T00 to all complex u.

    Simple poles at u = 4, 2, 0, -2, ...; one v-quadrature over weighted
    Bessel functions of orders 2 - u/2, 1 - u/2, -u/2.

    Raises
    ------
    PoleError
        If u lies within ``POLE_GUARD`` of the pole set.
    """
    tol = DEFAULT_TOLERANCE if tol is None else tol
    real_input = not isinstance(u, complex)
    u = complex(u)
    _check_regularized_cfg(cfg)
    if _distance_to_poles(u) < POLE_GUARD:
        raise PoleError(f"u={u} is within {POLE_GUARD} of a pole of the continuation")
    eps, kappa, xi, r = cfg.epsilon, cfg.kappa, cfg.xi, q.r
    rg = rgamma((u + 1) / 2)
    # Gamma(u/2 - 2) from the reciprocal, finite off the pole set
    first = (eps ** 4 / rgamma(u / 2 - 2) * rg / _FOUR_PI_32 * (kappa / eps) ** u
             * ((0.25 - 2 * xi) + (0.25 + xi) * u / 2))
    y = 2.0 * eps * r
    s2, s1, s0 = 2 - u / 2, 1 - u / 2, -u / 2
    c1 = (0.5 - 4 * xi) + (0.25 + xi) * u
    bracket = ((0.25 - xi) * frak_k(s2, y) + c1 * frak_k(s1, y) + (1 - 4 * xi) * frak_k(s0, y))
    if cfg.lam > 0:
        rho = 2.0 * r / cfg.lam

        def g(v):
            w = v + 1.0
            yw = y * w
            return (np.exp(-rho * v) * w ** (u - 2)
                    * ((1 - 4 * xi) * w ** 2 * frak_k_array(s0, yw)
                       + ((1 - 4 * xi) * w - 0.5 + (0.25 + xi) * u) * frak_k_array(s1, yw)
                       + (0.25 - xi) * frak_k_array(s2, yw)))

        res = integrate_half_line(g, tol, scale=1.0 / (rho + y))
        bracket -= rho * require_converged(res, "continuation v-integral").value
    else:
        # the free theory keeps the first line only
        bracket = 0.0
    second = 2 ** (u / 2) * kappa ** u * rg / (_FOUR_PI_32 * r ** (4 - u)) * bracket
    val = complex(first + second)
    return val.real if real_input else val


def t00_pole_coefficient(cfg):
    """Residue of T00 at u = 0: eps**4 (1 - 8 xi) / (32 pi**2)."""
    return cfg.epsilon ** 4 * (1 - 8 * cfg.xi) / (32 * math.pi ** 2)


def _free_regular_part(cfg):
    eps, xi = cfg.epsilon, cfg.xi
    return eps ** 4 / (8 * math.pi ** 2) * ((5.0 / 16 - xi)
                                            + (0.25 - 2 * xi) * math.log(2 * cfg.kappa / eps))


def t00_laurent_at_zero(q, cfg, tol=None):
    """Pole coefficient and regular part of T00 at u = 0.

    The regular part is evaluated in the form where the zero-order Bessel
    terms appear as differences K0(y) - K0(y (v+1)); every term then has a
    finite eps -> 0 limit.
    """
    tol = DEFAULT_TOLERANCE if tol is None else tol
    _check_regularized_cfg(cfg)
    xi, r = cfg.xi, q.r
    y = 2.0 * cfg.epsilon * r
    bracket = (0.25 - xi) * frak_k(2, y) + (0.5 - 4 * xi) * frak_k(1, y)
    if cfg.lam > 0:
        rho = 2.0 * r / cfg.lam
        k0 = frak_k(0, y)

        def g(v):
            w = v + 1.0
            yw = y * w
            return np.exp(-rho * v) / w ** 2 * (
                (1 - 4 * xi) * w ** 2 * (k0 - frak_k_array(0, yw).real)
                - ((1 - 4 * xi) * w - 0.5) * frak_k_array(1, yw).real
                - (0.25 - xi) * frak_k_array(2, yw).real)

        res = integrate_half_line(g, tol, scale=1.0 / (rho + y))
        bracket += rho * require_converged(res, "regular-part v-integral").value
    else:
        bracket = 0.0
    regular = _free_regular_part(cfg) + bracket / (8 * math.pi ** 2 * r ** 4)
    return LaurentAtOrigin(t00_pole_coefficient(cfg), float(regular))


def t00_regular_part_elementary(q, cfg, tol=None):
    """Regular part in the form with bare K0 terms (before subtracting
    rho int e^{-rho v} dv = 1).  Equivalent to :func:`t00_laurent_at_zero`."""
    tol = DEFAULT_TOLERANCE if tol is None else tol
    _check_regularized_cfg(cfg)
    xi, r = cfg.xi, q.r
    y = 2.0 * cfg.epsilon * r
    rho = 2.0 * r / cfg.lam
    bracket = ((0.25 - xi) * frak_k(2, y) + (0.5 - 4 * xi) * frak_k(1, y)
               + (1 - 4 * xi) * frak_k(0, y))

    def g(v):
        w = v + 1.0
        yw = y * w
        return np.exp(-rho * v) / w ** 2 * (
            (1 - 4 * xi) * w ** 2 * frak_k_array(0, yw).real
            + ((1 - 4 * xi) * w - 0.5) * frak_k_array(1, yw).real
            + (0.25 - xi) * frak_k_array(2, yw).real)

    res = integrate_half_line(g, tol, scale=1.0 / (rho + y))
    bracket -= rho * require_converged(res, "regular-part v-integral").value
    return _free_regular_part(cfg) + bracket / (8 * math.pi ** 2 * r ** 4)


# --- renormalized closed forms --------------------------------------------

F = Fraction
# bracket = P(rho) + Q(rho) E(rho); coefficient tuples in ascending powers of rho
BRACKETS = {
    ("conformal", "t00"): ((F(0), F(1)), (F(1), F(-1), F(-1))),
    ("conformal", "trr"): ((F(1),), (F(-1), F(-1))),
    ("conformal", "tthth"): ((F(1), F(-1)), (F(-2), F(0), F(1))),
    ("nonconformal", "t00"): ((F(3), F(-1)), (F(2), F(-2), F(1))),
    ("nonconformal", "trr"): ((F(1),), (F(2), F(-1))),
    ("nonconformal", "tthth"): ((F(4), F(-1)), (F(4), F(-3), F(1))),
}
# prefactor = coeff / (pi**2 r**power)
PREFACTORS = {
    ("conformal", "t00"): (F(1, 24), 4),
    ("conformal", "trr"): (F(1, 24), 4),
    ("conformal", "tthth"): (F(-1, 48), 2),
    ("nonconformal", "t00"): (F(-1, 4), 4),
    ("nonconformal", "trr"): (F(-1, 2), 4),
    ("nonconformal", "tthth"): (F(1, 4), 2),
}
del F

COMPONENTS = ("t00", "trr", "tthth")
PARTS = ("conformal", "nonconformal")


def _poly(coeffs, x):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + float(c)
    return acc


# Above this rho, P + Q E cancels from O(rho**deg) down to O(rho**-k); the
# brackets are then evaluated in the cancellation-free form below.
STABLE_SWITCH = 1.5


@lru_cache(maxsize=256)
def _large_rho_form(p, q):
    """Exact rewrite P + Q E_1 = L(1/rho) + c Q(rho) E_n(rho) / rho**(n-1).

    Uses E_1 = sum_{m<n-1} (-1)**m m! / rho**(m+1) + (-1)**(n-1) (n-1)! E_n / rho**(n-1)
    (repeated E_k = (1 - k E_{k+1}) / rho), with n chosen so that all growing
    terms cancel exactly inside the rational Laurent polynomial L.
    Returns (L as ((power, coeff), ...), n, c).
    """
    depth = len(q) + len(p) + 8
    e_coeffs = [Fraction((-1) ** m * math.factorial(m)) for m in range(depth)]

    def laurent(terms):
        series = {}
        for i, c in enumerate(p):
            series[-i] = series.get(-i, Fraction(0)) + c
        for i, c in enumerate(q):
            for m in range(terms):
                k = m + 1 - i
                series[k] = series.get(k, Fraction(0)) + c * e_coeffs[m]
        return series

    full = laurent(depth)
    reliable = depth - len(q)
    nonzero = [k for k in sorted(full) if k <= reliable and full[k] != 0]
    if not nonzero:
        raise DomainError("bracket vanishes identically at large rho")
    lead = nonzero[0]
    n = max(2, len(q) - 1 + lead)
    poly = laurent(n - 1)
    if any(c != 0 for k, c in poly.items() if k < lead):
        raise ArithmeticError("growing terms failed to cancel")
    terms = tuple((k, c) for k, c in sorted(poly.items()) if c != 0)
    return terms, n, Fraction((-1) ** (n - 1) * math.factorial(n - 1))


def _bracket(p, q, rho, e_value=None):
    if rho > STABLE_SWITCH:
        terms, n, c = _large_rho_form(p, q)
        tail = float(c) * _poly(q, rho) * exp_e_n(n, rho) / rho ** (n - 1)
        return math.fsum([float(a) / rho ** k for k, a in terms] + [tail])
    e_value = exp_e(rho) if e_value is None else e_value
    return _poly(p, rho) + _poly(q, rho) * e_value


def bracket_value(part, component, rho, e_value=None):
    """P(rho) + Q(rho) E(rho) for one closed-form bracket."""
    p, q = BRACKETS[(part, component)]
    return _bracket(p, q, rho, e_value)


def component_prefactor(part, component, r):
    coeff, power = PREFACTORS[(part, component)]
    return float(coeff) / (math.pi ** 2 * r ** power)


def _check_renormalized_args(r, lam):
    if not lam > 0:
        raise DomainError(f"the renormalized tensor needs lambda > 0, got {lam}")
    if not r > 0:
        raise DomainError(f"r must be > 0, got {r}")


def conformal_parts(q, lam):
    """Conformal and non-conformal parts of the renormalized tensor at ``q``."""
    r = q.r
    _check_renormalized_args(r, lam)
    rho = 2.0 * r / lam
    e = exp_e(rho)
    sin2 = math.sin(q.theta) ** 2
    out = []
    for part in PARTS:
        vals = [component_prefactor(part, c, r) * bracket_value(part, c, rho, e)
                for c in COMPONENTS]
        out.append(StressTensorDiagonal(vals[0], vals[1], vals[2], sin2 * vals[2]))
    return ConformalSplit(*out)


def t00_renormalized(r, lam, xi):
    """Renormalized energy density from its single closed form."""
    _check_renormalized_args(r, lam)
    rho = 2.0 * r / lam
    x = Fraction(xi)  # exact, so the large-rho rewrite cancels exactly
    p = (1 - 6 * x, 2 * x)
    q = ((1 - 4 * x), -(1 - 4 * x), -2 * x)
    return _bracket(p, q, rho) / (8 * math.pi ** 2 * r ** 4)


def t_renormalized(q, lam, xi):
    """Renormalized VEV (eps -> 0 of the regular part at u = 0); all real.

    T00 comes from its own closed form, the other components from the
    conformal decomposition.
    """
    split = conformal_parts(q, lam)
    full = split.combine(xi)
    return StressTensorDiagonal(t00_renormalized(q.r, lam, xi), full.trr, full.tthth, full.tphph)
