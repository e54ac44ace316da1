"""Small-rho and large-rho expansions of the conformal and non-conformal parts.

Each closed-form bracket is P(rho) + Q(rho) E(rho) with polynomial P, Q
(:data:`pointzeta.stress.BRACKETS`).  The expansion coefficients follow
exactly from it:

* rho -> 0:  E = -(log rho + gamma) + O(rho log rho), so the bracket is
  -Q(0) [log rho + gamma + c] + O(rho log rho) with c = -P(0)/Q(0).
* rho -> inf:  E ~ sum_m (-1)**m m! / rho**(m+1); the Laurent series of
  P + Q E in 1/rho is computed with exact rationals.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

from .errors import DomainError
from .specfun import EULER_GAMMA, asymptotic_exp_e_coefficients
from .stress import BRACKETS, COMPONENTS, PARTS, bracket_value, component_prefactor

__all__ = [
    "ExpansionRequest",
    "MAX_LARGE_RHO_TERMS",
    "LargeRhoSeries",
    "SmallRhoForm",
    "large_rho_series",
    "small_rho_form",
    "t_small_rho",
    "t_large_rho",
    "exact_component",
    "small_rho_window",
    "large_rho_window",
    "find_sign_changes",
]

MAX_LARGE_RHO_TERMS = 4


@dataclass(frozen=True)
class ExpansionRequest:
    """Which expansion to evaluate.

    ``order`` is the number of retained terms: 1..4 for large rho; the small-rho
    form (log + constant) is the single order-1 term.
    """

    component: str
    part: str
    order: int = 1

    def __post_init__(self):
        if self.component not in COMPONENTS:
            raise DomainError(f"component must be one of {COMPONENTS}, got {self.component!r}")
        if self.part not in PARTS:
            raise DomainError(f"part must be one of {PARTS}, got {self.part!r}")
        if not 1 <= self.order <= MAX_LARGE_RHO_TERMS:
            raise DomainError(f"order must lie in 1..{MAX_LARGE_RHO_TERMS}, got {self.order}")


@dataclass(frozen=True)
class LargeRhoSeries:
    """bracket ~ leading * sum_k coefficients[k] / rho**(power + k), coefficients[0] = 1."""

    power: int
    leading: Fraction
    coefficients: tuple


@dataclass(frozen=True)
class SmallRhoForm:
    """bracket ~ scale * (log rho + gamma + constant)."""

    scale: Fraction
    constant: Fraction


@lru_cache(maxsize=None)
def large_rho_series(part, component, terms=MAX_LARGE_RHO_TERMS):
    """Exact large-rho Laurent coefficients of one bracket."""
    p, q = BRACKETS[(part, component)]
    depth = terms + len(q) + 2
    e_coeffs = asymptotic_exp_e_coefficients(depth)
    # coefficient of rho**(-k) for k from -deg to depth
    series = {}
    for i, c in enumerate(p):
        series[-i] = series.get(-i, Fraction(0)) + c
    for i, c in enumerate(q):
        for m, e in enumerate(e_coeffs):
            k = m + 1 - i
            series[k] = series.get(k, Fraction(0)) + c * e
    powers = sorted(series)
    power = next(k for k in powers if series[k] != 0)
    if power + terms - 1 > depth - len(q):
        raise DomainError("not enough terms of the E expansion")
    leading = series[power]
    coeffs = tuple(series.get(power + k, Fraction(0)) / leading for k in range(terms))
    return LargeRhoSeries(power, leading, coeffs)


@lru_cache(maxsize=None)
def small_rho_form(part, component):
    p, q = BRACKETS[(part, component)]
    return SmallRhoForm(-q[0], -p[0] / q[0])


def _radius(rho, lam):
    if not rho > 0:
        raise DomainError(f"rho must be > 0, got {rho}")
    if not lam > 0:
        raise DomainError(f"lambda must be > 0, got {lam}")
    return 0.5 * rho * lam


def exact_component(rho, lam, part, component):
    """Closed-form value of one part/component at r = rho * lam / 2."""
    r = _radius(rho, lam)
    return component_prefactor(part, component, r) * bracket_value(part, component, rho)


def t_small_rho(rho, lam, req):
    """Leading small-rho form prefactor * [log rho + gamma + c]."""
    if req.order != 1:
        raise DomainError("the small-rho form has a single (log + constant) term")
    r = _radius(rho, lam)
    form = small_rho_form(req.part, req.component)
    pref = component_prefactor(req.part, req.component, r) * float(form.scale)
    return pref * (math.log(rho) + EULER_GAMMA + float(form.constant))


def t_large_rho(rho, lam, req):
    """Large-rho expansion truncated after ``req.order`` terms."""
    r = _radius(rho, lam)
    series = large_rho_series(req.part, req.component)
    pref = component_prefactor(req.part, req.component, r) * float(series.leading)
    total = math.fsum(float(c) / rho ** (series.power + k)
                      for k, c in enumerate(series.coefficients[:req.order]))
    return pref * total


# --- validity windows ------------------------------------------------------

WINDOW_TOLERANCE = 0.01


def _relative_deviation(approx, exact):
    return abs(approx - exact) / abs(exact)


def small_rho_window(part, component, lam=1.0, rho_min=1e-8, rho_max=10.0, points=361,
                     tolerance=WINDOW_TOLERANCE):
    """Largest grid rho* such that the small-rho form is within ``tolerance`` on (rho_min, rho*]."""
    req = ExpansionRequest(component, part)
    grid = np.logspace(math.log10(rho_min), math.log10(rho_max), points)
    best = None
    for rho in grid:
        if _relative_deviation(t_small_rho(rho, lam, req), exact_component(rho, lam, part, component)) > tolerance:
            break
        best = float(rho)
    return best


def large_rho_window(part, component, lam=1.0, rho_min=1e-1, rho_max=1e3, points=161,
                     tolerance=WINDOW_TOLERANCE, order=MAX_LARGE_RHO_TERMS):
    """Smallest grid rho** such that the large-rho sum is within ``tolerance`` on [rho**, rho_max]."""
    req = ExpansionRequest(component, part, order)
    grid = np.logspace(math.log10(rho_max), math.log10(rho_min), points)
    best = None
    for rho in grid:
        if _relative_deviation(t_large_rho(rho, lam, req), exact_component(rho, lam, part, component)) > tolerance:
            break
        best = float(rho)
    return best


def find_sign_changes(f, rho_min, rho_max, points=400, xtol=1e-12):
    """Roots of ``f`` on [rho_min, rho_max]: log-grid bracketing, then bisection."""
    grid = np.logspace(math.log10(rho_min), math.log10(rho_max), points)
    vals = [f(x) for x in grid]
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0:
            roots.append(float(a))
        elif fa * fb < 0:
            lo, hi, flo = a, b, fa
            while hi - lo > xtol * hi:
                mid = 0.5 * (lo + hi)
                fm = f(mid)
                if fm == 0:
                    lo = hi = mid
                    break
                if (fm < 0) == (flo < 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            roots.append(float(0.5 * (lo + hi)))
    if vals[-1] == 0:
        roots.append(float(grid[-1]))
    return roots
