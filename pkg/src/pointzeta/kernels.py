"""Heat and Dirichlet kernels of -Laplacian + eps**2 with a point interaction at 0.

The heat kernel for x, y != 0 is

    e^{-eps^2 t} / (4 pi t)^{3/2} * [ exp(-|x-y|^2 / 4t)
        + (2t / (|x||y|)) * ( exp(-R^2/4t) - (1/lam) int_0^inf dw exp(-w/lam - (w+R)^2/4t) ) ]

with R = |x| + |y|.  The bracket multiplying exp(-R^2/4t) is evaluated after one
integration by parts,

    1 - (R/lam) int_0^inf dv exp(-(R/lam) v - a (v^2 + 2v))
      = int_0^inf dv 2a (v+1) exp(-(R/lam) v - a (v^2 + 2v)),    a = R^2 / 4t,

(w = R v), which is manifestly positive and free of cancellation as lam -> 0.
"""

from dataclasses import dataclass, replace
import math

import numpy as np
from scipy.special import erfcx

from .errors import DomainError
from .quadrature import (
    DEFAULT_TOLERANCE,
    ToleranceSpec,
    integrate_half_line,
    require_converged,
)
from .specfun import rgamma

__all__ = [
    "ImpurityConfig",
    "SphericalPoint",
    "CartesianPoint",
    "angular_overlap",
    "free_heat_kernel",
    "heat_kernel",
    "heat_kernel_spherical",
    "heat_kernel_erfc",
    "dirichlet_kernel",
    "vev_from_dirichlet_oracle",
    "HEAT_KERNEL_TOLERANCE",
    "ORACLE_TOLERANCE",
    "one_minus_overlap",
    "squared_distance",
]

HEAT_KERNEL_TOLERANCE = ToleranceSpec(relative=1e-11, absolute=0.0)


@dataclass(frozen=True)
class ImpurityConfig:
    """Physical parameters.

    lam : length; -lam is the s-wave scattering length, lam = 0 is the free theory
    epsilon : infrared cutoff mass
    kappa : mass scale of the regularized field
    xi : curvature coupling
    """

    lam: float
    epsilon: float = 0.0
    kappa: float = 1.0
    xi: float = 0.0

    def __post_init__(self):
        if not self.lam >= 0:
            raise DomainError(f"lambda must be >= 0 (no bound state), got {self.lam}")
        if not self.epsilon >= 0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be > 0, got {self.kappa}")
        if not math.isfinite(self.xi):
            raise DomainError("xi must be finite")

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class CartesianPoint:
    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        if self.x1 == 0 and self.x2 == 0 and self.x3 == 0:
            raise DomainError("the origin is excluded from the domain")

    @property
    def norm(self):
        return math.sqrt(self.x1 ** 2 + self.x2 ** 2 + self.x3 ** 2)

    def as_array(self):
        return np.array([self.x1, self.x2, self.x3])


@dataclass(frozen=True)
class SphericalPoint:
    r: float
    theta: float = math.pi / 2
    phi: float = 0.0

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError(f"r must be > 0 (origin excluded), got {self.r}")
        if not 0 < self.theta < math.pi:
            raise DomainError(f"theta must lie in (0, pi), got {self.theta}")
        if not math.isfinite(self.phi):
            raise DomainError("phi must be finite")

    def to_cartesian(self):
        st = math.sin(self.theta)
        return CartesianPoint(
            self.r * st * math.cos(self.phi),
            self.r * st * math.sin(self.phi),
            self.r * math.cos(self.theta),
        )


def angular_overlap(theta, theta_p, dphi):
    """S(theta, theta', phi - phi'): the cosine of the angle between two directions."""
    return (np.cos(theta - theta_p) * np.cos(0.5 * dphi) ** 2
            + np.cos(theta + theta_p) * np.sin(0.5 * dphi) ** 2)


def one_minus_overlap(theta, theta_p, dphi):
    """1 - S without cancellation for nearby directions."""
    return (2.0 * np.sin(0.5 * (theta - theta_p)) ** 2
            + 2.0 * np.sin(theta) * np.sin(theta_p) * np.sin(0.5 * dphi) ** 2)


def squared_distance(r, theta, phi, r_p, theta_p, phi_p):
    """|q - p|**2 in spherical coordinates, accurate when q and p nearly coincide."""
    return (r - r_p) ** 2 + 2.0 * r * r_p * one_minus_overlap(theta, theta_p, phi - phi_p)


def free_heat_kernel(dist2, t, epsilon=0.0):
    """Heat kernel of -Laplacian + eps**2 on R^3 at squared separation ``dist2``."""
    return np.exp(-epsilon ** 2 * t - dist2 / (4.0 * t)) / (4.0 * np.pi * t) ** 1.5


def _bracket_integrand(v, a, b):
    # 2a (v+1) exp(-b v - a (v^2 + 2v)),  b = R/lam
    return 2.0 * a * (v + 1.0) * np.exp(-b * v - a * v * (v + 2.0))


def _perturbative_bracket(t, radius_sum, lam, tol):
    """1 - (1/lam) e^{R^2/4t} int_0^inf dw exp(-w/lam - (w+R)^2/4t), by quadrature."""
    a = radius_sum ** 2 / (4.0 * t)
    b = radius_sum / lam
    res = integrate_half_line(lambda v: _bracket_integrand(v, a, b), tol,
                              scale=1.0 / (a + b))
    return require_converged(res, "heat-kernel w-integral").value


def _heat_kernel_core(dist2, rx, ry, t, cfg, tol):
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    value = free_heat_kernel(dist2, t)
    if cfg.lam > 0:
        radius_sum = rx + ry
        bracket = _perturbative_bracket(t, radius_sum, cfg.lam, tol)
        value += (2.0 * t / (rx * ry)) * math.exp(-radius_sum ** 2 / (4.0 * t)) \
            * bracket / (4.0 * math.pi * t) ** 1.5
    return math.exp(-cfg.epsilon ** 2 * t) * value


def heat_kernel(x, y, t, cfg, tol=None):
    """Heat kernel of A_eps between Cartesian points ``x`` and ``y`` at time ``t``."""
    tol = HEAT_KERNEL_TOLERANCE if tol is None else tol
    xa, ya = x.as_array(), y.as_array()
    dist2 = float(np.sum((xa - ya) ** 2))
    return _heat_kernel_core(dist2, x.norm, y.norm, t, cfg, tol)


def heat_kernel_spherical(q, p, t, cfg, tol=None):
    """Heat kernel of A_eps between spherical points ``q`` and ``p`` at time ``t``."""
    tol = HEAT_KERNEL_TOLERANCE if tol is None else tol
    dist2 = squared_distance(q.r, q.theta, q.phi, p.r, p.theta, p.phi)
    return _heat_kernel_core(float(dist2), q.r, p.r, t, cfg, tol)


def _erfc_bracket(radius_sum, t, lam):
    """1 - (sqrt(pi t)/lam) erfcx((R + 2t/lam) / (2 sqrt t))."""
    z = (radius_sum + 2.0 * t / lam) / (2.0 * np.sqrt(t))
    return 1.0 - np.sqrt(np.pi * t) / lam * erfcx(z)


def heat_kernel_erfc(dist2, rx, ry, t, lam, epsilon=0.0):
    """Closed form of the heat kernel (w-integral done with erfcx); vectorized.

    Used as an independent reference for :func:`heat_kernel`.
    """
    dist2, rx, ry, t = np.broadcast_arrays(*(np.asarray(z, float) for z in (dist2, rx, ry, t)))
    value = free_heat_kernel(dist2, t)
    if lam > 0:
        radius_sum = rx + ry
        bracket = _erfc_bracket(radius_sum, t, lam)
        value = value + (2.0 * t / (rx * ry)) * np.exp(-radius_sum ** 2 / (4.0 * t)) \
            * bracket / (4.0 * np.pi * t) ** 1.5
    return np.exp(-epsilon ** 2 * t) * value


# --- Dirichlet kernel ----------------------------------------------------

def _stencil_arrays(stencil):
    """Unpack [(coeff, q, p), ...] into arrays for vectorized evaluation."""
    coeff = np.array([c for c, _, _ in stencil], dtype=float)
    rq = np.array([q[0] for _, q, _ in stencil], dtype=float)
    rp = np.array([p[0] for _, _, p in stencil], dtype=float)
    dist2 = np.array([squared_distance(*q, *p) for _, q, p in stencil])
    return coeff, rq, rp, dist2


def _dirichlet_functionals(s, functionals, cfg, tol, diagonal):
    """Mellin transforms of linear combinations of heat kernels.

    ``functionals`` is a list of stencils; stencil k is a list of
    (coefficient, (r, theta, phi), (r', theta', phi')).  Returns an array with
    one entry per stencil of

        (1/Gamma(s)) int_0^inf dt t^{s-1} sum_j c_j K_t(q_j, p_j).

    The combination is formed inside the integrand, so finite-difference
    stencils are differentiated before, not after, the quadrature.
    """
    packed = [_stencil_arrays(st) for st in functionals]
    sizes = [len(p[0]) for p in packed]
    coeff, rq, rp, dist2 = (np.concatenate(z) for z in zip(*packed))
    owner = np.repeat(np.arange(len(functionals)), sizes)
    nfun = len(functionals)
    radius_sum = rq + rp
    eps2 = cfg.epsilon ** 2
    s = complex(s)

    def reduce(values):
        # values: (..., nterms) -> (..., nfun)
        out = np.zeros(values.shape[:-1] + (nfun,), dtype=values.dtype)
        for k in range(nfun):
            out[..., k] = values[..., owner == k].sum(axis=-1)
        return out

    def weight(t):
        return np.exp((s - 1.0) * np.log(t) - eps2 * t) / (4.0 * np.pi * t) ** 1.5

    # sum_j c_j e^{-a_j} = sum_j c_j expm1(-a_j) + sum_j c_j; exact, and free of
    # the O(1/h^2) cancellation inside difference stencils
    offsets = reduce(coeff[None, :])[0]

    def single(t):
        tt = t[:, None]
        terms = coeff * np.expm1(-dist2 / (4.0 * tt))
        return weight(t)[:, None] * (reduce(terms) + offsets)

    split = float(np.mean(rq) ** 2)
    scale = max(split, 1.0 / eps2)
    # t^{s-5/2} at t -> 0 on the diagonal
    power = (s - 2.5) if diagonal else None
    res_free = require_converged(
        integrate_half_line(single, tol, split=split, scale=scale, endpoint_power=power),
        "Dirichlet kernel (free part)",
    )
    total = np.asarray(res_free.value, dtype=complex)

    if cfg.lam > 0:
        # the w-integral in closed form keeps this a single vectorized t-integral
        inv_prod = 2.0 / (rq * rp)

        def pert(t):
            tt = t[:, None]
            terms = (coeff * inv_prod * tt * np.exp(-radius_sum ** 2 / (4.0 * tt))
                     * _erfc_bracket(radius_sum, tt, cfg.lam))
            return weight(t)[:, None] * reduce(terms)

        res_pert = require_converged(
            integrate_half_line(pert, tol, split=split, scale=scale),
            "Dirichlet kernel (point-interaction part)",
        )
        total = total + np.asarray(res_pert.value, dtype=complex)
    return total * rgamma(s)


def _check_dirichlet_args(s, cfg):
    if not cfg.epsilon > 0:
        raise DomainError("the Dirichlet kernel needs an infrared cutoff epsilon > 0")


def _as_tuple(q):
    return (q.r, q.theta, q.phi)


def dirichlet_kernel(s, q, p, cfg, tol=None):
    """s-th Dirichlet kernel A_eps^{-s}(q, p) via the Mellin transform of the heat kernel.

    Raises
    ------
    DomainError
        If epsilon = 0, or if q = p and Re s <= 3/2.
    """
    tol = DEFAULT_TOLERANCE if tol is None else tol
    _check_dirichlet_args(s, cfg)
    diagonal = (q.r, q.theta, q.phi % (2 * math.pi)) == (p.r, p.theta, p.phi % (2 * math.pi))
    if diagonal and not complex(s).real > 1.5:
        raise DomainError(f"on the diagonal the Dirichlet kernel needs Re s > 3/2, got s={s}")
    out = _dirichlet_functionals(s, [[(1.0, _as_tuple(q), _as_tuple(p))]], cfg, tol, diagonal)
    val = complex(out[0])
    return val.real if not isinstance(s, complex) else val


# --- finite-difference oracle for the regularized stress tensor -----------

FD_RELATIVE_STEP_R = 1e-4
FD_STEP_ANGLE = 1e-4
# second differences at h = 1e-4 amplify roundoff by ~1/h**2, so the
# stencil integrands carry ~1e-7 relative noise; ask for no more than that
ORACLE_TOLERANCE = ToleranceSpec(relative=1e-6, absolute=0.0)


def _shift(q, axis, delta):
    out = list(q)
    out[axis] += delta
    return tuple(out)


def _mixed_stencil(q, axis, h):
    """d/dq^i d/dp^i at p = q, central differences."""
    c = 1.0 / (4.0 * h * h)
    plus, minus = _shift(q, axis, h), _shift(q, axis, -h)
    return [(c, plus, plus), (-c, plus, minus), (-c, minus, plus), (c, minus, minus)]


def _second_stencil(q, axis, h):
    """d^2/(dq^i)^2 at fixed p = q."""
    c = 1.0 / (h * h)
    return [(c, _shift(q, axis, h), q), (-2.0 * c, q, q), (c, _shift(q, axis, -h), q)]


def _first_stencil(q, axis, h):
    c = 1.0 / (2.0 * h)
    return [(c, _shift(q, axis, h), q), (-c, _shift(q, axis, -h), q)]


def vev_from_dirichlet_oracle(u, q, cfg, tol=None):
    """Regularized stress-tensor VEV assembled from Dirichlet kernels by finite differences.

    Independent of the closed integral representation used in
    :mod:`pointzeta.stress`: it starts from the raw heat kernel, takes
    central differences in (q, p) and contracts them with the spherical
    metric and its Christoffel symbols.

    Requires Re u > 6 and epsilon > 0.  The default tolerance is
    ``ORACLE_TOLERANCE``.
    """
    from .stress import StressTensorDiagonal

    tol = ORACLE_TOLERANCE if tol is None else tol
    u = complex(u)
    if not u.real > 6:
        raise DomainError(f"the finite-difference oracle needs Re u > 6, got u={u}")
    if not cfg.epsilon > 0:
        raise DomainError("the oracle needs an infrared cutoff epsilon > 0")

    qt = _as_tuple(q)
    r, th = q.r, q.theta
    steps = (FD_RELATIVE_STEP_R * r, FD_STEP_ANGLE, FD_STEP_ANGLE)
    if not (th - steps[1] > 0 and th + steps[1] < math.pi):
        raise DomainError("theta too close to the axis for the angular stencil")
    if steps[0] < 1e-300:
        raise DomainError("radial step underflows")

    s_lo = (u - 1.0) / 2.0
    s_hi = (u + 1.0) / 2.0
    (d0,) = _dirichlet_functionals(s_lo, [[(1.0, qt, qt)]], cfg, tol, diagonal=True)
    stencils = (
        [_mixed_stencil(qt, i, steps[i]) for i in range(3)]
        + [_second_stencil(qt, i, steps[i]) for i in range(3)]
        + [_first_stencil(qt, i, steps[i]) for i in range(2)]
    )
    mr, mth, mph, srr, sth, sph, fr, fth = _dirichlet_functionals(
        s_hi, stencils, cfg, tol, diagonal=True)

    sin2 = math.sin(th) ** 2
    # inverse metric diag(1, 1/r^2, 1/(r^2 sin^2))
    contracted = mr + mth / r ** 2 + mph / (r ** 2 * sin2)
    # D_ij = d_ij - gamma^k_ij d_k; gamma^r_thth = -r, gamma^r_phph = -r sin^2,
    # gamma^th_phph = -sin cos
    d_rr = srr
    d_thth = sth + r * fr
    d_phph = sph + r * sin2 * fr + math.sin(th) * math.cos(th) * fth

    xi = cfg.xi
    k_u = cfg.kappa ** u
    trace_part = d0 - contracted
    t00 = k_u * ((0.25 + xi) * d0 + (0.25 - xi) * contracted)
    trr = k_u * ((0.25 - xi) * trace_part + (0.5 - xi) * mr - xi * d_rr)
    tthth = k_u * ((0.25 - xi) * r ** 2 * trace_part + (0.5 - xi) * mth - xi * d_thth)
    tphph = k_u * ((0.25 - xi) * r ** 2 * sin2 * trace_part + (0.5 - xi) * mph - xi * d_phph)
    return StressTensorDiagonal(complex(t00), complex(trr), complex(tthth), complex(tphph))
