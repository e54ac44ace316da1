"""Special functions: complex Gamma, K_nu of complex order, y**s K_s(y), e**x E1(x).

The Bessel routines evaluate

    K_nu(y) = int_0^inf exp(-y cosh t) cosh(nu t) dt

with the trapezoidal rule.  The integrand is entire and even in ``t``, so the
rule converges geometrically in the step size; the step is halved until two
successive sums agree.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import cmath
import math

import numpy as np

from .errors import BesselOverflowError, DomainError, PoleError

__all__ = [
    "EULER_GAMMA",
    "SeriesTruncation",
    "gamma",
    "rgamma",
    "bessel_k",
    "frak_k",
    "frak_k_array",
    "harmonic_number",
    "exp_e",
    "exp_e_n",
    "exp_e_series",
    "exp_e_asymptotic",
    "asymptotic_exp_e_coefficients",
    "EXP_E_SWITCH",
]

EULER_GAMMA = 0.57721566490153286061

# Godfrey's g = 607/128, 15-term Lanczos coefficients.
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SeriesTruncation:
    term_count: int
    error_bound: float

    def __post_init__(self):
        if self.term_count < 1:
            raise DomainError("a truncated series keeps at least one term")
        if not self.error_bound >= 0.0:
            raise DomainError("error_bound must be non-negative")


def _is_nonpositive_integer(z):
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def _log_gamma_lanczos(z):
    """log Gamma(z) for Re z >= 0.5 (principal branch up to 2 pi i)."""
    z = z - 1.0
    acc = _LANCZOS_C[0]
    for k, c in enumerate(_LANCZOS_C[1:], start=1):
        acc += c / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def _sinpi(z):
    """sin(pi z) with the real part reduced first; exact near the integers."""
    n = round(z.real)
    f = complex(z.real - n, z.imag)
    s = cmath.sin(math.pi * f)
    return -s if n % 2 else s


def _gamma_complex(z):
    if z.real < 0.5:
        # reflection
        return math.pi / (_sinpi(z) * _gamma_complex(1.0 - z))
    return cmath.exp(_log_gamma_lanczos(z))


def gamma(z):
    """Euler Gamma function for real or complex ``z``.

    Returns a float for real input and a complex for complex input.

    Raises
    ------
    PoleError
        If ``z`` is 0, -1, -2, ...
    """
    is_real = not isinstance(z, complex)
    zc = complex(z)
    if _is_nonpositive_integer(zc):
        raise PoleError(f"Gamma has a pole at z={z}")
    val = _gamma_complex(zc)
    return val.real if is_real else val


def rgamma(z):
    """Reciprocal Gamma 1/Gamma(z); entire, zero at non-positive integers."""
    zc = complex(z)
    if _is_nonpositive_integer(zc):
        return 0.0 if not isinstance(z, complex) else 0j
    val = 1.0 / _gamma_complex(zc)
    return val if isinstance(z, complex) else val.real


# --- modified Bessel function of the second kind --------------------------

_TRAP_LOG_CUTOFF = math.log(1e-18)
_TRAP_H0 = 0.25
_TRAP_MAX_HALVINGS = 6
_TRAP_RTOL = 1e-14


def _log_bessel_integrand_peak(nu_re, y):
    """Location and value of max_t [-y (cosh t - 1) + nu_re t]."""
    t0 = math.asinh(nu_re / y) if nu_re > 0 else 0.0
    return t0, -y * (math.cosh(t0) - 1.0) + nu_re * t0


def _trapezoid_end(nu_re, y, psi_max, t0):
    """Abscissa beyond which the scaled integrand is below 1e-18 of its peak."""
    t = max(t0, 1.0)
    step = 0.5
    while -y * (math.cosh(t) - 1.0) + nu_re * t - psi_max > _TRAP_LOG_CUTOFF:
        t += step
        step *= 1.5
    return t


def _scaled_bessel_sums(nu, y):
    """Return (psi, S) with K_nu(y) = exp(psi) * S for each y.

    ``nu`` is complex with Re nu >= 0; ``y`` a 1-D float array.  The factor
    exp(-y) exp(nu_re t_peak) is taken out so S is O(1) even where K_nu
    under- or overflows.
    """
    nu_re = nu.real
    peaks = [_log_bessel_integrand_peak(nu_re, yy) for yy in y]
    psi_max = np.array([p[1] for p in peaks])
    t_end = max(_trapezoid_end(nu_re, yy, pm, t0) for yy, (t0, pm) in zip(y, peaks))

    def integrand(t):
        tt = t[None, :]
        yy = y[:, None]
        # cosh(nu t) = exp(nu_re t) * (e^{i nu_im t} + e^{-2 nu_re t - i nu_im t}) / 2
        log_mag = -yy * (np.cosh(tt) - 1.0) + nu_re * tt - psi_max[:, None]
        phase = 0.5 * (np.exp(1j * nu.imag * tt) + np.exp(-2.0 * nu_re * tt - 1j * nu.imag * tt))
        return np.exp(log_mag) * phase

    h = _TRAP_H0
    n = int(math.ceil(t_end / h))
    t = h * np.arange(n + 1)
    vals = integrand(t)
    total = h * (vals.sum(axis=1) - 0.5 * vals[:, 0])
    for _ in range(_TRAP_MAX_HALVINGS):
        h *= 0.5
        t_mid = h * (2 * np.arange(n) + 1)
        new_total = 0.5 * total + h * integrand(t_mid).sum(axis=1)
        n *= 2
        done = np.all(np.abs(new_total - total) <= _TRAP_RTOL * np.abs(new_total))
        total = new_total
        if done:
            break
    return psi_max - y, total


def _normalize_order(nu):
    nu = complex(nu)
    # K_{-nu} = K_{nu}
    return -nu if nu.real < 0 else nu


def _exp_times(log_mag, s, what):
    if np.any(log_mag + np.log(np.maximum(np.abs(s), 1e-300)) > 709.0):
        raise BesselOverflowError(f"{what} exceeds the double-precision range")
    return np.exp(log_mag) * s


def bessel_k(nu, y):
    """Modified Bessel function of the second kind K_nu(y), y > 0.

    ``nu`` may be complex.  Real ``nu`` yields a float.
    """
    if not y > 0:
        raise DomainError(f"bessel_k requires y > 0, got {y}")
    real_order = not isinstance(nu, complex) or complex(nu).imag == 0.0
    psi, s = _scaled_bessel_sums(_normalize_order(nu), np.array([float(y)]))
    val = complex(_exp_times(psi, s, f"K_{nu}({y})")[0])
    return val.real if real_order else val


def frak_k_array(sigma, y):
    """Vectorized y**sigma * K_sigma(y) over an array of y > 0 (complex result)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise DomainError("frak_k requires y > 0")
    sigma = complex(sigma)
    psi, s = _scaled_bessel_sums(_normalize_order(sigma), y)
    # principal power y**sigma folded into the exponent
    log_mag = psi + sigma.real * np.log(y)
    s = s * np.exp(1j * sigma.imag * np.log(y))
    return _exp_times(log_mag, s, f"frak_k_{sigma}")


def frak_k(sigma, y):
    """The weighted Bessel map y**sigma * K_sigma(y) for y > 0.

    Evaluated in log space, so it stays finite where y**sigma and K_sigma(y)
    separately over- or underflow.  Real ``sigma`` yields a float.
    """
    if not y > 0:
        raise DomainError(f"frak_k requires y > 0, got {y}")
    val = complex(frak_k_array(sigma, [y])[0])
    real_order = not isinstance(sigma, complex) or complex(sigma).imag == 0.0
    return val.real if real_order else val


# --- e**x E1(x) ----------------------------------------------------------

EXP_E_SWITCH = 1.5


@lru_cache(maxsize=None)
def harmonic_number(n):
    """H_n = 1 + 1/2 + ... + 1/n as an exact Fraction (H_0 = 0)."""
    if n < 0:
        raise DomainError("harmonic numbers need n >= 0")
    return sum((Fraction(1, j) for j in range(1, n + 1)), Fraction(0))


def _series_terms(rho):
    """Yield the terms -(log rho + gamma - H_n) rho**n / n! for n = 0, 1, ..."""
    lg = math.log(rho) + EULER_GAMMA
    power = 1.0
    n = 0
    while True:
        yield -(lg - float(harmonic_number(n))) * power
        n += 1
        power *= rho / n


def exp_e_series(rho, terms):
    """Partial sum of the convergent series for e**rho E1(rho).

    Returns ``(value, SeriesTruncation)``; the bound is the sum of the
    magnitudes of the omitted terms, summed until they stop contributing.
    """
    if not rho > 0:
        raise DomainError(f"exp_e_series requires rho > 0, got {rho}")
    if terms < 1:
        raise DomainError("terms must be >= 1")
    gen = _series_terms(rho)
    kept = [next(gen) for _ in range(terms)]
    value = math.fsum(kept)
    tail = 0.0
    n = terms
    for term in gen:
        tail += abs(term)
        n += 1
        if n > rho and abs(term) <= 1e-17 * max(tail, abs(value), 1e-300):
            break
    return value, SeriesTruncation(terms, tail)


def _exp_e_continued_fraction(rho, n=1):
    """e**rho E_n(rho) from the continued fraction of E_n, modified Lentz."""
    tiny = 1e-300
    b = rho + n
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -float(i * (n - 1 + i))
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError(f"continued fraction for E_{n}({rho}) did not converge")


def exp_e(rho):
    """e**rho E1(rho) for rho > 0.

    Series for rho < 1.5, continued fraction above.
    """
    if not rho > 0:
        raise DomainError(f"exp_e requires rho > 0, got {rho}")
    rho = float(rho)
    if rho < EXP_E_SWITCH:
        gen = _series_terms(rho)
        terms = []
        for n, term in enumerate(gen):
            terms.append(term)
            if n > rho + 2 and abs(term) < 1e-18 * abs(math.fsum(terms)):
                break
        return math.fsum(terms)
    return _exp_e_continued_fraction(rho)


def exp_e_n(n, rho):
    """e**rho E_n(rho) = int_0^inf e**(-rho v) (1+v)**(-n) dv for n >= 1, rho > 0.

    Continued fraction from rho = 1.5 on; below, upward recurrence
    E_{k+1} = (1 - rho E_k) / k from :func:`exp_e`.
    """
    if not rho > 0:
        raise DomainError(f"exp_e_n requires rho > 0, got {rho}")
    if n < 1 or n != int(n):
        raise DomainError(f"exp_e_n requires an integer n >= 1, got {n}")
    rho = float(rho)
    if rho >= EXP_E_SWITCH:
        return _exp_e_continued_fraction(rho, int(n))
    value = exp_e(rho)
    for k in range(1, int(n)):
        value = (1.0 - rho * value) / k
    return value


def asymptotic_exp_e_coefficients(M):
    """Exact coefficients (-1)**m m! of rho**-(m+1), m = 0..M."""
    return [(-1) ** m * math.factorial(m) for m in range(M + 1)]


def exp_e_asymptotic(rho, M):
    """Truncated large-rho expansion sum_{m<=M} (-1)**m m! / rho**(m+1).

    Divergent; for validation only.  The bound is the first omitted term.
    """
    if not rho > 0:
        raise DomainError(f"exp_e_asymptotic requires rho > 0, got {rho}")
    if M < 0:
        raise DomainError("M must be >= 0")
    coeffs = asymptotic_exp_e_coefficients(M)
    value = math.fsum(c / rho ** (m + 1) for m, c in enumerate(coeffs))
    bound = math.factorial(M + 1) / rho ** (M + 2)
    return value, SeriesTruncation(M + 1, bound)
