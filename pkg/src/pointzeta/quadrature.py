"""Adaptive Gauss-Kronrod integration over half-lines.

Every integrand is called with a 1-D numpy array of abscissae and must return
an array whose first axis matches it.  Trailing axes are allowed (several
integrals sharing the same nodes), and complex values are integrated in the
same pass as real ones.

The half-line ``[lower, inf)`` is compactified with ``t = lower + scale * x / (1 - x)``.
With ``split=a`` the head ``[lower, a]`` and the tail ``[a, inf)`` are handled
as two pieces of a single adaptive pool sharing one error budget, which is
what integrands carrying ``exp(-1/tau)`` next to an exponential tail need.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IntegrandNaNError, QuadratureError

__all__ = [
    "ToleranceSpec",
    "QuadratureResult",
    "DEFAULT_TOLERANCE",
    "integrate_interval",
    "integrate_half_line",
    "integrate_product_half_lines",
    "require_converged",
]


# Kronrod abscissae and weights (QUADPACK qk15); the Gauss 7-point rule uses
# the odd-indexed abscissae.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

X15 = np.concatenate([-_XGK[:-1], _XGK[::-1]])
W15 = np.concatenate([_WGK[:-1], _WGK[::-1]])
W7 = np.zeros(15)
for _j, _w in zip((1, 3, 5), _WG[:3]):
    W7[_j] = _w
    W7[14 - _j] = _w
W7[7] = _WG[3]

_EPMACH = np.finfo(float).eps
_UFLOW = np.finfo(float).tiny


@dataclass(frozen=True)
class ToleranceSpec:
    relative: float = 1e-10
    absolute: float = 1e-14
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.relative >= 1e-14:
            raise DomainError(f"relative tolerance must be >= 1e-14, got {self.relative}")
        if not self.absolute >= 0.0:
            raise DomainError(f"absolute tolerance must be >= 0, got {self.absolute}")
        if int(self.max_subdivisions) < 1:
            raise DomainError("max_subdivisions must be >= 1")

    def tightened(self, factor):
        """Tolerance divided by ``factor`` (relative part clamped at 1e-14)."""
        return ToleranceSpec(
            relative=max(self.relative / factor, 1e-14),
            absolute=self.absolute / factor,
            max_subdivisions=self.max_subdivisions,
        )

    def target(self, value):
        return max(self.absolute, self.relative * _norm(value))


DEFAULT_TOLERANCE = ToleranceSpec()


@dataclass(frozen=True)
class QuadratureResult:
    value: object
    error_estimate: float
    converged: bool
    evaluations: int


def _norm(value):
    return float(np.max(np.abs(value))) if np.ndim(value) else abs(value)


def require_converged(result, what="integral"):
    """Return ``result`` or raise :class:`QuadratureError` if it did not converge."""
    if not result.converged:
        raise QuadratureError(
            f"{what} did not converge: value={result.value!r}, "
            f"error_estimate={result.error_estimate:.3e}",
            result,
        )
    return result


def _eval_panels(g, lo, hi):
    """Apply the 15-point Kronrod and 7-point Gauss rules on each panel."""
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * X15[None, :]
    fx = np.asarray(g(x.ravel()))
    fx = fx.reshape((len(lo), 15) + fx.shape[1:])
    if np.isnan(fx).any():
        bad = x.ravel()[np.isnan(fx.reshape(x.size, -1)).any(axis=1)]
        raise IntegrandNaNError(f"integrand returned NaN at x={bad[:3]}")

    hshape = (len(lo),) + (1,) * (fx.ndim - 2)
    h = half.reshape(hshape)
    resk_raw = np.einsum("k,pk...->p...", W15, fx)
    resg_raw = np.einsum("k,pk...->p...", W7, fx)
    mean = 0.5 * resk_raw
    dev = np.abs(fx - mean[:, None])
    resasc = np.einsum("k,pk...->p...", W15, dev) * np.abs(h)
    resabs = np.einsum("k,pk...->p...", W15, np.abs(fx)) * np.abs(h)
    err = np.abs(resk_raw - resg_raw) * np.abs(h)

    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPMACH * resabs
    err = np.where(resabs > _UFLOW / (50.0 * _EPMACH), np.maximum(floor, err), err)
    at_floor = err <= floor * (1.0 + 1e-12)

    if fx.ndim > 2:
        axes = tuple(range(1, err.ndim))
        at_floor = at_floor.all(axis=axes)
        err = err.max(axis=axes)
    return resk_raw * h, err, at_floor


def integrate_interval(g, a, b, tol=None, initial_panels=4):
    """Adaptively integrate a vectorized ``g`` over the finite interval [a, b].

    Panels whose error exceeds their share of the global budget (pro rata to
    width) are bisected until the summed error estimate meets the target.
    Panels whose error sits at the roundoff floor are never split.
    """
    tol = DEFAULT_TOLERANCE if tol is None else tol
    edges = np.linspace(a, b, initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    vals, errs, floor = _eval_panels(g, lo, hi)
    evaluations = 15 * len(lo)
    width = float(b - a)
    subdivisions = 0
    converged = False

    while True:
        total = vals.sum(axis=0)
        target = tol.target(total)
        if errs.sum() <= target:
            converged = True
            break
        share = target * (hi - lo) / width
        splittable = ~floor
        if not splittable.any():
            break
        pick = (errs > share) & splittable
        if not pick.any():
            pick = splittable & (errs == errs[splittable].max())
        budget = tol.max_subdivisions - subdivisions
        if budget <= 0:
            break
        if pick.sum() > budget:
            order = np.argsort(-np.where(pick, errs, -np.inf), kind="stable")[:budget]
            pick = np.zeros_like(pick)
            pick[order] = True
        subdivisions += int(pick.sum())

        mid = 0.5 * (lo[pick] + hi[pick])
        new_lo = np.concatenate([lo[pick], mid])
        new_hi = np.concatenate([mid, hi[pick]])
        nv, ne, nf = _eval_panels(g, new_lo, new_hi)
        evaluations += 15 * len(new_lo)
        keep = ~pick
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        floor = np.concatenate([floor[keep], nf])

    order = np.argsort(lo, kind="stable")
    value = vals[order].sum(axis=0)
    if np.ndim(value) == 0:
        value = value.item()
    return QuadratureResult(value, float(errs.sum()), converged, evaluations)


def _half_line_map(lower, split, scale, endpoint_power):
    """Map x in (0, 1) [tail only] or (0, 2) [head + tail] onto [lower, inf)."""
    if split is None:
        def transform(x):
            y = x
            with np.errstate(divide="ignore", over="ignore"):
                t = lower + scale * y / (1.0 - y)
                jac = scale / (1.0 - y) ** 2
            return t, jac
        return transform, 1.0

    length = split - lower
    if endpoint_power is not None:
        re_alpha = float(np.real(endpoint_power))
        if not re_alpha > -1.0:
            raise DomainError(f"non-integrable endpoint power {endpoint_power}")
        m = 1.0 / (re_alpha + 1.0)
    else:
        m = 1.0

    def transform(x):
        head = x < 1.0
        t = np.empty_like(x)
        jac = np.empty_like(x)
        xh = x[head]
        # tau -> 1/tau on the head followed by the tail map reduces to this
        # power map; m > 1 absorbs an algebraic singularity at lower.
        t[head] = lower + length * xh ** m
        jac[head] = length * m * xh ** (m - 1.0)
        y = x[~head] - 1.0
        with np.errstate(divide="ignore", over="ignore"):
            t[~head] = split + scale * y / (1.0 - y)
            jac[~head] = scale / (1.0 - y) ** 2
        return t, jac
    return transform, 2.0


def integrate_half_line(f, tol=None, *, lower=0.0, split=None, scale=1.0,
                        endpoint_power=None):
    """Integrate ``f`` over ``[lower, inf)``.

    Parameters
    ----------
    f : callable
        Vectorized integrand ``f(t) -> array``; may be complex or carry
        trailing axes.
    tol : ToleranceSpec, optional
        Defaults to relative 1e-10, absolute 1e-14, 2000 subdivisions.
    split : float, optional
        Breakpoint separating the head ``[lower, split]`` from the tail.
    scale : float
        Length scale of the tail compactification.
    endpoint_power : complex, optional
        Exponent ``alpha`` of an integrable ``(t - lower)**alpha`` singularity;
        the head is then sampled on ``t = lower + (split - lower) * x**m`` with
        ``m = 1 / (Re alpha + 1)``.  Implies ``split = lower + scale`` if no
        split is given.

    Returns
    -------
    QuadratureResult
    """
    if endpoint_power is not None and split is None:
        split = lower + scale
    if split is not None and not split > lower:
        raise DomainError("split point must lie above the lower limit")
    transform, upper = _half_line_map(lower, split, scale, endpoint_power)

    def g(x):
        t, jac = transform(x)
        ft = np.asarray(f(t))
        jac = jac.reshape(jac.shape + (1,) * (ft.ndim - 1))
        # f decays faster than jac grows; 0 * inf from the endpoint maps to 0
        with np.errstate(invalid="ignore"):
            out = ft * jac
        return np.where(ft == 0, 0.0, out)

    initial = 4 if split is None else 8
    return integrate_interval(g, 0.0, upper, tol, initial_panels=initial)


def integrate_product_half_lines(f2, tol=None, *, outer_split=None, inner_split=None,
                                 outer_scale=1.0, inner_scale=1.0,
                                 outer_endpoint_power=None):
    """Iterated integral of ``f2(tau, v)`` over ``(0, inf)**2``, inner over v.

    ``f2`` receives a scalar ``tau`` and an array ``v``.  Each inner integral
    runs with a tolerance ten times tighter than the outer one; the reported
    error adds the inner relative tolerance times the result magnitude to the
    outer estimate.
    """
    tol = DEFAULT_TOLERANCE if tol is None else tol
    inner_tol = tol.tightened(10.0)
    outer_tol = ToleranceSpec(
        relative=max(0.9 * tol.relative, 1e-14),
        absolute=0.9 * tol.absolute,
        max_subdivisions=tol.max_subdivisions,
    )
    stats = {"evaluations": 0, "converged": True}

    def outer(taus):
        rows = []
        for tau in taus:
            res = integrate_half_line(
                lambda v: f2(tau, v), inner_tol, split=inner_split, scale=inner_scale
            )
            stats["evaluations"] += res.evaluations
            stats["converged"] &= res.converged
            rows.append(res.value)
        return np.array(rows)

    res = integrate_half_line(outer, outer_tol, split=outer_split, scale=outer_scale,
                              endpoint_power=outer_endpoint_power)
    err = res.error_estimate + inner_tol.relative * _norm(res.value)
    converged = res.converged and stats["converged"] and err <= tol.target(res.value)
    return QuadratureResult(res.value, err, converged, res.evaluations + stats["evaluations"])
