"""Cross-pipeline verification: each stage checked against its neighbours.

:func:`run_verification` returns one :class:`Check` per invariant.  Checks
with ``status == "note"`` record derived facts (asymptotic windows, sign
changes) that are reported but not pass/fail.
"""

from dataclasses import dataclass
from importlib import resources
import json
import math

import numpy as np

from .asymptotics import (
    ExpansionRequest,
    exact_component,
    find_sign_changes,
    large_rho_series,
    large_rho_window,
    small_rho_window,
    t_small_rho,
)
from .kernels import ImpurityConfig, SphericalPoint, vev_from_dirichlet_oracle
from .stress import (
    COMPONENTS,
    PARTS,
    XI_CONFORMAL,
    component_prefactor,
    conformal_parts,
    t00_continuation,
    t00_laurent_at_zero,
    t00_pole_coefficient,
    t00_renormalized,
    t_regularized,
    t_renormalized,
)

__all__ = [
    "Check",
    "REFERENCE_CONFIG",
    "REFERENCE_POINT",
    "run_verification",
    "derive_golden",
    "load_golden",
    "format_table",
    "symmetric_residue",
    "symmetric_regular_part",
    "conservation_residual",
    "trace_residual",
]

REFERENCE_CONFIG = ImpurityConfig(lam=1.0, epsilon=0.5, kappa=1.0, xi=0.0)
REFERENCE_POINT = SphericalPoint(1.0)
SWEEP_RANGE = (0.05, 50.0)
GOLDEN_RESOURCE = "golden_windows.json"


@dataclass(frozen=True)
class Check:
    name: str
    status: str  # "pass", "fail" or "note"
    detail: str

    @property
    def passed(self):
        return self.status != "fail"


def _check(name, ok, detail):
    return Check(name, "pass" if ok else "fail", detail)


def _rel(a, b):
    return abs(a - b) / abs(b)


# --- helpers shared with the test suite -----------------------------------

def symmetric_residue(q, cfg, delta=1e-4):
    """[delta T(delta) + (-delta) T(-delta)] / 2; the regular part cancels."""
    return 0.5 * delta * (t00_continuation(delta, q, cfg) - t00_continuation(-delta, q, cfg))


def symmetric_regular_part(q, cfg, delta=1e-3):
    """[T(delta) + T(-delta)] / 2; the 1/u pole cancels."""
    return 0.5 * (t00_continuation(delta, q, cfg) + t00_continuation(-delta, q, cfg))


def trace_residual(r, lam):
    """(-T00 + Trr + 2 Tthth / r**2) r**4 at the conformal coupling."""
    t = t_renormalized(SphericalPoint(r), lam, XI_CONFORMAL)
    return (-t.t00 + t.trr + 2.0 * t.tthth / r ** 2) * r ** 4


def conservation_residual(r, lam, xi, h=None):
    """Relative residual of d_r Trr + 2 Trr / r - 2 Tthth / r**3 (5-point stencil)."""
    h = 1e-3 * r if h is None else h

    def trr(x):
        return t_renormalized(SphericalPoint(x), lam, xi).trr

    d = (-trr(r + 2 * h) + 8 * trr(r + h) - 8 * trr(r - h) + trr(r - 2 * h)) / (12 * h)
    t = t_renormalized(SphericalPoint(r), lam, xi)
    terms = (d, 2 * t.trr / r, -2 * t.tthth / r ** 3)
    return abs(sum(terms)) / max(abs(x) for x in terms)


def figure_values(component, part, rho):
    """Dimensionless lam**4 T (lam**2 T for thth) at lam = 1."""
    return np.array([exact_component(x, 1.0, part, component) for x in rho])


# --- golden windows -------------------------------------------------------

def derive_golden():
    windows = {}
    for part in PARTS:
        for comp in COMPONENTS:
            windows[f"{part}/{comp}"] = {
                "small_rho_max": small_rho_window(part, comp),
                "large_rho_min": large_rho_window(part, comp),
            }
    crossings = find_sign_changes(
        lambda x: exact_component(x, 1.0, "conformal", "t00"), *SWEEP_RANGE)
    return {
        "tolerance": 0.01,
        "windows": windows,
        "conformal_t00_sign_changes": crossings,
        "sweep_range": list(SWEEP_RANGE),
    }


def load_golden():
    text = resources.files("pointzeta").joinpath(GOLDEN_RESOURCE).read_text(encoding="utf-8")
    return json.loads(text)


# --- the chain ----------------------------------------------------------

def _pipeline_checks(fast):
    cfg, q = REFERENCE_CONFIG, REFERENCE_POINT
    out = []
    if not fast:
        ref7 = t_regularized(7.0, q, cfg)
        oracle = vev_from_dirichlet_oracle(7.0, q, cfg)
        worst = max(_rel(a, b) for a, b in zip(oracle.as_tuple(), ref7.as_tuple()))
        out.append(_check("oracle vs integral form (u=7)", worst <= 1e-4, f"max rel {worst:.2e}"))
    t5 = t_regularized(5.0, q, cfg).t00.real
    c5 = t00_continuation(5.0, q, cfg)
    dev = _rel(c5, t5)
    out.append(_check("integral form vs continuation (u=5)", dev <= 1e-8, f"rel {dev:.2e}"))
    laurent = t00_laurent_at_zero(q, cfg)
    sym = symmetric_regular_part(q, cfg)
    dev = _rel(sym, laurent.regular_value)
    out.append(_check("symmetric average vs regular part", dev <= 1e-5, f"rel {dev:.2e}"))
    worst = 0.0
    for xi in (0.0, 1.0 / 6.0, 0.25):
        c = cfg.with_(xi=xi)
        worst = max(worst, _rel(symmetric_residue(q, c), t00_pole_coefficient(c)))
    out.append(_check("pole coefficient at u=0", worst <= 1e-6, f"max rel {worst:.2e}"))
    c8 = cfg.with_(xi=0.125)
    res8 = abs(symmetric_residue(q, c8))
    scale = t00_pole_coefficient(cfg)
    out.append(_check("no pole at xi=1/8", res8 <= 1e-6 * scale,
                      f"|residue| {res8:.2e} (xi=0 residue {scale:.2e})"))
    return out


def _epsilon_checks():
    out = []
    q = SphericalPoint(1.0)
    base = ImpurityConfig(lam=1.0, epsilon=0.1, kappa=1.0, xi=0.0)
    closed = t00_renormalized(1.0, 1.0, 0.0)
    devs = [abs(t00_laurent_at_zero(q, base.with_(epsilon=10.0 ** -k)).regular_value - closed)
            / abs(closed) for k in (1, 2, 3)]
    orders = [math.log10(devs[i] / devs[i + 1]) for i in range(2)]
    out.append(_check("epsilon -> 0 limit of the regular part",
                      devs[-1] <= 1e-4 and min(orders) >= 1.0,
                      "rel devs " + ", ".join(f"{d:.2e}" for d in devs)
                      + "; orders " + ", ".join(f"{o:.2f}" for o in orders)))
    small = base.with_(epsilon=1e-3)
    a = t00_laurent_at_zero(q, small).regular_value
    b = t00_laurent_at_zero(q, small.with_(kappa=7.0)).regular_value
    out.append(_check("kappa independence at small epsilon", _rel(a, b) <= 1e-10,
                      f"rel {_rel(a, b):.2e}"))
    return out


def _closed_form_checks():
    out = []
    grid = np.logspace(-2, 2, 50)
    worst_split = worst_trace = worst_pres = worst_cons = 0.0
    for rho in grid:
        r, lam = 1.0, 2.0 / rho
        q = SphericalPoint(r)
        split = conformal_parts(q, lam)
        for xi in (0.0, XI_CONFORMAL, 0.25):
            direct = t00_renormalized(r, lam, xi)
            worst_split = max(worst_split, _rel(split.combine(xi).t00, direct))
        worst_trace = max(worst_trace, abs(trace_residual(r, lam)))
        conf = t_renormalized(q, lam, XI_CONFORMAL)
        zero = t_renormalized(q, lam, 0.0)
        nonc = 6.0 * (conf - zero)
        for got, want in zip(conf.as_tuple() + nonc.as_tuple(),
                             split.conformal.as_tuple() + split.nonconformal.as_tuple()):
            worst_pres = max(worst_pres, abs(got - want) / max(abs(want), 1e-300))
        for xi in (0.0, 0.25):
            worst_cons = max(worst_cons, conservation_residual(r, lam, xi))
    out.append(_check("closed T00 = conformal + (xi-1/6) nonconformal", worst_split <= 1e-12,
                      f"max rel {worst_split:.2e}"))
    out.append(_check("conformal trace", worst_trace <= 1e-12, f"max {worst_trace:.2e}"))
    out.append(_check("decomposition prescriptions", worst_pres <= 1e-12,
                      f"max rel {worst_pres:.2e}"))
    out.append(_check("covariant conservation", worst_cons <= 1e-6, f"max rel {worst_cons:.2e}"))
    return out


def _asymptotic_checks():
    out = []
    dev = _large_rho_fit_deviation()
    out.append(_check("large-rho coefficients reproduce the closed form", dev <= 1e-6,
                      f"max rel remainder {dev:.2e}"))
    trend_ok = True
    details = []
    for part in PARTS:
        for comp in COMPONENTS:
            req = ExpansionRequest(comp, part)
            devs = [_rel(t_small_rho(10.0 ** -k, 1.0, req),
                         exact_component(10.0 ** -k, 1.0, part, comp)) for k in range(2, 7)]
            trend_ok &= all(b < a for a, b in zip(devs, devs[1:]))
            details.append(f"{devs[-1]:.1e}")
    out.append(_check("small-rho forms: relative error -> 0", trend_ok,
                      "at rho=1e-6: " + " ".join(details)))
    return out


def _series_sum(series, rho, terms):
    return float(series.leading) * math.fsum(
        float(c) / rho ** (series.power + k) for k, c in enumerate(series.coefficients[:terms]))


def _large_rho_fit_deviation(rho=200.0):
    """Worst relative gap between the closed forms and their 6-term large-rho sums."""
    worst = 0.0
    for part in PARTS:
        for comp in COMPONENTS:
            s = large_rho_series(part, comp, 6)
            exact = exact_component(rho, 1.0, part, comp)
            approx = component_prefactor(part, comp, rho / 2.0) * _series_sum(s, rho, 6)
            worst = max(worst, _rel(approx, exact))
    return worst


def _golden_checks():
    out = []
    derived = derive_golden()
    try:
        golden = load_golden()
    except FileNotFoundError:
        golden = None
    same = golden is not None and _windows_equal(golden, derived)
    out.append(_check("asymptotic windows match golden file", same,
                      "identical" if same else "differs from stored windows"))
    for key, w in derived["windows"].items():
        out.append(Check(f"window {key}", "note",
                         f"small-rho up to {w['small_rho_max']:.4g}, "
                         f"large-rho from {w['large_rho_min']:.4g}"))
    roots = derived["conformal_t00_sign_changes"]
    lo, hi = SWEEP_RANGE
    text = ("sign changes at " + ", ".join(f"{x:.10g}" for x in roots)) if roots else (
        f"no sign change on [{lo}, {hi}]")
    out.append(Check("conformal T00 sign changes", "note", text))
    return out


def _windows_equal(a, b):
    if a.get("conformal_t00_sign_changes") != b.get("conformal_t00_sign_changes"):
        return False
    wa, wb = a.get("windows", {}), b.get("windows", {})
    if wa.keys() != wb.keys():
        return False
    return all(math.isclose(wa[k][f], wb[k][f], rel_tol=1e-12)
               for k in wa for f in ("small_rho_max", "large_rho_min"))


def _figure_checks():
    rho = np.logspace(math.log10(SWEEP_RANGE[0]), math.log10(SWEEP_RANGE[1]), 200)
    bad = [f"{p}/{c}" for p in PARTS for c in COMPONENTS
           if not np.all(np.isfinite(figure_values(c, p, rho)))]
    return [_check("figure sweeps finite", not bad, "all six panels" if not bad else ", ".join(bad))]


def run_verification(fast=False):
    """Run every check; ``fast`` skips the finite-difference oracle and the epsilon limit."""
    checks = _pipeline_checks(fast)
    if not fast:
        checks += _epsilon_checks()
    checks += _closed_form_checks()
    checks += _asymptotic_checks()
    checks += _golden_checks()
    checks += _figure_checks()
    return checks


def format_table(checks):
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  status  detail", "-" * (width + 24)]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {c.status.upper():<6}  {c.detail}")
    return "\n".join(lines)
