"""Spectral representations of the transition density, hitting density and
inverse-local-time Levy measure of a reflected diffusion.

Two eigenfunction families enter: ``A(x; gamma)`` (reflected, ``A(0)=1``) and
``C(x; gamma)`` (killed, ``C ~ S`` at ``gamma = 0``).  Against the matching
spectral measure (``principal`` for the reflected kernel, ``killed`` for
everything generated by hitting the boundary) they give

* ``p(t;x,y)       = int e^{-gamma t} A(x)A(y) Delta(dgamma)``
* ``p_hat(t;x,y)   = int e^{-gamma t} C(x)C(y) Delta_hat(dgamma)``
* ``f_{x0}(t)      = int e^{-gamma t} C(x)   Delta_hat(dgamma)``
* ``nu_dot(t)      = int e^{-gamma t}         Delta_hat(dgamma)``
* ``P_x(H_0 > t)   = int gamma^{-1} e^{-gamma t} C(x) Delta_hat(dgamma)``
* ``nu((t, inf))   = int gamma^{-1} e^{-gamma t}      Delta_hat(dgamma)``

For the Bessel presets both measures and both eigenfunctions are known in
closed form, so the integrals become damped Bessel-function quadratures.
For a general scale/speed pair the eigenfunctions are built from the power
series ``sum (-gamma)^n c_n(x)`` whose coefficients obey the nested
recursion ``c_{n+1}(x) = int_0^x dS(y) int_0^y c_n dm``; the factorial bound
``c_n(x) <= front * B(x)^n / n!`` with ``B(x) = int_0^x m((0,y)) dS(y)``
makes the truncation error certifiable.  No constructive route from a
general scale/speed pair to its spectral measure is attempted: custom specs
must come with a user-supplied measure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.special import gamma as gamma_fn
from scipy.special import gammainc, gammaln, jv

from .diffusions import DiffusionSpec, series_bound_base
from .errors import (ConsistencyError, DomainError, IntegrabilityError,
                     RangeError, ToleranceError, TruncationError,
                     UnsupportedSpecError)
from .quadrature import QuadratureSettings, integrate

__all__ = [
    "EigenSeries",
    "SpectralMeasure",
    "bessel_principal_measure",
    "bessel_killed_measure",
    "measure_from_table",
    "measure_from_json",
    "eigen_coefficients",
    "eigen_value",
    "eigenfunction",
    "transition_density",
    "hitting_density",
    "levy_density",
    "levy_tail",
    "hitting_tail",
    "levy_exponent_from_measure",
]

T_MIN = 1.0e-6
_SERIES_CAP = 400


# ---------------------------------------------------------------------------
# eigenfunction series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenSeries:
    """Truncated coefficient sequence of one eigenfunction at a fixed point.

    ``value(gamma)`` is ``sum_n (-gamma)^n coefficients[n]``; the tail beyond
    the stored terms is bounded by ``front * (gamma * bound_base)^n / n!``
    summed over the missing ``n``, where ``front`` is 1 for an A-series and
    ``S(x)`` for a C-series.
    """

    x: float
    kind: str                      # "A" | "C"
    coefficients: np.ndarray
    bound_base: float              # B(x)
    front: float                   # 1 or S(x)

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise DomainError("coefficient list must be non-empty and 1-d")
        n = np.arange(c.size, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_bound = n * np.log(max(self.bound_base, 0.0)) \
                - gammaln(n + 1.0)
        log_bound = np.where(n == 0, 0.0, log_bound)
        bound = self.front * np.exp(np.minimum(log_bound, 700.0))
        slack = 1e-8 * (bound + 1e-300)
        if np.any(c < -slack):
            raise ConsistencyError("negative eigenseries coefficient")
        if np.any(c > bound * (1 + 1e-6) + 1e-300):
            raise ConsistencyError("eigenseries coefficient exceeds the "
                                   "factorial growth bound")
        object.__setattr__(self, "coefficients", c)


def _signed_series_eval(coefficients: np.ndarray, gamma) -> np.ndarray:
    """``sum_n (-gamma)^n c_n`` evaluated in log space.

    The separated powers ``gamma^n`` overflow long before the actual terms
    ``c_n gamma^n`` do (the coefficients decay factorially), so the terms
    are assembled from ``log c_n + n log gamma`` under a shared shift.
    """
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    c = np.asarray(coefficients, dtype=float)
    ns = np.arange(c.size, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = np.log(np.maximum(c, 0.0))
        logs = logc[None, :] + ns[None, :] * np.log(np.abs(g))[:, None]
    logs = np.where(np.isnan(logs), -np.inf, logs)
    m = np.max(logs, axis=1)
    m = np.where(np.isfinite(m), m, 0.0)
    signs = (-np.sign(g))[:, None] ** ns[None, :]
    signs[:, 0] = 1.0
    vals = np.einsum("ij,ij->i", np.exp(logs - m[:, None]), signs) \
        * np.exp(m)
    vals = np.where(g == 0.0, c[0], vals)
    return vals[0] if np.ndim(gamma) == 0 else vals


def _poisson_tail(n_terms: int, z: float) -> float:
    """P(Poisson(z) >= n_terms) = regularized lower gamma(n_terms, z)."""
    if z <= 0.0:
        return 0.0
    return float(gammainc(n_terms, z))


def _series_tail_bound(front: float, z: float, n_terms: int) -> float:
    # sum_{n >= n_terms} z^n / n! = e^z P(Poisson(z) >= n_terms)
    if z <= 0.0:
        return 0.0
    return front * math.exp(z) * _poisson_tail(n_terms, z)


def _terms_needed(front: float, z: float, tol: float) -> Optional[int]:
    """Smallest N with tail bound below tol, or None if > _SERIES_CAP."""
    if z <= 0.0:
        return 1
    ns = np.arange(1, _SERIES_CAP + 1)
    ok = gammainc(ns, z) < tol * np.exp(-z) / front
    hit = np.flatnonzero(ok)
    return int(ns[hit[0]]) if hit.size else None


def _cumulative_integral(z: np.ndarray, h: np.ndarray,
                         check_integrability: bool = False) -> np.ndarray:
    """Cumulative ``int_0^{z_j} h`` on a geometric grid with ``z[0] = 0``.

    ``h`` may follow a power law near 0 (its value at ``z[0]`` is ignored);
    the head ``(0, z_1]`` is integrated from a power-law fit through the
    first two interior nodes, the rest by the antiderivative of a cubic
    spline in the log abscissa (where power-law-like integrands are smooth
    exponentials).  Deep in the eigenfunction recursion the smallest nodes
    are absolutely negligible but relatively noisy, so the fitted exponent
    is clipped rather than trusted, and a divergence diagnosis is only
    issued when explicitly requested (on the first recursion step, where the
    integrand is an honest scale/speed product).
    """
    zi, hi = z[1:], h[1:]
    w = np.log(zi)
    spline = CubicSpline(w, hi * zi)    # int h dz = int h(e^w) e^w dw
    cum = spline.antiderivative()(w)
    # head (0, z_1]: fit h ~ c z^s through the first two nodes
    if hi[0] > 0.0 and hi[1] > 0.0:
        s = math.log(hi[1] / hi[0]) / (w[1] - w[0])
    else:
        s = math.inf
    if check_integrability and s <= -1.0:
        raise IntegrabilityError(
            f"integrand behaves like z^{s:.3f} at the origin; the "
            "scale/speed recursion integral diverges")
    s = min(max(s, -0.999), 80.0) if math.isfinite(s) else 80.0
    first = hi[0] * zi[0] / (s + 1.0)
    out = np.empty_like(z)
    out[0] = 0.0
    out[1:] = first + cum
    return out


def eigen_coefficients(spec: DiffusionSpec, x: float, kind: str = "C",
                       n_terms: int = 24) -> EigenSeries:
    """Coefficients ``c_0 .. c_{n_terms}`` of the eigenfunction series at x.

    Evaluates the nested recursion
    ``c_{n+1}(y) = int_0^y dS int_0^. c_n dm`` derivative-free through
    integration by parts (only ``S`` and the speed density are needed), on a
    geometric grid that is refined until the last coefficient is stable to
    1e-9 relative.
    """
    if kind not in ("A", "C"):
        raise DomainError("kind must be 'A' or 'C'")
    if x < 0:
        raise DomainError("x must be nonnegative")
    if n_terms < 0:
        raise DomainError("n_terms must be nonnegative")
    base = series_bound_base(spec, x)
    if x == 0.0:
        coef = np.zeros(n_terms + 1)
        front = 1.0 if kind == "A" else 0.0
        coef[0] = front
        return EigenSeries(x=x, kind=kind, coefficients=coef,
                           bound_base=0.0, front=front)
    s_at_x = float(spec.scale(x))
    front = 1.0 if kind == "A" else s_at_x

    def level(npts):
        grid = np.concatenate([[0.0], np.geomspace(x * 1e-4, x, npts)])
        s_vals = np.asarray(spec.scale(grid[1:]), dtype=float)
        s_vals = np.concatenate([[0.0], s_vals])
        m_vals = np.concatenate([[0.0],
                                 np.asarray(spec.speed_density(grid[1:]),
                                            dtype=float)])
        coef = np.empty(n_terms + 1)
        f = np.ones_like(grid) if kind == "A" else s_vals.copy()
        coef[0] = f[-1]
        for n in range(n_terms):
            h = f * m_vals
            inner = _cumulative_integral(grid, h,           # int_0^y f dm
                                         check_integrability=(n == 0))
            cross = _cumulative_integral(grid, s_vals * h)  # int_0^y S f dm
            f = inner * s_vals - cross                      # int_0^y (.) dS
            coef[n + 1] = f[-1]
        return coef

    # refine with Richardson extrapolation across doublings (the spline
    # rule is 4th order); working terms must stabilize to 1e-9 relative,
    # deep terms (needed only to certify truncation tails) to 1e-6
    npts = 512
    prev = level(npts)
    prev_ext = None
    for _ in range(6):
        npts *= 2
        cur = level(npts)
        ext = cur + (cur - prev) / 15.0
        if prev_ext is not None:
            delta = np.abs(ext - prev_ext) / (np.abs(ext) + 1e-280)
            tol_per_n = np.where(np.arange(n_terms + 1) <= 24, 1e-9, 1e-6)
            if np.all(delta <= tol_per_n):
                return EigenSeries(x=x, kind=kind, coefficients=ext,
                                   bound_base=base, front=front)
        prev, prev_ext = cur, ext
    raise ToleranceError(
        f"eigen recursion failed to stabilize coefficient n={n_terms} "
        f"at x={x} after grid refinement")


def eigen_value(series: EigenSeries, gamma: float, tol: float = 1e-10) -> float:
    """Evaluate the truncated eigenfunction series with a certified error.

    Raises :class:`TruncationError` (carrying ``minimal_terms``) when the
    factorial tail bound of the stored coefficients is not below ``tol``.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    gamma = float(gamma)
    z = abs(gamma) * series.bound_base
    n = series.coefficients.size
    bound = _series_tail_bound(series.front, z, n)
    if not bound < tol:
        needed = _terms_needed(series.front, z, tol)
        raise TruncationError(
            f"{n} terms give a tail bound {bound:.3e} >= tol {tol:.1e} at "
            f"gamma={gamma:g}"
            + ("" if needed is None else f"; {needed} terms would suffice"),
            minimal_terms=needed)
    return float(_signed_series_eval(series.coefficients, gamma))


# Bessel closed forms --------------------------------------------------------

def _bessel_A(alpha: float, x, gamma):
    x = np.asarray(x, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    z = x * np.sqrt(2.0 * gamma)
    with np.errstate(invalid="ignore"):
        out = gamma_fn(1.0 - alpha) * 2.0 ** (-alpha) \
            * z ** alpha * jv(-alpha, z)
    if np.any(z == 0.0):
        out = np.where(z == 0.0, 1.0, out)
    return out[()] if out.ndim == 0 else out


def _bessel_C(alpha: float, x, gamma):
    x = np.asarray(x, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    z = x * np.sqrt(2.0 * gamma)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = gamma_fn(alpha) * 2.0 ** ((alpha - 2.0) / 2.0) \
            * gamma ** (-alpha / 2.0) * x ** alpha * jv(alpha, z)
    if np.any(z == 0.0):
        scale0 = x ** (2.0 * alpha) / (2.0 * alpha)
        out = np.where(z == 0.0, scale0, out)
    return out[()] if out.ndim == 0 else out


def eigenfunction(spec: DiffusionSpec, x: float, gamma: float,
                  kind: str = "A", tol: float = 1e-10) -> float:
    """``A(x; gamma)`` or ``C(x; gamma)``.

    Presets use the closed Bessel-J forms; custom specs sum the recursion
    series with a certified truncation (the series length is chosen from the
    factorial bound, capped at 400 terms).
    """
    if kind not in ("A", "C"):
        raise DomainError("kind must be 'A' or 'C'")
    if x < 0 or gamma < 0:
        raise DomainError("x and gamma must be nonnegative")
    if spec.is_preset:
        f = _bessel_A if kind == "A" else _bessel_C
        return float(f(spec.alpha, x, gamma))
    base = series_bound_base(spec, x)
    front = 1.0 if kind == "A" else float(spec.scale(x))
    needed = _terms_needed(max(front, 1e-300), gamma * base, tol)
    if needed is None:
        raise ToleranceError(
            f"eigenfunction series needs more than {_SERIES_CAP} certified "
            f"terms at gamma={gamma:g}, x={x:g}")
    series = eigen_coefficients(spec, x, kind, n_terms=needed)
    return eigen_value(series, gamma, tol)


# ---------------------------------------------------------------------------
# spectral measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralMeasure:
    """Absolutely continuous spectral measure on ``[0, inf)``.

    ``kind`` is ``"principal"`` (pairs with A-eigenfunctions, reflected
    kernel) or ``"killed"`` (pairs with C, everything that involves hitting
    the boundary).  ``gamma_cutoff_hint`` is a power ``p`` with
    ``density(gamma) = O(gamma^p)`` at infinity, used to pick the quadrature
    cutoff; measures of bounded support set ``support_end`` instead.
    Atomic measures are out of scope.
    """

    kind: str
    density: Callable
    gamma_cutoff_hint: float = 1.0
    support_end: float = math.inf
    name: str = "custom"
    alpha: Optional[float] = None   # set for the Bessel closed forms
    knots: Optional[np.ndarray] = field(default=None, repr=False,
                                        compare=False)

    def __post_init__(self):
        if self.kind not in ("principal", "killed"):
            raise DomainError("measure kind must be 'principal' or 'killed'")
        if self.alpha is None:
            _check_measure_integrability(self)


def _near_zero_power(measure: SpectralMeasure) -> float:
    lo = 1e-6
    if math.isfinite(measure.support_end):
        lo = max(lo, 1e-9)
    g1, g2 = lo, lo * 10.0
    d1, d2 = float(measure.density(g1)), float(measure.density(g2))
    if d1 < 0 or d2 < 0:
        raise DomainError("spectral density must be nonnegative")
    if d1 == 0.0:
        return math.inf  # vanishes near 0: integrable
    return math.log(max(d2, 1e-300) / d1) / math.log(g2 / g1)


def _check_measure_integrability(measure: SpectralMeasure) -> None:
    s = _near_zero_power(measure)
    if measure.kind == "principal":
        if not s > -1.0:
            raise IntegrabilityError(
                f"principal measure density ~ gamma^{s:.2f} near 0; "
                "int density/(gamma+1) diverges")
    else:
        if not s > 0.0:
            raise IntegrabilityError(
                f"killed measure density ~ gamma^{s:.2f} near 0; "
                "int density/(gamma(gamma+1)) diverges")
    if math.isinf(measure.support_end):
        g1, g2 = 1e6, 1e7
        d1 = float(measure.density(g1))
        d2 = float(measure.density(g2))
        if d1 > 0 and d2 > 0:
            p = math.log(d2 / d1) / math.log(g2 / g1)
            if p > measure.gamma_cutoff_hint + 0.5:
                raise IntegrabilityError(
                    f"density grows like gamma^{p:.2f} at infinity, above "
                    f"the declared cutoff hint {measure.gamma_cutoff_hint}")


def bessel_principal_measure(alpha: float) -> SpectralMeasure:
    """Closed-form principal measure of the reflected Bessel preset."""
    if not (0.0 < alpha < 1.0):
        raise DomainError("alpha must lie in (0, 1)")
    c = 1.0 / (2.0 ** (1.0 - alpha) * gamma_fn(1.0 - alpha) ** 2)

    def density(g):
        g = np.asarray(g, dtype=float)
        return c * g ** (-alpha)

    return SpectralMeasure(kind="principal", density=density,
                           gamma_cutoff_hint=-alpha, name="bessel",
                           alpha=alpha)


def bessel_killed_measure(alpha: float) -> SpectralMeasure:
    """Closed-form spectral measure of the killed Bessel preset."""
    if not (0.0 < alpha < 1.0):
        raise DomainError("alpha must lie in (0, 1)")
    c = 2.0 ** (1.0 - alpha) / gamma_fn(alpha) ** 2

    def density(g):
        g = np.asarray(g, dtype=float)
        return c * g ** alpha

    return SpectralMeasure(kind="killed", density=density,
                           gamma_cutoff_hint=alpha, name="bessel_hat",
                           alpha=alpha)


def measure_from_table(gammas, densities, kind: str = "killed") -> SpectralMeasure:
    """Measure from a density table; zero outside the tabulated support."""
    g = np.asarray(gammas, dtype=float)
    d = np.asarray(densities, dtype=float)
    if g.ndim != 1 or g.shape != d.shape or g.size < 4:
        raise DomainError("table needs matching 1-d arrays of length >= 4")
    if not np.all(np.diff(g) > 0):
        raise DomainError("gammas must be strictly increasing")
    if g[0] < 0 or np.any(d < 0):
        raise DomainError("gammas and densities must be nonnegative")
    if g[0] == 0.0:
        if kind == "killed" and d[0] > 0:
            raise IntegrabilityError(
                "killed measure table has positive density at gamma=0; "
                "int density/gamma diverges")
        g, d = g[1:], d[1:]
    interp = PchipInterpolator(g, d, extrapolate=False)
    lo, hi = g[0], g[-1]

    def density(x):
        x = np.asarray(x, dtype=float)
        out = interp(np.clip(x, lo, hi))
        out = np.where((x < lo) | (x > hi), 0.0, out)
        return out[()] if out.ndim == 0 else out

    # near-zero integrability from the first two positive-density nodes
    pos = np.flatnonzero(d > 0)
    if pos.size >= 2 and g[pos[0]] < 1.0:
        i, j = pos[0], pos[1]
        s = math.log(d[j] / d[i]) / math.log(g[j] / g[i])
    else:
        s = math.inf
    if kind == "killed" and g[0] < 1e-8 and not s > 0.0:
        raise IntegrabilityError(
            f"killed table density ~ gamma^{s:.2f} near 0")
    return SpectralMeasure(kind=kind, density=density,
                           gamma_cutoff_hint=0.0, support_end=float(hi),
                           name="table", alpha=None, knots=g.copy())


def measure_from_json(payload) -> SpectralMeasure:
    """Parse the measure JSON: ``bessel``/``bessel_hat`` presets or a table.

    Shapes::

        {"kind": "bessel_hat", "alpha": 0.25}
        {"kind": "bessel", "alpha": 0.25}
        {"kind": "table", "gammas": [...], "densities": [...]}

    A table takes an optional ``"measure_kind"`` of ``"principal"`` or
    ``"killed"`` (default ``"killed"``, which is what the hitting/Levy
    functionals consume).
    """
    if isinstance(payload, str):
        try:
            payload = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid measure JSON: {exc}") from exc
    if not isinstance(payload, dict) or "kind" not in payload:
        raise DomainError("measure JSON must be an object with 'kind'")
    kind = payload["kind"]
    if kind == "bessel_hat":
        return bessel_killed_measure(float(payload["alpha"]))
    if kind == "bessel":
        return bessel_principal_measure(float(payload["alpha"]))
    if kind == "table":
        if "gammas" not in payload or "densities" not in payload:
            raise DomainError("table measure needs 'gammas' and 'densities'")
        return measure_from_table(payload["gammas"], payload["densities"],
                                  payload.get("measure_kind", "killed"))
    raise DomainError(f"unknown measure kind {kind!r}")


# ---------------------------------------------------------------------------
# spectral integrals
# ---------------------------------------------------------------------------

_SPECTRAL_QUAD = QuadratureSettings(epsabs=1e-12, epsrel=1e-10, limit=400)


def _check_t(t: float) -> None:
    if t <= 0:
        raise DomainError("t must be positive")
    if t < T_MIN:
        raise RangeError(f"t below the supported minimum {T_MIN:g}")


def _preset_route(spec: DiffusionSpec, t: float, tol: float, *,
                  eig_kind: str, xs, inverse_gamma: bool):
    """Closed-form-eigenfunction route for the Bessel presets.

    Substituting ``gamma = u^2 / 2`` turns every spectral integral into a
    Gaussian-damped Bessel-J quadrature; a second substitution ``u = v^2``
    flattens the integrable power singularity the measure density leaves at
    the origin, so plain adaptive quadrature converges cleanly.
    """
    a = spec.alpha
    if eig_kind == "A":
        rho_c = 1.0 / (2.0 ** (1.0 - a) * gamma_fn(1.0 - a) ** 2)
        rho_pow = -a
        eig_c = gamma_fn(1.0 - a) * 2.0 ** (-a)
    else:
        rho_c = 2.0 ** (1.0 - a) / gamma_fn(a) ** 2
        rho_pow = a
        eig_c = gamma_fn(a) * 2.0 ** ((a - 2.0) / 2.0)
    scales = [float(spec.scale(x)) for x in xs]

    def weight(u):
        # integrand against du, exponential damping excluded
        g = 0.5 * u * u
        val = rho_c * g ** rho_pow * u
        if inverse_gamma:
            val /= g
        for x, sx in zip(xs, scales):
            z = x * u
            if eig_kind == "A":
                val *= 1.0 if z == 0.0 else eig_c * z ** a * jv(-a, z)
            else:
                val *= sx if z == 0.0 else \
                    eig_c * g ** (-0.5 * a) * x ** a * jv(a, z)
        return val

    u_max = math.sqrt(2.0 * max(4.0 / t, 1.0))
    for _ in range(200):
        probe = abs(weight(u_max)) + abs(weight(0.73 * u_max)) + 1.0
        if math.exp(-u_max * u_max * t / 2.0) * probe \
                * max(u_max, 1.0 / t) < tol / 10.0:
            break
        u_max *= 1.4
    else:
        raise ToleranceError("no finite quadrature cutoff found")
    u_max *= 1.2

    def integrand(v):
        if v == 0.0:
            return 0.0
        u = v * v
        return math.exp(-u * u * t / 2.0) * weight(u) * 2.0 * v

    return integrate(integrand, 0.0, math.sqrt(u_max),
                     settings=_SPECTRAL_QUAD)


def _generic_gamma_max(measure: SpectralMeasure, t_eff: float, tol: float,
                       envelope: Callable) -> float:
    if math.isfinite(measure.support_end):
        return measure.support_end
    if t_eff <= 0:
        raise ToleranceError(
            "spectral integral not certifiable: the series growth bound "
            "exceeds the exponential damping (t too small for this x)")
    g = max(4.0 / t_eff, 1.0)
    for _ in range(200):
        tail = math.exp(-g * t_eff) * float(measure.density(g)) \
            * envelope(g) * max(g, 1.0 / t_eff) * 4.0
        if tail < tol / 10.0:
            return g
        g *= 2.0
    raise ToleranceError("no finite quadrature cutoff found for the measure")


def _eigen_value_array(series: EigenSeries, g: np.ndarray,
                       tol: float) -> np.ndarray:
    """Vectorized :func:`eigen_value`, certified at the largest ``|gamma|``."""
    g = np.asarray(g, dtype=float)
    if g.size:
        eigen_value(series, float(np.max(np.abs(g))), tol)  # certify once
    return _signed_series_eval(series.coefficients, g)


def _generic_route(spec: DiffusionSpec, t: float, tol: float, *,
                   measure: SpectralMeasure, eig_kind: str, xs,
                   inverse_gamma: bool):
    """Series/closed-eigenfunction quadrature against an explicit measure."""
    if spec.is_preset:
        growth = 0.0

        def envelope(g):
            return 2.0 * (1.0 + g) ** 0.5

        def make_eval(x):
            f = _bessel_A if eig_kind == "A" else _bessel_C
            return lambda g: f(spec.alpha, x, g)

        def build_evals(_g_max):
            return [make_eval(x) for x in xs]
    else:
        growth = sum(series_bound_base(spec, x) for x in xs)
        fronts = [1.0 if eig_kind == "A" else float(spec.scale(x))
                  for x in xs]
        # the e^{g * growth} part of the eigenfunction bound is already
        # folded into the damping passed to the cutoff search, so the
        # envelope here is just the constant front factor
        front_prod = math.prod(fronts)

        def envelope(g, _c=front_prod):
            return _c

        def build_evals(g_max):
            evals = []
            for x, front in zip(xs, fronts):
                needed = _terms_needed(max(front, 1e-300),
                                       g_max * series_bound_base(spec, x),
                                       tol)
                if needed is None:
                    raise ToleranceError(
                        "eigenfunction series not certifiable over the "
                        f"quadrature range [0, {g_max:.3g}]; reduce the "
                        "measure support or increase t")
                series = eigen_coefficients(spec, x, eig_kind,
                                            n_terms=needed)
                evals.append(
                    lambda g, s=series: _eigen_value_array(s, g, tol))
            return evals

    g_max = _generic_gamma_max(measure, t - growth, tol, envelope)
    evals = build_evals(g_max)

    if measure.knots is not None:
        # piecewise-cubic density: a fixed Gauss rule per cell is exact up
        # to the smooth eigenfunction/damping factors, provided the cells
        # resolve the power-law weight near the left end of the support --
        # so refine the knot partition with a geometric overlay
        hi = min(g_max, measure.support_end)
        knots = measure.knots[measure.knots <= hi]
        if knots.size == 0 or knots[-1] < hi:
            knots = np.append(knots, hi)
        lo = knots[0]
        if lo <= 0 or hi / lo < 1.0:
            raise DomainError("degenerate table support")
        overlay = np.geomspace(lo, hi, 257)
        cuts = np.unique(np.concatenate([knots, overlay]))

        def cell_sum(order):
            nodes, wts = np.polynomial.legendre.leggauss(order)
            a, b = cuts[:-1], cuts[1:]
            half = 0.5 * (b - a)
            g = (0.5 * (a + b)[:, None] + half[:, None] * nodes[None, :])
            w = half[:, None] * wts[None, :]
            vals = np.exp(-g * t) * np.asarray(measure.density(g))
            for e in evals:
                vals = vals * np.asarray(e(g))
            if inverse_gamma:
                vals = vals / g
            return float(np.sum(vals * w))

        v8, v4 = cell_sum(8), cell_sum(4)
        return v8, abs(v8 - v4)

    def integrand_w(w):
        g = w * w
        if g == 0.0:
            return 0.0
        val = math.exp(-g * t) * float(measure.density(g))
        for e in evals:
            val *= float(e(g))
        if inverse_gamma:
            val /= g
        return val * 2.0 * w

    return integrate(integrand_w, 0.0, math.sqrt(g_max),
                     settings=_SPECTRAL_QUAD)


def _dispatch(spec: DiffusionSpec, t: float, tol: float, *, eig_kind: str,
              xs, inverse_gamma: bool, measure: Optional[SpectralMeasure],
              needed_kind: str):
    _check_t(t)
    if measure is not None:
        if measure.kind != needed_kind:
            raise DomainError(
                f"this functional needs a {needed_kind!r} measure, got "
                f"{measure.kind!r}")
        return _generic_route(spec, t, tol, measure=measure,
                              eig_kind=eig_kind, xs=xs,
                              inverse_gamma=inverse_gamma)
    if spec.is_preset:
        return _preset_route(spec, t, tol, eig_kind=eig_kind, xs=xs,
                             inverse_gamma=inverse_gamma)
    raise UnsupportedSpecError(
        "no spectral measure available: custom scale/speed pairs must be "
        "accompanied by an explicit SpectralMeasure (the inverse spectral "
        "problem is out of scope)")


def transition_density(spec: DiffusionSpec, x: float, y: float, t: float,
                       killed: bool = False,
                       measure: Optional[SpectralMeasure] = None,
                       tol: float = 1e-9, with_error: bool = False):
    """Spectral-quadrature transition density ``p`` (or ``p_hat``) at
    ``(t; x, y)``, a density in ``y`` with respect to the speed measure."""
    if x < 0 or y < 0:
        raise DomainError("x and y must be nonnegative")
    if killed:
        val, err = _dispatch(spec, t, tol, eig_kind="C", xs=(x, y),
                             inverse_gamma=False, measure=measure,
                             needed_kind="killed")
    else:
        val, err = _dispatch(spec, t, tol, eig_kind="A", xs=(x, y),
                             inverse_gamma=False, measure=measure,
                             needed_kind="principal")
    return (val, err) if with_error else val


def hitting_density(spec: DiffusionSpec, x: float, t: float,
                    measure: Optional[SpectralMeasure] = None,
                    tol: float = 1e-9, with_error: bool = False):
    """Density of the first boundary-hitting time from ``x > 0``."""
    if x <= 0:
        raise DomainError("x must be positive")
    val, err = _dispatch(spec, t, tol, eig_kind="C", xs=(x,),
                         inverse_gamma=False, measure=measure,
                         needed_kind="killed")
    return (val, err) if with_error else val


def levy_density(spec: DiffusionSpec, t: float,
                 measure: Optional[SpectralMeasure] = None,
                 tol: float = 1e-9, with_error: bool = False):
    """Levy density of the inverse local time at the boundary."""
    val, err = _dispatch(spec, t, tol, eig_kind="C", xs=(),
                         inverse_gamma=False, measure=measure,
                         needed_kind="killed")
    return (val, err) if with_error else val


def levy_tail(spec: DiffusionSpec, t: float,
              measure: Optional[SpectralMeasure] = None,
              tol: float = 1e-9, with_error: bool = False):
    """Levy tail mass ``nu((t, inf))`` of the inverse local time."""
    val, err = _dispatch(spec, t, tol, eig_kind="C", xs=(),
                         inverse_gamma=True, measure=measure,
                         needed_kind="killed")
    return (val, err) if with_error else val


def hitting_tail(spec: DiffusionSpec, x: float, t: float,
                 measure: Optional[SpectralMeasure] = None,
                 tol: float = 1e-9, with_error: bool = False):
    """``P_x(H_0 > t)``, the boundary-hitting survival function."""
    if x <= 0:
        raise DomainError("x must be positive")
    val, err = _dispatch(spec, t, tol, eig_kind="C", xs=(x,),
                         inverse_gamma=True, measure=measure,
                         needed_kind="killed")
    slack = max(tol, 10.0 * err, 1e-7)
    if val < -slack or val > 1.0 + slack:
        raise ConsistencyError(
            f"hitting tail {val:.6g} outside [0, 1] beyond tolerance")
    val = min(max(val, 0.0), 1.0)
    return (val, err) if with_error else val


def levy_exponent_from_measure(measure: SpectralMeasure, lam: float,
                               tol: float = 1e-9) -> float:
    """Subordinator exponent from a killed spectral measure.

    Uses ``Phi(lam) = int lam / (gamma (gamma + lam)) Delta_hat(dgamma)``,
    the Fubini reduction of the jump-measure integral; this is the custom-
    spec route complementing the closed-form Levy densities of the presets.
    """
    if measure.kind != "killed":
        raise DomainError("the exponent integral needs a 'killed' measure")
    if lam < 0:
        raise DomainError("lambda must be nonnegative")
    if lam == 0.0:
        return 0.0
    end = measure.support_end

    def integrand_w(w):
        g = w * w
        if g == 0.0:
            return 0.0
        return lam / (g * (g + lam)) * float(measure.density(g)) * 2.0 * w

    if math.isfinite(end):
        val, _ = integrate(integrand_w, 0.0, math.sqrt(end),
                           settings=_SPECTRAL_QUAD)
        return val
    head, _ = integrate(integrand_w, 0.0, math.sqrt(max(lam, 1.0)),
                        settings=_SPECTRAL_QUAD)
    tail, _ = integrate(
        lambda g: lam / (g * (g + lam)) * float(measure.density(g)),
        max(lam, 1.0), np.inf)
    return head + tail
