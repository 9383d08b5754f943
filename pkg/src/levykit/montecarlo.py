"""Monte Carlo engines: exact samplers and streaming grid simulation.

Two layers live here.  The exact layer draws hitting times, inverse
local times (via Kanter's representation of the positive stable law), and
the Brownian last-zero/meander decomposition directly from their known
laws — no time discretization at all, so tail probabilities at horizons
like ``t = 1e4`` cost the same as ``t = 1``.  The grid layer streams
reflected-Brownian or squared-Bessel paths step by step, carrying only
the current state and a handful of accumulators, so ``1e5`` paths with
``2e4`` steps never materialize as a matrix.

Local time on the grid is measured the blunt way: time spent in the band
``[0, eps)`` divided by the speed measure of the band.  That estimator
has a known O(sqrt(dt)) discretization bias at fixed ``eps = sqrt(dt)``;
:func:`occupation_bias` computes the exact mean correction from closed
forms so the martingale checks can subtract it instead of burning paths
on a smaller step.

Reproducibility contract: every public entry point takes a ``seed``;
work is split into fixed-size chunks whose generators come from
``SeedSequence(seed).spawn``, and partial results are reduced in chunk
order — so results are bit-identical for a given seed regardless of the
thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .diffusions import (DiffusionSpec, band_occupancy_probability,
                         bessel_exponent_constant, cumulative_speed)
from .errors import (DomainError, RangeError, ResolutionError,
                     UnsupportedSpecError)

__all__ = [
    "McEstimate",
    "PathSample",
    "SubordinatorSample",
    "simulate_path",
    "sample_hitting_time",
    "sample_tau",
    "sample_local_time",
    "sample_brownian_state",
    "sample_meander_position",
    "sample_positive_step",
    "estimate_hitting_tail",
    "estimate_localtime_tail",
    "levy_exponent_mc",
    "occupation_bias",
    "doob_meyer_check",
    "resolve_threads",
    "DEFAULT_CHUNK",
]

DEFAULT_CHUNK = 25_000


def resolve_threads(threads: Optional[int] = None) -> int:
    """Thread count: the argument, else ``LEVYKIT_THREADS``, else 1."""
    if threads is None:
        threads = int(os.environ.get("LEVYKIT_THREADS", "1") or 1)
    return max(1, int(threads))


@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo point estimate with its standard error."""

    mean: float
    std_error: float
    n_paths: int
    seed: Optional[int] = None

    def half_width(self, k: float = 3.0) -> float:
        return k * self.std_error


@dataclass(frozen=True)
class PathSample:
    """One simulated path on a uniform grid.

    ``local_time`` is the raw band-occupation estimate (no bias
    correction): nondecreasing, flat outside ``[0, band_eps)``.
    ``hit_zero_at`` is the first grid time the path is inside the band,
    or None if it never is.
    """

    times: np.ndarray
    positions: np.ndarray
    local_time: np.ndarray
    band_eps: float
    hit_zero_at: Optional[float]


@dataclass(frozen=True)
class SubordinatorSample:
    """Draws of the inverse local time tau_ell."""

    values: np.ndarray
    ell: float
    alpha: float
    seed: Optional[int] = None


# ---------------------------------------------------------------------------
# seeding / chunked execution
# ---------------------------------------------------------------------------

def _chunk_sizes(n: int, chunk: int) -> list:
    if n <= 0:
        raise DomainError("need at least one path")
    sizes = [chunk] * (n // chunk)
    if n % chunk:
        sizes.append(n % chunk)
    return sizes


def _run_chunked(n: int, seed, worker: Callable, threads: Optional[int],
                 chunk: int = DEFAULT_CHUNK) -> list:
    """Run ``worker(rng, size)`` over fixed-size chunks; results in order.

    The chunk layout depends only on ``n`` and ``chunk`` — never on the
    thread count — and each chunk gets its own spawned generator, so the
    reduction is deterministic for a given seed.
    """
    sizes = _chunk_sizes(n, chunk)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    nthreads = resolve_threads(threads)
    if nthreads == 1 or len(sizes) == 1:
        return [worker(np.random.default_rng(s), m)
                for s, m in zip(streams, sizes)]
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        futures = [pool.submit(worker, np.random.default_rng(s), m)
                   for s, m in zip(streams, sizes)]
        return [f.result() for f in futures]


def _mean_se(total: float, total_sq: float, n: int) -> tuple:
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return mean, math.sqrt(var / n)


# ---------------------------------------------------------------------------
# exact samplers
# ---------------------------------------------------------------------------

def _require_preset(spec: DiffusionSpec, what: str) -> float:
    if not spec.is_preset:
        raise UnsupportedSpecError(
            f"{what} is only available for the built-in power-law "
            "scale/speed family")
    return spec.alpha


def sample_hitting_time(spec: DiffusionSpec, x: float, n: int,
                        rng=None, seed=None) -> np.ndarray:
    """Exact draws of the first time the boundary is reached from ``x``.

    Uses ``H_0 = x^2 / (2 G)`` with ``G ~ Gamma(alpha, 1)``.
    """
    alpha = _require_preset(spec, "exact hitting-time sampling")
    if x < 0:
        raise DomainError("x must be nonnegative")
    if rng is None:
        rng = np.random.default_rng(seed)
    if x == 0.0:
        return np.zeros(n)
    return x * x / (2.0 * rng.gamma(alpha, 1.0, size=n))


def _standard_positive_stable(alpha: float, n: int, rng) -> np.ndarray:
    # Kanter's representation: S with E exp(-lam S) = exp(-lam^alpha)
    theta = rng.uniform(0.0, math.pi, size=n)
    w = rng.standard_exponential(size=n)
    log_a = (alpha * np.log(np.sin(alpha * theta))
             + (1.0 - alpha) * np.log(np.sin((1.0 - alpha) * theta))
             - np.log(np.sin(theta))) / (1.0 - alpha)
    return np.exp((1.0 - alpha) / alpha * (log_a - np.log(w)))


def sample_tau(spec: DiffusionSpec, ell: float, n: int,
               rng=None, seed=None) -> SubordinatorSample:
    """Exact draws of the inverse local time ``tau_ell``.

    ``tau_ell`` is positive stable with Laplace exponent
    ``ell * kappa * lam^alpha``, so ``tau_ell = (ell kappa)^{1/alpha} S``
    for a standard positive stable ``S``.
    """
    alpha = _require_preset(spec, "exact inverse-local-time sampling")
    if ell < 0:
        raise DomainError("ell must be nonnegative")
    if rng is None:
        rng = np.random.default_rng(seed)
    if ell == 0.0:
        vals = np.zeros(n)
    else:
        kappa = bessel_exponent_constant(alpha)
        scale = (ell * kappa) ** (1.0 / alpha)
        vals = scale * _standard_positive_stable(alpha, n, rng)
    return SubordinatorSample(values=vals, ell=float(ell), alpha=alpha,
                              seed=seed)


def sample_local_time(spec: DiffusionSpec, x: float, t: float, n: int,
                      rng=None, seed=None) -> np.ndarray:
    """Exact draws of the marginal law of ``L_t`` from ``x``.

    Uses the first-passage inversion ``L_t = ((t - H_0)^+ / tau_1)^alpha``
    with independent exact draws of the hitting time and of ``tau_1`` —
    valid for the one-time marginal via the self-similarity of the
    inverse-local-time subordinator.
    """
    alpha = _require_preset(spec, "exact local-time sampling")
    if t <= 0:
        raise DomainError("t must be positive")
    if rng is None:
        rng = np.random.default_rng(seed)
    h = sample_hitting_time(spec, x, n, rng=rng)
    tau1 = sample_tau(spec, 1.0, n, rng=rng).values
    return (np.maximum(t - h, 0.0) / tau1) ** alpha


def sample_brownian_state(u: float, n: int, rng=None, seed=None) -> dict:
    """Exact joint draw of (last zero, local time, position) at time ``u``
    for reflected Brownian motion from 0.

    The last zero is ``u * Beta(1/2, 1/2)``; the local time accrued by
    then is Rayleigh(sqrt(g)); the position is an independent meander
    endpoint, Rayleigh(sqrt(u - g)).
    """
    if u <= 0:
        raise DomainError("u must be positive")
    if rng is None:
        rng = np.random.default_rng(seed)
    g = u * rng.beta(0.5, 0.5, size=n)
    loc = rng.rayleigh(scale=np.sqrt(g))
    pos = rng.rayleigh(scale=np.sqrt(np.maximum(u - g, 0.0)))
    return {"last_zero": g, "local_time": loc, "position": pos}


def sample_meander_position(r, v: float, n: Optional[int] = None,
                            rng=None) -> np.ndarray:
    """Position at time ``v`` of a Brownian meander of length ``r``.

    ``r`` may be a scalar (with ``n`` draws) or an array of per-sample
    lengths, all ``>= v``.  Rejection from the Rayleigh(sqrt(v)) proposal
    with acceptance ``2 Phi(y / sqrt(r - v)) - 1`` (the probability a
    Brownian bridge stays positive past ``y``); at ``r == v`` this is the
    meander endpoint, plain Rayleigh(sqrt(v)).
    """
    r = np.asarray(r, dtype=float)
    if r.ndim == 0:
        r = np.full(int(n), float(r))
    if v <= 0 or np.any(r < v):
        raise DomainError("need 0 < v <= r")
    out = np.empty(r.size)
    todo = np.arange(r.size)
    sv = math.sqrt(v)
    while todo.size:
        y = rng.rayleigh(scale=sv, size=todo.size)
        gap = r[todo] - v
        with np.errstate(divide="ignore"):
            p_ok = np.where(gap > 0.0, 2.0 * ndtr(y / np.sqrt(gap)) - 1.0,
                            1.0)
        accept = rng.random(todo.size) < p_ok
        out[todo[accept]] = y[accept]
        todo = todo[~accept]
    return out


def sample_positive_step(y, w, rng) -> np.ndarray:
    """Endpoint after time ``w`` of Brownian motion from ``y > 0``
    conditioned to stay positive on the way (``w`` scalar or per-sample).

    Rejection from the free Gaussian step: discard nonpositive
    proposals, accept ``z`` with probability ``1 - exp(-2 y z / w)``.
    """
    y = np.asarray(y, dtype=float)
    w = np.broadcast_to(np.asarray(w, dtype=float), y.shape).copy()
    if np.any(y <= 0):
        raise DomainError("start values must be positive")
    if np.any(w < 0):
        raise DomainError("w must be nonnegative")
    out = np.where(w == 0.0, y, np.nan)
    todo = np.flatnonzero(w > 0.0)
    while todo.size:
        z = y[todo] + np.sqrt(w[todo]) * rng.standard_normal(todo.size)
        ok = z > 0.0
        accept = ok & (rng.random(todo.size)
                       < -np.expm1(-2.0 * y[todo] * z / w[todo]))
        out[todo[accept]] = z[accept]
        todo = todo[~accept]
    return out


# ---------------------------------------------------------------------------
# grid simulation
# ---------------------------------------------------------------------------

def _check_grid(t: float, dt: float, eps: Optional[float]) -> tuple:
    if t <= 0 or dt <= 0:
        raise DomainError("t and dt must be positive")
    n_steps = int(round(t / dt))
    if abs(n_steps * dt - t) > 1e-9 * max(t, 1.0):
        raise ResolutionError("t must be an integer multiple of dt")
    if eps is None:
        eps = math.sqrt(dt)
    if eps * eps < dt * (1.0 - 1e-12):
        raise ResolutionError(
            f"band eps={eps:g} is below sqrt(dt)={math.sqrt(dt):g}: the "
            "grid cannot resolve excursions that short")
    return n_steps, float(eps)


def _make_stepper(spec: DiffusionSpec, dt: float):
    """State-update closure mapping positions forward one grid step."""
    if not spec.is_preset:
        raise UnsupportedSpecError(
            "grid simulation is only implemented for the built-in "
            "power-law family (reflected Brownian / Bessel)")
    if spec.delta == 1.0:
        sdt = math.sqrt(dt)

        def step(x, rng):
            return np.abs(x + sdt * rng.standard_normal(x.size))
    else:
        delta = spec.delta

        def step(x, rng):
            # exact squared-Bessel transition for Z = X^2
            z = rng.noncentral_chisquare(delta, x * x / dt, size=x.size) * dt
            return np.sqrt(z)
    return step


def simulate_path(spec: DiffusionSpec, x0: float, t: float, dt: float,
                  rng=None, seed=None, eps: Optional[float] = None
                  ) -> PathSample:
    """One path on a uniform grid, with raw band-occupation local time."""
    if x0 < 0:
        raise DomainError("x0 must be nonnegative")
    n_steps, eps = _check_grid(t, dt, eps)
    if rng is None:
        rng = np.random.default_rng(seed)
    step = _make_stepper(spec, dt)
    m_eps = cumulative_speed(spec, eps)
    pos = np.empty(n_steps + 1)
    pos[0] = x0
    x = np.array([x0])
    for k in range(n_steps):
        x = step(x, rng)
        pos[k + 1] = x[0]
    in_band = pos < eps
    loc = np.concatenate([[0.0], np.cumsum(in_band[:-1]) * dt / m_eps])
    hits = np.flatnonzero(in_band)
    times = np.arange(n_steps + 1) * dt
    return PathSample(times=times, positions=pos, local_time=loc,
                      band_eps=eps,
                      hit_zero_at=float(times[hits[0]]) if hits.size
                      else None)


def _stream_ensemble(spec: DiffusionSpec, x0: float, dt: float,
                     n_steps: int, record_idx: Sequence[int],
                     rng, n_paths: int, eps: float):
    """March ``n_paths`` states forward, yielding snapshots at the
    requested step indices: (index, positions, band_occupation_steps)."""
    step = _make_stepper(spec, dt)
    record = sorted(set(int(i) for i in record_idx))
    x = np.full(n_paths, float(x0))
    occ = np.zeros(n_paths)
    out = []
    for k in range(1, n_steps + 1):
        occ += x < eps          # state at time (k-1) dt, left endpoint
        x = step(x, rng)
        if record and k == record[0]:
            out.append((k, x.copy(), occ.copy()))
            record.pop(0)
    return out


def occupation_bias(spec: DiffusionSpec, eps: float, dt: float,
                    t: float) -> float:
    """Exact mean defect of the band-occupation local time from 0.

    ``E L_t - E Lhat_t`` where ``Lhat`` sums left-endpoint band
    indicators: the cell-wise difference between the integrated on-diagonal
    density and the discretized band probability, all in closed form.
    """
    alpha = _require_preset(spec, "occupation bias correction")
    n_steps, eps = _check_grid(t, dt, eps)
    m_eps = cumulative_speed(spec, eps)
    k = np.arange(n_steps)
    a, b = k * dt, (k + 1) * dt
    cells = 2.0 ** (alpha - 1.0) * (b ** alpha - a ** alpha) \
        / (alpha * math.gamma(1.0 - alpha))
    occ = np.empty(n_steps)
    occ[0] = 1.0
    if n_steps > 1:
        occ[1:] = band_occupancy_probability(spec, a[1:], eps)
    return float(np.sum(cells) - dt / m_eps * np.sum(occ))


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def _indicator_estimate(hits: int, n: int, seed) -> McEstimate:
    p = hits / n
    return McEstimate(mean=p, std_error=math.sqrt(max(p * (1 - p), 0.0) / n),
                      n_paths=n, seed=seed)


def estimate_hitting_tail(spec: DiffusionSpec, x: float, t: float, n: int,
                          seed=None, method: str = "exact",
                          dt: float = 1e-3, threads=None) -> McEstimate:
    """Monte Carlo ``P_x(H_0 > t)``.

    ``method="exact"`` draws the hitting time from its gamma
    representation; ``"pathwise"`` streams grid paths and counts those
    that avoid the band ``[0, sqrt(dt))`` — biased low by band-vs-point
    hitting, shrinking as ``dt`` does.
    """
    if x <= 0:
        raise DomainError("x must be positive (from 0 the tail is 0)")
    if method == "exact":
        def worker(rng, m):
            h = sample_hitting_time(spec, x, m, rng=rng)
            return int(np.sum(h > t)), m

        parts = _run_chunked(n, seed, worker, threads)
        hits = sum(p[0] for p in parts)
        return _indicator_estimate(hits, n, seed)
    if method != "pathwise":
        raise DomainError(f"unknown method {method!r}")
    n_steps, eps = _check_grid(t, dt, None)

    def worker(rng, m):
        snaps = _stream_ensemble(spec, x, dt, n_steps, [n_steps], rng, m,
                                 eps)
        _, _, occ = snaps[0]
        return int(np.sum(occ == 0)), m

    parts = _run_chunked(n, seed, worker, threads)
    hits = sum(p[0] for p in parts)
    return _indicator_estimate(hits, n, seed)


def estimate_localtime_tail(spec: DiffusionSpec, x: float, t: float,
                            ell: float, n: int, seed=None,
                            method: str = "exact", dt: float = 1e-3,
                            threads=None) -> McEstimate:
    """Monte Carlo ``P_x(L_t <= ell)``.

    The exact route uses the renewal split at the first boundary visit:
    the event equals ``{H_0 + tau_ell > t}`` with the two pieces
    independent, both drawn from their exact laws.  The pathwise route
    compares raw band local time against ``ell`` on grid paths.
    """
    if x < 0 or ell < 0:
        raise DomainError("x and ell must be nonnegative")
    if method == "exact":
        def worker(rng, m):
            h = sample_hitting_time(spec, x, m, rng=rng)
            tau = sample_tau(spec, ell, m, rng=rng).values
            return int(np.sum(h + tau > t)), m

        parts = _run_chunked(n, seed, worker, threads)
        hits = sum(p[0] for p in parts)
        return _indicator_estimate(hits, n, seed)
    if method != "pathwise":
        raise DomainError(f"unknown method {method!r}")
    n_steps, eps = _check_grid(t, dt, None)

    def worker(rng, m):
        snaps = _stream_ensemble(spec, x, dt, n_steps, [n_steps], rng, m,
                                 eps)
        _, _, occ = snaps[0]
        m_eps = cumulative_speed(spec, eps)
        return int(np.sum(occ * dt / m_eps <= ell)), m

    parts = _run_chunked(n, seed, worker, threads)
    hits = sum(p[0] for p in parts)
    return _indicator_estimate(hits, n, seed)


def levy_exponent_mc(spec: DiffusionSpec, lam: float, ell: float = 1.0,
                     n: int = 100_000, seed=None,
                     threads=None) -> McEstimate:
    """Laplace exponent of the inverse local time by simulation:
    ``-log E[exp(-lam tau_ell)] / ell``, with a delta-method error bar."""
    if lam < 0:
        raise DomainError("lam must be nonnegative")
    if ell <= 0:
        raise DomainError("ell must be positive")
    if lam == 0.0:
        return McEstimate(mean=0.0, std_error=0.0, n_paths=n, seed=seed)

    def worker(rng, m):
        tau = sample_tau(spec, ell, m, rng=rng).values
        v = np.exp(-lam * tau)
        return float(np.sum(v)), float(np.sum(v * v)), m

    parts = _run_chunked(n, seed, worker, threads)
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    mean, se = _mean_se(total, total_sq, n)
    if mean <= 0:
        raise RangeError("all mass beyond machine range; lam too large")
    return McEstimate(mean=-math.log(mean) / ell,
                      std_error=se / (mean * ell), n_paths=n, seed=seed)


def doob_meyer_check(spec: DiffusionSpec, times: Sequence[float],
                     n_paths: int = 100_000, dt: float = 1e-4,
                     seed=None, eps: Optional[float] = None,
                     x0: float = 0.0, threads=None,
                     chunk: int = DEFAULT_CHUNK) -> list:
    """Compensator identity on grid paths: E[S(X_t)] vs E[L_t] from 0.

    Streams one ensemble to ``max(times)``, snapshotting every requested
    checkpoint.  The raw band local time is shifted by the closed-form
    :func:`occupation_bias`; the reported gap and its standard error come
    from the per-path difference, so the two means share their noise.
    """
    alpha = _require_preset(spec, "compensator check")
    times = sorted(float(t) for t in times)
    if not times or times[0] <= 0:
        raise DomainError("need positive checkpoint times")
    t_end = times[-1]
    n_steps, eps = _check_grid(t_end, dt, eps)
    idx = [int(round(t / dt)) for t in times]
    if any(abs(i * dt - t) > 1e-9 for i, t in zip(idx, times)):
        raise ResolutionError("checkpoints must sit on the time grid")
    m_eps = cumulative_speed(spec, eps)

    def worker(rng, m):
        snaps = _stream_ensemble(spec, x0, dt, n_steps, idx, rng, m, eps)
        stats = []
        for k, x, occ in snaps:
            s_of_x = np.asarray(spec.scale(x), dtype=float)
            loc = occ * (dt / m_eps)
            diff = s_of_x - loc
            stats.append((float(np.sum(diff)), float(np.sum(diff * diff)),
                          float(np.sum(s_of_x)), float(np.sum(loc))))
        return stats

    parts = _run_chunked(n_paths, seed, worker, threads, chunk=chunk)
    rows = []
    for j, t in enumerate(times):
        tot = [sum(p[j][i] for p in parts) for i in range(4)]
        gap_mean, gap_se = _mean_se(tot[0], tot[1], n_paths)
        bias = occupation_bias(spec, eps, dt, t)
        rows.append({
            "t": t,
            "scale_mean": tot[2] / n_paths,
            "local_mean": tot[3] / n_paths + bias,
            "gap": gap_mean - bias,
            "std_error": gap_se,
            "bias_correction": bias,
            "n_paths": n_paths,
        })
    return rows
