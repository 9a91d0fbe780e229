"""Exact grand-canonical statistics of one mode.

A mode with dispersion eps and repulsion g in volume V at (beta, mu) has
occupation weights

    nu(n) propto exp(-beta [ (eps - mu - g/2V) n + (g/2V) n^2 ]),

the diagonal matrix elements of e^{-beta(H - mu N)} in the number basis.
For g = 0 the weights are geometric and everything has a closed form; for
g > 0 the quadratic term caps the occupation near n* = V (mu - eps)/g and
all sums are evaluated in the log domain with a certified truncation.

The Weyl (generating-functional) factor of the mode is

    Gamma = e^{-x/2} sum_n nu(n) L_n(x),      x = |h_k|^2 / 2V,

whose free-mode closed form (via the Laguerre generating function) is
gamma = exp{ -(x/2) coth(beta (eps - mu)/2) }.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, DomainError, ResourceError
from .lattice import Mode
from .specfun import laguerre_weighted_sum

__all__ = [
    "GrandSpec",
    "ModePMF",
    "ModeStats",
    "mode_log_partition",
    "mode_pmf",
    "mode_occupation",
    "occupation_bound_gap",
    "mode_weyl_factor",
    "mode_weyl_factor_free",
    "quad_mode_stats",
    "free_mode_stats",
]

TAIL_LOG_TOL = math.log(1e-16)


@dataclass(frozen=True)
class GrandSpec:
    """A (beta, mu, V) evaluation context with truncation controls."""

    beta: float
    mu: float
    V: float
    nmax_cap: int = 5_000_000
    quad_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise DomainError(f"beta must be > 0, got {self.beta}")
        if self.V <= 0:
            raise DomainError(f"volume must be > 0, got {self.V}")


@dataclass(frozen=True)
class ModePMF:
    """Normalized occupation distribution nu(n), n = 0..N_max."""

    weights: np.ndarray
    log_norm: float


@dataclass(frozen=True)
class ModeStats:
    log_partition: float
    occupation: float
    weyl: float | None = None


def _require_subcritical(eps: float, mu: float) -> None:
    if mu >= eps:
        raise DivergenceError(
            f"free mode diverges: mu = {mu} must stay below eps = {eps}")


def free_mode_stats(beta: float, eps: float, mu: float, x: float | None = None) -> ModeStats:
    """Closed forms of the g = 0 (geometric) mode."""
    _require_subcritical(eps, mu)
    delta = beta * (eps - mu)
    log_z = -math.log1p(-math.exp(-delta)) if delta < 700 else math.exp(-delta)
    occ = 1.0 / math.expm1(delta) if delta < 700 else 0.0
    weyl = None
    if x is not None:
        # coth(delta/2) = 1 + 2/(e^delta - 1)
        weyl = math.exp(-0.5 * x * (1.0 + 2.0 * occ))
    return ModeStats(log_partition=log_z, occupation=occ, weyl=weyl)


def _quad_window(beta: float, a: float, b: float, V: float, g: float,
                 mu_minus_eps: float, cap: int) -> int:
    """Truncation point: 1.5x the occupation peak plus eight Gaussian widths.

    For strongly decaying modes (a > 0) a certified geometric cap is taken
    when smaller; the tail certificate below is checked either way.
    """
    sigma = math.sqrt(V / (beta * g))
    window = 1.5 * max(0.0, V * mu_minus_eps / g) + 8.0 * sigma + 64.0
    if a > 0:
        window = min(window, 46.0 / (beta * a) + 64.0)
    if not math.isfinite(window) or window > cap:
        raise ResourceError(f"occupation truncation {window} exceeds cap {cap}")
    return math.ceil(window)


def quad_mode_stats(beta: float, mu: float, V: float, eps: float, g: float,
                    x: float | None = None, nmax_cap: int = 5_000_000,
                    want_occupation: bool = True) -> ModeStats:
    """Log-domain sums for a g > 0 mode, truncation tail certified < 1e-16 of Z."""
    if g <= 0:
        raise DomainError("quad_mode_stats needs g > 0; use free_mode_stats for g = 0")
    b = g / (2.0 * V)
    a = eps - mu - b
    n_max = _quad_window(beta, a, b, V, g, mu - eps, nmax_cap)
    while True:
        n = np.arange(n_max + 1, dtype=float)
        logw = -beta * (a * n + b * n * n)
        m = float(logw.max())
        w = np.exp(logw - m)
        z = float(w.sum())
        log_z = m + math.log(z)
        # geometric tail certificate: weight ratios beyond n_max keep shrinking
        log_w_next = -beta * (a * (n_max + 1.0) + b * (n_max + 1.0) ** 2)
        ratio = math.exp(max(-745.0, -beta * (a + b * (2.0 * n_max + 3.0))))
        if ratio < 1.0 and (log_w_next - math.log1p(-ratio) - log_z) < TAIL_LOG_TOL:
            break
        if n_max >= nmax_cap:
            raise ResourceError(f"tail certificate not met below cap {nmax_cap}")
        n_max = min(2 * n_max, nmax_cap)
    probs = w / z
    occ = float(np.dot(n, probs)) if want_occupation else math.nan
    weyl = None
    if x is not None:
        # L_n(0) = 1 makes the normalized average exactly 1
        weyl = 1.0 if x == 0.0 else math.exp(-0.5 * x) * laguerre_weighted_sum(x, probs)
    return ModeStats(log_partition=log_z, occupation=occ, weyl=weyl)


def _stats(mode: Mode, spec: GrandSpec, x: float | None = None) -> ModeStats:
    if mode.g == 0:
        return free_mode_stats(spec.beta, mode.eps, spec.mu, x)
    return quad_mode_stats(spec.beta, spec.mu, spec.V, mode.eps, mode.g,
                           x=x, nmax_cap=spec.nmax_cap)


def mode_log_partition(mode: Mode, spec: GrandSpec) -> float:
    """log sum_n exp(-beta[(eps-mu-g/2V) n + (g/2V) n^2])."""
    return _stats(mode, spec).log_partition


def mode_occupation(mode: Mode, spec: GrandSpec) -> float:
    """<N> = sum_n n nu(n); reduces to 1/(e^{beta(eps-mu)} - 1) when g = 0."""
    return _stats(mode, spec).occupation


def mode_pmf(mode: Mode, spec: GrandSpec) -> ModePMF:
    """Materialized nu(n) (normalized) together with the log partition sum."""
    beta, mu, V = spec.beta, spec.mu, spec.V
    if mode.g == 0:
        _require_subcritical(mode.eps, mu)
        delta = beta * (mode.eps - mu)
        n_max = min(int(40.0 / delta) + 64, spec.nmax_cap)
        b = 0.0
        a = mode.eps - mu
    else:
        b = mode.g / (2.0 * V)
        a = mode.eps - mu - b
        n_max = _quad_window(beta, a, b, V, mode.g, mu - mode.eps, spec.nmax_cap)
    n = np.arange(n_max + 1, dtype=float)
    logw = -beta * (a * n + b * n * n)
    m = float(logw.max())
    w = np.exp(logw - m)
    z = float(w.sum())
    return ModePMF(weights=w / z, log_norm=m + math.log(z))


def occupation_bound_gap(mode: Mode, spec: GrandSpec) -> float:
    """[1/(e^{beta(eps-mu-g/V)} - 1)] - <N>; non-negative for modes away from criticality.

    Requires eps - mu - g/V > 0 (membership in the set where the free-gas
    comparison bound applies).
    """
    shift = mode.eps - spec.mu - mode.g / spec.V
    if shift <= 0:
        raise DomainError(
            "occupation bound needs eps - mu - g/V > 0 (mode must lie in the "
            f"suppressed set D~+); got {shift}")
    bound = 1.0 / math.expm1(spec.beta * shift) if spec.beta * shift < 700 else 0.0
    return bound - mode_occupation(mode, spec)


def mode_weyl_factor(mode: Mode, spec: GrandSpec, hk_abs_sq: float) -> float:
    """Gamma = e^{-x/2} sum_n nu(n) L_n(x) with x = |h_k|^2 / 2V; lies in [-1, 1]."""
    if hk_abs_sq < 0:
        raise DomainError(f"|h_k|^2 must be >= 0, got {hk_abs_sq}")
    x = hk_abs_sq / (2.0 * spec.V)
    if mode.g == 0:
        if x == 0.0:
            _require_subcritical(mode.eps, spec.mu)
            return 1.0
        # honest truncated series against the geometric weights; the
        # |L_n| <= e^{x/2} bound certifies the same truncation point
        pmf = mode_pmf(mode, spec)
        return math.exp(-0.5 * x) * laguerre_weighted_sum(x, pmf.weights)
    return quad_mode_stats(spec.beta, spec.mu, spec.V, mode.eps, mode.g,
                           x=x, nmax_cap=spec.nmax_cap, want_occupation=False).weyl


def mode_weyl_factor_free(mode: Mode, spec: GrandSpec, hk_abs_sq: float) -> float:
    """Closed form exp{-(|h_k|^2/4V) coth(beta (eps - mu)/2)} for g = 0."""
    if hk_abs_sq < 0:
        raise DomainError(f"|h_k|^2 must be >= 0, got {hk_abs_sq}")
    x = hk_abs_sq / (2.0 * spec.V)
    return free_mode_stats(spec.beta, mode.eps, spec.mu, x=x).weyl
