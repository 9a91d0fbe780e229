"""Fixed-particle-number (canonical) statistics by polynomial convolution.

The N-particle trace factorizes over modes, so the canonical partition
function is the degree-N coefficient of the product

    prod_k  sum_n w_k(n) z^n,      w_k(n) = e^{-beta [eps_k n + (g_k/2V) n (n-1)]},

computed by sequential truncated polynomial multiplication with per-step
rescaling (weights span e^{+-O(beta V)}).  The canonical generating
functional replaces w_k(n) by w_k(n) <n|W_k|n> with the diagonal Weyl
matrix element <n|W_k|n> = e^{-|h_k|^2/4V} L_n(|h_k|^2/2V), and divides
by Z_N.

This is a desk-scale tool: it makes no attempt to reach the thermodynamic
limit canonically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, NumericError, ResourceError
from .lattice import Mode, ModelParams, enumerate_modes, tf_coeff
from .single_mode import GrandSpec
from .specfun import laguerre_sequence
from . import grand_canonical

__all__ = [
    "ModePoly",
    "mode_poly",
    "canonical_partition",
    "free_energy_density",
    "canonical_genfun",
    "equivalence_gap",
]

DP_CELL_CAP = 2 * 10 ** 7  # modes x N
WEIGHT_DROP_LOG = 40.0  # per-mode weights below e^-40 of the mode max are dropped


@dataclass(frozen=True)
class ModePoly:
    """Per-mode occupation polynomial; stored values are O(1), scale is the log offset."""

    coeffs: np.ndarray
    scale: float


def _mode_log_weights(mode: Mode, beta: float, V: float, n_cap: int) -> np.ndarray:
    n = np.arange(n_cap + 1, dtype=float)
    return -beta * (mode.eps * n + mode.g / (2.0 * V) * n * (n - 1.0))


def mode_poly(mode: Mode, beta: float, V: float, N: int) -> ModePoly:
    """Occupation weights of a single mode up to degree min(N, decay cap)."""
    logw = _mode_log_weights(mode, beta, V, N)
    m = float(logw.max())
    keep = np.nonzero(logw >= m - WEIGHT_DROP_LOG)[0]
    n_cap = int(keep.max())
    return ModePoly(coeffs=np.exp(logw[: n_cap + 1] - m), scale=m)


def _convolve_chain(polys, N: int):
    """Truncated product of mode polynomials; returns (coeffs, log offset).

    Rescaled by the running max coefficient after every multiplication, so
    stored values stay O(1) across weights spanning e^{+-O(beta V)}.
    """
    acc = np.zeros(N + 1)
    acc[0] = 1.0
    log_off = 0.0
    for poly in polys:
        acc = np.convolve(acc, poly.coeffs)[: N + 1]
        log_off += poly.scale
        m = float(np.abs(acc).max())
        if m == 0.0:
            return acc, -math.inf
        acc = acc / m
        log_off += math.log(m)
    return acc, log_off


def _check_dp_size(n_modes: int, N: int) -> None:
    if n_modes * max(N, 1) > DP_CELL_CAP:
        raise ResourceError(
            f"DP size {n_modes} modes x N={N} exceeds cap {DP_CELL_CAP:.0e}")


def canonical_partition(params: ModelParams, beta: float, N: int,
                        eps_cutoff: float) -> float:
    """log Z_N over the modes below eps_cutoff."""
    if N < 0:
        raise DomainError(f"particle number must be >= 0, got {N}")
    if N == 0:
        return 0.0
    modes = enumerate_modes(params, eps_cutoff)
    _check_dp_size(len(modes), N)
    coeffs, log_off = _convolve_chain(
        (mode_poly(m, beta, params.volume, N) for m in modes), N)
    if coeffs[N] <= 0.0:
        raise NumericError(f"canonical coefficient vanished at N = {N}")
    return math.log(coeffs[N]) + log_off


def free_energy_density(params: ModelParams, beta: float, N: int,
                        eps_cutoff: float) -> float:
    """f = -(1/(beta V)) log Z_N."""
    return -canonical_partition(params, beta, N, eps_cutoff) / (beta * params.volume)


def canonical_genfun(params: ModelParams, beta: float, N: int, tf,
                     eps_cutoff: float) -> float:
    """Canonical expectation of the Weyl product at fixed N; lies in [-1, 1]."""
    if N < 0:
        raise DomainError(f"particle number must be >= 0, got {N}")
    modes = enumerate_modes(params, eps_cutoff)
    _check_dp_size(len(modes), N)
    V = params.volume
    z_polys = []
    w_polys = []
    log_fock = 0.0  # sum of the n-independent e^{-|h_k|^2/4V} prefactors
    for m in modes:
        poly = mode_poly(m, beta, V, N)
        z_polys.append(poly)
        hk2 = float(np.abs(tf_coeff(tf, m)) ** 2)
        x = hk2 / (2.0 * V)
        log_fock += -0.25 * hk2 / V
        lad = laguerre_sequence(len(poly.coeffs) - 1, x).values
        w_polys.append(ModePoly(coeffs=poly.coeffs * lad, scale=poly.scale))
    if N == 0:
        return math.exp(log_fock)
    z_coeffs, z_off = _convolve_chain(z_polys, N)
    if z_coeffs[N] <= 0.0:
        raise NumericError(f"canonical coefficient vanished at N = {N}")
    w_coeffs, w_off = _convolve_chain(w_polys, N)
    if w_coeffs[N] == 0.0:
        return 0.0
    ratio = w_coeffs[N] / z_coeffs[N]
    return math.copysign(math.exp(math.log(abs(ratio)) + w_off - z_off + log_fock), ratio)


def equivalence_gap(params: ModelParams, beta: float, rho: float, tf, L: float,
                    eps_cutoff: float | None = None) -> float:
    """|E_can(beta, N; h) - E_gc(beta, mu_V(N/V); h)| at matched density N/V.

    N = floor(V rho); the grand-canonical side is solved at the realized
    canonical density N/V so the two ensembles see identical particle
    content.
    """
    p = replace(params, L=L)
    V = p.volume
    N = int(math.floor(V * rho))
    if N < 1:
        raise DomainError(f"floor(V rho) = {N}; need at least one particle")
    if eps_cutoff is None:
        # mu = 0 is the subcritical worst case for both tail certificates
        eps_cutoff = grand_canonical.choose_genfun_cutoff(p, beta, 0.0, tf)
    e_can = canonical_genfun(p, beta, N, tf, eps_cutoff)
    spec = GrandSpec(beta=beta, mu=0.0, V=V)
    mu = grand_canonical.solve_mu(p, spec, N / V, eps_cutoff=eps_cutoff)
    e_gc = grand_canonical.genfun_finite(p, GrandSpec(beta=beta, mu=mu, V=V), tf,
                                         eps_cutoff=eps_cutoff)
    return abs(e_can - e_gc)
