"""Reproducible V-ladder studies connecting finite volumes to the limit laws.

Each study is a pure function of its inputs returning a small result
dataclass; ``write_study`` serializes results to JSON/CSV named by a hash
of the configuration, so identical configs rewrite byte-identical files.

Ladder points are independent; they are evaluated in ascending L order and
aggregated deterministically.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .lattice import GaussianMix, ModelParams
from .single_mode import GrandSpec
from .specfun import bessel_j0
from . import grand_canonical, tdlimit
from .tdlimit import LimitFunctional

__all__ = [
    "ScalingFit",
    "CondensateTrend",
    "GenfunLadder",
    "TruncatedPair",
    "mu_scaling_study",
    "typeIII_study",
    "genfun_convergence_study",
    "truncated_pair_study",
    "positivity_check",
    "positivity_nodes",
    "config_hash",
    "write_study",
]


# ---------------------------------------------------------------------------
# Chemical-potential scaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit of log mu_V against log V on a supercritical ladder."""

    points: tuple          # ((V, mu_V), ...)
    slope: float
    prefactor: float       # exp(intercept), comparable to the B constant
    r_squared: float
    theory_slope: float    # -2/(d+2)
    theory_B: float

    def to_dict(self) -> dict:
        return {
            "points": [list(p) for p in self.points],
            "slope": self.slope, "prefactor": self.prefactor,
            "r_squared": self.r_squared, "theory_slope": self.theory_slope,
            "theory_B": self.theory_B,
        }


def _ols_loglog(points) -> tuple:
    x = np.log([v for v, _ in points])
    y = np.log([m for _, m in points])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def mu_scaling_study(params: ModelParams, beta: float, rho: float,
                     L_ladder) -> ScalingFit:
    """Solve mu_V along the ladder and fit the supercritical decay exponent.

    Points with mu_V <= 0 (not yet in the scaling regime) are excluded
    with a warning.
    """
    if params.d <= 2:
        raise DomainError("the scaling law needs d > 2")
    if params.gk_profile <= 0:
        raise DomainError("the scaling law needs a constant g > 0 profile")
    ladder = sorted(L_ladder)
    if len(ladder) < 4:
        raise DomainError(f"need at least 4 ladder points, got {len(ladder)}")
    points = []
    for L in ladder:
        p = replace(params, L=L)
        spec = GrandSpec(beta=beta, mu=0.0, V=p.volume)
        mu = grand_canonical.solve_mu(p, spec, rho)
        if mu <= 0:
            warnings.warn(f"mu_V = {mu} <= 0 at L = {L}; point excluded from the fit")
            continue
        points.append((p.volume, mu))
    slope, intercept, r2 = _ols_loglog(points)
    return ScalingFit(points=tuple(points), slope=slope,
                      prefactor=math.exp(intercept), r_squared=r2,
                      theory_slope=-2.0 / (params.d + 2),
                      theory_B=tdlimit.B_of_rho(beta, rho, params))


# ---------------------------------------------------------------------------
# Condensate localization ladder
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CondensateTrend:
    """Per-L condensate scans plus the trend facts the limit theorems predict."""

    scans: tuple                      # ((L, CondensateReport), ...)
    max_fractions: tuple
    smallest_delta_densities: tuple
    max_fraction_strictly_decreasing: bool
    final_shell_density: float
    target_excess: float              # rho - rho_c (0 when subcritical)

    def to_dict(self) -> dict:
        return {
            "scans": [[L, rep.to_dict()] for L, rep in self.scans],
            "max_fractions": list(self.max_fractions),
            "smallest_delta_densities": list(self.smallest_delta_densities),
            "max_fraction_strictly_decreasing": self.max_fraction_strictly_decreasing,
            "final_shell_density": self.final_shell_density,
            "target_excess": self.target_excess,
        }


def typeIII_study(params: ModelParams, beta: float, rho: float, L_ladder,
                  deltas) -> CondensateTrend:
    """Condensate scans along the ladder (report-only; assertions live in tests)."""
    ladder = sorted(L_ladder)
    scans = []
    for L in ladder:
        p = replace(params, L=L)
        spec0 = GrandSpec(beta=beta, mu=0.0, V=p.volume)
        mu = grand_canonical.solve_mu(p, spec0, rho)
        rep = grand_canonical.condensate_scan(
            p, GrandSpec(beta=beta, mu=mu, V=p.volume), deltas)
        scans.append((L, rep))
    fracs = tuple(rep.evidence["max_mode_fraction"] for _, rep in scans)
    small = tuple(rep.shell_densities[0][1] for _, rep in scans)
    rc = tdlimit.rho_c_I(beta, params)
    return CondensateTrend(
        scans=tuple(scans),
        max_fractions=fracs,
        smallest_delta_densities=small,
        max_fraction_strictly_decreasing=all(a > b for a, b in zip(fracs, fracs[1:])),
        final_shell_density=small[-1],
        target_excess=max(0.0, rho - rc) if math.isfinite(rc) else 0.0,
    )


# ---------------------------------------------------------------------------
# Generating-functional convergence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenfunLadder:
    """|finite-volume product - limit functional| along an L ladder."""

    points: tuple         # ((L, finite, limit, gap), ...)
    gaps_decreasing: bool
    final_gap: float
    limit_value: float

    def to_dict(self) -> dict:
        return {
            "points": [list(p) for p in self.points],
            "gaps_decreasing": self.gaps_decreasing,
            "final_gap": self.final_gap,
            "limit_value": self.limit_value,
        }


def genfun_convergence_study(params: ModelParams, beta: float, tf, L_ladder, *,
                             mu: float | None = None,
                             rho: float | None = None) -> GenfunLadder:
    """Finite-volume generating functionals against the closed-form limit.

    With mu given the comparison runs at fixed chemical potential; with rho
    given the finite-volume side is evaluated at mu_V(rho) (the physically
    matched supercritical comparison).
    """
    if (mu is None) == (rho is None):
        raise DomainError("exactly one of mu or rho must be given")
    func = tdlimit.limit_functional(beta, params, mu=mu, rho=rho)
    limit = func.value(tf)
    points = []
    for L in sorted(L_ladder):
        p = replace(params, L=L)
        if rho is not None:
            mu_v = grand_canonical.solve_mu(
                p, GrandSpec(beta=beta, mu=0.0, V=p.volume), rho)
        else:
            mu_v = mu
        fin = grand_canonical.genfun_finite(
            p, GrandSpec(beta=beta, mu=mu_v, V=p.volume), tf)
        points.append((L, fin, limit, abs(fin - limit)))
    gaps = [pt[3] for pt in points]
    return GenfunLadder(points=tuple(points),
                        gaps_decreasing=all(a > b for a, b in zip(gaps, gaps[1:])),
                        final_gap=gaps[-1], limit_value=limit)


@dataclass(frozen=True)
class TruncatedPair:
    """The interacting and truncated models converging to one common limit."""

    interacting: GenfunLadder
    truncated: GenfunLadder
    mutual_gaps: tuple                # per-L |E^I_V - E^0_V|
    final_mutual_gap: float
    final_individual_gap: float       # max of the two final gaps

    def to_dict(self) -> dict:
        return {
            "interacting": self.interacting.to_dict(),
            "truncated": self.truncated.to_dict(),
            "mutual_gaps": list(self.mutual_gaps),
            "final_mutual_gap": self.final_mutual_gap,
            "final_individual_gap": self.final_individual_gap,
        }


def truncated_pair_study(params: ModelParams, beta: float, rho: float, tf,
                         L_ladder) -> TruncatedPair:
    """Both models at matched (beta, rho) against their shared limit form."""
    ladder = sorted(L_ladder)
    inter = genfun_convergence_study(params, beta, tf, ladder, rho=rho)
    trunc_params = replace(params, gk_profile=0.0)
    trunc = genfun_convergence_study(trunc_params, beta, tf, ladder, rho=rho)
    mutual = tuple(abs(a[1] - b[1]) for a, b in zip(inter.points, trunc.points))
    return TruncatedPair(
        interacting=inter, truncated=trunc, mutual_gaps=mutual,
        final_mutual_gap=mutual[-1],
        final_individual_gap=max(inter.final_gap, trunc.final_gap),
    )


# ---------------------------------------------------------------------------
# Positivity of the limit functionals
# ---------------------------------------------------------------------------

def positivity_nodes(beta: float, mu: float, d: int, kinetic: float,
                     widths, panels: int = 16, order: int = 24):
    """Shared radial quadrature rule for all pairwise forms of one check.

    Using one fixed node set turns every pairwise integral matrix into an
    exact Gram matrix in node space, so positive semi-definiteness survives
    quadrature error; only eigensolver rounding remains.
    """
    w_min = min(widths)
    k_max = math.sqrt(60.0) / w_min + 2.0 * math.sqrt(1.0 / (beta * kinetic))
    edges = np.linspace(0.0, k_max, panels + 1)
    xs, ws = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    surf = 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)
    for a, b in zip(edges[:-1], edges[1:]):
        k = 0.5 * (b - a) * xs + 0.5 * (a + b)
        w = 0.5 * (b - a) * ws
        nodes.append(k)
        weights.append(w)
    k = np.concatenate(nodes)
    base = np.concatenate(weights) * surf * (2.0 * math.pi) ** (-d) * k ** (d - 1)
    x = beta * (kinetic * k * k - mu)
    bose = np.where(x < 1e-8, 1.0 / np.where(x > 0, x, 1.0) - 0.5 + x / 12.0,
                    1.0 / np.expm1(np.minimum(x, 700.0)))
    return k, base, base * bose


def _as_mix(tf) -> GaussianMix:
    if isinstance(tf, GaussianMix):
        return tf
    return GaussianMix.from_test_function(tf)


def positivity_check(functional: LimitFunctional, tf_set, tol: float = 1e-10) -> float:
    """Smallest eigenvalue of M_ls = E(h_l - h_s) exp{(i/2) Im(h_l, h_s)}.

    A genuine generating functional makes M positive semi-definite for any
    finite profile set; the matrix is assembled from pairwise Hermitian
    forms on a shared quadrature rule, which is algebraically identical to
    quadrature of each difference but keeps the Gram structure exact.
    """
    mixes = [_as_mix(t) for t in tf_set]
    n = len(mixes)
    if n < 1 or n > 12:
        raise DomainError(f"profile set size must be 1..12, got {n}")
    d = mixes[0].d
    if any(m.d != d for m in mixes):
        raise DomainError("all profiles must share one dimension")
    widths = [w for m in mixes for _, w in m.components]
    beta, mu, p = functional.beta, functional.mu, functional.params
    k, w_plain, w_bose = positivity_nodes(beta, mu, d, p.kinetic, widths)
    vals = np.stack([m.hhat(k * k) for m in mixes])  # (n, nodes)
    # G[l,s] = (h_l, h_s), conjugate-linear in the first slot
    gram_g = (vals.conj() * w_plain) @ vals.T
    gram_a = (vals.conj() * w_bose) @ vals.T
    z = np.array([m.hhat0 for m in mixes])
    dz = np.abs(z[:, None] - z[None, :])
    q = 0.5 * gram_g + gram_a  # E(h) = exp(-q(h,h)/2)
    qd = np.real(np.diag(q))
    j0 = np.vectorize(bessel_j0)(math.sqrt(2.0 * functional.rho0) * dz)
    m_mat = (j0
             * np.exp(-0.5 * (qd[:, None] + qd[None, :]) + np.real(q)
                      - 0.5 * functional.rho_excess * dz ** 2)
             * np.exp(0.5j * np.imag(gram_g)))
    eigs = np.linalg.eigvalsh(m_mat)
    return float(eigs.min())


# ---------------------------------------------------------------------------
# Result files
# ---------------------------------------------------------------------------

def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_study(outdir: str, study: str, config: dict, result: dict,
                rows=None, header=None) -> dict:
    """Write <study>_<hash>.json (config echo + result) and optional .csv."""
    os.makedirs(outdir, exist_ok=True)
    h = config_hash(config)
    paths = {}
    doc = {"study": study, "config": config, "result": result}
    json_path = os.path.join(outdir, f"{study}_{h}.json")
    _atomic_write(json_path, json.dumps(doc, sort_keys=True, indent=1) + "\n")
    paths["json"] = json_path
    if rows is not None:
        csv_path = os.path.join(outdir, f"{study}_{h}.csv")
        lines = []
        if header is not None:
            lines.append(",".join(header))
        for row in rows:
            lines.append(",".join(
                format(v, ".17g") if isinstance(v, float) else str(v) for v in row))
        _atomic_write(csv_path, "\n".join(lines) + "\n")
        paths["csv"] = csv_path
    return paths
