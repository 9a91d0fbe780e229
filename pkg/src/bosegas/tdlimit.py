"""Thermodynamic-limit closed forms.

The infinite-volume theory of the model is carried by a handful of
quantities:

* the free-gas density integral rho_P(beta, mu) and its critical value
  rho_c_P = rho_P(beta, 0) (finite only for d > 2);
* the zero-mode condensate density rho_0 = max{0, (mu - eps0)/g0};
* the saturation threshold rho_c = rho_c_P + max{0, -eps0/g0};
* the positive quadratic form A(h,h) = (2pi)^{-d} int |hhat|^2 n_BE dk;
* the limit generating functional
      E(h) = J0(sqrt(2 rho_0) |hhat0|) exp{-|h|^2/4 - A/2}
  picking up an extra factor exp{-|hhat0|^2 (rho - rho_c)/2} above the
  critical density, where the grand-canonical state stops being unique;
* the exponential (Kac) mixture that reassembles the supercritical
  functional from condensate-labelled states, and the constants C and B
  governing the finite-volume chemical-potential asymptotics
  mu_V ~ B V^{-2/(d+2)}.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DivergenceError, DomainError, NumericError
from .lattice import ModelParams
from .specfun import bessel_j0

__all__ = [
    "LimitReport",
    "LimitFunctional",
    "rho_P",
    "rho_c_P",
    "rho_0_I",
    "rho_c_I",
    "quad_form_A",
    "mu_of_rho_limit",
    "limit_functional",
    "genfun_limit",
    "constant_C",
    "B_of_rho",
    "kac_density",
    "kac_mean",
    "kac_mixture_check",
    "limit_report",
]


def _radial_quad(f_of_k2, d: int, beta: float, kappa: float, mu: float,
                 rel_tol: float = 1e-11) -> float:
    """(2 pi)^{-d} int f(k^2) d^d k, reduced to the radial line.

    Splits at a thermal radius so the near-origin behaviour (sharply
    peaked for mu = 0) and the exponential tail are handled separately.
    """
    surf = 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)

    def integrand(k: float) -> float:
        return float(f_of_k2(k * k)) * k ** (d - 1)

    k_mid = math.sqrt((abs(mu) + 10.0 / beta) / kappa)
    with warnings.catch_warnings():
        # accuracy is enforced by the explicit estimate check below; the
        # roundoff warning fires on benign near-critical peaked integrands
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        lo, err_lo = integrate.quad(integrand, 0.0, k_mid, epsabs=0.0,
                                    epsrel=rel_tol, limit=300)
        hi, err_hi = integrate.quad(integrand, k_mid, np.inf, epsabs=0.0,
                                    epsrel=rel_tol, limit=300)
    total = lo + hi
    if total != 0.0 and (err_lo + err_hi) > 1e-8 * abs(total):
        raise NumericError(
            f"radial quadrature error {err_lo + err_hi:.2e} too large for {total:.6e}")
    return surf * (2.0 * math.pi) ** (-d) * total


def _check_bose_domain(beta: float, mu: float, d: int) -> None:
    if beta <= 0:
        raise DomainError(f"beta must be > 0, got {beta}")
    if mu > 0:
        raise DomainError(f"free-gas integral needs mu <= 0, got {mu}")
    if mu == 0 and d <= 2:
        raise DivergenceError(f"free-gas integral diverges at mu = 0 for d = {d} <= 2")


def rho_P(beta: float, mu: float, d: int, kinetic: float = 1.0) -> float:
    """Free-gas density (2 pi)^{-d} int (e^{beta(kappa k^2 - mu)} - 1)^{-1} d^d k."""
    _check_bose_domain(beta, mu, d)

    def f(k2: float) -> float:
        x = beta * (kinetic * k2 - mu)
        if x > 700.0:
            return 0.0
        if x < 1e-8:  # 1/(e^x - 1) ~ 1/x - 1/2 + x/12, only reachable when mu = 0
            return 1.0 / x - 0.5 + x / 12.0
        return 1.0 / math.expm1(x)

    return _radial_quad(f, d, beta, kinetic, mu)


def rho_c_P(beta: float, d: int, kinetic: float = 1.0) -> float:
    """Critical (saturation) density of the free gas; finite only for d > 2."""
    return rho_P(beta, 0.0, d, kinetic)


def rho_0_I(beta: float, mu: float, eps0: float, g0: float) -> float:
    """Zero-mode condensate density max{0, (mu - eps0)/g0}."""
    if g0 <= 0:
        raise DomainError(f"g0 must be > 0, got {g0}")
    return max(0.0, (mu - eps0) / g0)


def rho_c_I(beta: float, params: ModelParams) -> float:
    """Total critical density: free-gas saturation plus the zero-mode shift.

    Infinite for d <= 2 (returned as math.inf: saturation never happens).
    """
    if params.d <= 2:
        return math.inf
    return (rho_c_P(beta, params.d, params.kinetic)
            + max(0.0, -params.eps0 / params.g0))


def quad_form_A(beta: float, mu: float, tf, d: int | None = None,
                kinetic: float = 1.0) -> float:
    """A(h,h) = (2 pi)^{-d} int |hhat(k)|^2 / (e^{beta(eps_k - mu)} - 1) d^d k."""
    d = tf.d if d is None else d
    _check_bose_domain(beta, mu, d)

    def f(k2: float) -> float:
        x = beta * (kinetic * k2 - mu)
        if x > 700.0:
            return 0.0
        w = (1.0 / x - 0.5 + x / 12.0) if x < 1e-8 else 1.0 / math.expm1(x)
        return float(tf.hhat_abs_sq(k2)) * w

    return _radial_quad(f, d, beta, kinetic, mu)


def mu_of_rho_limit(beta: float, rho: float, params: ModelParams) -> float:
    """The mu < 0 solving rho_P + rho_0 = rho below criticality, else 0.

    Bisection on the strictly increasing density; for d <= 2 every density
    is subcritical.
    """
    if rho <= 0:
        raise DomainError(f"density must be > 0, got {rho}")
    rc = rho_c_I(beta, params)
    if rho >= rc:
        return 0.0

    def density(mu: float) -> float:
        return (rho_P(beta, mu, params.d, params.kinetic)
                + rho_0_I(beta, mu, params.eps0, params.g0))

    lo = params.eps0 - 1.0 / beta
    for _ in range(200):
        if density(lo) < rho:
            break
        lo -= 2.0 * (abs(lo) + 1.0 / beta)
    hi = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        val = density(mid)
        if abs(val - rho) <= 1e-12 * rho:
            return mid
        if val < rho:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class LimitFunctional:
    """Closed-form limit generating functional E(h).

    value(h) = J0(sqrt(2 rho0) |hhat0|)
               * exp{-norm_sq/4 - A(h,h)/2 - rho_excess |hhat0|^2 / 2}

    with rho0 evaluated at this functional's mu, and rho_excess > 0 only
    above the critical density (the type-III weight).
    """

    beta: float
    params: ModelParams
    mu: float
    rho_excess: float = 0.0

    @property
    def rho0(self) -> float:
        return rho_0_I(self.beta, self.mu, self.params.eps0, self.params.g0)

    def value(self, tf) -> float:
        a_hh = quad_form_A(self.beta, self.mu, tf, d=self.params.d,
                           kinetic=self.params.kinetic)
        z = abs(tf.hhat0)
        gauss = math.exp(-0.25 * tf.norm_sq - 0.5 * a_hh
                         - 0.5 * self.rho_excess * z * z)
        return bessel_j0(math.sqrt(2.0 * self.rho0) * z) * gauss


def limit_functional(beta: float, params: ModelParams, *, mu: float | None = None,
                     rho: float | None = None) -> LimitFunctional:
    """Resolve (mu | rho) into the matching limit functional.

    mu < 0 (or rho below critical) gives the subcritical form; rho at or
    above critical pins mu = 0 and adds the type-III factor, which needs
    d > 2 for the critical density to be finite.
    """
    if (mu is None) == (rho is None):
        raise DomainError("exactly one of mu or rho must be given")
    if mu is not None:
        if mu > 0:
            raise DomainError(f"limit functional needs mu <= 0, got {mu}")
        if mu == 0 and params.d <= 2:
            raise DivergenceError("mu = 0 diverges for d <= 2")
        return LimitFunctional(beta=beta, params=params, mu=mu)
    rc = rho_c_I(beta, params)
    if rho < rc:
        return LimitFunctional(beta=beta, params=params,
                               mu=mu_of_rho_limit(beta, rho, params))
    return LimitFunctional(beta=beta, params=params, mu=0.0, rho_excess=rho - rc)


def genfun_limit(beta: float, params: ModelParams, tf, *, mu: float | None = None,
                 rho: float | None = None) -> float:
    """Limit generating functional evaluated on a radial profile."""
    return limit_functional(beta, params, mu=mu, rho=rho).value(tf)


def constant_C(d: int, g: float, kinetic: float = 1.0) -> float:
    """C = kappa^{-d/2} / [g 2^{d-2} pi^{d/2} d (d+2) Gamma(d/2)].

    The constant in the supercritical chemical-potential asymptotics
    mu_V = (excess density / (C V))^{2/(d+2)} + O(1/V).
    """
    if d <= 2:
        raise DomainError(f"the asymptotic constant needs d > 2, got {d}")
    if g <= 0:
        raise DomainError(f"coupling must be > 0, got {g}")
    return ((1.0 / kinetic) ** (d / 2)
            / (g * 2.0 ** (d - 2) * math.pi ** (d / 2) * d * (d + 2) * math.gamma(d / 2)))


def B_of_rho(beta: float, rho: float, params: ModelParams) -> float:
    """B = ((rho - rho_c) / C)^{2/(d+2)}, the mu_V ~ B V^{-2/(d+2)} prefactor."""
    rc = rho_c_I(beta, params)
    if not math.isfinite(rc) or rho < rc:
        raise DomainError(f"B is defined for supercritical rho; got rho={rho}, rho_c={rc}")
    c = constant_C(params.d, params.gk_profile, params.kinetic)
    return ((rho - rc) / c) ** (2.0 / (params.d + 2))


# ---------------------------------------------------------------------------
# Kac mixture
# ---------------------------------------------------------------------------

def kac_density(x: float, rho: float, rho_c: float) -> float:
    """Exponential mixing density over condensate-labelled states.

    Supported on x > rho_c with mean rho; degenerates to a point mass at
    rho when rho <= rho_c.
    """
    if rho <= rho_c:
        raise DomainError("the exponential branch needs rho > rho_c")
    if x <= rho_c:
        return 0.0
    lam = rho - rho_c
    return math.exp(-(x - rho_c) / lam) / lam


def kac_mean(rho: float, rho_c: float, quad_tol: float = 1e-10) -> float:
    """int x K(dx), by quadrature (equals rho identically)."""
    lam = rho - rho_c
    t_max = lam * math.log(1.0 / quad_tol) + 60.0 * lam
    val, _ = integrate.quad(lambda t: (rho_c + t) * math.exp(-t / lam) / lam,
                            0.0, t_max, epsabs=quad_tol / 10, epsrel=quad_tol / 10,
                            limit=300)
    return val


def kac_mixture_check(beta: float, rho: float, params: ModelParams, tf,
                      quad_tol: float = 1e-8) -> float:
    """| int K(dx) E_base(h) J0(sqrt(2(x - rho_c)) |hhat0|) - E_super(h) |.

    E_base is the mu = 0 functional of the family selected by params (the
    free family when eps0 >= 0, the zero-mode-condensed one when eps0 < 0)
    and E_super the supercritical functional at density rho.  The mixture
    must reproduce E_super within quad_tol.
    """
    rc = rho_c_I(beta, params)
    if not math.isfinite(rc) or rho <= rc:
        raise DomainError(f"Kac mixture needs rho above critical; got {rho} vs {rc}")
    base = limit_functional(beta, params, mu=0.0).value(tf)
    z = abs(tf.hhat0)
    lam = rho - rc
    t_max = lam * math.log(1.0 / quad_tol) + 50.0 * lam

    def integrand(t: float) -> float:
        return math.exp(-t / lam) / lam * bessel_j0(math.sqrt(2.0 * t) * z)

    mix, est = integrate.quad(integrand, 0.0, t_max, epsabs=quad_tol / 10.0,
                              epsrel=quad_tol / 10.0, limit=400)
    if est > quad_tol:
        raise NumericError(f"Kac quadrature residual {est:.3e} above {quad_tol:.3e}")
    lhs = base * mix
    rhs = LimitFunctional(beta=beta, params=params, mu=0.0, rho_excess=lam).value(tf)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitReport:
    """Closed-form limit values for one (beta, mu-or-rho) evaluation."""

    rho_P: float
    rho_c_P: float
    rho_c_I: float
    rho_0_I: float
    mu_limit: float
    A_hh: float | None
    E_limit: float | None
    regime: str


def limit_report(beta: float, params: ModelParams, *, mu: float | None = None,
                 rho: float | None = None, tf=None) -> LimitReport:
    func = limit_functional(beta, params, mu=mu, rho=rho)
    mu_lim = func.mu
    rc = rho_c_I(beta, params)
    rcp = rho_c_P(beta, params.d, params.kinetic) if params.d > 2 else math.inf
    if func.rho_excess > 0:
        regime = "Supercritical"
    elif mu_lim == 0.0 or (rho is not None and math.isfinite(rc) and rho == rc):
        regime = "Critical"
    else:
        regime = "Subcritical"
    a_hh = e_lim = None
    if tf is not None:
        a_hh = quad_form_A(beta, mu_lim, tf, d=params.d, kinetic=params.kinetic)
        e_lim = func.value(tf)
    return LimitReport(
        rho_P=rho_P(beta, mu_lim, params.d, params.kinetic) if (params.d > 2 or mu_lim < 0) else math.inf,
        rho_c_P=rcp,
        rho_c_I=rc,
        rho_0_I=func.rho0,
        mu_limit=mu_lim,
        A_hh=a_hh,
        E_limit=e_lim,
        regime=regime,
    )
