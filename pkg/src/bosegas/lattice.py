"""Model parameters, the dual lattice, dispersion, and radial test functions.

The gas lives in a cubic box of edge L in d dimensions with periodic
boundary conditions, so momenta sit on the dual lattice k = 2 pi s / L,
s in Z^d.  Excited modes carry the free dispersion eps_k = kinetic * |k|^2
and a common repulsion g (the ``gk_profile``); the zero mode has its own
energy eps0 (negative in the interesting regime) and repulsion g0 > 0.
Setting gk_profile = 0 selects the truncated family (free excited modes),
which is only evaluated at chemical potentials below the first excited
level.

Unit convention: ``kinetic`` is the single free constant in eps_k (the
hbar^2/2m combination); beta then carries inverse-energy units.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import DomainError, ResourceError

__all__ = [
    "ModelParams",
    "Mode",
    "TestFunction",
    "GaussianMix",
    "ModeShells",
    "enumerate_modes",
    "tf_coeff",
    "shell_degeneracies",
    "enumerate_shells",
    "zero_mode",
    "mode_count_estimate",
    "tail_density_bound",
    "choose_eps_cutoff",
]

MODE_COUNT_CAP = 10 ** 8


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of one model instance (volume V = L**d)."""

    d: int
    L: float
    kinetic: float = 1.0
    eps0: float = -1.0
    g0: float = 1.0
    gk_profile: float = 1.0  # common g for k != 0; 0.0 = truncated/free family

    def __post_init__(self) -> None:
        if self.d < 1:
            raise DomainError(f"dimension must be >= 1, got {self.d}")
        if self.L <= 0:
            raise DomainError(f"box edge must be > 0, got {self.L}")
        if self.kinetic <= 0:
            raise DomainError(f"kinetic constant must be > 0, got {self.kinetic}")
        if self.g0 <= 0:
            raise DomainError(f"zero-mode repulsion g0 must be > 0, got {self.g0}")
        if self.gk_profile < 0:
            raise DomainError(f"gk_profile must be >= 0, got {self.gk_profile}")

    @property
    def volume(self) -> float:
        return self.L ** self.d

    @property
    def dual_unit_sq(self) -> float:
        """(2 pi / L)^2, the squared spacing of the dual lattice."""
        return (2.0 * math.pi / self.L) ** 2

    def first_excited_eps(self) -> float:
        return self.kinetic * self.dual_unit_sq

    def to_json(self) -> str:
        return json.dumps({
            "d": self.d, "L": self.L, "kinetic": self.kinetic,
            "eps0": self.eps0, "g0": self.g0, "gk_profile": self.gk_profile,
        })

    @classmethod
    def from_json(cls, doc: str) -> "ModelParams":
        raw = json.loads(doc)
        return cls(d=int(raw["d"]), L=float(raw["L"]), kinetic=float(raw["kinetic"]),
                   eps0=float(raw["eps0"]), g0=float(raw["g0"]),
                   gk_profile=float(raw["gk_profile"]))


@dataclass(frozen=True)
class Mode:
    """One dual-lattice point with its dispersion and coupling."""

    s: tuple
    k_norm_sq: float
    eps: float
    g: float


def zero_mode(params: ModelParams) -> Mode:
    return Mode(s=(0,) * params.d, k_norm_sq=0.0, eps=params.eps0, g=params.g0)


def _r2_max(params: ModelParams, eps_cutoff: float) -> int:
    return int(math.floor(eps_cutoff / (params.kinetic * params.dual_unit_sq) + 1e-12))


def shell_degeneracies(d: int, r2max: int) -> np.ndarray:
    """deg[j] = #{s in Z^d : |s|^2 = j}, by d-fold convolution of the 1-d counts."""
    c1 = np.zeros(r2max + 1, dtype=np.int64)
    c1[0] = 1
    for s in range(1, math.isqrt(r2max) + 1):
        c1[s * s] = 2
    out = c1
    for _ in range(d - 1):
        out = np.convolve(out, c1)[: r2max + 1]
    return out


@dataclass(frozen=True)
class ModeShells:
    """Excited modes grouped by |s|^2 (all members share eps, g, and |hhat|)."""

    r2: np.ndarray        # integer |s|^2 values, ascending, r2 >= 1
    k_norm_sq: np.ndarray
    eps: np.ndarray
    deg: np.ndarray
    g: float
    eps_cutoff: float

    @property
    def mode_count(self) -> int:
        return int(self.deg.sum())


def enumerate_shells(params: ModelParams, eps_cutoff: float) -> ModeShells:
    """Excited-mode shells with eps <= eps_cutoff (zero mode excluded)."""
    if eps_cutoff <= 0:
        raise DomainError(f"eps_cutoff must be > 0, got {eps_cutoff}")
    r2max = _r2_max(params, eps_cutoff)
    deg = shell_degeneracies(params.d, max(r2max, 0))
    r2 = np.nonzero(deg)[0]
    r2 = r2[r2 >= 1]
    k2 = r2 * params.dual_unit_sq
    return ModeShells(r2=r2, k_norm_sq=k2, eps=params.kinetic * k2,
                      deg=deg[r2], g=params.gk_profile, eps_cutoff=eps_cutoff)


def mode_count_estimate(params: ModelParams, eps_cutoff: float) -> int:
    """Exact lattice-point count of the enumeration ball (zero mode included)."""
    r2max = _r2_max(params, eps_cutoff)
    # volume estimate first so huge requests fail before any O(r2max^2) work
    radius = math.sqrt(max(r2max, 0)) + 1.0
    d = params.d
    ball = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * radius ** d
    if ball > 4 * MODE_COUNT_CAP:
        raise ResourceError(
            f"cutoff {eps_cutoff} would enumerate ~{ball:.2e} modes (cap {MODE_COUNT_CAP:.0e})")
    return int(shell_degeneracies(d, r2max).sum())


def enumerate_modes(params: ModelParams, eps_cutoff: float) -> list:
    """All modes with eps <= eps_cutoff, zero mode first.

    Deterministic order: ascending |s|^2, then lexicographic in s, so
    outputs are bit-reproducible across runs and platforms.
    """
    if eps_cutoff <= 0:
        raise DomainError(f"eps_cutoff must be > 0, got {eps_cutoff}")
    count = mode_count_estimate(params, eps_cutoff)
    if count > MODE_COUNT_CAP:
        raise ResourceError(f"cutoff {eps_cutoff} selects {count} modes (cap {MODE_COUNT_CAP:.0e})")
    r2max = _r2_max(params, eps_cutoff)
    smax = math.isqrt(r2max)
    du = params.dual_unit_sq
    modes = []
    for s in itertools.product(range(-smax, smax + 1), repeat=params.d):
        r2 = sum(c * c for c in s)
        if r2 > r2max:
            continue
        if r2 == 0:
            continue
        modes.append((r2, s))
    modes.sort()
    out = [zero_mode(params)]
    for r2, s in modes:
        k2 = r2 * du
        out.append(Mode(s=s, k_norm_sq=k2, eps=params.kinetic * k2, g=params.gk_profile))
    return out


# ---------------------------------------------------------------------------
# Radial test functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """Radial Gaussian Fourier profile hhat(k) = amplitude * exp(-width^2 |k|^2 / 2).

    norm_sq caches the L2 norm (2 pi)^{-d} int |hhat|^2 d^d k; the closed
    Gaussian integral is used, and tests pin it against quadrature.
    """

    amplitude: float
    width: float
    d: int = 3
    norm_sq: float = field(init=False)

    __test__ = False  # keep pytest from collecting this as a test class

    def __post_init__(self) -> None:
        if self.width <= 0:
            raise DomainError(f"test-function width must be > 0, got {self.width}")
        if self.d < 1:
            raise DomainError(f"dimension must be >= 1, got {self.d}")
        ns = self.amplitude ** 2 * (4.0 * math.pi * self.width ** 2) ** (-self.d / 2)
        object.__setattr__(self, "norm_sq", ns)

    @property
    def hhat0(self) -> float:
        return self.amplitude

    def hhat(self, k_norm_sq):
        return self.amplitude * np.exp(-0.5 * self.width ** 2 * np.asarray(k_norm_sq, dtype=float))

    def hhat_abs_sq(self, k_norm_sq):
        return self.amplitude ** 2 * np.exp(-self.width ** 2 * np.asarray(k_norm_sq, dtype=float))

    def norm_sq_quadrature(self, rel_tol: float = 1e-12) -> float:
        """Radial quadrature of the norm, used to audit the closed form."""
        return _radial_integral(lambda k2: self.hhat_abs_sq(k2), self.d, rel_tol)

    def with_phase(self, theta: float) -> "GaussianMix":
        c = self.amplitude * complex(math.cos(theta), math.sin(theta))
        return GaussianMix(components=((c, self.width),), d=self.d)


@dataclass(frozen=True)
class GaussianMix:
    """Complex linear combination of radial Gaussians: hhat = sum_i c_i e^{-w_i^2 k^2/2}.

    Differences of test functions (as needed by positivity checks) stay in
    this family, so the closed pairwise Gaussian integrals keep working.
    """

    components: tuple  # ((complex amplitude, width), ...)
    d: int

    @classmethod
    def from_test_function(cls, tf: TestFunction) -> "GaussianMix":
        return cls(components=((complex(tf.amplitude), tf.width),), d=tf.d)

    @property
    def hhat0(self) -> complex:
        return sum(c for c, _ in self.components)

    def hhat(self, k_norm_sq):
        k2 = np.asarray(k_norm_sq, dtype=float)
        out = np.zeros_like(k2, dtype=complex)
        for c, w in self.components:
            out = out + c * np.exp(-0.5 * w * w * k2)
        return out

    def hhat_abs_sq(self, k_norm_sq):
        return np.abs(self.hhat(k_norm_sq)) ** 2

    @property
    def norm_sq(self) -> float:
        """(2 pi)^{-d} int |hhat|^2, closed pairwise Gaussian integrals."""
        total = 0.0
        for ci, wi in self.components:
            for cj, wj in self.components:
                total += ((ci.conjugate() * cj).real
                          * (2.0 * math.pi * (wi * wi + wj * wj)) ** (-self.d / 2))
        return total

    def minus(self, other: "GaussianMix") -> "GaussianMix":
        neg = tuple((-c, w) for c, w in other.components)
        return GaussianMix(components=self.components + neg, d=self.d)


def tf_coeff(tf, mode: Mode):
    """hhat evaluated at the mode's k; finite-volume h_k is identified with it."""
    val = tf.hhat(mode.k_norm_sq)
    return complex(val) if isinstance(tf, GaussianMix) else float(val)


def _radial_integral(f_of_k2, d: int, rel_tol: float) -> float:
    surf = 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)

    def integrand(k: float) -> float:
        return float(f_of_k2(k * k)) * k ** (d - 1)

    val, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=rel_tol, limit=300)
    return surf * (2.0 * math.pi) ** (-d) * val


# ---------------------------------------------------------------------------
# Cutoff policy
# ---------------------------------------------------------------------------

def tail_density_bound(params: ModelParams, beta: float, mu: float, eps_cutoff: float) -> float:
    """Upper bound on (1/V) sum_{eps_k > cutoff} <N_k>, by integral comparison.

    Occupations above the cutoff are bounded by the free Bose function at
    the shifted argument eps - mu - g/V (the repulsion only lowers them);
    the lattice sum is compared against the integral over a ball shrunk by
    one cell diagonal.
    """
    d, kappa, L = params.d, params.kinetic, params.L
    g_shift = max(params.gk_profile, params.g0) / params.volume
    mu_eff = mu + g_shift
    k_cut = math.sqrt(eps_cutoff / kappa)
    k_lo = k_cut - 2.0 * math.pi * math.sqrt(d) / L
    if kappa * k_lo ** 2 <= mu_eff or k_lo <= 0:
        return math.inf
    x_min = beta * (kappa * k_lo ** 2 - mu_eff)
    # 1/(e^x - 1) <= c e^{-x} with c = 1/(1 - e^{-x_min}) on x >= x_min
    c = 1.0 / (1.0 - math.exp(-x_min))
    # integral of e^{-beta(kappa k^2 - mu_eff)} over |k| >= k_lo, radially
    a = beta * kappa
    surf = 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)
    radial = 0.5 * a ** (-d / 2) * math.gamma(d / 2) * special.gammaincc(d / 2, a * k_lo ** 2)
    return c * math.exp(beta * mu_eff) * surf * (2.0 * math.pi) ** (-d) * radial


def choose_eps_cutoff(params: ModelParams, beta: float, mu: float,
                      density_tol: float = 1e-10) -> float:
    """Smallest convenient cutoff with certified dropped density < density_tol.

    The dropped-tail criterion keeps the total-density truncation error
    auditable; the returned cutoff also stays clear of the chemical
    potential so every dropped mode is strongly suppressed.
    """
    base = max(mu, 0.0) + max(params.gk_profile, params.g0) / params.volume
    cutoff = base + 5.0 / beta + params.first_excited_eps()
    for _ in range(200):
        if tail_density_bound(params, beta, mu, cutoff) < density_tol:
            return cutoff
        cutoff *= 1.3
    raise ResourceError("could not certify a mode cutoff; tail bound never met")
