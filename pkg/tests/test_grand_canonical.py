"""Lattice aggregates: densities, the mu solver, scans, and the functional product."""

import math

import numpy as np
import pytest

from bosegas.errors import DivergenceError, DomainError
from bosegas.lattice import ModelParams, TestFunction, enumerate_shells
from bosegas.single_mode import GrandSpec, mode_weyl_factor_free
from bosegas import grand_canonical as gc
from bosegas import lattice, tdlimit


def params(d=3, L=16.0, eps0=-1.0, g0=1.0, g=1.0):
    return ModelParams(d=d, L=L, kinetic=1.0, eps0=eps0, g0=g0, gk_profile=g)


def spec_for(p, beta, mu):
    return GrandSpec(beta=beta, mu=mu, V=p.volume)


# ---------------------------------------------------------------------------
# total_density
# ---------------------------------------------------------------------------

def test_density_components_sum_and_sign():
    p = params(L=12.0)
    bd = gc.total_density(p, spec_for(p, 1.0, -0.2))
    assert bd.rho_total == bd.rho_zero_mode + bd.rho_Dminus + bd.rho_Dplus
    assert bd.rho_zero_mode >= 0 and bd.rho_Dminus >= 0 and bd.rho_Dplus >= 0
    assert bd.tail_bound < 1e-10


def test_density_vanishes_at_deep_mu():
    p = params(L=10.0)
    bd = gc.total_density(p, spec_for(p, 1.0, -60.0))
    assert bd.rho_total < 1e-20


def test_density_free_profile_matches_continuum():
    # free excited modes at mu < 0: lattice sum within 2% of the integral
    p = params(L=30.0, eps0=0.0, g=0.0)
    bd = gc.total_density(p, spec_for(p, 1.0, -0.5))
    want = tdlimit.rho_P(1.0, -0.5, 3)
    assert abs(bd.rho_total - want) <= 0.02 * want


def test_density_zero_mode_macroscopic():
    p = params(L=30.0)
    bd = gc.total_density(p, spec_for(p, 1.0, -0.2))
    assert abs(bd.rho_zero_mode - 0.8) <= 0.02 * 0.8


def test_density_monotone_in_mu():
    p = params(L=10.0)
    vals = [gc.total_density(p, spec_for(p, 1.0, mu)).rho_total
            for mu in (-0.8, -0.5, -0.2)]
    assert vals[0] < vals[1] < vals[2]


def test_density_dminus_empty_for_nonpositive_mu():
    p = params(L=14.0)
    for mu in (-0.7, -0.1, 0.0):
        bd = gc.total_density(p, spec_for(p, 1.0, mu))
        assert bd.rho_Dminus == 0.0


def test_density_free_profile_divergence_guard():
    p = params(L=10.0, g=0.0)
    with pytest.raises(DivergenceError):
        gc.total_density(p, spec_for(p, 1.0, p.first_excited_eps() + 0.01))


def test_density_tail_certificate_against_doubled_cutoff():
    p = params(L=8.0)
    spec = spec_for(p, 1.0, -0.3)
    cut = lattice.choose_eps_cutoff(p, 1.0, -0.3)
    bd = gc.total_density(p, spec, eps_cutoff=cut)
    bd2 = gc.total_density(p, spec, eps_cutoff=2.0 * cut)
    dropped = bd2.rho_total - bd.rho_total
    assert 0.0 <= dropped <= bd.tail_bound


def test_density_volume_mismatch_guard():
    p = params(L=10.0)
    with pytest.raises(DomainError):
        gc.total_density(p, GrandSpec(beta=1.0, mu=-0.5, V=123.0))


# ---------------------------------------------------------------------------
# solve_mu
# ---------------------------------------------------------------------------

def test_solve_mu_round_trip():
    p = params(L=10.0)
    cut = lattice.choose_eps_cutoff(p, 1.0, 0.1)
    mu0 = -0.437
    rho = gc.total_density(p, spec_for(p, 1.0, mu0), eps_cutoff=cut).rho_total
    got = gc.solve_mu(p, spec_for(p, 1.0, 0.0), rho, eps_cutoff=cut)
    assert abs(got - mu0) <= 1e-9


def test_solve_mu_supercritical_positive(rho_supercritical):
    p = params(L=16.0)
    mu = gc.solve_mu(p, spec_for(p, 1.0, 0.0), rho_supercritical)
    assert mu > 0


def test_solve_mu_subcritical_stable_in_volume():
    rho = 0.5 * tdlimit.rho_c_I(1.0, params())
    mus = []
    for L in (16.0, 24.0):
        p = params(L=L)
        mus.append(gc.solve_mu(p, spec_for(p, 1.0, 0.0), rho))
    assert mus[0] < 0 and mus[1] < 0
    assert abs(mus[1] - mus[0]) <= 0.05 * abs(mus[0])


def test_solve_mu_density_consistency():
    p = params(L=12.0)
    rho = 0.9
    cut = lattice.choose_eps_cutoff(p, 1.0, 0.5)
    mu = gc.solve_mu(p, spec_for(p, 1.0, 0.0), rho, eps_cutoff=cut)
    back = gc.total_density(p, spec_for(p, 1.0, mu), eps_cutoff=cut).rho_total
    assert abs(back - rho) <= 1e-10 * rho


def test_solve_mu_free_profile_below_pole():
    p = params(L=12.0, g=0.0)
    rho = tdlimit.rho_c_I(1.0, p) + 0.5
    mu = gc.solve_mu(p, spec_for(p, 1.0, 0.0), rho)
    assert 0.0 < mu < p.first_excited_eps()


def test_solve_mu_rejects_bad_density():
    p = params(L=10.0)
    with pytest.raises(DomainError):
        gc.solve_mu(p, spec_for(p, 1.0, 0.0), -1.0)


# ---------------------------------------------------------------------------
# condensate_scan
# ---------------------------------------------------------------------------

def test_scan_subcritical_labels():
    p = params(L=14.0)
    rep = gc.condensate_scan(p, spec_for(p, 1.0, -0.5), [0.5, 1.0])
    assert rep.classification == "NonConventionalOnly"  # rho_0 ~ 0.5 macroscopic
    assert rep.shell_densities[0][1] < 1e-2  # thermal shell mass, O(1/V)
    rep2 = gc.condensate_scan(p, spec_for(p, 1.0, -1.5), [0.5, 1.0])
    assert rep2.classification == "None"  # mu < eps0: no condensate at all
    assert rep2.evidence["zero_mode_fraction"] < 1e-2


def test_scan_shell_densities_nondecreasing():
    p = params(L=16.0)
    rep = gc.condensate_scan(p, spec_for(p, 1.0, -0.05), [0.3, 0.6, 1.2, 2.4])
    dens = [v for _, v in rep.shell_densities]
    assert all(a <= b for a, b in zip(dens, dens[1:]))


def test_scan_truncated_model_type_I(rho_supercritical):
    p = params(L=24.0, g=0.0)
    mu = gc.solve_mu(p, spec_for(p, 1.0, 0.0), rho_supercritical)
    rep = gc.condensate_scan(p, spec_for(p, 1.0, mu), [0.5, 1.0])
    assert rep.classification == "TypeI"
    assert rep.evidence["macroscopic_excited_modes"] == 6
    assert rep.evidence["zero_mode_fraction"] > 1.0


def test_scan_validates_deltas():
    p = params(L=10.0)
    with pytest.raises(DomainError):
        gc.condensate_scan(p, spec_for(p, 1.0, -0.5), [1.0, 0.5])


# ---------------------------------------------------------------------------
# genfun_finite
# ---------------------------------------------------------------------------

def test_genfun_amplitude_zero_is_one():
    p = params(L=10.0)
    tf0 = TestFunction(amplitude=0.0, width=1.0, d=3)
    assert gc.genfun_finite(p, spec_for(p, 1.0, -0.4), tf0) == 1.0


def test_genfun_free_profile_matches_free_factor_product():
    p = params(L=9.0, eps0=0.0, g=0.0)
    beta, mu = 1.0, -0.35
    spec = spec_for(p, beta, mu)
    tf = TestFunction(amplitude=1.0, width=1.0, d=3)
    cut = gc.choose_genfun_cutoff(p, beta, mu, tf)
    got = gc.genfun_finite(p, spec, tf, eps_cutoff=cut)
    modes = lattice.enumerate_modes(p, cut)
    logs = []
    from bosegas.single_mode import quad_mode_stats
    for m in modes:
        hk2 = float(np.abs(lattice.tf_coeff(tf, m)) ** 2)
        if m.g == 0.0:
            logs.append(math.log(mode_weyl_factor_free(m, spec, hk2)))
        else:
            logs.append(math.log(quad_mode_stats(beta, mu, spec.V, m.eps, m.g,
                                                 x=hk2 / (2 * spec.V)).weyl))
    want = math.exp(math.fsum(logs))
    assert abs(got - want) <= 1e-10 * abs(want)


def test_genfun_interacting_profile_within_bounds():
    p = params(L=12.0)
    tf = TestFunction(amplitude=1.5, width=1.0, d=3)
    val = gc.genfun_finite(p, spec_for(p, 1.0, -0.3), tf)
    assert -1.0 - 1e-10 <= val <= 1.0 + 1e-10


def test_genfun_zero_mode_sign_oscillation():
    # a large zero-mode amplitude pushes J0 past its first zero
    p = params(L=12.0)
    tf_big = TestFunction(amplitude=3.2, width=1.0, d=3)
    val = gc.genfun_finite(p, spec_for(p, 1.0, -0.05), tf_big)
    assert val < 0.0


def test_genfun_subcritical_close_to_limit():
    p = params(L=18.0)
    tf = TestFunction(amplitude=1.0, width=2.0, d=3)
    fin = gc.genfun_finite(p, spec_for(p, 1.0, -0.3), tf)
    lim = tdlimit.genfun_limit(1.0, p, tf, mu=-0.3)
    assert abs(fin - lim) <= 0.02 * abs(lim)


def test_genfun_tail_certificate_via_doubled_cutoff():
    p = params(L=8.0)
    beta, mu = 1.0, -0.4
    tf = TestFunction(amplitude=1.0, width=0.8, d=3)
    cut = gc.choose_genfun_cutoff(p, beta, mu, tf)
    spec = spec_for(p, beta, mu)
    v1 = gc.genfun_finite(p, spec, tf, eps_cutoff=cut)
    v2 = gc.genfun_finite(p, spec, tf, eps_cutoff=2.0 * cut)
    assert abs(math.log(v2) - math.log(v1)) <= 1e-10
