"""Dual-lattice enumeration, model parameters, and radial test functions."""

import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosegas import lattice
from bosegas.errors import DomainError, ResourceError
from bosegas.lattice import GaussianMix, ModelParams, TestFunction


def params_cube(d=3, L=2 * math.pi, ** kw):
    base = dict(d=d, L=L, kinetic=1.0, eps0=-1.0, g0=1.0, gk_profile=1.0)
    base.update(kw)
    return ModelParams(**base)


def brute_force_count(d: int, L: float, kinetic: float, cutoff: float) -> int:
    r2max = int(math.floor(cutoff / (kinetic * (2 * math.pi / L) ** 2) + 1e-12))
    smax = math.isqrt(max(r2max, 0))
    return sum(1 for s in itertools.product(range(-smax, smax + 1), repeat=d)
               if sum(c * c for c in s) <= r2max)


# ---------------------------------------------------------------------------
# ModelParams
# ---------------------------------------------------------------------------

def test_params_validation():
    with pytest.raises(DomainError):
        params_cube(g0=0.0)
    with pytest.raises(DomainError):
        params_cube(g0=-1.0)
    with pytest.raises(DomainError):
        params_cube(gk_profile=-0.5)
    with pytest.raises(DomainError):
        params_cube(L=-3.0)
    with pytest.raises(DomainError):
        params_cube(d=0)


def test_params_json_round_trip():
    p = params_cube(d=3, L=24.0, kinetic=0.5, eps0=-1.5, g0=2.0, gk_profile=0.0)
    doc = p.to_json()
    fields = json.loads(doc)
    assert set(fields) == {"d", "L", "kinetic", "eps0", "g0", "gk_profile"}
    assert ModelParams.from_json(doc) == p


def test_volume_and_first_excited():
    p = params_cube(d=3, L=10.0, kinetic=2.0)
    assert p.volume == 1000.0
    assert math.isclose(p.first_excited_eps(), 2.0 * (2 * math.pi / 10.0) ** 2)


# ---------------------------------------------------------------------------
# Mode enumeration
# ---------------------------------------------------------------------------

def test_enumeration_counts_trivial():
    p1 = params_cube(d=1)
    assert len(lattice.enumerate_modes(p1, 4.5)) == 5  # s in {0, +-1, +-2}
    p3 = params_cube(d=3)
    assert len(lattice.enumerate_modes(p3, 1.5)) == 7  # origin + 6 unit vectors
    # |s|^2 <= 2 ball: 1 + 6 + 12 points, frozen from the brute-force count
    assert brute_force_count(3, 2 * math.pi, 1.0, 2.5) == 19
    assert len(lattice.enumerate_modes(p3, 2.5)) == 19


def test_enumeration_order_and_zero_mode():
    p = params_cube(d=3, eps0=-2.0, g0=3.0)
    modes = lattice.enumerate_modes(p, 2.5)
    assert modes[0].s == (0, 0, 0)
    assert modes[0].eps == -2.0 and modes[0].g == 3.0
    r2s = [sum(c * c for c in m.s) for m in modes]
    assert r2s == sorted(r2s)
    # lexicographic within a shell, deterministic across runs
    shell1 = [m.s for m in modes if sum(c * c for c in m.s) == 1]
    assert shell1 == sorted(shell1)
    # excited modes carry kappa |k|^2 and the profile coupling
    for m in modes[1:]:
        assert math.isclose(m.eps, p.kinetic * p.dual_unit_sq * sum(c * c for c in m.s))
        assert m.g == p.gk_profile


def test_enumeration_closed_under_negation():
    p = params_cube(d=2, L=9.0)
    modes = lattice.enumerate_modes(p, 6.0)
    ss = {m.s for m in modes}
    assert ss == {tuple(-c for c in s) for s in ss}


@settings(max_examples=30, deadline=None)
@given(d=st.integers(min_value=1, max_value=3),
       L=st.floats(min_value=2.0, max_value=12.0),
       cutoff=st.floats(min_value=0.3, max_value=8.0))
def test_enumeration_count_matches_brute_force(d, L, cutoff):
    p = params_cube(d=d, L=L)
    modes = lattice.enumerate_modes(p, cutoff)
    assert len(modes) == brute_force_count(d, L, 1.0, cutoff)
    assert len(modes) == lattice.mode_count_estimate(p, cutoff)


def test_enumeration_monotone_in_cutoff_and_L():
    p = params_cube(d=3, L=8.0)
    n1 = len(lattice.enumerate_modes(p, 2.0))
    n2 = len(lattice.enumerate_modes(p, 4.0))
    assert n2 >= n1
    p_big = params_cube(d=3, L=12.0)
    assert len(lattice.enumerate_modes(p_big, 2.0)) >= n1


def test_enumeration_resource_guard():
    p = params_cube(d=3, L=4000.0)
    with pytest.raises(ResourceError):
        lattice.enumerate_modes(p, 50.0)


def test_shells_match_enumeration():
    p = params_cube(d=3, L=7.3)
    modes = lattice.enumerate_modes(p, 5.0)
    shells = lattice.enumerate_shells(p, 5.0)
    assert shells.mode_count == len(modes) - 1
    by_r2 = {}
    for m in modes[1:]:
        by_r2[sum(c * c for c in m.s)] = by_r2.get(sum(c * c for c in m.s), 0) + 1
    assert dict(zip(shells.r2.tolist(), shells.deg.tolist())) == by_r2


# ---------------------------------------------------------------------------
# Test functions
# ---------------------------------------------------------------------------

def test_tf_coeff_values():
    p = params_cube(d=3)
    modes = lattice.enumerate_modes(p, 2.5)
    tf = TestFunction(amplitude=1.0, width=1.0, d=3)
    assert lattice.tf_coeff(tf, modes[0]) == 1.0
    tf2 = TestFunction(amplitude=2.0, width=1.0, d=3)
    m2 = next(m for m in modes if math.isclose(m.k_norm_sq, 2.0))
    assert math.isclose(lattice.tf_coeff(tf2, m2), 2.0 * math.exp(-1.0), rel_tol=1e-12)
    tf3 = TestFunction(amplitude=1.0, width=3.0, d=3)
    # e^{-45}, pinned against exact exponential
    val = tf3.hhat(10.0)
    assert math.isclose(float(val), math.exp(-45.0), rel_tol=1e-12)


def test_norm_sq_closed_vs_quadrature():
    for d in (1, 2, 3):
        for a, w in [(1.0, 1.0), (2.0, 0.7), (0.3, 2.5)]:
            tf = TestFunction(amplitude=a, width=w, d=d)
            assert tf.norm_sq > 0
            quad = tf.norm_sq_quadrature()
            assert abs(quad - tf.norm_sq) <= 1e-10 * tf.norm_sq


def test_norm_sq_darboux_sum():
    # (1/V) sum_k |hhat(k)|^2 approximates the continuum norm within 2% at L=40
    tf = TestFunction(amplitude=1.0, width=1.0, d=3)
    p = params_cube(d=3, L=40.0)
    shells = lattice.enumerate_shells(p, 45.0)
    lattice_sum = (float(np.dot(shells.deg, tf.hhat_abs_sq(shells.k_norm_sq))) + 1.0) / p.volume
    assert abs(lattice_sum - tf.norm_sq) <= 0.02 * tf.norm_sq


def test_tf_validation():
    with pytest.raises(DomainError):
        TestFunction(amplitude=1.0, width=0.0)
    with pytest.raises(DomainError):
        TestFunction(amplitude=1.0, width=1.0, d=0)


def test_gaussian_mix_difference_and_norm():
    tfa = TestFunction(amplitude=1.0, width=1.0, d=3)
    tfb = TestFunction(amplitude=0.5, width=2.0, d=3)
    ma, mb = GaussianMix.from_test_function(tfa), GaussianMix.from_test_function(tfb)
    assert math.isclose(ma.norm_sq, tfa.norm_sq, rel_tol=1e-12)
    diff = ma.minus(mb)
    k2 = np.linspace(0.0, 5.0, 11)
    np.testing.assert_allclose(diff.hhat(k2), tfa.hhat(k2) - tfb.hhat(k2), rtol=1e-12)
    # norm of the difference via closed pairwise integrals vs quadrature
    quad = lattice._radial_integral(lambda q: diff.hhat_abs_sq(q), 3, 1e-12)
    assert abs(quad - diff.norm_sq) <= 1e-10 * max(diff.norm_sq, 1e-30)


def test_gaussian_mix_phase():
    tf = TestFunction(amplitude=1.0, width=1.0, d=3)
    mix = tf.with_phase(math.pi / 3)
    assert math.isclose(abs(mix.hhat0), 1.0, rel_tol=1e-12)
    assert math.isclose(mix.norm_sq, tf.norm_sq, rel_tol=1e-12)
    assert abs(mix.hhat0.imag - math.sin(math.pi / 3)) <= 1e-12


def test_radial_sums_real_for_radial_family():
    # closure under s -> -s makes hhat-weighted lattice sums real
    p = params_cube(d=2, L=6.0)
    modes = lattice.enumerate_modes(p, 4.0)
    tf = TestFunction(amplitude=1.0, width=0.8, d=2)
    total = sum(lattice.tf_coeff(tf, m) for m in modes)
    assert isinstance(total, float)


def test_tail_density_bound_decreasing():
    p = params_cube(d=3, L=12.0)
    b1 = lattice.tail_density_bound(p, 1.0, -0.5, 10.0)
    b2 = lattice.tail_density_bound(p, 1.0, -0.5, 20.0)
    assert b2 < b1


def test_choose_eps_cutoff_certifies():
    p = params_cube(d=3, L=12.0)
    cut = lattice.choose_eps_cutoff(p, 1.0, -0.3)
    assert lattice.tail_density_bound(p, 1.0, -0.3, cut) < 1e-10
