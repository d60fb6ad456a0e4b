# tests/test_dp_math.py
# Conserved functionals, closed forms and stationarity of the soliton.

import numpy as np
import pytest

from core.dp_math import DPMath
from core.errors import ValidationError
from core.evolution import random_smooth_field
from core.helmholtz import LineField, periodized


def test_closed_forms_at_reference():
    assert DPMath.S_closed_form(1.0, 0.25) == pytest.approx(0.0628658569, abs=1e-9)
    assert DPMath.dSdc_closed_form(1.0, 0.25) == pytest.approx(0.2164612595, abs=1e-9)
    assert DPMath.momentum_closed_form(1.0, 0.25) == pytest.approx(1.83117, abs=2e-5)


@pytest.mark.parametrize('c, k', [(0.6, 0.25), (1.0, 0.25), (2.0, 0.1), (5.0, 0.05)])
def test_dSdc_closed_form_matches_finite_difference(c, k):
    assert DPMath.dSdc_finite_difference(c, k) == pytest.approx(DPMath.dSdc_closed_form(c, k),
                                                                abs=1e-7)


@pytest.mark.parametrize('c, k', [(0.6, 0.25), (1.0, 0.25), (5.0, 0.05)])
def test_z_substitution_matches_closed_form(c, k):
    assert DPMath.S_z_substitution(c, k) == pytest.approx(DPMath.S_closed_form(c, k), rel=1e-11)


def test_closed_forms_at_the_limit_speed():
    assert DPMath.S_closed_form(0.5, 0.25) == pytest.approx(0.0, abs=1e-15)
    assert DPMath.dSdc_closed_form(0.5, 0.25) == 0.0
    assert DPMath.S_closed_form(0.5 + 1e-10, 0.25) > 0
    with pytest.raises(ValidationError):
        DPMath.S_closed_form(0.4, 0.25)


def test_three_routes_to_S(ref_profile):
    closed = DPMath.S_closed_form(1.0, 0.25)
    assert DPMath.S_quadrature_reduced(ref_profile) == pytest.approx(closed, rel=1e-9)
    assert DPMath.functional_S(DPMath.profile_field(ref_profile)) == pytest.approx(closed, rel=1e-8)
    phi, _ = periodized(ref_profile)
    assert DPMath.functional_S(phi) == pytest.approx(closed, rel=1e-9)


def test_momentum_of_profile(ref_profile):
    closed = DPMath.momentum_closed_form(1.0, 0.25)
    assert DPMath.momentum_M(DPMath.profile_field(ref_profile)) == pytest.approx(closed, rel=1e-8)


def test_line_and_circle_agree_on_H(ref_profile):
    phi_line = DPMath.profile_field(ref_profile)
    phi_circle, _ = periodized(ref_profile)
    assert DPMath.hamiltonian_H(phi_line, 0.25) == pytest.approx(
        DPMath.hamiltonian_H(phi_circle, 0.25), rel=1e-8)


def test_profile_is_stationary(ref_profile):
    assert DPMath.traveling_residual(ref_profile) / ref_profile.l2_norm() < 1e-7
    assert DPMath.traveling_residual(ref_profile.scaled(1.05)) / ref_profile.l2_norm() > 1e-3


def test_soliton_is_critical_for_Q(ref_profile):
    phi = DPMath.profile_field(ref_profile)
    x = ref_profile.xi
    bump = LineField(ref_profile.grid, np.exp(-(x - 1.0) ** 2))
    assert abs(DPMath.gateaux_derivative(phi, bump, 1.0, 0.25)) < 1e-6

    shifted = LineField(ref_profile.grid, 0.5 * ref_profile.values)
    assert abs(DPMath.gateaux_derivative(phi, shifted, 1.0, 0.25)) < 1e-6


def test_S_weight_is_positive_on_random_fields():
    u = random_smooth_field(256, 40.0, seed=7)
    assert DPMath.functional_S(u) > 0
    assert DPMath.momentum_M(u) == pytest.approx(0.0, abs=1e-12)


# 1/8 ||u||^2 <= S(u) <= 1/2 ||u||^2, the constant mode sitting on the lower edge
@pytest.mark.parametrize('seed, max_mode, mean', [(3, 4, 0.0), (7, 32, 0.0), (11, 100, 0.0), (13, 16, 0.4)])
def test_S_is_equivalent_to_the_squared_norm(seed, max_mode, mean):
    noise = random_smooth_field(256, 40.0, seed=seed, max_mode=max_mode)
    u = noise.like(noise.samples + mean)
    energy = u.inner(u)
    S = DPMath.functional_S(u)
    assert 0.125 * energy * (1 - 1e-12) <= S <= 0.5 * energy
