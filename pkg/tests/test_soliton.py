# tests/test_soliton.py
# Profile construction, parameter checks and the c-derivative.

import math

import numpy as np
import pytest

from core.errors import ProfileError, ValidationError
from core.helmholtz import LineField, apply_Lc, inv_helmholtz_line
from core.soliton import (
    SymmetricGrid,
    WaveParams,
    compute_profile,
    dphi_dc,
    first_integral,
    peakon_limit_deviation,
    xi_of_phi,
)


def test_roots_and_rates_at_reference(ref_params):
    assert ref_params.phi_minus == pytest.approx(0.39237478, abs=1e-8)
    assert ref_params.phi_plus == pytest.approx(1.27429189, abs=1e-8)
    assert ref_params.nu == pytest.approx(math.sqrt(0.5), rel=1e-14)
    assert ref_params.lambda_1 == pytest.approx(-0.26737478, abs=1e-8)
    assert ref_params.phi_minus * ref_params.phi_plus == pytest.approx(ref_params.beta, rel=1e-14)


@pytest.mark.parametrize('c, k, message', [
    (1.0, 0.5, 'c>2k violated'),
    (1.0, 0.0, 'k>0 violated'),
    (1.0, -0.1, 'k>0 violated'),
    (float('nan'), 0.25, 'non-finite'),
])
def test_invalid_parameters_are_rejected(c, k, message):
    with pytest.raises(ValidationError, match=message):
        WaveParams(c, k)


def test_grid_is_symmetric_with_crest_at_center():
    grid = SymmetricGrid(40.0, 4097)
    assert grid.points[grid.center] == 0.0
    np.testing.assert_array_equal(grid.points, -grid.points[::-1])
    with pytest.raises(ValidationError):
        SymmetricGrid(40.0, 4096)


def test_default_grid_width_follows_tail_rate(ref_params):
    grid = SymmetricGrid.for_params(ref_params)
    assert grid.half_width == 40.0
    assert max(ref_params.phi_minus, 1.0) * math.exp(-ref_params.nu * grid.half_width) < 1e-12


def test_profile_shape(ref_params, ref_profile):
    m = ref_profile.grid.center
    assert ref_profile.values[m] == ref_params.phi_minus
    assert ref_profile.derivative[m] == 0.0
    assert ref_profile.evenness_defect() == 0.0
    assert ref_profile.is_monotone()
    assert np.all(ref_profile.values > 0)
    assert ref_profile.values[0] < 1e-8


def test_profile_stays_on_first_integral(ref_params, ref_profile):
    assert ref_profile.first_integral_residual() < 1e-10
    phi0 = ref_profile.values[ref_profile.grid.center]
    assert first_integral(phi0, 0.0, ref_params) == pytest.approx(0.0, abs=1e-14)


def test_profile_curvature_at_crest(ref_params, ref_profile):
    m = ref_profile.grid.center
    assert ref_profile.second_derivative[m] == pytest.approx(ref_params.peak_curvature, rel=1e-12)
    assert ref_params.peak_curvature < 0


@pytest.mark.parametrize('fraction', [0.9, 0.5, 0.1, 1e-3])
def test_xi_of_phi_inverts_profile(ref_params, ref_profile, fraction):
    target = fraction * ref_params.phi_minus
    xi = xi_of_phi(target, ref_params)
    assert xi < 0
    assert ref_profile.evaluate(xi) == pytest.approx(target, rel=1e-8)


def test_xi_of_phi_rejects_values_above_crest(ref_params):
    with pytest.raises(ValidationError):
        xi_of_phi(1.01 * ref_params.phi_minus, ref_params)


def test_short_domain_raises_profile_error(ref_params):
    with pytest.raises(ProfileError, match='L too small'):
        compute_profile(ref_params, SymmetricGrid(5.0, 1025))


def test_profile_exponential_tail(ref_params, ref_profile):
    xi = ref_profile.xi
    window = (xi > -30) & (xi < -20)
    slope = np.polyfit(xi[window], np.log(ref_profile.values[window]), 1)[0]
    assert slope == pytest.approx(ref_params.nu, rel=1e-5)


def test_dphi_dc_is_even_and_accurate(ref_dcphi):
    assert ref_dcphi.evenness_defect() < 1e-9
    assert ref_dcphi.richardson_defect < 1e-3
    m = ref_dcphi.grid.center
    # crest height phi_minus(c) has an explicit c-derivative
    c, k, dc = 1.0, 0.25, 1e-6
    slope = (WaveParams(c + dc, k).phi_minus - WaveParams(c - dc, k).phi_minus) / (2 * dc)
    assert ref_dcphi.values[m] == pytest.approx(slope, rel=1e-6)


def test_richardson_estimate_scales_quadratically(ref_params, ref_profile):
    coarse = dphi_dc(ref_params, delta_c=0.04, grid=ref_profile.grid, richardson_tol=None)
    fine = dphi_dc(ref_params, delta_c=0.02, grid=ref_profile.grid, richardson_tol=None)
    ratio = coarse.richardson_defect / fine.richardson_defect
    assert 3.0 < ratio < 5.0


def test_dphi_dc_solves_the_speed_derivative_equation(ref_profile, ref_dcphi):
    # L_c d_c phi = -(1 - d^2)(4 - d^2)^{-1} phi
    grid, rate = ref_profile.grid, ref_profile.tail_rate
    phi = LineField(grid, ref_profile.values, rate)
    dc = LineField(grid, ref_dcphi.values, rate, math.inf)
    residual = apply_Lc(dc, ref_profile).samples + phi.samples - 3.0 * inv_helmholtz_line(phi, 4.0).samples
    assert LineField(grid, residual).norm() < 1e-5 * phi.norm()


def test_dphi_dc_step_must_keep_speed_admissible(ref_params):
    with pytest.raises(ValidationError, match='c-2\\*delta_c>2k violated'):
        dphi_dc(ref_params, delta_c=0.3)


def test_peakon_limit_shrinks_with_k():
    deviations = peakon_limit_deviation(1.0, [0.2, 0.1, 0.05, 0.01], compact_half_width=5.0, n=1025)
    assert np.all(np.diff(deviations) < 0)
    assert deviations[-1] < 0.15
