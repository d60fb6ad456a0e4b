# tests/test_prufer.py
# Prufer shooting, discrete eigenvalues, q_e and the matrix oracle for L_c.

import math

import numpy as np
import pytest

from core.errors import ConvergenceError, ValidationError
from core.helmholtz import LineField
from core.prufer import (
    ReducedCoefficient,
    angle_multiplicity,
    angle_scan,
    compute_spectrum,
    discretize_and_diagonalize_Lc,
    essential_spectrum,
    prufer_shoot,
    qe_negativity_check,
    resolve_eigenvalue,
)
from core.soliton import SymmetricGrid, WaveParams, compute_profile
from core.stability_index import bilinear, quadratic_form

LAMBDA_STAR = -0.161612268


def test_essential_band(ref_params):
    band = essential_spectrum(ref_params)
    assert band.lower == pytest.approx(0.125, abs=1e-15)
    assert band.upper == 1.0
    omega = np.linspace(0.0, 50.0, 101)
    values = band.symbol(omega)
    assert values.min() == pytest.approx(band.lower, abs=1e-15)
    assert np.all(values < band.upper)


def test_reduced_coefficient_cases(ref_profile):
    coeff = ReducedCoefficient(ref_profile)
    assert coeff.lambda_1 == pytest.approx(-0.26737478, abs=1e-8)
    assert coeff.case(-0.3) == 1
    assert coeff.turning_point(-0.3) is None
    xi_bar = coeff.turning_point(0.0)
    assert xi_bar > 0
    assert coeff(xi_bar, 0.0) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(ValidationError):
        coeff(0.0, coeff.lambda_upper)


def test_angle_at_zero_spectral_parameter(ref_spectrum):
    assert ref_spectrum.theta_at_zero_lambda_zero == pytest.approx(-math.pi / 2, abs=1e-6)


def test_trace_below_lambda_1_stays_in_first_quadrant(ref_profile):
    trace = prufer_shoot(-0.4, ref_profile)
    assert trace.stays_in_first_quadrant()
    assert trace.theta_at_zero > 0
    assert trace.winding == 0


def test_angle_at_lambda_1_is_positive(ref_profile):
    coeff = ReducedCoefficient(ref_profile)
    assert prufer_shoot(coeff.lambda_1, ref_profile).theta_at_zero > 0


def test_angle_decreases_in_lambda(ref_profile):
    lambdas = np.linspace(-0.25, 0.1, 8)
    thetas = [theta for _, theta in angle_scan(ref_profile, lambdas)]
    assert np.all(np.diff(thetas) < 0)


def test_shooting_rejects_essential_band(ref_profile):
    with pytest.raises(ValidationError, match='admissible range'):
        prufer_shoot(0.2, ref_profile)


def test_single_negative_eigenvalue(ref_spectrum):
    assert ref_spectrum.lambda_star == pytest.approx(LAMBDA_STAR, abs=1e-6)
    assert ref_spectrum.negative_count == 1
    assert ref_spectrum.has_simple_zero
    assert ref_spectrum.search.certified_below_lambda_1


def test_discrete_eigenvalues_below_band(ref_spectrum):
    by_zeros = {e.zero_count: e for e in ref_spectrum.eigenvalues}
    assert sorted(by_zeros) == [0, 1, 2]
    assert by_zeros[0].parity == 'even'
    assert by_zeros[1].parity == 'odd'
    assert by_zeros[1].lam == pytest.approx(0.0, abs=1e-7)
    assert by_zeros[2].lam == pytest.approx(0.085705, abs=1e-4)
    assert all(e.multiplicity == 1 for e in ref_spectrum.eigenvalues)


def test_ground_state_eigenfunction(ref_spectrum):
    ground = ref_spectrum.eigenfunctions[0]
    assert ground.residual < 1e-6
    assert ground.sign_changes() == 0
    assert ground.v.norm() == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(ground.v.samples, ground.v.samples[::-1], atol=1e-12)


def test_matrix_oracle_agrees_with_shooting(ref_spectrum):
    matrix = ref_spectrum.matrix
    assert matrix.negative_count == 1
    assert abs(matrix.lambda_star - ref_spectrum.lambda_star) < 1e-5
    assert abs(matrix.kernel_eigenvalue) < 1e-8
    assert matrix.kernel_overlap > 0.999
    assert abs(matrix.edge_estimate - 0.125) < 0.02 * 0.125


def test_matrix_oracle_symmetry_defect(ref_profile):
    spectrum = discretize_and_diagonalize_Lc(ref_profile, n_matrix=256)
    assert spectrum.symmetry_defect < 1e-12
    assert spectrum.negative_count == 1
    assert spectrum.wrapped_tail < 1e-10


def test_qe_is_negative_on_positive_half_line(ref_profile):
    report = qe_negativity_check(ref_profile)
    assert report.negative
    assert report.sign_changes == 1
    assert report.max_on_positive_side < 0
    assert report.odd_defect < 1e-10
    assert report.bvp_defect < 1e-8


def test_zero_mode_is_the_translation_direction(ref_profile, ref_spectrum):
    kernel = ref_spectrum.eigenfunctions[1].v
    dphi = LineField(ref_profile.grid, ref_profile.derivative, ref_profile.tail_rate)
    assert abs(kernel.inner(dphi)) / dphi.norm() > 1 - 1e-6


def test_ground_state_rayleigh_quotient(ref_profile, ref_spectrum):
    ground = ref_spectrum.eigenfunctions[0].v
    assert quadratic_form(ground, ref_profile) == pytest.approx(ref_spectrum.lambda_star, abs=1e-7)

    dphi = ref_profile.derivative / LineField(ref_profile.grid, ref_profile.derivative).norm()
    rate = min(ground.tail_rate, ref_profile.tail_rate)
    direction = LineField(ref_profile.grid, dphi, ref_profile.tail_rate)
    combined = LineField(ref_profile.grid, ground.samples + dphi, rate, math.inf)
    assert abs(bilinear(ground, direction, ref_profile)) < 1e-8
    assert quadratic_form(combined, ref_profile) == pytest.approx(ref_spectrum.lambda_star, abs=1e-7)


def test_matrix_kernel_converges_at_least_quadratically(ref_profile):
    kernels = [abs(discretize_and_diagonalize_Lc(ref_profile, n_matrix=n).kernel_eigenvalue)
               for n in (64, 128, 256)]
    for coarse, fine in zip(kernels, kernels[1:]):
        assert fine <= max(coarse / 4.0, 1e-11)


def test_eigenvalues_are_simple(ref_profile, ref_spectrum):
    assert ref_spectrum.all_simple
    assert all(e.wronskian_flip for e in ref_spectrum.eigenvalues)
    assert angle_multiplicity(ref_spectrum.lambda_star, ref_profile) == (1, True)
    assert angle_multiplicity(-0.05, ref_profile) == (0, False)


@pytest.fixture(scope='module')
def coarse_profile(ref_params):
    return compute_profile(ref_params, SymmetricGrid.for_params(ref_params, n=1025))


def test_unresolved_ground_state_is_a_convergence_failure(coarse_profile):
    with pytest.raises(ConvergenceError, match='residual'):
        resolve_eigenvalue(LAMBDA_STAR, 0, coarse_profile, tol_eig=1e-20)


def test_unresolved_positive_root_is_flagged_spurious(coarse_profile):
    entry, _ = resolve_eigenvalue(0.085705, 2, coarse_profile, tol_eig=1e-20)
    assert entry.spurious
    assert entry.refinements == 2
    assert entry.residual > 1e-20


@pytest.mark.parametrize('c, k', [(0.52, 0.25), (0.55, 0.25), (0.7, 0.1), (0.7, 0.25),
                                  (0.8, 0.1), (1.5, 0.1), (3.0, 0.25)])
def test_weakly_bound_states_do_not_break_the_spectrum(c, k):
    spectrum = compute_spectrum(compute_profile(WaveParams(c, k)), include_matrix=False)
    assert spectrum.negative_count == 1
    assert spectrum.has_simple_zero
    assert spectrum.all_simple
    assert spectrum.max_residual <= 1e-6
    assert WaveParams(c, k).lambda_1 < spectrum.lambda_star < 0
