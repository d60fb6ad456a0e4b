# tests/test_evolution.py
# Periodic DP flow, orbit distance and the linearized growth witness.

import numpy as np
import pytest
from scipy import fft as sfft

from core.errors import NumericalError, ValidationError
from core.evolution import (
    EvolutionRun,
    dp_rhs,
    dp_rhs_mform,
    evolve,
    evolve_linearized,
    growth_rate_fit,
    jlc_matrix_spectrum,
    linearized_rhs,
    orbit_distance,
    periodic_dphi_dc,
    periodic_soliton,
    project_secular,
    random_smooth_field,
)
from core.helmholtz import apply_Lc, wavenumbers
from core.soliton import WaveParams


@pytest.fixture(scope='module')
def circle(ref_profile):
    return periodic_soliton(ref_profile, 512)


def test_soliton_rhs_is_pure_translation(ref_params, circle):
    prof, u0 = circle
    dphi = prof.periodic_samples()[1]
    u_t = dp_rhs(u0, ref_params).samples
    assert np.max(np.abs(u_t + ref_params.c * dphi)) < 1e-9


def test_mform_matches_hamiltonian_form():
    params = WaveParams(1.0, 0.25)
    u = random_smooth_field(256, 80.0, seed=17)
    u = u.like(3.0 * u.samples)
    hamiltonian = dp_rhs(u, params).samples
    mform = dp_rhs_mform(u, params).samples
    assert np.max(np.abs(hamiltonian - mform)) < 1e-10


def test_cfl_violation_is_rejected(ref_params, circle):
    _, u0 = circle
    run = EvolutionRun(u0, ref_params, dt=1.0, t_final=10.0)
    with pytest.raises(ValidationError, match='CFL violated'):
        run.validate()


def test_soliton_transport_over_five_crossings(ref_params, circle):
    _, u0 = circle
    run = EvolutionRun(u0, ref_params, dt=0.01, t_final=5 * u0.period / ref_params.c,
                       record_stride=100)
    result = evolve(run)
    assert result.status == 'ok'
    assert result.steps_taken == 40000
    distance, _ = orbit_distance(result.final, u0)
    assert distance < 1e-4
    assert result.max_drift < 1e-8
    assert list(result.conserved.columns) == ['t', 'M', 'H', 'S']


def test_time_reversal(ref_params, circle):
    _, u0 = circle
    forward = evolve(EvolutionRun(u0, ref_params, dt=0.01, t_final=1.0))
    backward = evolve(EvolutionRun(forward.final, ref_params, dt=-0.01, t_final=1.0))
    assert np.max(np.abs(backward.final.samples - u0.samples)) < 1e-8


def test_plain_rk4_agrees_with_integrating_factor(ref_params, circle):
    _, u0 = circle
    plain = evolve(EvolutionRun(u0, ref_params, dt=0.01, t_final=1.0, integrating_factor=False))
    factor = evolve(EvolutionRun(u0, ref_params, dt=0.01, t_final=1.0))
    assert np.max(np.abs(plain.final.samples - factor.final.samples)) < 1e-6


def test_small_perturbation_stays_near_orbit(ref_params, circle):
    _, u0 = circle
    eps = 1e-3
    noise = random_smooth_field(u0.n, u0.period, seed=23)
    start = u0.like(u0.samples + eps * noise.samples)
    result = evolve(EvolutionRun(start, ref_params, dt=0.01, t_final=100.0, record_stride=100))
    assert result.status == 'ok'
    distance, _ = orbit_distance(result.final, u0)
    assert distance <= 10 * eps


def test_snapshots_are_handed_over(ref_params, circle):
    _, u0 = circle
    seen = []
    result = evolve(EvolutionRun(u0, ref_params, dt=0.01, t_final=0.5, snapshot_stride=10),
                    on_snapshot=lambda index, t, samples: seen.append((index, t)))
    assert [index for index, _ in seen] == list(range(6))
    assert len(result.snapshots) == 6
    assert seen[-1][1] == pytest.approx(0.5)


def test_orbit_distance_recovers_shift(circle):
    _, u0 = circle
    shift = 1.234
    omega = wavenumbers(u0.n, u0.period)
    moved = u0.like(sfft.irfft(sfft.rfft(u0.samples) * np.exp(-1j * omega * shift), n=u0.n))
    distance, found = orbit_distance(moved, u0)
    assert distance < 1e-10
    assert found == pytest.approx(shift, abs=1e-8)


def test_orbit_distance_needs_same_circle(circle):
    _, u0 = circle
    with pytest.raises(ValidationError):
        orbit_distance(u0, random_smooth_field(256, u0.period))


def test_linearized_flow_is_skew_in_energy(circle):
    prof, u0 = circle
    v = random_smooth_field(u0.n, u0.period, seed=29)
    w = apply_Lc(v, prof)
    assert abs(w.inner(linearized_rhs(v, prof))) < 1e-11 * w.inner(w)


def test_linearized_growth_rate_is_neutral(circle):
    prof, u0 = circle
    dcphi = periodic_dphi_dc(prof)
    v0 = project_secular(random_smooth_field(u0.n, u0.period), prof, dcphi)
    trajectory = evolve_linearized(v0, prof, t_final=200.0, record_stride=20)
    fit = growth_rate_fit(trajectory.times, trajectory.norms)
    assert abs(fit.sigma) < 1e-3
    assert np.all(np.isfinite(trajectory.energies))


def test_growth_fit_on_exponential():
    times = np.linspace(0.0, 10.0, 50)
    fit = growth_rate_fit(times, 2.0 * np.exp(0.3 * times))
    assert fit.sigma == pytest.approx(0.3, abs=1e-10)
    assert fit.band[0] <= fit.sigma <= fit.band[1]
    with pytest.raises(NumericalError):
        growth_rate_fit(times[:2], np.ones(2))


def test_jlc_matrix_has_no_unstable_eigenvalue(ref_profile):
    spectrum = jlc_matrix_spectrum(ref_profile, n=256)
    assert spectrum.relative_max_real < 1e-6
    assert spectrum.symmetry_defect < 1e-5
    assert spectrum.kernel_overlap > 0.99


def test_dealiasing_keeps_S_for_band_limited_data(ref_params):
    u0 = random_smooth_field(64, 80.0, seed=41, max_mode=20)
    kept = evolve(EvolutionRun(u0, ref_params, dt=0.01, t_final=2.0, record_stride=50))
    aliased = evolve(EvolutionRun(u0, ref_params, dt=0.01, t_final=2.0, record_stride=50,
                                  dealias=False))
    assert kept.drift['S'] < 1e-10
    assert aliased.drift['S'] > 1e-8
    assert aliased.drift['S'] > 100 * kept.drift['S']


def test_invariant_drift_is_fourth_order_in_dt(ref_params, ref_profile):
    _, u0 = periodic_soliton(ref_profile, 256)
    drifts = [evolve(EvolutionRun(u0, ref_params, dt=dt, t_final=8.0, record_stride=25,
                                  integrating_factor=False)).drift['S']
              for dt in (0.08, 0.04)]
    assert drifts[1] > 0
    assert np.log2(drifts[0] / drifts[1]) > 3.5


def test_translation_mode_is_in_the_kernel(circle):
    prof, u0 = circle
    dphi = u0.like(prof.periodic_samples()[1])
    assert np.max(np.abs(linearized_rhs(dphi, prof).samples)) < 1e-7


def test_translation_mode_keeps_its_norm(circle):
    prof, u0 = circle
    dphi = u0.like(prof.periodic_samples()[1])
    trajectory = evolve_linearized(dphi, prof, t_final=20.0, record_stride=10)
    assert np.ptp(trajectory.norms) / trajectory.norms[0] < 1e-6


def test_growth_fit_recovers_matrix_eigenvalue(ref_profile):
    n = 128
    spectrum = jlc_matrix_spectrum(ref_profile, n=n)
    prof, u0 = periodic_soliton(ref_profile, n)
    values = spectrum.eigenvalues
    candidates = np.flatnonzero(values.imag > 1e-3 * spectrum.spectral_radius)
    pick = candidates[np.argmin(np.abs(np.abs(values[candidates]) - 0.25 * spectrum.spectral_radius))]
    w = spectrum.eigenvectors[:, pick]
    w = w * np.exp(-1j * np.angle(w[np.argmax(np.abs(w))]))
    # real and imaginary parts together carry |w e^{mu t}|
    parts = [evolve_linearized(u0.like(np.ascontiguousarray(part)), prof, t_final=200.0, record_stride=10)
             for part in (w.real, w.imag)]
    norms = np.hypot(parts[0].norms, parts[1].norms)
    fit = growth_rate_fit(parts[0].times, norms)
    assert abs(fit.sigma - values[pick].real) < 1e-4
