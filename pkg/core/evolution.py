"""
core/evolution.py
=================
Periodic pseudo-spectral DP dynamics.

Full flow (Hamiltonian form, k > 0):

    u_t = -J (1/2 u^2 + 2k (4 - d^2)^{-1} u),   J = d(4 - d^2)(1 - d^2)^{-1}

Linearized flow in the traveling frame:

    v_t = J L_c v

Fixed-step classical RK4, optionally with an integrating factor for the
linear dispersive part. M, H, S are evaluated after every step.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import fft as sfft
from scipy.linalg import eig
from scipy.stats import linregress

from config.settings import BLOWUP_FACTOR, CFL_CONSTANT, DT, JLC_POINTS, LINEAR_DT, SEED
from core.dp_math import DPMath
from core.errors import NumericalError, ValidationError
from core.helmholtz import (
    PeriodicField,
    apply_Lc,
    apply_periodic,
    apply_symbol,
    profile_on_circle,
    symbol_array,
    wavenumbers,
)
from core.prufer import circle_profile, circulant_matrix, lc_matrix
from core.soliton import SolitonProfile, WaveParams, dphi_dc

logger = logging.getLogger(__name__)

DRIFT_BLOWUP = 1.0
NEWTON_STEPS = 6


# ===== RIGHT-HAND SIDES =====

def dealias_mask(n: int) -> np.ndarray:
    """2/3 rule on the rfft modes: keep |j| < n/3."""
    return (np.arange(n // 2 + 1) < n / 3.0).astype(float)


def _nonlinear_hat(u_hat: np.ndarray, n: int, period: float, dealias: bool) -> np.ndarray:
    """Fourier coefficients of -J(1/2 u^2)."""
    if dealias:
        mask = dealias_mask(n)
        u = sfft.irfft(u_hat * mask, n=n)
        square = sfft.rfft(0.5 * u * u) * mask
    else:
        u = sfft.irfft(u_hat, n=n)
        square = sfft.rfft(0.5 * u * u)
    return -symbol_array('J', n, period) * square


def linear_symbol(n: int, period: float, k: float) -> np.ndarray:
    """-2k J (4 - d^2)^{-1} = -2k i omega / (1 + omega^2); zero at the Nyquist mode."""
    return -2.0 * k * symbol_array('J', n, period) * symbol_array('inv4', n, period)


def dp_rhs(u: PeriodicField, params: WaveParams, dealias: bool = True) -> PeriodicField:
    """
    DP right-hand side in Hamiltonian form.

    Args:
        u: Periodic field
        params: Wave parameters (only k enters)
        dealias: Apply the 2/3 rule to the quadratic term

    Returns:
        u_t as a PeriodicField
    """
    n, period = u.n, u.period
    u_hat = sfft.rfft(u.samples)
    total = _nonlinear_hat(u_hat, n, period, dealias) + linear_symbol(n, period, params.k) * u_hat
    return u.like(sfft.irfft(total, n=n))


def dp_rhs_mform(u: PeriodicField, params: WaveParams) -> PeriodicField:
    """u_t = (1 - d^2)^{-1} (-2k u_x - 3 m u_x - u m_x), m = u - u_xx."""
    k = params.k
    m = apply_periodic('one_minus_dxx', u).samples
    u_x = apply_periodic('dx', u).samples
    m_x = apply_symbol('dx', m, u.period)
    return apply_periodic('inv1', u.like(-2.0 * k * u_x - 3.0 * m * u_x - u.samples * m_x))


# ===== TIME STEPPING =====

def rk4_step(rhs: Callable[[np.ndarray], np.ndarray], u: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(u)
    k2 = rhs(u + 0.5 * dt * k1)
    k3 = rhs(u + 0.5 * dt * k2)
    k4 = rhs(u + dt * k3)
    return u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def if_rk4_step(nonlinear: Callable[[np.ndarray], np.ndarray], u_hat: np.ndarray,
                half: np.ndarray, full: np.ndarray, dt: float) -> np.ndarray:
    """
    Lawson integrating-factor RK4 in Fourier space.

    half = exp(L dt / 2), full = exp(L dt) for the diagonal linear symbol L.
    """
    k1 = nonlinear(u_hat)
    k2 = nonlinear(half * (u_hat + 0.5 * dt * k1))
    k3 = nonlinear(half * u_hat + 0.5 * dt * k2)
    k4 = nonlinear(full * u_hat + dt * half * k3)
    return full * u_hat + dt / 6.0 * (full * k1 + 2.0 * half * (k2 + k3) + k4)


@dataclass
class EvolutionRun:
    """
    One fixed-step run of the full DP flow.

    dt may be negative (backward integration). |dt| must satisfy
    |dt| <= cfl_constant * h / max|u0|.
    """

    initial: PeriodicField
    params: WaveParams
    dt: float = DT
    t_final: float = 1.0
    snapshot_stride: int = 0
    record_stride: int = 1
    integrating_factor: bool = True
    dealias: bool = True
    cfl_constant: float = CFL_CONSTANT
    blowup_factor: float = BLOWUP_FACTOR

    @property
    def period(self) -> float:
        return self.initial.period

    @property
    def steps(self) -> int:
        return int(round(self.t_final / abs(self.dt)))

    @property
    def cfl_limit(self) -> float:
        peak = float(np.max(np.abs(self.initial.samples)))
        if peak == 0.0:
            return math.inf
        return self.cfl_constant * self.initial.spacing / peak

    def validate(self) -> None:
        if not (math.isfinite(self.dt) and self.dt != 0.0):
            raise ValidationError(f"dt!=0 violated: dt={self.dt}")
        if not (math.isfinite(self.t_final) and self.t_final > 0):
            raise ValidationError(f"T>0 violated: T={self.t_final}")
        if self.snapshot_stride < 0 or self.record_stride < 1:
            raise ValidationError("snapshot_stride>=0 and record_stride>=1 required")
        if abs(self.dt) > self.cfl_limit:
            raise ValidationError(
                f"CFL violated: |dt|={abs(self.dt):g} > C*h/max|u| = {self.cfl_limit:.4g} (C={self.cfl_constant:g})"
            )


@dataclass
class EvolutionResult:
    run: EvolutionRun
    final: PeriodicField
    conserved: pd.DataFrame
    drift: Dict[str, float]
    snapshots: List[Tuple[float, np.ndarray]] = field(default_factory=list)
    status: str = 'ok'
    steps_taken: int = 0

    @property
    def t_reached(self) -> float:
        return self.steps_taken * self.run.dt

    @property
    def max_drift(self) -> float:
        return max(self.drift['H'], self.drift['S'], self.drift['M'])

    def manifest(self) -> Dict:
        return {
            'c': self.run.params.c,
            'k': self.run.params.k,
            'n': self.run.initial.n,
            'period': self.run.period,
            'dt': self.run.dt,
            'T': self.run.t_final,
            't_reached': self.t_reached,
            'cfl_constant': self.run.cfl_constant,
            'cfl_limit': self.run.cfl_limit,
            'integrating_factor': self.run.integrating_factor,
            'dealias': self.run.dealias,
            'status': self.status,
            'drift': dict(self.drift),
            'snapshots': len(self.snapshots),
        }


def _relative_change(value: float, reference: float) -> float:
    scale = abs(reference) if reference != 0.0 else 1.0
    return abs(value - reference) / scale


def evolve(run: EvolutionRun,
           on_snapshot: Optional[Callable[[int, float, np.ndarray], None]] = None) -> EvolutionResult:
    """
    Integrate the DP flow with fixed steps.

    Args:
        run: Run definition (validated here)
        on_snapshot: Called as (index, t, samples) for every snapshot

    Returns:
        EvolutionResult; status 'blowup' means the run stopped early and the
        outputs cover [0, t_reached].
    """
    run.validate()
    u0 = run.initial
    n, period, dt, k = u0.n, u0.period, run.dt, run.params.k
    limit = run.blowup_factor * max(float(np.max(np.abs(u0.samples))), 1e-300)

    if run.integrating_factor:
        lin = linear_symbol(n, period, k)
        half, full = np.exp(0.5 * dt * lin), np.exp(dt * lin)

        def nonlinear(u_hat):
            return _nonlinear_hat(u_hat, n, period, run.dealias)

        state = sfft.rfft(u0.samples)

        def advance(s):
            return if_rk4_step(nonlinear, s, half, full, dt)

        def physical(s):
            return sfft.irfft(s, n=n)
    else:
        def rhs(u):
            return dp_rhs(u0.like(u), run.params, run.dealias).samples

        state = u0.samples.copy()

        def advance(s):
            return rk4_step(rhs, s, dt)

        def physical(s):
            return s

    first = DPMath.conserved_triple(u0, k)
    rows = [(0.0, first.M, first.H, first.S)]
    drift = {'M': 0.0, 'H': 0.0, 'S': 0.0}
    snapshots: List[Tuple[float, np.ndarray]] = []

    def snapshot(t, samples):
        snapshots.append((t, samples.copy()))
        if on_snapshot is not None:
            on_snapshot(len(snapshots) - 1, t, samples)

    if run.snapshot_stride:
        snapshot(0.0, u0.samples)

    status = 'ok'
    last_good = u0.samples
    taken = 0
    for step in range(1, run.steps + 1):
        state = advance(state)
        u = physical(state)
        t = step * dt
        if not np.all(np.isfinite(u)) or float(np.max(np.abs(u))) > limit:
            logger.warning("blow-up at t=%.4f: max|u| exceeds %.3g x initial", t, run.blowup_factor)
            status = 'blowup'
            break
        last_good = u
        triple = DPMath.conserved_triple(u0.like(u), k)
        drift['M'] = max(drift['M'], _relative_change(triple.M, first.M))
        drift['H'] = max(drift['H'], _relative_change(triple.H, first.H))
        drift['S'] = max(drift['S'], _relative_change(triple.S, first.S))
        taken = step
        if step % run.record_stride == 0 or step == run.steps:
            rows.append((t, triple.M, triple.H, triple.S))
        if run.snapshot_stride and step % run.snapshot_stride == 0:
            snapshot(t, u)
        if max(drift['H'], drift['S']) > DRIFT_BLOWUP:
            logger.warning("conserved drift exploded at t=%.4f (H %.2e, S %.2e)", t, drift['H'], drift['S'])
            status = 'blowup'
            break

    logger.info("evolved %d/%d steps (dt=%g): drift M %.2e H %.2e S %.2e",
                taken, run.steps, dt, drift['M'], drift['H'], drift['S'])
    conserved = pd.DataFrame(rows, columns=['t', 'M', 'H', 'S'])
    return EvolutionResult(run, u0.like(last_good), conserved, drift, snapshots, status, taken)


# ===== ORBIT DISTANCE =====

def _shift_hat(f_hat: np.ndarray, omega: np.ndarray, shift: float) -> np.ndarray:
    return f_hat * np.exp(-1j * omega * shift)


def orbit_distance(u: PeriodicField, ref: PeriodicField) -> Tuple[float, float]:
    """
    min over s of ||u - ref(. - s)||.

    The discrete correlation peak is refined by quadratic interpolation and
    then by Newton steps on the trigonometric correlation C(s).

    Returns:
        (distance, shift) with shift in [-period/2, period/2)
    """
    if u.n != ref.n or not math.isclose(u.period, ref.period, rel_tol=1e-12):
        raise ValidationError("orbit distance needs fields on the same circle")
    n, h, period = u.n, u.spacing, u.period
    u_hat, r_hat = sfft.rfft(u.samples), sfft.rfft(ref.samples)
    omega = wavenumbers(n, period)

    cross = sfft.irfft(u_hat * np.conj(r_hat), n=n)
    m = int(np.argmax(cross))
    left, mid, right = cross[(m - 1) % n], cross[m], cross[(m + 1) % n]
    curvature = left - 2.0 * mid + right
    offset = 0.5 * (left - right) / curvature if curvature < 0 else 0.0
    shift = (m + offset) * h

    weights = u_hat * np.conj(r_hat)
    weights[1:] *= 2.0
    if n % 2 == 0:
        weights[-1] = 0.0
    for _ in range(NEWTON_STEPS):
        phase = np.exp(1j * omega * shift)
        slope = float(np.real(np.sum(1j * omega * weights * phase)))
        bend = float(np.real(np.sum(-omega * omega * weights * phase)))
        if bend >= 0:
            break
        step = slope / bend
        shift -= step
        if abs(step) < 1e-14 * period:
            break

    shift = (shift + 0.5 * period) % period - 0.5 * period
    moved = sfft.irfft(_shift_hat(r_hat, omega, shift), n=n)
    distance = math.sqrt(h * float(np.sum((u.samples - moved) ** 2)))
    return distance, shift


# ===== PERIODIC SOLITON =====

def periodic_soliton(profile: SolitonProfile, n: int) -> Tuple[SolitonProfile, PeriodicField]:
    """The profile rebuilt for an n-point circle of length 2L, and phi on it."""
    prof = circle_profile(profile, n)
    return prof, PeriodicField(prof.period, prof.periodic_samples()[0])


def periodic_dphi_dc(profile: SolitonProfile) -> PeriodicField:
    """d phi / d c on the periodization of the profile grid."""
    derivative = dphi_dc(profile.params, grid=profile.grid)
    return PeriodicField(profile.period, derivative.values[:-1])


def random_smooth_field(n: int, period: float, seed: int = SEED,
                        max_mode: Optional[int] = None) -> PeriodicField:
    """Mean-zero band-limited random field (modes 1..n/8) with unit L2 norm."""
    rng = np.random.default_rng(seed)
    top = max_mode if max_mode is not None else n // 8
    coeffs = np.zeros(n // 2 + 1, dtype=complex)
    coeffs[1:top + 1] = rng.standard_normal(top) + 1j * rng.standard_normal(top)
    noise = PeriodicField(period, sfft.irfft(coeffs, n=n))
    return noise.like(noise.samples / noise.norm())


# ===== LINEARIZED FLOW =====

def linearized_rhs(v: PeriodicField, profile: SolitonProfile) -> PeriodicField:
    """J L_c v on the periodized profile grid."""
    return apply_periodic('J', apply_Lc(v, profile))


def project_secular(v: PeriodicField, profile: SolitonProfile,
                    dcphi: PeriodicField) -> PeriodicField:
    """
    Remove the d phi / d c component seen by the conserved pairing <v, phi - 3w>.

    phi - 3w = -L_c dphi_dc, and <dphi_dc, phi - 3w> = dS/dc > 0.
    """
    phi = profile_on_circle(profile, v)
    gradient = v.like(phi - 3.0 * apply_symbol('inv4', phi, v.period))
    amount = v.inner(gradient) / dcphi.inner(gradient)
    return v.like(v.samples - amount * dcphi.samples)


@dataclass
class LinearTrajectory:
    times: np.ndarray
    norms: np.ndarray
    energies: np.ndarray
    final: PeriodicField

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'t': self.times, 'norm': self.norms, 'energy': self.energies})


def evolve_linearized(v0: PeriodicField, profile: SolitonProfile, dt: float = LINEAR_DT,
                      t_final: float = 200.0, record_stride: int = 1) -> LinearTrajectory:
    """RK4 for v_t = J L_c v, recording ||v|| and <L_c v, v>."""
    profile_on_circle(profile, v0)
    steps = int(round(t_final / abs(dt)))

    def rhs(samples):
        return linearized_rhs(v0.like(samples), profile).samples

    def energy(samples):
        current = v0.like(samples)
        return apply_Lc(current, profile).inner(current)

    v = v0.samples.copy()
    times, norms, energies = [0.0], [v0.norm()], [energy(v)]
    for step in range(1, steps + 1):
        v = rk4_step(rhs, v, dt)
        if step % record_stride == 0 or step == steps:
            if not np.all(np.isfinite(v)):
                raise NumericalError(f"linearized flow overflowed at t={step * dt:.3f}")
            times.append(step * dt)
            norms.append(math.sqrt(v0.spacing * float(np.dot(v, v))))
            energies.append(energy(v))
    return LinearTrajectory(np.asarray(times), np.asarray(norms), np.asarray(energies), v0.like(v))


@dataclass(frozen=True)
class GrowthFit:
    sigma: float
    stderr: float
    intercept: float
    rvalue: float

    @property
    def band(self) -> Tuple[float, float]:
        return self.sigma - 2.0 * self.stderr, self.sigma + 2.0 * self.stderr

    def as_dict(self) -> Dict:
        return {'sigma': self.sigma, 'stderr': self.stderr, 'band': list(self.band)}


def growth_rate_fit(times: np.ndarray, norms: np.ndarray, collapse_tol: float = 1e-12) -> GrowthFit:
    """
    Least-squares slope of log ||v(t)||.

    Raises:
        NumericalError: fewer than 3 samples, or norms collapsing below
                        collapse_tol times the initial norm
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if times.size < 3 or times.size != norms.size:
        raise NumericalError(f"growth fit needs >= 3 matched samples, got {times.size}/{norms.size}")
    if not np.all(np.isfinite(norms)) or np.min(norms) <= collapse_tol * norms[0]:
        raise NumericalError("ill-conditioned growth fit: norm collapsed")
    fit = linregress(times, np.log(norms))
    return GrowthFit(float(fit.slope), float(fit.stderr), float(fit.intercept), float(fit.rvalue))


# ===== MATRIX WITNESS =====

@dataclass(frozen=True)
class JLcSpectrum:
    n: int
    eigenvalues: np.ndarray
    max_real: float
    spectral_radius: float
    symmetry_defect: float
    kernel_overlap: float
    coarse_max_real: float
    wrapped_tail: float
    eigenvectors: Optional[np.ndarray] = None

    @property
    def relative_max_real(self) -> float:
        return self.max_real / self.spectral_radius

    def summary(self) -> Dict:
        return {
            'n': self.n,
            'max_real': self.max_real,
            'spectral_radius': self.spectral_radius,
            'relative_max_real': self.relative_max_real,
            'symmetry_defect': self.symmetry_defect,
            'kernel_overlap': self.kernel_overlap,
            'coarse_max_real': self.coarse_max_real,
            'wrapped_tail': self.wrapped_tail,
        }


def _jlc_eigen(profile: SolitonProfile, n: int):
    prof = circle_profile(profile, n)
    matrix = circulant_matrix('J', n, prof.period) @ lc_matrix(prof)
    values, vectors = eig(matrix)
    return prof, values, vectors


def jlc_matrix_spectrum(profile: SolitonProfile, n: int = JLC_POINTS,
                        zero_tol: float = 1e-4) -> JLcSpectrum:
    """
    Eigenvalues of the collocation matrix of J L_c.

    Reports the largest real part, the defect of the Hamiltonian symmetry
    lambda -> -conj(lambda), the best overlap with phi_xi among the
    near-zero eigenvectors, and the largest real part at n/2.
    """
    prof, values, vectors = _jlc_eigen(profile, n)
    radius = float(np.max(np.abs(values)))
    max_real = float(np.max(values.real))

    mirrored = -np.conj(values)
    gaps = np.abs(values[:, None] - mirrored[None, :])
    symmetry = float(np.max(np.min(gaps, axis=1))) / radius

    dphi = prof.periodic_samples()[1]
    dphi = dphi / np.linalg.norm(dphi)
    near_zero = np.flatnonzero(np.abs(values) < zero_tol * radius)
    overlap = 0.0
    for idx in near_zero:
        vec = vectors[:, idx]
        overlap = max(overlap, float(abs(np.vdot(vec, dphi)) / np.linalg.norm(vec)))

    _, coarse, _ = _jlc_eigen(profile, n // 2)
    phi = prof.periodic_samples()[0]
    logger.debug("J L_c matrix n=%d: max Re %.3e, radius %.3f", n, max_real, radius)
    return JLcSpectrum(n, values, max_real, radius, symmetry, overlap,
                       float(np.max(coarse.real)), float(phi[0] / np.max(phi)), vectors)
