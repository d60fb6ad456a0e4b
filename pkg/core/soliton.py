"""
core/soliton.py
===============
Smooth DP Solitary Wave Construction

Builds the even, single-humped traveling wave phi(xi; c) of the
Degasperis-Procesi equation under c > 2k > 0, from the first integral

    phi^2 P(phi) = 1/2 (c - phi)^2 phi_xi^2,
    P(phi) = 1/2 phi^2 - c phi + 2/3 k phi + 1/2 c^2 - k c.

The profile is integrated from the crest outward in two phases:
    1. t-phase: phi = phi_minus - t^2 removes the square-root turning point.
    2. log-phase: y = log(phi) keeps full relative accuracy in the
       exponential tail, where y' -> nu = sqrt((c - 2k)/c).
The left half is sampled on the grid and mirrored to xi > 0.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicHermiteSpline

from config.settings import (
    CROSSOVER,
    DELTA_C_FACTOR,
    PROFILE_ATOL,
    PROFILE_POINTS,
    PROFILE_RTOL,
    RICHARDSON_TOL,
    TAIL_TOL,
    TOLERANCES,
)
from core.errors import ConvergenceError, ProfileError, ValidationError

logger = logging.getLogger(__name__)


# ===== PARAMETERS =====

@dataclass(frozen=True)
class WaveParams:
    """
    Wave speed c and dispersion k, checked against c > 2k > 0.

    All derived scalars of the wave (roots of P, tail rate, spectral
    thresholds) are exposed as properties.
    """

    c: float
    k: float

    def __post_init__(self):
        try:
            c, k = float(self.c), float(self.k)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"non-finite parameters: c={self.c}, k={self.k}") from exc
        if not (math.isfinite(c) and math.isfinite(k)):
            raise ValidationError(f"non-finite parameters: c={c}, k={k}")
        if k <= 0:
            raise ValidationError(f"k>0 violated: c={c:g}, k={k:g}")
        if c <= 2 * k:
            raise ValidationError(f"c>2k violated: c={c:g}, k={k:g}")
        object.__setattr__(self, 'c', c)
        object.__setattr__(self, 'k', k)

    @property
    def beta(self) -> float:
        """c^2 - 2ck = 2 P(0) = phi_minus * phi_plus."""
        return self.c * (self.c - 2 * self.k)

    @property
    def radical(self) -> float:
        """sqrt(2/9 k (3c + 2k)), half the root separation of P."""
        return math.sqrt(2.0 / 9.0 * self.k * (3 * self.c + 2 * self.k))

    @property
    def phi_plus(self) -> float:
        return self.c - 2.0 * self.k / 3.0 + self.radical

    @property
    def phi_minus(self) -> float:
        # beta / phi_plus avoids cancellation as c -> 2k
        return self.beta / self.phi_plus

    @property
    def phi_max(self) -> float:
        return self.phi_minus

    @property
    def nu(self) -> float:
        """Exponential tail rate of the profile."""
        return math.sqrt((self.c - 2 * self.k) / self.c)

    @property
    def essential_edge(self) -> float:
        """Left end (c - 2k)/4 of the essential spectrum of L_c."""
        return (self.c - 2 * self.k) / 4.0

    @property
    def lambda_1(self) -> float:
        """Onset of the sign change of the reduced coefficient at xi = 0."""
        return self.essential_edge - self.phi_max

    @property
    def lambda_0(self) -> float:
        return min(self.essential_edge, (self.c - self.phi_max) / 2.0)

    @property
    def peak_curvature(self) -> float:
        """phi''(0) from the first-order system evaluated at psi = 0."""
        pm = self.phi_max
        return pm * ((self.c - 2 * self.k) - 2 * pm) / (self.c - pm)

    def label(self) -> str:
        return f"c{self.c:g}_k{self.k:g}"


def validate_params(c: float, k: float) -> WaveParams:
    """Validated (c, k) pair; raises ValidationError naming the violated constraint."""
    return WaveParams(c, k)


def quadratic_P(phi, params: WaveParams):
    """
    P(phi) = 1/2 phi^2 - c phi + 2/3 k phi + 1/2 c^2 - k c.

    Works elementwise on arrays. Factors as 1/2 (phi - phi_plus)(phi - phi_minus).
    """
    c, k = params.c, params.k
    phi = np.asarray(phi, dtype=float)
    return 0.5 * phi * phi - c * phi + 2.0 / 3.0 * k * phi + 0.5 * c * c - k * c


def phi_extremes(params: WaveParams) -> Tuple[float, float]:
    """Roots (phi_minus, phi_plus) of P; phi_minus is the crest height."""
    return params.phi_minus, params.phi_plus


def first_integral(phi, psi, params: WaveParams):
    """Phi(phi, psi) = phi^2 P(phi) - 1/2 (c - phi)^2 psi^2, zero on the soliton orbit."""
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    return phi * phi * quadratic_P(phi, params) - 0.5 * (params.c - phi) ** 2 * psi * psi


def profile_system(params: WaveParams):
    """Right-hand side of phi' = psi, (c - phi) psi' = (c - 2k) phi - 2 phi^2 + psi^2."""
    c, k = params.c, params.k

    def rhs(xi, y):
        phi, psi = y
        return [psi, ((c - 2 * k) * phi - 2 * phi * phi + psi * psi) / (c - phi)]

    return rhs


# ===== GRID =====

@dataclass(frozen=True)
class SymmetricGrid:
    """Odd-sized grid on [-L, L] with xi = 0 at the center index."""

    half_width: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise ValidationError(f"L>0 violated: L={self.half_width}")
        if int(self.n) != self.n or self.n < 3 or self.n % 2 == 0:
            raise ValidationError(f"grid size must be odd and >= 3, got n={self.n}")
        object.__setattr__(self, 'half_width', float(self.half_width))
        object.__setattr__(self, 'n', int(self.n))

    @classmethod
    def for_params(cls, params: WaveParams, n: int = PROFILE_POINTS,
                   tail_tol: float = TAIL_TOL) -> 'SymmetricGrid':
        """Grid wide enough that max(phi_minus, 1) * e^{-nu L} < tail_tol."""
        half_width = math.ceil(math.log(max(params.phi_minus, 1.0) / tail_tol) / params.nu)
        return cls(float(half_width), n)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n - 1)

    @property
    def center(self) -> int:
        return (self.n - 1) // 2

    @cached_property
    def points(self) -> np.ndarray:
        # integer offsets keep the grid exactly symmetric with points[center] == 0
        return self.spacing * (np.arange(self.n) - self.center)

    def matches(self, other: 'SymmetricGrid') -> bool:
        return self.n == other.n and math.isclose(self.half_width, other.half_width,
                                                  rel_tol=1e-12)


# ===== PROFILE =====

@dataclass(frozen=True, eq=False)
class SolitonProfile:
    """Sampled soliton phi and phi_xi on a SymmetricGrid."""

    params: WaveParams
    grid: SymmetricGrid
    values: np.ndarray
    derivative: np.ndarray
    phi_max: float
    tail_rate: float
    scale: float = 1.0

    @property
    def xi(self) -> np.ndarray:
        return self.grid.points

    @cached_property
    def second_derivative(self) -> np.ndarray:
        c, k = self.params.c, self.params.k
        phi, psi = self.values, self.derivative
        return ((c - 2 * k) * phi - 2 * phi * phi + psi * psi) / (c - phi)

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.xi, self.values, self.derivative, extrapolate=False)

    @cached_property
    def _derivative_spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.xi, self.derivative, self.second_derivative,
                                  extrapolate=False)

    def _tail(self, xi: np.ndarray) -> np.ndarray:
        edge = -self.xi[0]
        return self.values[0] * np.exp(-self.tail_rate * (np.abs(xi) - edge))

    def evaluate(self, xi):
        """phi at arbitrary xi; exponential tail continuation outside the grid."""
        xi_arr = np.asarray(xi, dtype=float)
        inside = np.abs(xi_arr) <= -self.xi[0]
        out = np.where(inside, self._spline(np.clip(xi_arr, self.xi[0], self.xi[-1])),
                       self._tail(xi_arr))
        return float(out) if out.ndim == 0 else out

    def evaluate_derivative(self, xi):
        """phi_xi at arbitrary xi."""
        xi_arr = np.asarray(xi, dtype=float)
        inside = np.abs(xi_arr) <= -self.xi[0]
        tail = -np.sign(xi_arr) * self.tail_rate * self._tail(xi_arr)
        out = np.where(inside,
                       self._derivative_spline(np.clip(xi_arr, self.xi[0], self.xi[-1])),
                       tail)
        return float(out) if out.ndim == 0 else out

    def first_integral_residual(self) -> float:
        """max_i |Phi(phi_i, psi_i)| relative to the size of the two Phi terms."""
        phi, psi = self.values, self.derivative
        potential = phi * phi * quadratic_P(phi, self.params)
        kinetic = 0.5 * (self.params.c - phi) ** 2 * psi * psi
        scale = max(np.max(np.abs(potential)), np.max(kinetic), np.finfo(float).tiny)
        return float(np.max(np.abs(potential - kinetic)) / scale)

    def evenness_defect(self) -> float:
        return float(np.max(np.abs(self.values - self.values[::-1])))

    def is_monotone(self) -> bool:
        """Strictly increasing left of the crest, strictly decreasing right of it."""
        m = self.grid.center
        return bool(np.all(np.diff(self.values[:m + 1]) > 0)
                    and np.all(np.diff(self.values[m:]) < 0))

    def l2_norm(self) -> float:
        h = self.grid.spacing
        sq = self.values ** 2
        return float(math.sqrt(h * (np.sum(sq) - 0.5 * (sq[0] + sq[-1]))))

    def scaled(self, factor: float) -> 'SolitonProfile':
        """Same samples times factor; no longer a traveling wave unless factor == 1."""
        return SolitonProfile(self.params, self.grid, self.values * factor,
                              self.derivative * factor, self.phi_max * factor,
                              self.tail_rate, self.scale * factor)

    @property
    def period(self) -> float:
        return 2.0 * self.grid.half_width

    def periodic_samples(self) -> Tuple[np.ndarray, np.ndarray]:
        """phi and phi_xi on the first n - 1 points, read as one period of length 2L."""
        size = self.grid.n - 1
        if size & (size - 1):
            raise ValidationError(f"periodization needs n - 1 a power of two, got n={self.grid.n}")
        return self.values[:-1].copy(), self.derivative[:-1].copy()

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'xi': self.xi, 'phi': self.values, 'phi_xi': self.derivative})

    def metadata(self) -> Dict:
        return {
            'c': self.params.c,
            'k': self.params.k,
            'phi_max': self.phi_max,
            'nu': self.tail_rate,
            'L': self.grid.half_width,
            'n': self.grid.n,
            'first_integral_residual': self.first_integral_residual(),
            'evenness_defect': self.evenness_defect(),
            'tail_value': float(self.values[0]),
        }


def compute_profile(params: WaveParams, grid: Optional[SymmetricGrid] = None,
                    tol: float = TOLERANCES['tol_profile'],
                    crossover: float = CROSSOVER) -> SolitonProfile:
    """
    Construct the soliton on a symmetric grid.

    Args:
        params: Validated wave parameters
        grid: Sampling grid (default: SymmetricGrid.for_params)
        tol: Tail tolerance; requires phi_minus * e^{-nu L} < tol
        crossover: phi/phi_minus where the t-phase hands over to the log-phase

    Returns:
        SolitonProfile with phi(0) = phi_minus and analytic derivative samples.

    Phases (integrated from xi = 0 toward -L):
        t-phase:   dt/dxi = -(phi_m - t^2) sqrt(phi_p - phi_m + t^2) / (2 (c - phi_m + t^2))
        log-phase: dy/dxi = sqrt((phi_p - phi)(phi_m - phi)) / (c - phi),  phi = e^y
    """
    grid = grid or SymmetricGrid.for_params(params)
    c = params.c
    pm, pp = params.phi_minus, params.phi_plus
    nu = params.nu
    half_width = grid.half_width

    tail = pm * math.exp(-nu * half_width)
    if tail >= tol:
        raise ProfileError(
            f"L too small: tail residual phi_minus*exp(-nu*L)={tail:.3e} >= tol={tol:.1e} "
            f"(L={half_width:g}, nu={nu:.6f})"
        )

    gap = pp - pm
    t_cross = math.sqrt((1.0 - crossover) * pm)

    def t_rhs(xi, y):
        t = y[0]
        s = pm - t * t
        return [-s * math.sqrt(gap + t * t) / (2.0 * (c - s))]

    def reach_crossover(xi, y):
        return y[0] - t_cross

    reach_crossover.terminal = True
    reach_crossover.direction = 1

    phase1 = solve_ivp(t_rhs, (0.0, -half_width), [0.0], method='DOP853',
                       rtol=PROFILE_RTOL, atol=PROFILE_ATOL, dense_output=True,
                       events=reach_crossover)
    if phase1.status < 0:
        raise ProfileError(f"turning-point phase failed: {phase1.message}")

    crossed = phase1.status == 1 and len(phase1.t_events[0]) > 0
    xi_cross = float(phase1.t_events[0][0]) if crossed else -half_width

    m = grid.center
    xi_neg = grid.points[:m + 1]
    values = np.empty(m + 1)
    derivative = np.empty(m + 1)

    near = xi_neg >= xi_cross
    t = phase1.sol(xi_neg[near])[0]
    phi = pm - t * t
    values[near] = phi
    derivative[near] = phi * t * np.sqrt(gap + t * t) / (c - phi)

    if crossed and np.any(~near):
        t_event = float(phase1.y_events[0][0][0])
        y_cross = math.log(pm - t_event * t_event)

        def log_rhs(xi, y):
            phi_val = math.exp(y[0])
            return [math.sqrt(max((pp - phi_val) * (pm - phi_val), 0.0)) / (c - phi_val)]

        phase2 = solve_ivp(log_rhs, (xi_cross, -half_width), [y_cross], method='DOP853',
                           rtol=PROFILE_RTOL, atol=PROFILE_ATOL, dense_output=True)
        if phase2.status < 0:
            raise ProfileError(f"tail phase failed: {phase2.message}")
        phi = np.exp(phase2.sol(xi_neg[~near])[0])
        values[~near] = phi
        derivative[~near] = phi * np.sqrt(np.maximum((pp - phi) * (pm - phi), 0.0)) / (c - phi)

    values[m] = pm
    derivative[m] = 0.0

    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise ProfileError(f"profile lost positivity or finiteness at {params.label()}")

    full_values = np.concatenate([values, values[-2::-1]])
    full_derivative = np.concatenate([derivative, -derivative[-2::-1]])

    profile = SolitonProfile(params, grid, full_values, full_derivative, pm, nu)
    logger.debug("profile %s: L=%g n=%d crossover at xi=%.4f, tail=%.2e",
                 params.label(), half_width, grid.n, xi_cross, full_values[0])
    return profile


def xi_of_phi(phi: float, params: WaveParams) -> float:
    """
    Position xi <= 0 where the profile takes the value phi, by quadrature.

    Formula:
        xi(phi) = -int_phi^{phi_m} (c - s) ds / (s sqrt(2P(s)))
    with s = phi_m - tau^2, which turns the integrand into
        2 (c - s) / (s sqrt(phi_p - s)),  tau in [0, sqrt(phi_m - phi)].
    """
    pm, pp, c = params.phi_minus, params.phi_plus, params.c
    if not 0 < phi <= pm:
        raise ValidationError(f"phi must lie in (0, phi_minus={pm:.6f}], got {phi}")

    def integrand(tau):
        s = pm - tau * tau
        return 2.0 * (c - s) / (s * math.sqrt(pp - s))

    value, _ = quad(integrand, 0.0, math.sqrt(pm - phi), epsabs=0.0, epsrel=1e-13, limit=200)
    return -value


# ===== C-DERIVATIVE =====

@dataclass(frozen=True, eq=False)
class CSpeedDerivative:
    """Central-difference d phi / d c on a fixed grid with its Richardson diagnostics."""

    grid: SymmetricGrid
    values: np.ndarray
    extrapolated: np.ndarray
    delta_c: float
    richardson_defect: float
    roundoff_floor: float

    @property
    def roundoff_dominated(self) -> bool:
        return self.richardson_defect < self.roundoff_floor

    def evenness_defect(self) -> float:
        return float(np.max(np.abs(self.values - self.values[::-1])))


def dphi_dc(params: WaveParams, delta_c: Optional[float] = None,
            grid: Optional[SymmetricGrid] = None,
            richardson_tol: Optional[float] = RICHARDSON_TOL,
            tol: float = TOLERANCES['tol_profile']) -> CSpeedDerivative:
    """
    Central difference (phi(c + dc) - phi(c - dc)) / (2 dc) on a shared grid.

    Profiles at every c have their crest pinned at xi = 0, so they are
    aligned without a phase fit. A second difference with step 2 dc
    gives the Richardson error estimate |D(dc) - D(2dc)| / 3.

    Args:
        params: Wave parameters at the base speed
        delta_c: Step (default 1e-4 * c)
        grid: Shared grid (default: SymmetricGrid.for_params(params))
        richardson_tol: Maximum relative error estimate; None disables the check
        tol: Tail tolerance passed to compute_profile

    Raises:
        ValidationError: c - 2 dc <= 2k
        ConvergenceError: Richardson estimate above richardson_tol (step too large)
    """
    c, k = params.c, params.k
    delta = DELTA_C_FACTOR * c if delta_c is None else float(delta_c)
    if not delta > 0:
        raise ValidationError(f"delta_c>0 violated: delta_c={delta}")
    if c - 2 * delta <= 2 * k:
        raise ValidationError(f"c-2*delta_c>2k violated: c={c:g}, delta_c={delta:g}, k={k:g}")
    grid = grid or SymmetricGrid.for_params(params)

    def central(step: float) -> np.ndarray:
        upper = compute_profile(WaveParams(c + step, k), grid, tol)
        lower = compute_profile(WaveParams(c - step, k), grid, tol)
        return (upper.values - lower.values) / (2.0 * step)

    single = central(delta)
    double = central(2.0 * delta)
    size = max(float(np.max(np.abs(single))), np.finfo(float).tiny)
    defect = float(np.max(np.abs(single - double))) / 3.0 / size
    floor = PROFILE_RTOL * params.phi_max / delta / size

    if richardson_tol is not None and defect > richardson_tol:
        raise ConvergenceError(
            f"Richardson check failed: relative error estimate {defect:.2e} > {richardson_tol:.1e} "
            f"(delta_c={delta:g} too large)"
        )
    if defect < floor:
        logger.warning("dphi/dc at %s is roundoff dominated (estimate %.2e < floor %.2e, delta_c=%g)",
                       params.label(), defect, floor, delta)

    return CSpeedDerivative(grid, single, single + (single - double) / 3.0, delta, defect, floor)


def peakon_limit_deviation(c: float, k_sequence: Sequence[float], compact_half_width: float,
                           n: int = PROFILE_POINTS) -> List[float]:
    """
    sup_{|xi| <= W} |phi(xi; c, k) - c e^{-|xi|}| for each k.

    Args:
        c: Wave speed
        k_sequence: Dispersion values, each with c > 2k > 0
        compact_half_width: W
        n: Grid size per profile
    """
    deviations = []
    for k in k_sequence:
        params = validate_params(c, k)
        profile = compute_profile(params, SymmetricGrid.for_params(params, n=n))
        window = np.abs(profile.xi) <= compact_half_width
        peakon = c * np.exp(-np.abs(profile.xi[window]))
        deviations.append(float(np.max(np.abs(profile.values[window] - peakon))))
    return deviations
