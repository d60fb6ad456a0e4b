"""
core/prufer.py
==============
Spectrum of L_c by Prufer-angle shooting.

L_c v = lambda v is equivalent (p = (4 - d^2)^{-1} v) to

    p'' - A(xi, lambda) p = 0,   A = (c - 2k - 4 phi - 4 lambda) / (c - phi - lambda).

With p = rho cos(theta), p' = rho sin(theta):

    theta' = A cos^2(theta) - sin^2(theta)
    (log rho)' = (1 + A) sin(theta) cos(theta)

The decaying solution at -infinity starts at theta = arctan(sqrt(A)).
Eigenvalues are the lambda where theta(0, lambda) hits B_k = -k pi / 2;
theta(0, .) is strictly decreasing, so each B_k is hit at most once.
k = 0 is the negative eigenvalue, k = 1 is the translation mode lambda = 0.

A dense Fourier-collocation matrix of L_c on the periodized domain gives an
independent check of the same eigenvalues.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import fft as sfft
from scipy.integrate import solve_bvp, solve_ivp
from scipy.linalg import eigh
from scipy.optimize import brentq

from config.settings import BVP_TOL, EIGEN_MARGIN, MATRIX_POINTS, ODE_TOL, SHOOT_MAX_STEP, TOLERANCES
from core.errors import BracketError, ConvergenceError, IdentityDefectError, ValidationError
from core.helmholtz import LineField, apply_Lc, inv_helmholtz_line, symbol_array
from core.soliton import SolitonProfile, SymmetricGrid, WaveParams, compute_profile

logger = logging.getLogger(__name__)

EIGEN_REFINEMENTS = 2              # grid halvings before a root is declared spurious
MULTIPLICITY_STEP = 1e-6
MAX_BRACKET_EXPANSIONS = 12


# ===== REDUCED PROBLEM =====

@dataclass(frozen=True, eq=False)
class ReducedCoefficient:
    """A(xi, lambda) of the reduced eigenproblem for one profile."""

    profile: SolitonProfile

    @property
    def params(self) -> WaveParams:
        return self.profile.params

    @property
    def lambda_upper(self) -> float:
        """Denominators stay positive for lambda below c - phi_max."""
        return self.params.c - self.profile.phi_max

    @property
    def lambda_1(self) -> float:
        return self.params.essential_edge - self.profile.phi_max

    @property
    def lambda_0(self) -> float:
        return min(self.params.essential_edge, (self.params.c - self.profile.phi_max) / 2.0)

    def check_lambda(self, lam: float) -> None:
        if not lam < self.lambda_upper:
            raise ValidationError(f"lambda<c-phi_max violated: lambda={lam:g}, "
                                  f"c-phi_max={self.lambda_upper:g}")

    def __call__(self, xi, lam: float):
        self.check_lambda(lam)
        c, k = self.params.c, self.params.k
        phi = self.profile.evaluate(xi)
        return (c - 2 * k - 4 * phi - 4 * lam) / (c - phi - lam)

    def at_infinity(self, lam: float) -> float:
        c, k = self.params.c, self.params.k
        return (c - 2 * k - 4 * lam) / (c - lam)

    def d_lambda(self, xi, lam: float):
        """dA/dlambda = -(3c + 2k) / (c - phi - lambda)^2."""
        self.check_lambda(lam)
        c, k = self.params.c, self.params.k
        phi = self.profile.evaluate(xi)
        return -(3 * c + 2 * k) / (c - phi - lam) ** 2

    def turning_point(self, lam: float) -> Optional[float]:
        """
        Nonnegative root xi_bar of the numerator c - 2k - 4 phi - 4 lambda.

        Returns None when A(., lambda) keeps one sign on [0, L] (lambda < lambda_1:
        A > 0 everywhere, the first quadrant of the angle is forward-invariant).
        """
        self.check_lambda(lam)
        target = self.params.essential_edge - lam
        if target > self.profile.phi_max:
            return None
        if target == self.profile.phi_max:
            return 0.0
        half_width = self.profile.grid.half_width
        if self.profile.evaluate(half_width) > target:
            return None
        return brentq(lambda x: self.profile.evaluate(x) - target, 0.0, half_width, xtol=1e-13)

    def case(self, lam: float) -> int:
        """1 when A > 0 on the whole line, 2 when A changes sign at +-xi_bar."""
        return 1 if lam < self.lambda_1 else 2


def coefficient_A(xi, lam: float, profile: SolitonProfile):
    """A(xi, lambda); rejects lambda >= c - phi_max."""
    return ReducedCoefficient(profile)(xi, lam)


@dataclass(frozen=True)
class EssentialBand:
    """[lower, upper) = closure of the range of the far-field symbol."""

    lower: float
    upper: float
    c: float
    k: float

    def symbol(self, omega):
        """c - (3c + 2k) / (4 + omega^2)."""
        omega = np.asarray(omega, dtype=float)
        return self.c - (3 * self.c + 2 * self.k) / (4.0 + omega * omega)

    def contains(self, lam: float) -> bool:
        return self.lower <= lam < self.upper


def essential_spectrum(params: WaveParams) -> EssentialBand:
    """[(c - 2k)/4, c)."""
    return EssentialBand(params.essential_edge, params.c, params.c, params.k)


# ===== SHOOTING =====

@dataclass(frozen=True, eq=False)
class PruferTrace:
    """One integration of the angle equation from -L to 0 at fixed lambda."""

    lam: float
    xi: np.ndarray
    theta: np.ndarray
    log_rho: np.ndarray
    start_angle: float
    initial_angle: float

    @property
    def theta_at_zero(self) -> float:
        return float(self.theta[-1])

    @property
    def winding(self) -> int:
        """Number of B_k levels crossed, counted from the terminal angle."""
        return max(0, int(round(-2.0 * self.theta_at_zero / math.pi)))

    @property
    def drop(self) -> float:
        return self.initial_angle - self.theta_at_zero

    def is_non_increasing(self, tol: float = 1e-9) -> bool:
        return bool(np.all(np.diff(self.theta) <= tol))

    def stays_in_first_quadrant(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.theta >= -tol) and np.all(self.theta <= 0.5 * math.pi + tol))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'xi': self.xi, 'theta': self.theta})


def prufer_shoot(lam: float, profile: SolitonProfile, ode_tol: float = ODE_TOL) -> PruferTrace:
    """
    Integrate the Prufer system on [-L, 0] for one lambda.

    Args:
        lam: Spectral parameter, below min((c - 2k)/4, c - phi_max)
        profile: Soliton profile (evaluated off-grid by Hermite interpolation)
        ode_tol: Relative tolerance on theta

    Returns:
        PruferTrace sampled on the non-positive grid points. theta is a real
        variable (no mod-pi reduction), so B_k crossings are winding counts.
    """
    coeff = ReducedCoefficient(profile)
    params = profile.params
    upper = min(params.essential_edge, coeff.lambda_upper)
    if not lam < upper:
        raise ValidationError(f"lambda out of admissible range: lambda={lam:g} >= {upper:g}")

    c, k = params.c, params.k
    m = profile.grid.center
    xi_neg = profile.grid.points[:m + 1]
    start = xi_neg[0]
    initial = math.atan(math.sqrt(coeff(start, lam)))
    evaluate = profile.evaluate

    def rhs(xi, y):
        phi = evaluate(xi)
        a = (c - 2 * k - 4 * phi - 4 * lam) / (c - phi - lam)
        cs, sn = math.cos(y[0]), math.sin(y[0])
        return [a * cs * cs - sn * sn, (1.0 + a) * sn * cs]

    sol = solve_ivp(rhs, (start, 0.0), [initial, 0.0], method='DOP853', rtol=ode_tol,
                    atol=ode_tol * 1e-2, max_step=SHOOT_MAX_STEP, t_eval=xi_neg)
    if sol.status != 0:
        raise ConvergenceError(f"angle integration failed at lambda={lam:g}: {sol.message}")

    return PruferTrace(lam, sol.t, sol.y[0], sol.y[1],
                       math.atan(math.sqrt(coeff.at_infinity(lam))), initial)


def angle_scan(profile: SolitonProfile, lambdas: Sequence[float],
               ode_tol: float = ODE_TOL) -> List[Tuple[float, float]]:
    """(lambda, theta(0, lambda)) pairs."""
    return [(float(lam), prufer_shoot(lam, profile, ode_tol).theta_at_zero) for lam in lambdas]


@dataclass
class NegativeEigenvalue:
    """Root of theta(0, lambda) = 0 with its bracketing record."""

    lambda_star: float
    bracket: Tuple[float, float]
    history: List[Tuple[float, float]] = field(default_factory=list)
    iterations: int = 0
    expansions: int = 0
    certified_below_lambda_1: bool = False


def find_negative_eigenvalue(profile: SolitonProfile, tol: float = 1e-12,
                             ode_tol: float = ODE_TOL) -> NegativeEigenvalue:
    """
    Unique lambda_star in (lambda_1, 0) with theta(0, lambda_star) = B_0 = 0.

    Bracket (lambda_1 + eps, -eps), expanded leftward if the left end is not
    positive. A trace below lambda_1 must stay in the first quadrant, which
    certifies that no eigenvalue lies below lambda_1.

    Raises:
        BracketError: theta(0, .) does not change sign
    """
    coeff = ReducedCoefficient(profile)
    lam1 = coeff.lambda_1
    history: List[Tuple[float, float]] = []

    def g(lam: float) -> float:
        value = prufer_shoot(lam, profile, ode_tol).theta_at_zero
        history.append((lam, value))
        return value

    eps = 1e-8 * max(abs(lam1), 1.0)
    hi = -eps
    lo = lam1 + eps
    g_hi = g(hi)
    if g_hi >= 0:
        raise BracketError(f"theta(0, {hi:.2e}) = {g_hi:.3e} is not negative; profile or integration defect")

    g_lo = g(lo)
    step = 0.1 * abs(lam1)
    expansions = 0
    while g_lo <= 0:
        if expansions >= MAX_BRACKET_EXPANSIONS:
            raise BracketError(f"no sign change of theta(0, .) on [{lo:g}, {hi:g}]")
        lo -= step
        step *= 2.0
        expansions += 1
        logger.info("expanding bracket leftward to lambda=%.6f", lo)
        g_lo = g(lo)

    root, info = brentq(g, lo, hi, xtol=tol, full_output=True)
    if not info.converged:
        raise ConvergenceError(f"bisection for lambda_star did not converge: {info.flag}")

    below = min(lo, lam1) - 0.1 * abs(lam1)
    certified = prufer_shoot(below, profile, ode_tol).stays_in_first_quadrant()
    if not certified:
        logger.warning("trace below lambda_1 left the first quadrant at lambda=%.6f", below)

    logger.debug("lambda_star=%.12f after %d iterations", root, info.iterations)
    return NegativeEigenvalue(float(root), (lo, hi), history, info.iterations, expansions, certified)


@dataclass(frozen=True)
class DiscreteEigenvalue:
    lam: float
    index: int

    @property
    def target(self) -> float:
        return -self.index * math.pi / 2.0


def find_discrete_eigenvalues(profile: SolitonProfile, margin: float = EIGEN_MARGIN,
                              n_scan: int = 24, tol: float = 1e-12, min_index: int = 0,
                              ode_tol: float = ODE_TOL) -> List[DiscreteEigenvalue]:
    """
    Every lambda below (1 - margin) min((c - 2k)/4, c - phi_max) where
    theta(0, lambda) = -k pi/2.

    Args:
        profile: Soliton profile
        margin: Relative distance kept from the essential band edge
        n_scan: Scan points used to bracket each level
        tol: Root tolerance in lambda
        min_index: Skip levels k < min_index

    Returns:
        Eigenvalues sorted by index k (equal to the zero count of the eigenfunction).
    """
    coeff = ReducedCoefficient(profile)
    lam1 = coeff.lambda_1
    top = (1.0 - margin) * min(profile.params.essential_edge, coeff.lambda_upper)
    lo = lam1 - 0.05 * abs(lam1)
    scan = np.linspace(lo, top, n_scan)
    values = np.array([prufer_shoot(lam, profile, ode_tol).theta_at_zero for lam in scan])

    found = []
    k_max = int(math.floor(-2.0 * values[-1] / math.pi))
    for index in range(min_index, k_max + 1):
        target = -index * math.pi / 2.0
        if values[0] <= target:
            continue
        i = int(np.argmax(values <= target)) - 1
        root = brentq(lambda lam: prufer_shoot(lam, profile, ode_tol).theta_at_zero - target,
                      scan[i], scan[i + 1], xtol=tol)
        found.append(DiscreteEigenvalue(float(root), index))
        logger.debug("level B_%d hit at lambda=%.10f", index, root)
    return found


# ===== EIGENFUNCTIONS =====

@dataclass(frozen=True, eq=False)
class Eigenfunction:
    lam: float
    p: LineField
    v: LineField
    residual: float
    zero_count: int
    parity: str

    def sign_changes(self) -> int:
        p = self.p.samples
        cut = 1e-12 * np.max(np.abs(p))
        signs = np.sign(p[np.abs(p) > cut])
        return int(np.count_nonzero(signs[1:] != signs[:-1]))


def _line_norm(grid: SymmetricGrid, samples: np.ndarray, rate: float) -> float:
    """L2 norm on the line: trapezoid on the grid plus the exponential tails beyond +-L."""
    body = LineField(grid, samples, rate, math.inf)
    tails = (samples[0] ** 2 + samples[-1] ** 2) / (2.0 * rate)
    return math.sqrt(max(body.inner(body), 0.0) + tails)


def eigenfunction_reconstruct(lam: float, profile: SolitonProfile, ode_tol: float = ODE_TOL,
                              trace: Optional[PruferTrace] = None) -> Eigenfunction:
    """
    Eigenfunction of L_c from the stored angle trace.

    rho comes from the slaved radial equation; p = rho cos(theta) on xi <= 0 is
    extended by parity (even when theta(0) is an even multiple of -pi/2, odd
    otherwise), and v = (4 - d^2) p = (4 - A) p = (3c + 2k) p / (c - phi - lambda).

    Beyond +-L the eigenfunction is exactly e^{-sqrt(A_inf) |xi|}, so a weakly
    bound state near the band edge may be far from zero at the grid ends; its
    tail enters the norm and the convolution analytically.

    Returns:
        Eigenfunction with ||v|| = 1 and residual ||L_c v - lambda v||.
    """
    trace = trace or prufer_shoot(lam, profile, ode_tol)
    coeff = ReducedCoefficient(profile)
    c, k = profile.params.c, profile.params.k
    m = profile.grid.center

    winding = trace.winding
    rho = np.exp(trace.log_rho - np.max(trace.log_rho))
    half = rho * np.cos(trace.theta)
    if winding % 2 == 0:
        parity = 'even'
        p = np.concatenate([half, half[-2::-1]])
    else:
        parity = 'odd'
        half[-1] = 0.0
        p = np.concatenate([half, -half[-2::-1]])

    v = (3 * c + 2 * k) * p / (c - profile.values - lam)
    rate = math.sqrt(coeff.at_infinity(lam))
    scale = _line_norm(profile.grid, v, rate)
    left = v[:m + 1]
    sign = 1.0 if left[np.argmax(np.abs(left))] > 0 else -1.0
    v = sign * v / scale
    p = sign * p / scale

    v_field = LineField(profile.grid, v, rate, math.inf)
    p_field = LineField(profile.grid, p, rate, math.inf)
    lv = apply_Lc(v_field, profile)
    residual = _line_norm(profile.grid, lv.samples - lam * v, rate)
    return Eigenfunction(float(lam), p_field, v_field, residual, winding, parity)


def angle_multiplicity(lam: float, profile: SolitonProfile, ode_tol: float = ODE_TOL,
                       step: float = MULTIPLICITY_STEP) -> Tuple[int, bool]:
    """
    Multiplicity of an eigenvalue from theta(0, .) on [lam - d, lam + d].

    The solution decaying at +infinity is the mirror image of the one decaying
    at -infinity, so their Wronskian at xi = 0 is -rho^2 sin(2 theta(0)).

    Returns:
        (number of levels -j pi/2 crossed in the window, whether the
        normalized Wronskian -sin(2 theta(0)) changes sign across it)
    """
    coeff = ReducedCoefficient(profile)
    upper = min(profile.params.essential_edge, coeff.lambda_upper)
    d = min(step * max(1.0, abs(lam)), 0.5 * (upper - lam))
    left = prufer_shoot(lam - d, profile, ode_tol).theta_at_zero
    right = prufer_shoot(lam + d, profile, ode_tol).theta_at_zero
    levels = range(int(math.floor(-2.0 * left / math.pi)), int(math.ceil(-2.0 * right / math.pi)) + 1)
    crossed = sum(1 for j in levels if right < -j * math.pi / 2.0 < left)
    flip = math.sin(2.0 * left) * math.sin(2.0 * right) < 0
    return crossed, flip


# ===== q_e =====

@dataclass(frozen=True, eq=False)
class QeReport:
    q: LineField
    odd_defect: float
    max_on_positive_side: float
    sign_changes: int
    bvp_defect: float

    @property
    def negative(self) -> bool:
        return self.max_on_positive_side < 0 and self.sign_changes == 1


def qe_negativity_check(profile: SolitonProfile, bvp_tol: float = BVP_TOL) -> QeReport:
    """
    q_e = (4 - d^2)^{-1} phi_xi by convolution, checked against the two-point
    problem p'' - 4p = -phi_xi with decaying Robin ends p' = +-2p.

    Reports oddness, the maximum of q_e over xi > h, the number of sign
    changes (one, at xi = 0) and the convolution/BVP disagreement.
    """
    grid = profile.grid
    xs = grid.points
    h = grid.spacing
    q = inv_helmholtz_line(LineField(grid, profile.derivative, profile.tail_rate), 4.0)
    qs = q.samples

    odd_defect = float(np.max(np.abs(qs + qs[::-1])))
    max_positive = float(np.max(qs[xs > h]))
    cut = 1e-12 * np.max(np.abs(qs))
    signs = np.sign(qs[np.abs(qs) > cut])
    sign_changes = int(np.count_nonzero(signs[1:] != signs[:-1]))

    def fun(x, y):
        return np.vstack([y[1], 4.0 * y[0] - profile.evaluate_derivative(x)])

    def bc(ya, yb):
        return np.array([ya[1] - 2.0 * ya[0], yb[1] + 2.0 * yb[0]])

    guess = np.vstack([qs, np.gradient(qs, h)])
    sol = solve_bvp(fun, bc, xs, guess, tol=bvp_tol, max_nodes=300000)
    if not sol.success:
        raise ConvergenceError(f"q_e two-point problem failed: {sol.message}")
    bvp_defect = float(np.max(np.abs(sol.sol(xs)[0] - qs)))

    return QeReport(q, odd_defect, max_positive, sign_changes, bvp_defect)


# ===== MATRIX ORACLE =====

def circulant_matrix(symbol_name: str, n: int, period: float) -> np.ndarray:
    """Dense matrix of a periodic symbol: column j is the operator applied to e_j."""
    symbol = symbol_array(symbol_name, n, float(period))
    return sfft.irfft(symbol[:, None] * sfft.rfft(np.eye(n), axis=0), n=n, axis=0)


def circle_profile(profile: SolitonProfile, n_points: int) -> SolitonProfile:
    """Same wave on a grid whose periodization has n_points samples."""
    if profile.grid.n - 1 == n_points:
        return profile
    rebuilt = compute_profile(profile.params, SymmetricGrid(profile.grid.half_width, n_points + 1))
    return rebuilt if profile.scale == 1.0 else rebuilt.scaled(profile.scale)


def lc_matrix(profile: SolitonProfile) -> np.ndarray:
    """Fourier-collocation matrix of L_c on the periodized profile grid."""
    c, k = profile.params.c, profile.params.k
    phi = profile.periodic_samples()[0]
    return np.diag(c - phi) - (3 * c + 2 * k) * circulant_matrix('inv4', phi.size, profile.period)


@dataclass(frozen=True, eq=False)
class MatrixSpectrum:
    n: int
    period: float
    eigenvalues: np.ndarray
    negative_count: int
    lambda_star: float
    kernel_eigenvalue: float
    kernel_overlap: float
    symmetry_defect: float
    edge_estimate: float
    wrapped_tail: float

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'index': np.arange(self.eigenvalues.size), 'lambda': self.eigenvalues})

    def summary(self) -> Dict:
        return {
            'n': self.n,
            'period': self.period,
            'negative_count': self.negative_count,
            'lambda_star': self.lambda_star,
            'kernel_eigenvalue': self.kernel_eigenvalue,
            'kernel_overlap': self.kernel_overlap,
            'symmetry_defect': self.symmetry_defect,
            'edge_estimate': self.edge_estimate,
            'wrapped_tail': self.wrapped_tail,
        }


def discretize_and_diagonalize_Lc(profile: SolitonProfile, n_matrix: int = MATRIX_POINTS,
                                  discrete: Optional[Sequence[float]] = None,
                                  zero_tol: float = TOLERANCES['tol_eig'],
                                  symmetry_tol: float = 1e-12) -> MatrixSpectrum:
    """
    Dense eigen-decomposition of L_c on the periodized domain.

    Args:
        profile: Soliton profile (rebuilt on n_matrix + 1 points if needed)
        n_matrix: Collocation size (power of two)
        discrete: Eigenvalues already accounted for (from shooting); each removes
                  its nearest matrix eigenvalue before the band edge is estimated.
                  Default: the negative eigenvalues and the kernel eigenvalue.
        zero_tol: Eigenvalues below -zero_tol count as negative
        symmetry_tol: Maximum relative asymmetry of the assembled matrix

    Raises:
        IdentityDefectError: matrix asymmetry above symmetry_tol
    """
    prof = circle_profile(profile, n_matrix)
    phi, dphi = prof.periodic_samples()
    matrix = lc_matrix(prof)

    scale = float(np.max(np.abs(matrix)))
    defect = float(np.max(np.abs(matrix - matrix.T))) / scale
    if defect > symmetry_tol:
        raise IdentityDefectError(f"L_c matrix symmetry defect {defect:.2e} > {symmetry_tol:.1e}")

    eigenvalues, eigenvectors = eigh(0.5 * (matrix + matrix.T))
    negative_count = int(np.count_nonzero(eigenvalues < -zero_tol))
    lambda_star = float(eigenvalues[0]) if negative_count else float('nan')

    kernel_index = int(np.argmin(np.abs(eigenvalues)))
    direction = dphi / np.linalg.norm(dphi)
    overlap = float(abs(np.dot(eigenvectors[:, kernel_index], direction)))

    remaining = list(eigenvalues)
    if discrete is None:
        accounted = [e for e in eigenvalues if e < -zero_tol] + [eigenvalues[kernel_index]]
    else:
        accounted = list(discrete)
    for value in accounted:
        remaining.pop(int(np.argmin(np.abs(np.asarray(remaining) - value))))
    edge_estimate = float(min(remaining)) if remaining else float('nan')

    wrapped_tail = float(phi[0] / np.max(phi))
    logger.debug("L_c matrix n=%d: lambda_star=%.10f kernel=%.2e edge=%.6f",
                 n_matrix, lambda_star, eigenvalues[kernel_index], edge_estimate)
    return MatrixSpectrum(n_matrix, prof.period, eigenvalues, negative_count, lambda_star,
                          float(eigenvalues[kernel_index]), overlap, defect, edge_estimate,
                          wrapped_tail)


# ===== REPORT =====

@dataclass(frozen=True)
class EigenEntry:
    lam: float
    multiplicity: int
    residual: float
    zero_count: int
    parity: str
    wronskian_flip: bool = True
    refinements: int = 0
    spurious: bool = False


@dataclass(eq=False)
class SpectralReport:
    """Essential band, discrete eigenvalues below it, and the negative count."""

    params: WaveParams
    essential: EssentialBand
    eigenvalues: List[EigenEntry]
    lambda_star: float
    negative_count: int
    theta_at_zero_lambda_zero: float
    search: NegativeEigenvalue
    eigenfunctions: Dict[int, Eigenfunction]
    matrix: Optional[MatrixSpectrum] = None
    half_width: float = 0.0
    n: int = 0

    @property
    def confirmed(self) -> List[EigenEntry]:
        return [e for e in self.eigenvalues if not e.spurious]

    @property
    def max_residual(self) -> float:
        return max((e.residual for e in self.confirmed), default=0.0)

    @property
    def all_simple(self) -> bool:
        return all(e.multiplicity == 1 and e.wronskian_flip for e in self.confirmed)

    @property
    def has_simple_zero(self) -> bool:
        zeros = [e for e in self.confirmed if e.zero_count == 1]
        return len(zeros) == 1 and zeros[0].multiplicity == 1

    def to_json(self) -> Dict:
        payload = {
            'c': self.params.c,
            'k': self.params.k,
            'essential': [self.essential.lower, self.essential.upper],
            'eigenvalues': [{'lambda': e.lam, 'multiplicity': e.multiplicity,
                             'residual': e.residual, 'zero_count': e.zero_count,
                             'parity': e.parity, 'wronskian_flip': e.wronskian_flip,
                             'refinements': e.refinements, 'spurious': e.spurious}
                            for e in self.eigenvalues],
            'lambda_star': self.lambda_star,
            'negative_count': self.negative_count,
            'theta_at_zero_lambda_zero': self.theta_at_zero_lambda_zero,
            'bisection_iterations': self.search.iterations,
            'certified_below_lambda_1': self.search.certified_below_lambda_1,
            'resolution': {'L': self.half_width, 'n': self.n},
        }
        if self.matrix is not None:
            payload['matrix'] = self.matrix.summary()
        return payload


def _refined_profile(profile: SolitonProfile) -> SolitonProfile:
    grid = profile.grid
    rebuilt = compute_profile(profile.params, SymmetricGrid(grid.half_width, 2 * grid.n - 1))
    return rebuilt if profile.scale == 1.0 else rebuilt.scaled(profile.scale)


def _relocate_root(lam: float, index: int, profile: SolitonProfile, ode_tol: float) -> float:
    """Root of theta(0, .) = -index pi/2 near lam on a (refined) profile."""
    coeff = ReducedCoefficient(profile)
    upper = min(profile.params.essential_edge, coeff.lambda_upper)
    target = -index * math.pi / 2.0

    def g(x: float) -> float:
        return prufer_shoot(x, profile, ode_tol).theta_at_zero - target

    width = 1e-4 * max(1.0, abs(lam))
    for _ in range(MAX_BRACKET_EXPANSIONS):
        lo, hi = lam - width, min(lam + width, lam + 0.5 * (upper - lam))
        if g(lo) > 0 > g(hi):
            return float(brentq(g, lo, hi, xtol=1e-13))
        width *= 4.0
    raise BracketError(f"level B_{index} lost near lambda={lam:g} after refinement")


def resolve_eigenvalue(lam: float, index: int, profile: SolitonProfile, ode_tol: float = ODE_TOL,
                       tol_eig: float = TOLERANCES['tol_eig']) -> Tuple[EigenEntry, Eigenfunction]:
    """
    Reconstruct the eigenfunction of level B_index and refine until its residual
    is within tol_eig.

    Each refinement halves the grid spacing, tightens the angle tolerance by ten
    and relocates the root. A root still above tol_eig after EIGEN_REFINEMENTS
    is spurious.

    Raises:
        ConvergenceError: lambda_star or the translation mode stays above tol_eig
    """
    current, tol_ode, refinements = profile, ode_tol, 0
    ef = eigenfunction_reconstruct(lam, current, tol_ode)
    while ef.residual > tol_eig and refinements < EIGEN_REFINEMENTS:
        refinements += 1
        current = _refined_profile(current)
        tol_ode *= 0.1
        lam = _relocate_root(lam, index, current, tol_ode)
        ef = eigenfunction_reconstruct(lam, current, tol_ode)
        logger.info("level B_%d refined to n=%d: lambda=%.12f residual=%.2e",
                    index, current.grid.n, lam, ef.residual)

    spurious = ef.residual > tol_eig
    if spurious and index <= 1:
        raise ConvergenceError(f"eigenfunction residual {ef.residual:.2e} > tol_eig={tol_eig:.1e} "
                               f"at lambda={lam:.10f} (level B_{index}, n={current.grid.n})")
    if spurious:
        logger.warning("spurious root at lambda=%.8f: residual %.2e > %.1e after %d refinements",
                       lam, ef.residual, tol_eig, refinements)

    multiplicity, flip = angle_multiplicity(lam, current, tol_ode)
    if not spurious and (multiplicity != 1 or not flip):
        raise ConvergenceError(f"eigenvalue lambda={lam:.10f} is not simple: "
                               f"{multiplicity} levels crossed, Wronskian flip={flip}")
    entry = EigenEntry(float(lam), multiplicity, ef.residual, ef.zero_count, ef.parity,
                       flip, refinements, spurious)
    return entry, ef


def compute_spectrum(profile: SolitonProfile, ode_tol: float = ODE_TOL,
                     tol_eig: float = TOLERANCES['tol_eig'], margin: float = EIGEN_MARGIN,
                     include_matrix: bool = True, n_matrix: int = MATRIX_POINTS) -> SpectralReport:
    """
    Full spectral picture of L_c below the essential band.

    Every confirmed eigenvalue has residual <= tol_eig and is simple (one level
    crossed, Wronskian sign change). Spurious positive roots are reported but
    never counted.
    """
    negative = find_negative_eigenvalue(profile, ode_tol=ode_tol)
    higher = find_discrete_eigenvalues(profile, margin=margin, min_index=1, ode_tol=ode_tol)
    levels = [(0, negative.lambda_star)] + [(d.index, d.lam) for d in higher]

    entries: List[EigenEntry] = []
    functions: Dict[int, Eigenfunction] = {}
    for index, lam in levels:
        entry, ef = resolve_eigenvalue(lam, index, profile, ode_tol, tol_eig)
        entries.append(entry)
        if not entry.spurious:
            functions[index] = ef

    confirmed = [e for e in entries if not e.spurious]
    negative_count = sum(e.multiplicity for e in confirmed if e.lam < -tol_eig)
    lambda_star = entries[0].lam
    theta_zero = prufer_shoot(0.0, profile, ode_tol).theta_at_zero

    matrix = None
    if include_matrix:
        matrix = discretize_and_diagonalize_Lc(profile, n_matrix, discrete=[e.lam for e in confirmed],
                                               zero_tol=tol_eig)

    return SpectralReport(profile.params, essential_spectrum(profile.params), entries,
                          lambda_star, negative_count, theta_zero, negative, functions,
                          matrix, profile.grid.half_width, profile.grid.n)
