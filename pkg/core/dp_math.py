"""
core/dp_math.py
===============
Conserved Functionals of the DP Equation

    M(u) = int (1 - d^2) u dx
    H(u) = -1/6 int (u^3 + 6k u (4 - d^2)^{-1} u) dx
    S(u) = 1/2 int (1 - d^2)(4 - d^2)^{-1} u . u dx

plus the Lagrangian Q_c = H + cS, the closed forms for S(phi(.; c)) and
dS/dc, and the stationarity residual of a profile.

Line fields use the Green's-function inverse and trapezoid quadrature with an
exponential tail correction; periodic fields use Fourier symbols. The two are
never mixed inside one evaluation.

(4 - d^2)^{-1/2} is never formed: int ((4 - d^2)^{-1/2} u)^2 = int u (4 - d^2)^{-1} u.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad

from core.errors import ValidationError
from core.helmholtz import Field, LineField, apply_symbol, inv_helmholtz_line
from core.soliton import SolitonProfile


@dataclass(frozen=True)
class ConservedTriple:
    """M, H, S of one field."""

    M: float
    H: float
    S: float

    def as_dict(self):
        return {'M': self.M, 'H': self.H, 'S': self.S}


def _check_closed_region(c: float, k: float) -> None:
    if not (math.isfinite(c) and math.isfinite(k)):
        raise ValidationError(f"non-finite parameters: c={c}, k={k}")
    if k <= 0:
        raise ValidationError(f"k>0 violated: c={c:g}, k={k:g}")
    if c < 2 * k:
        raise ValidationError(f"c>=2k violated: c={c:g}, k={k:g}")


def _product_rate(a: Optional[float], b: Optional[float]) -> Optional[float]:
    if a is None or b is None:
        return None
    return a + b


class DPMath:
    """
    DP functional engine.

    Methods:
        line_integral: Trapezoid quadrature with exponential tail correction
        momentum_M, hamiltonian_H, functional_S: Conserved quantities
        S_quadrature_reduced: S(phi) from the algebraic elimination of (4 - d^2)^{-1} phi
        S_closed_form, S_z_substitution, dSdc_closed_form: Closed-form routes
        traveling_residual: Norm of the stationarity equation on a profile
        lagrangian_Q, gateaux_derivative: Criticality of Q_c at the soliton
    """

    # ===== QUADRATURE =====

    @staticmethod
    def line_integral(f: LineField) -> float:
        """
        Integral of a line field over the whole line.

        Formula:
            h (sum f_i - (f_0 + f_N)/2) + (f_0 + f_N) / rate
        The last term is the exact integral of f_0 e^{rate (x - x_0)} beyond the grid.
        """
        x = f.samples
        total = f.grid.spacing * (np.sum(x) - 0.5 * (x[0] + x[-1]))
        if f.tail_rate:
            total += (x[0] + x[-1]) / f.tail_rate
        return float(total)

    @staticmethod
    def integral(u: Field) -> float:
        if isinstance(u, LineField):
            u.require_decay()
            return DPMath.line_integral(u)
        return float(u.spacing * np.sum(u.samples))

    # ===== CONSERVED QUANTITIES =====

    @staticmethod
    def momentum_M(u: Field) -> float:
        """M(u) = int u (the d^2 term integrates to zero on decaying or periodic data)."""
        return DPMath.integral(u)

    @staticmethod
    def hamiltonian_H(u: Field, k: float) -> float:
        """H(u) = -1/6 int (u^3 + 6k u w), w = (4 - d^2)^{-1} u."""
        if isinstance(u, LineField):
            w = inv_helmholtz_line(u, 4.0)
            rate = None
            if u.tail_rate is not None:
                rate = min(3 * u.tail_rate, _product_rate(u.tail_rate, w.tail_rate))
            density = LineField(u.grid, u.samples ** 3 + 6 * k * u.samples * w.samples,
                                rate, u.tail_tol)
            return -DPMath.line_integral(density) / 6.0
        w = apply_symbol('inv4', u.samples, u.period)
        return -float(u.spacing * np.sum(u.samples ** 3 + 6 * k * u.samples * w)) / 6.0

    @staticmethod
    def functional_S(u: Field) -> float:
        """S(u) = 1/2 int u (u - 3w), using (1 - d^2)(4 - d^2)^{-1} = 1 - 3(4 - d^2)^{-1}."""
        if isinstance(u, LineField):
            w = inv_helmholtz_line(u, 4.0)
            rate = None
            if u.tail_rate is not None:
                rate = min(2 * u.tail_rate, _product_rate(u.tail_rate, w.tail_rate))
            density = LineField(u.grid, u.samples * (u.samples - 3.0 * w.samples), rate, u.tail_tol)
            return 0.5 * DPMath.line_integral(density)
        weighted = apply_symbol('s_weight', u.samples, u.period)
        return 0.5 * float(u.spacing * np.dot(u.samples, weighted))

    @staticmethod
    def conserved_triple(u: Field, k: float) -> ConservedTriple:
        return ConservedTriple(DPMath.momentum_M(u), DPMath.hamiltonian_H(u, k),
                               DPMath.functional_S(u))

    @staticmethod
    def profile_field(profile: SolitonProfile) -> LineField:
        return LineField(profile.grid, profile.values, profile.tail_rate)

    # ===== S OF THE SOLITON =====

    @staticmethod
    def algebraic_w(profile: SolitonProfile) -> np.ndarray:
        """(4 - d^2)^{-1} phi eliminated through the traveling equation: (2c phi - phi^2) / (6c + 4k)."""
        c, k = profile.params.c, profile.params.k
        phi = profile.values
        return (2 * c * phi - phi * phi) / (6 * c + 4 * k)

    @staticmethod
    def S_quadrature_reduced(profile: SolitonProfile) -> float:
        """
        S(phi) = 1 / (2(3c + 2k)) int_{-inf}^0 (3 phi + 4k) phi^2 dxi.

        The integrand is even, so the trapezoid rule on [-L, 0] has no
        odd-derivative endpoint error at the crest.
        """
        c, k = profile.params.c, profile.params.k
        m = profile.grid.center
        phi = profile.values[:m + 1]
        density = (3 * phi + 4 * k) * phi * phi / (2 * (3 * c + 2 * k))
        h = profile.grid.spacing
        total = h * (np.sum(density) - 0.5 * (density[0] + density[-1]))
        total += density[0] / (2 * profile.tail_rate)
        return float(total)

    @staticmethod
    def S_closed_form(c: float, k: float) -> float:
        """
        Closed form of S(phi(.; c)) for c >= 2k > 0.

        Formula:
            S = (c^2 - ck - 2/3 k^2) sqrt(beta) / (2(3c + 2k)) - k^2/9 log(arg)
            beta = c^2 - 2ck,  alpha = sqrt(2/3 kc + 4/9 k^2)
            arg  = (c - 2/3 k + sqrt(beta)) / alpha
        log(arg) is evaluated as log1p(arg - 1) with
            arg - 1 = (beta / (c - 2/3 k + alpha) + sqrt(beta)) / alpha,
        which stays accurate as c -> 2k.
        """
        _check_closed_region(c, k)
        beta = c * (c - 2 * k)
        root_beta = math.sqrt(beta)
        alpha = math.sqrt(2.0 / 3.0 * k * c + 4.0 / 9.0 * k * k)
        b = c - 2.0 * k / 3.0
        arg_minus_one = (beta / (b + alpha) + root_beta) / alpha
        first = (c * c - c * k - 2.0 / 3.0 * k * k) * root_beta / (2 * (3 * c + 2 * k))
        return first - k * k / 9.0 * math.log1p(arg_minus_one)

    @staticmethod
    def S_z_substitution(c: float, k: float) -> float:
        """
        S(phi) by quadrature in z = sqrt(2P(phi)), z in [0, sqrt(beta)].

        Formula:
            phi(z) = c - 2/3 k - sqrt(alpha^2 + z^2)
            S = 1 / (2(3c + 2k)) int_0^{sqrt(beta)} (3 phi + 4k) phi (c - phi) / sqrt(alpha^2 + z^2) dz
        """
        _check_closed_region(c, k)
        beta = c * (c - 2 * k)
        alpha2 = 2.0 / 3.0 * k * c + 4.0 / 9.0 * k * k
        b = c - 2.0 * k / 3.0

        def integrand(z):
            root = math.sqrt(alpha2 + z * z)
            phi = b - root
            return (3 * phi + 4 * k) * phi * (c - phi) / root

        value, _ = quad(integrand, 0.0, math.sqrt(beta), epsabs=0.0, epsrel=1e-13, limit=200)
        return value / (2 * (3 * c + 2 * k))

    @staticmethod
    def momentum_closed_form(c: float, k: float) -> float:
        """M(phi) = 2 sqrt(beta) + 4k/3 asinh(sqrt(beta) / alpha), same substitution as S."""
        _check_closed_region(c, k)
        beta = c * (c - 2 * k)
        alpha = math.sqrt(2.0 / 3.0 * k * c + 4.0 / 9.0 * k * k)
        return 2.0 * math.sqrt(beta) + 4.0 * k / 3.0 * math.asinh(math.sqrt(beta) / alpha)

    @staticmethod
    def dSdc_closed_form(c: float, k: float) -> float:
        """dS/dc = 3c^2 (c + k) / (3c + 2k)^2 * sqrt((c - 2k)/c); zero at c = 2k."""
        _check_closed_region(c, k)
        return 3 * c * c * (c + k) / (3 * c + 2 * k) ** 2 * math.sqrt((c - 2 * k) / c)

    @staticmethod
    def dSdc_finite_difference(c: float, k: float, delta_c: float = 1e-5) -> float:
        """Central difference of S_closed_form."""
        return (DPMath.S_closed_form(c + delta_c, k)
                - DPMath.S_closed_form(c - delta_c, k)) / (2 * delta_c)

    # ===== STATIONARITY =====

    @staticmethod
    def traveling_residual_field(profile: SolitonProfile) -> LineField:
        """c phi - 1/2 phi^2 - (3c + 2k) w, the gradient of Q_c at phi (up to sign)."""
        c, k = profile.params.c, profile.params.k
        u = DPMath.profile_field(profile)
        w = inv_helmholtz_line(u, 4.0)
        phi = profile.values
        residual = c * phi - 0.5 * phi * phi - (3 * c + 2 * k) * w.samples
        return LineField(profile.grid, residual, profile.tail_rate)

    @staticmethod
    def traveling_residual(profile: SolitonProfile) -> float:
        """
        L2 norm of -[1/2 phi^2 + 2k w] + c (phi - 3w), w = (4 - d^2)^{-1} phi.

        Returns:
            Absolute norm; compare against ||phi|| for a relative figure.
        """
        return DPMath.traveling_residual_field(profile).norm()

    # ===== LAGRANGIAN =====

    @staticmethod
    def lagrangian_Q(u: Field, c: float, k: float) -> float:
        """Q_c(u) = H(u) + c S(u)."""
        return DPMath.hamiltonian_H(u, k) + c * DPMath.functional_S(u)

    @staticmethod
    def gateaux_derivative(u: Field, direction: Field, c: float, k: float,
                           eps: float = 1e-4) -> float:
        """
        (Q_c(u + eps v) - Q_c(u - eps v)) / (2 eps).

        Q_c is cubic in u, so the central difference is exact up to eps^2 D^3 Q / 6.
        """
        if isinstance(u, LineField):
            if not u.grid.matches(direction.grid):
                raise ValidationError("direction lives on a different grid")
            rate = None
            if u.tail_rate is not None and direction.tail_rate is not None:
                rate = min(u.tail_rate, direction.tail_rate)
            plus = LineField(u.grid, u.samples + eps * direction.samples, rate, u.tail_tol)
            minus = LineField(u.grid, u.samples - eps * direction.samples, rate, u.tail_tol)
        else:
            plus = u.like(u.samples + eps * direction.samples)
            minus = u.like(u.samples - eps * direction.samples)
        return (DPMath.lagrangian_Q(plus, c, k) - DPMath.lagrangian_Q(minus, c, k)) / (2 * eps)
