"""
core/helmholtz.py
=================
Nonlocal operator toolkit: inverse Helmholtz operators (a - d^2)^{-1} on the
line and on the circle, the skew operator J = d(4 - d^2)(1 - d^2)^{-1}, and
the linearized operator L_c = c - phi - (3c + 2k)(4 - d^2)^{-1}.

Line fields are convolved with the Green's function e^{-mu|x|} / (2 mu),
mu = sqrt(a), using two exponential recursions (one per direction) and
Euler-Maclaurin corrections for the kernel kink at x = y.
Periodic fields are multiplied by Fourier symbols.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy import fft as sfft
from scipy.signal import lfilter

from core.errors import GridMismatchError, NonDecayingFieldError, ValidationError
from core.soliton import SolitonProfile, SymmetricGrid

logger = logging.getLogger(__name__)

LINE_TAIL_TOL = 1e-8


# ===== FIELDS =====

@dataclass(frozen=True, eq=False)
class LineField:
    """
    Samples on a SymmetricGrid, read as a function on the whole line.

    tail_rate, when known, is the exponential decay rate of the field beyond
    the grid; it enables analytic tail corrections in quadrature and convolution.
    """

    grid: SymmetricGrid
    samples: np.ndarray
    tail_rate: Optional[float] = None
    tail_tol: float = LINE_TAIL_TOL

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.shape != (self.grid.n,):
            raise GridMismatchError(f"line field has {samples.size} samples, grid has {self.grid.n}")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("line field has non-finite samples")
        object.__setattr__(self, 'samples', samples)

    @property
    def boundary_ratio(self) -> float:
        peak = float(np.max(np.abs(self.samples)))
        if peak == 0.0:
            return 0.0
        return max(abs(self.samples[0]), abs(self.samples[-1])) / peak

    @property
    def decays(self) -> bool:
        return self.boundary_ratio <= self.tail_tol

    def require_decay(self) -> None:
        if not self.decays:
            raise NonDecayingFieldError(
                f"field does not decay: boundary/max = {self.boundary_ratio:.2e} > {self.tail_tol:.1e}"
            )

    def inner(self, other: 'LineField') -> float:
        if not self.grid.matches(other.grid):
            raise GridMismatchError("inner product of fields on different grids")
        prod = self.samples * other.samples
        return float(self.grid.spacing * (np.sum(prod) - 0.5 * (prod[0] + prod[-1])))

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self), 0.0))


@dataclass(frozen=True, eq=False)
class PeriodicField:
    """n equispaced samples (n a power of two) of one period, starting at -period/2."""

    period: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        n = samples.size
        if samples.ndim != 1 or n < 2 or n & (n - 1):
            raise ValidationError(f"periodic field size must be a power of two, got {n}")
        if not (math.isfinite(self.period) and self.period > 0):
            raise ValidationError(f"period>0 violated: period={self.period}")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("periodic field has non-finite samples")
        object.__setattr__(self, 'samples', samples)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def spacing(self) -> float:
        return self.period / self.n

    @property
    def points(self) -> np.ndarray:
        return -0.5 * self.period + self.spacing * np.arange(self.n)

    def like(self, samples: np.ndarray) -> 'PeriodicField':
        return PeriodicField(self.period, samples)

    def inner(self, other: 'PeriodicField') -> float:
        _check_same_circle(self, other)
        return float(self.spacing * np.dot(self.samples, other.samples))

    def norm(self) -> float:
        return math.sqrt(self.inner(self))


Field = Union[LineField, PeriodicField]


def _check_same_circle(u: PeriodicField, v: PeriodicField) -> None:
    if u.n != v.n or not math.isclose(u.period, v.period, rel_tol=1e-12):
        raise GridMismatchError(f"periodic fields differ: n={u.n}/{v.n}, period={u.period}/{v.period}")


def line_field(profile: SolitonProfile, samples: np.ndarray, tail_rate: Optional[float] = None,
               tail_tol: float = LINE_TAIL_TOL) -> LineField:
    return LineField(profile.grid, samples, tail_rate, tail_tol)


def periodized(profile: SolitonProfile) -> Tuple[PeriodicField, PeriodicField]:
    """(phi, phi_xi) as fields on the circle of length 2L."""
    values, derivative = profile.periodic_samples()
    return PeriodicField(profile.period, values), PeriodicField(profile.period, derivative)


# ===== LINE INVERSE =====

def inv_helmholtz_line(f: LineField, a: float = 4.0) -> LineField:
    """
    g = (a - d^2)^{-1} f on the line by Green's-function convolution.

    Args:
        f: Decaying line field
        a: 1 or 4

    Returns:
        LineField g, decaying at min(sqrt(a), tail rate of f)

    Formula (mu = sqrt(a), r = e^{-mu h}):
        T_i = h (sum_{j<=i} f_j r^{i-j} + sum_{j>=i} f_j r^{j-i} - f_i) - end half-weights
        g_i = T_i / (2 mu) - h^2 f_i / 12 + h^4 (mu^2 f_i + 3 f''_i) / 720
    plus the exact contribution of an exponential tail beyond +-L when
    f.tail_rate is known.
    """
    if a not in (1.0, 4.0):
        raise ValidationError(f"a must be 1 or 4, got {a}")
    f.require_decay()

    mu = math.sqrt(a)
    h = f.grid.spacing
    x = f.samples
    n = x.size
    r = math.exp(-mu * h)

    left = lfilter([1.0], [1.0, -r], x)
    right = lfilter([1.0], [1.0, -r], x[::-1])[::-1]
    idx = np.arange(n)
    trap = h * (left + right - x) - 0.5 * h * (x[0] * r ** idx + x[-1] * r ** (n - 1 - idx))

    f2 = np.empty_like(x)
    f2[1:-1] = (x[2:] - 2.0 * x[1:-1] + x[:-2]) / (h * h)
    f2[0], f2[-1] = f2[1], f2[-2]

    g = trap / (2.0 * mu) - h * h * x / 12.0 + h ** 4 * (mu * mu * x + 3.0 * f2) / 720.0

    out_rate = None
    if f.tail_rate is not None and f.tail_rate > 0:
        xs = f.grid.points
        weight = 1.0 / (2.0 * mu * (mu + f.tail_rate))
        g = g + weight * (x[0] * np.exp(-mu * (xs - xs[0])) + x[-1] * np.exp(-mu * (xs[-1] - xs)))
        out_rate = min(mu, f.tail_rate)

    return LineField(f.grid, g, out_rate, f.tail_tol)


# ===== PERIODIC SYMBOLS =====

@dataclass(frozen=True)
class OperatorSymbol:
    """Fourier multiplier omega -> rule(omega); odd symbols vanish at the Nyquist mode."""

    name: str
    rule: Callable[[np.ndarray], np.ndarray]
    odd: bool = False
    description: str = ''


SYMBOLS: Dict[str, OperatorSymbol] = {
    'inv4': OperatorSymbol('inv4', lambda w: 1.0 / (4.0 + w * w), description='(4 - d^2)^{-1}'),
    'inv1': OperatorSymbol('inv1', lambda w: 1.0 / (1.0 + w * w), description='(1 - d^2)^{-1}'),
    'one_minus_dxx': OperatorSymbol('one_minus_dxx', lambda w: 1.0 + w * w, description='1 - d^2'),
    'four_minus_dxx': OperatorSymbol('four_minus_dxx', lambda w: 4.0 + w * w, description='4 - d^2'),
    's_weight': OperatorSymbol('s_weight', lambda w: (1.0 + w * w) / (4.0 + w * w),
                               description='(1 - d^2)(4 - d^2)^{-1}'),
    'J': OperatorSymbol('J', lambda w: 1j * w * (4.0 + w * w) / (1.0 + w * w), odd=True,
                        description='d(4 - d^2)(1 - d^2)^{-1}'),
    'dx': OperatorSymbol('dx', lambda w: 1j * w, odd=True, description='d/dx'),
}


def wavenumbers(n: int, period: float) -> np.ndarray:
    """Angular wavenumbers of the rfft modes."""
    return 2.0 * np.pi * sfft.rfftfreq(n, d=period / n)


@lru_cache(maxsize=64)
def symbol_array(name: str, n: int, period: float) -> np.ndarray:
    """Multiplier values on the rfft modes (read-only, cached)."""
    try:
        symbol = SYMBOLS[name]
    except KeyError as exc:
        raise ValidationError(f"unknown operator symbol '{name}'") from exc
    values = np.asarray(symbol.rule(wavenumbers(n, period)), dtype=complex)
    if symbol.odd and n % 2 == 0:
        values[-1] = 0.0
    values.setflags(write=False)
    return values


def apply_symbol(name: str, samples: np.ndarray, period: float) -> np.ndarray:
    """Array-level symbol action; used by the time steppers."""
    n = samples.size
    return sfft.irfft(symbol_array(name, n, float(period)) * sfft.rfft(samples), n=n)


def apply_periodic(symbol_name: str, f: PeriodicField) -> PeriodicField:
    """Exact diagonal action of a named symbol in the discrete Fourier basis."""
    return f.like(apply_symbol(symbol_name, f.samples, f.period))


# ===== L_c =====

def profile_on_circle(profile: SolitonProfile, v: PeriodicField) -> np.ndarray:
    """Periodized phi matching the circle of v."""
    if profile.grid.n - 1 != v.n or not math.isclose(profile.period, v.period, rel_tol=1e-12):
        raise GridMismatchError(
            f"field (n={v.n}, period={v.period:g}) does not match periodized profile "
            f"(n={profile.grid.n - 1}, period={profile.period:g})"
        )
    return profile.periodic_samples()[0]


def apply_Lc(v: Field, profile: SolitonProfile) -> Field:
    """
    L_c v = (c - phi) v - (3c + 2k)(4 - d^2)^{-1} v.

    Args:
        v: LineField on the profile grid, or PeriodicField on its periodization
        profile: Soliton profile

    Raises:
        GridMismatchError: v and the profile live on different grids
    """
    c, k = profile.params.c, profile.params.k
    if isinstance(v, LineField):
        if not v.grid.matches(profile.grid):
            raise GridMismatchError(
                f"field grid (L={v.grid.half_width:g}, n={v.grid.n}) differs from profile grid "
                f"(L={profile.grid.half_width:g}, n={profile.grid.n})"
            )
        w = inv_helmholtz_line(v, 4.0)
        out = (c - profile.values) * v.samples - (3 * c + 2 * k) * w.samples
        return LineField(v.grid, out, v.tail_rate, v.tail_tol)
    if isinstance(v, PeriodicField):
        phi = profile_on_circle(profile, v)
        w = apply_symbol('inv4', v.samples, v.period)
        return v.like((c - phi) * v.samples - (3 * c + 2 * k) * w)
    raise ValidationError(f"apply_Lc expects a LineField or PeriodicField, got {type(v).__name__}")
