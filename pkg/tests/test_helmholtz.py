# tests/test_helmholtz.py
# Line and periodic inverse Helmholtz operators, J and L_c.

import numpy as np
import pytest

from core.errors import GridMismatchError, NonDecayingFieldError, ValidationError
from core.evolution import random_smooth_field
from core.helmholtz import (
    LineField,
    PeriodicField,
    apply_Lc,
    apply_periodic,
    inv_helmholtz_line,
    periodized,
)
from core.soliton import SymmetricGrid


@pytest.mark.parametrize('a', [1.0, 4.0])
def test_line_inverse_recovers_gaussian(a):
    grid = SymmetricGrid(20.0, 4097)
    x = grid.points
    g = np.exp(-x * x)
    f = LineField(grid, (a + 2.0 - 4.0 * x * x) * g)
    out = inv_helmholtz_line(f, a)
    assert np.max(np.abs(out.samples - g)) < 1e-8


def test_line_inverse_of_exponential_tail_field(ref_profile):
    # (4 - d^2)^{-1} phi from the Green's function against the algebraic elimination
    phi = LineField(ref_profile.grid, ref_profile.values, ref_profile.tail_rate)
    w = inv_helmholtz_line(phi, 4.0).samples
    c, k = ref_profile.params.c, ref_profile.params.k
    algebraic = (2 * c * ref_profile.values - ref_profile.values ** 2) / (6 * c + 4 * k)
    assert np.max(np.abs(w - algebraic)) < 1e-8


def test_line_inverse_rejects_other_shifts():
    grid = SymmetricGrid(10.0, 513)
    f = LineField(grid, np.exp(-grid.points ** 2))
    with pytest.raises(ValidationError, match='a must be 1 or 4'):
        inv_helmholtz_line(f, 2.0)


def test_non_decaying_field_is_rejected():
    grid = SymmetricGrid(10.0, 513)
    with pytest.raises(NonDecayingFieldError):
        inv_helmholtz_line(LineField(grid, np.ones(grid.n)), 4.0)


def test_field_shapes_are_checked():
    grid = SymmetricGrid(10.0, 513)
    with pytest.raises(GridMismatchError):
        LineField(grid, np.zeros(512))
    with pytest.raises(ValidationError, match='power of two'):
        PeriodicField(10.0, np.zeros(100))


@pytest.mark.parametrize('name, inverse', [('inv4', 'four_minus_dxx'), ('inv1', 'one_minus_dxx')])
def test_periodic_symbols_invert_each_other(name, inverse):
    u = random_smooth_field(256, 80.0, seed=3)
    back = apply_periodic(name, apply_periodic(inverse, u))
    assert np.max(np.abs(back.samples - u.samples)) < 1e-12


def test_J_on_a_single_mode():
    period, n, mode = 80.0, 256, 3
    omega = 2 * np.pi * mode / period
    u = PeriodicField(period, np.zeros(n))
    x = u.points
    out = apply_periodic('J', u.like(np.cos(omega * x)))
    expected = -omega * (4 + omega ** 2) / (1 + omega ** 2) * np.sin(omega * x)
    assert np.max(np.abs(out.samples - expected)) < 1e-12


def test_J_is_skew():
    u = random_smooth_field(256, 80.0, seed=5)
    v = random_smooth_field(256, 80.0, seed=6)
    ju, jv = apply_periodic('J', u), apply_periodic('J', v)
    assert abs(ju.inner(v) + u.inner(jv)) < 1e-12
    assert abs(ju.inner(u)) < 1e-12


def test_Lc_annihilates_translation_mode(ref_profile):
    dphi = LineField(ref_profile.grid, ref_profile.derivative, ref_profile.tail_rate)
    line = apply_Lc(dphi, ref_profile).samples
    assert np.max(np.abs(line)) < 1e-8

    _, circle_dphi = periodized(ref_profile)
    periodic = apply_Lc(circle_dphi, ref_profile).samples
    assert np.max(np.abs(periodic)) < 1e-9


def test_Lc_is_symmetric_on_the_circle(ref_profile):
    phi, _ = periodized(ref_profile)
    u = random_smooth_field(phi.n, phi.period, seed=11)
    v = random_smooth_field(phi.n, phi.period, seed=12)
    assert apply_Lc(u, ref_profile).inner(v) == pytest.approx(u.inner(apply_Lc(v, ref_profile)),
                                                                abs=1e-12)


def test_Lc_rejects_foreign_grid(ref_profile):
    other = SymmetricGrid(ref_profile.grid.half_width, 1025)
    with pytest.raises(GridMismatchError):
        apply_Lc(LineField(other, np.exp(-other.points ** 2)), ref_profile)
    with pytest.raises(GridMismatchError):
        apply_Lc(random_smooth_field(256, ref_profile.period), ref_profile)
