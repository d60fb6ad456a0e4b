"""
core/stability_index.py
=======================
Index verdict for the smooth DP soliton.

    1 <= k0 <= n_minus(L_c) = 1   =>   no exponentially growing mode of v_t = J L_c v

n_minus comes from the spectral report. k0 >= 1 is witnessed by the
generalized-kernel direction d phi / d c:

    J L_c dphi_dc = -phi_xi                  (so dphi_dc is in gKer \\ ker)
    <L_c dphi_dc, dphi_dc> = -dS/dc < 0

The verdict is a checklist; each failing clause is named.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Union

import numpy as np

from config.settings import MATRIX_POINTS, TOLERANCES
from core.dp_math import DPMath
from core.errors import DPLabError, IdentityDefectError
from core.helmholtz import Field, LineField, apply_Lc, apply_periodic, periodized
from core.prufer import SpectralReport, compute_spectrum
from core.soliton import (
    CSpeedDerivative,
    SolitonProfile,
    SymmetricGrid,
    WaveParams,
    compute_profile,
    dphi_dc,
)

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    SPECTRALLY_STABLE = 'SpectrallyStable'
    INCONCLUSIVE = 'Inconclusive'


def quadratic_form(v: Field, profile: SolitonProfile) -> float:
    """<L_c v, v> by quadrature on v's own grid."""
    return apply_Lc(v, profile).inner(v)


def bilinear(u: Field, v: Field, profile: SolitonProfile) -> float:
    """<L_c u, v>; symmetric since L_c is self-adjoint."""
    return apply_Lc(u, profile).inner(v)


@dataclass(frozen=True)
class K0Evidence:
    quad_form_value: float
    minus_dSdc: float
    defect: float
    gker_defect: float

    @property
    def k0_lower_bound(self) -> int:
        return 1 if self.quad_form_value < 0 else 0


def k0_evidence(profile: SolitonProfile, dcphi: Union[CSpeedDerivative, np.ndarray],
                extrapolated: bool = False,
                tol_identity: Optional[float] = None) -> K0Evidence:
    """
    Both sides of <L_c dphi_dc, dphi_dc> = -dS/dc and the generalized-kernel defect.

    Args:
        profile: Soliton profile
        dcphi: d phi / d c on the profile grid
        extrapolated: Use the Richardson-extrapolated samples
        tol_identity: Raise when the relative defect exceeds it

    Returns:
        K0Evidence with the relative defect |quad + dS/dc| / dS/dc and
        ||J L_c dphi_dc + phi_xi|| / ||phi_xi|| on the periodized grid (nan when
        the grid does not periodize).
    """
    if isinstance(dcphi, CSpeedDerivative):
        samples = dcphi.extrapolated if extrapolated else dcphi.values
    else:
        samples = np.asarray(dcphi, dtype=float)

    params = profile.params
    direction = LineField(profile.grid, samples, profile.tail_rate)
    quad = quadratic_form(direction, profile)
    dSdc = DPMath.dSdc_closed_form(params.c, params.k)
    defect = abs(quad + dSdc) / dSdc

    size = profile.grid.n - 1
    if size & (size - 1) == 0:
        _, dphi = periodized(profile)
        circle = dphi.like(samples[:-1])
        jl = apply_periodic('J', apply_Lc(circle, profile))
        gker = float(np.linalg.norm(jl.samples + dphi.samples) / np.linalg.norm(dphi.samples))
    else:
        gker = float('nan')

    if tol_identity is not None and defect > tol_identity:
        raise IdentityDefectError(f"<L_c dphi_dc, dphi_dc> = {quad:.8f} vs -dS/dc = {-dSdc:.8f}: "
                                  f"relative defect {defect:.2e} > {tol_identity:.1e}")
    return K0Evidence(quad, -dSdc, defect, gker)


@dataclass
class IndexReport:
    c: float
    k: float
    n_minus: Optional[int]
    lambda_star: float
    quad_form_value: float
    minus_dSdc: float
    defect: float
    gker_defect: float
    traveling_residual: float
    matrix_negative_count: Optional[int]
    verdict: Verdict
    failing_clauses: List[str] = field(default_factory=list)

    @property
    def k0_lower_bound(self) -> int:
        return 1 if self.quad_form_value < 0 else 0

    def to_json(self) -> Dict:
        return {
            'c': self.c,
            'k': self.k,
            'n_minus': self.n_minus,
            'lambda_star': self.lambda_star,
            'quad_form': self.quad_form_value,
            'dSdc': -self.minus_dSdc,
            'defect': self.defect,
            'gker_defect': self.gker_defect,
            'k0_lower_bound': self.k0_lower_bound,
            'traveling_residual': self.traveling_residual,
            'matrix_negative_count': self.matrix_negative_count,
            'verdict': self.verdict.value,
            'failing_clauses': list(self.failing_clauses),
        }


def assess_profile(profile: SolitonProfile, spectrum: Optional[SpectralReport] = None,
                   dcphi: Optional[CSpeedDerivative] = None,
                   tolerances: Optional[Dict[str, float]] = None,
                   include_matrix: bool = True, n_matrix: int = MATRIX_POINTS) -> IndexReport:
    """
    Run the verdict checklist on a (possibly corrupted) profile.

    Clauses, in order:
        traveling-residual   ||stationarity residual|| / ||phi|| <= tol_residual
        n-minus              exactly one negative eigenvalue from shooting
        matrix-count         matrix oracle agrees on the negative count
        dphi-dc              d phi / d c passes its Richardson check
        quad-form-sign       <L_c dphi_dc, dphi_dc> < 0
        dSdc-identity        |quad + dS/dc| / dS/dc <= tol_identity
    """
    tol = {**TOLERANCES, **(tolerances or {})}
    params = profile.params
    failing: List[str] = []

    residual = DPMath.traveling_residual(profile) / profile.l2_norm()
    if not residual <= tol['tol_residual']:
        failing.append('traveling-residual')

    n_minus: Optional[int] = None
    lambda_star = float('nan')
    matrix_count: Optional[int] = None
    try:
        if spectrum is None:
            spectrum = compute_spectrum(profile, tol_eig=tol['tol_eig'],
                                        include_matrix=include_matrix, n_matrix=n_matrix)
        n_minus = spectrum.negative_count
        lambda_star = spectrum.lambda_star
        if spectrum.matrix is not None:
            matrix_count = spectrum.matrix.negative_count
    except DPLabError as exc:
        logger.warning("spectrum failed at %s: %s", params.label(), exc)
    if n_minus != 1:
        failing.append('n-minus')
    if matrix_count is not None and matrix_count != n_minus:
        failing.append('matrix-count')

    quad, minus_dSdc, defect, gker = float('nan'), float('nan'), float('nan'), float('nan')
    try:
        if dcphi is None:
            dcphi = dphi_dc(params, grid=profile.grid)
    except DPLabError as exc:
        logger.warning("dphi/dc failed at %s: %s", params.label(), exc)
        failing.append('dphi-dc')
    if dcphi is not None:
        evidence = k0_evidence(profile, dcphi)
        quad, minus_dSdc, defect, gker = (evidence.quad_form_value, evidence.minus_dSdc,
                                          evidence.defect, evidence.gker_defect)
    if not quad < 0:
        failing.append('quad-form-sign')
    if not defect <= tol['tol_identity']:
        failing.append('dSdc-identity')

    verdict = Verdict.INCONCLUSIVE if failing else Verdict.SPECTRALLY_STABLE
    if failing:
        logger.info("%s inconclusive: %s", params.label(), ', '.join(failing))
    return IndexReport(params.c, params.k, n_minus, lambda_star, quad, minus_dSdc, defect, gker,
                       residual, matrix_count, verdict, failing)


def stability_verdict(params: WaveParams, grid: Optional[SymmetricGrid] = None,
                      tolerances: Optional[Dict[str, float]] = None,
                      include_matrix: bool = True, n_matrix: int = MATRIX_POINTS) -> IndexReport:
    """Build the profile for (c, k) and run the verdict checklist."""
    tol = {**TOLERANCES, **(tolerances or {})}
    profile = compute_profile(params, grid, tol['tol_profile'])
    return assess_profile(profile, tolerances=tol, include_matrix=include_matrix, n_matrix=n_matrix)
