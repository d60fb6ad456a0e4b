"""
strategies/stability_scanner.py
===============================
Stability Scanner Orchestrator

Features:
- Index verdict over a (c, k) grid, one isolated job per point
- Worker pool for sweeps, sequential merge into one table
- lambda_star continuity diagnostic along c
- Prufer angle inspection for a single wave
- Regression baseline save / verify
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from config.settings import EIGEN_MARGIN, RunConfig
from core.artifacts import read_json
from core.dp_math import DPMath
from core.errors import BaselineMismatch, DPLabError, ValidationError
from core.prufer import ReducedCoefficient, angle_scan, compute_spectrum, qe_negativity_check
from core.soliton import SolitonProfile, SymmetricGrid, WaveParams, compute_profile, dphi_dc
from core.stability_index import assess_profile, k0_evidence

logger = logging.getLogger(__name__)

# Largest admissible |d lambda_star / d c| between neighbouring sweep points
CONTINUITY_SLOPE = 1.0

# Baseline comparison: |new - old| <= atol + rtol * |old|
BASELINE_RTOL = 1e-8
BASELINE_ATOL = 1e-12
EXACT_KEYS = ('negative_count', 'matrix_negative_count', 'verdict')


def _analyze_worker(payload):
    """Module-level entry point for the process pool."""
    config, c, k = payload
    return StabilityScanner(config).analyze_point(c, k)


class StabilityScanner:
    """
    Stability Scanner.

    Features:
    - Profiles and verdicts per (c, k) on the configured grid
    - Failures recorded per point; the sweep continues
    - Inspection view of theta(0, lambda) with its B_k crossings
    """

    def __init__(self, config: RunConfig):
        self.config = config

    # ===== PER-POINT =====

    def grid_for(self, params: WaveParams) -> SymmetricGrid:
        if self.config.half_width is not None:
            return SymmetricGrid(self.config.half_width, self.config.n)
        return SymmetricGrid.for_params(params, self.config.n)

    def build_profile(self, params: WaveParams) -> SolitonProfile:
        return compute_profile(params, self.grid_for(params), self.config.tol_profile)

    def analyze_point(self, c: float, k: float, include_matrix: bool = True) -> Dict:
        """
        Index verdict at one (c, k).

        Returns:
            Row dict with a 'status' of ok / validation-error / numerical-error / error.
            Never raises.
        """
        row = {'c': c, 'k': k, 'status': 'ok', 'exit_code': 0, 'message': ''}
        try:
            params = WaveParams(c, k)
            profile = self.build_profile(params)
            report = assess_profile(profile, tolerances=self.config.tolerances,
                                    include_matrix=include_matrix, n_matrix=self.config.n_matrix)
            data = report.to_json()
            data['failing_clauses'] = ';'.join(data['failing_clauses'])
            row.update(data)
            row['dSdc_closed'] = DPMath.dSdc_closed_form(c, k)
        except DPLabError as exc:
            row.update(status='validation-error' if exc.exit_code == 1 else 'numerical-error',
                       exit_code=exc.exit_code, message=str(exc), verdict='Inconclusive')
            logger.warning("point c=%g k=%g failed: %s", c, k, exc)
        except Exception as exc:
            row.update(status='error', exit_code=2, message=f"{type(exc).__name__}: {exc}",
                       verdict='Inconclusive')
            logger.exception("point c=%g k=%g crashed", c, k)
        return row

    # ===== SWEEP =====

    def scan(self, progress: Optional[Callable[[float, float, int, int], None]] = None) -> pd.DataFrame:
        """
        Verdicts over c_values x k_values.

        Rows come back in grid order regardless of the worker count.
        """
        points = list(product(self.config.c_values, self.config.k_values))
        if not points:
            raise ValidationError("empty range: nothing to sweep")
        total = len(points)

        rows: List[Dict] = []
        if self.config.workers > 1:
            payloads = [(self.config, c, k) for c, k in points]
            with ProcessPoolExecutor(max_workers=self.config.workers) as pool:
                for idx, row in enumerate(pool.map(_analyze_worker, payloads), 1):
                    if progress:
                        progress(row['c'], row['k'], idx, total)
                    rows.append(row)
        else:
            for idx, (c, k) in enumerate(points, 1):
                if progress:
                    progress(c, k, idx, total)
                rows.append(self.analyze_point(c, k))

        frame = pd.DataFrame(rows)
        stable = int((frame['verdict'] == 'SpectrallyStable').sum())
        logger.info("sweep finished: %d/%d SpectrallyStable", stable, total)
        return frame

    @staticmethod
    def continuity_check(frame: pd.DataFrame, slope: float = CONTINUITY_SLOPE) -> pd.DataFrame:
        """
        Largest |d lambda_star| / |d c| between neighbouring c values at each k.

        Returns:
            One row per k: k, max_slope, continuous
        """
        rows = []
        for k, group in frame.groupby('k', sort=True):
            group = group[group['status'] == 'ok'].sort_values('c')
            lam = group['lambda_star'].to_numpy(dtype=float)
            cs = group['c'].to_numpy(dtype=float)
            if lam.size < 2:
                rows.append({'k': k, 'max_slope': float('nan'), 'continuous': True})
                continue
            slopes = np.abs(np.diff(lam)) / np.diff(cs)
            worst = float(np.nanmax(slopes)) if np.any(np.isfinite(slopes)) else float('nan')
            rows.append({'k': k, 'max_slope': worst, 'continuous': bool(worst <= slope)})
        return pd.DataFrame(rows, columns=['k', 'max_slope', 'continuous'])

    # ===== INSPECTION =====

    def inspect_angle_scan(self, params: WaveParams, n_lambda: int = 40,
                           profile: Optional[SolitonProfile] = None) -> List[Dict]:
        """
        theta(0, lambda) on an even lambda grid from below lambda_1 to the
        scan top, with the B_k level crossed in each interval.
        """
        profile = profile or self.build_profile(params)
        coeff = ReducedCoefficient(profile)
        lam1 = coeff.lambda_1
        top = (1.0 - EIGEN_MARGIN) * min(params.essential_edge, coeff.lambda_upper)
        lambdas = np.linspace(lam1 - 0.05 * abs(lam1), top, n_lambda)

        rows = []
        previous = None
        for lam, theta in angle_scan(profile, lambdas):
            level = int(math.floor(-2.0 * theta / math.pi))
            crossed = None
            if previous is not None and level > previous:
                crossed = level
            rows.append({'lambda': lam, 'theta0': theta, 'level': level, 'crossed': crossed})
            previous = level
        return rows

    # ===== BASELINES =====

    def collect_reference_quantities(self) -> Dict[str, object]:
        """Closed forms, spectrum and index quantities of the configured single wave."""
        c, k = self.config.c_values[0], self.config.k_values[0]
        params = WaveParams(c, k)
        profile = self.build_profile(params)
        spectrum = compute_spectrum(profile, tol_eig=self.config.tol_eig,
                                    n_matrix=self.config.n_matrix)
        dcphi = dphi_dc(params, grid=profile.grid)
        evidence = k0_evidence(profile, dcphi)
        report = assess_profile(profile, spectrum=spectrum, dcphi=dcphi,
                                tolerances=self.config.tolerances)
        qe = qe_negativity_check(profile)
        return {
            'S_closed': DPMath.S_closed_form(c, k),
            'dSdc_closed': DPMath.dSdc_closed_form(c, k),
            'M_closed': DPMath.momentum_closed_form(c, k),
            'S_reduced': DPMath.S_quadrature_reduced(profile),
            'phi_max': profile.phi_max,
            'lambda_star': spectrum.lambda_star,
            'lambda_star_matrix': spectrum.matrix.lambda_star,
            'edge_estimate': spectrum.matrix.edge_estimate,
            'theta_at_zero_lambda_zero': spectrum.theta_at_zero_lambda_zero,
            'negative_count': spectrum.negative_count,
            'matrix_negative_count': spectrum.matrix.negative_count,
            'quad_form': evidence.quad_form_value,
            'identity_defect': evidence.defect,
            'qe_max_on_positive_side': qe.max_on_positive_side,
            'verdict': report.verdict.value,
        }

    def save_baseline(self) -> Dict:
        """Baseline payload: reference values plus the tolerance constants in force."""
        return {
            'c': self.config.c_values[0],
            'k': self.config.k_values[0],
            'values': self.collect_reference_quantities(),
            'constants': dict(self.config.tolerances),
            'rtol': BASELINE_RTOL,
            'atol': BASELINE_ATOL,
        }

    def verify(self, baseline_path: str) -> pd.DataFrame:
        """
        Recompute the baseline quantities and compare.

        Raises:
            BaselineMismatch: a value leaves its tolerance, or a tolerance
                              constant differs from the one recorded
        """
        baseline = read_json(baseline_path)
        try:
            recorded, constants = baseline['values'], baseline['constants']
        except KeyError as exc:
            raise ValidationError(f"baseline {baseline_path} lacks key {exc}") from exc
        rtol = float(baseline.get('rtol', BASELINE_RTOL))
        atol = float(baseline.get('atol', BASELINE_ATOL))

        rows = []
        for name, expected in sorted(constants.items()):
            actual = self.config.tolerances.get(name)
            rows.append({'quantity': f'constant:{name}', 'expected': expected, 'actual': actual,
                         'ok': actual == expected})

        self.config.c_values = [float(baseline.get('c', self.config.c_values[0]))]
        self.config.k_values = [float(baseline.get('k', self.config.k_values[0]))]
        current = self.collect_reference_quantities()
        for name, expected in sorted(recorded.items()):
            actual = current.get(name)
            if name in EXACT_KEYS or isinstance(expected, str):
                ok = actual == expected
            else:
                ok = (actual is not None and expected is not None
                      and abs(actual - expected) <= atol + rtol * abs(expected))
            rows.append({'quantity': name, 'expected': expected, 'actual': actual, 'ok': bool(ok)})

        frame = pd.DataFrame(rows, columns=['quantity', 'expected', 'actual', 'ok'])
        failed = frame.loc[~frame['ok'], 'quantity'].tolist()
        if failed:
            raise BaselineMismatch(f"baseline mismatch in {', '.join(failed)}", frame)
        logger.info("baseline %s reproduced (%d quantities)", baseline_path, len(frame))
        return frame
