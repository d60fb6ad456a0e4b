# tests/test_stability_scanner.py
# Sweep orchestration, continuity diagnostic and angle inspection.

import pandas as pd
import pytest

from config.settings import RunConfig
from strategies.stability_scanner import StabilityScanner


def test_continuity_flags_jumps():
    frame = pd.DataFrame({
        'c': [1.0, 2.0, 5.0, 1.0, 2.0],
        'k': [0.1, 0.1, 0.1, 0.2, 0.2],
        'lambda_star': [-0.27, -0.62, -1.70, -0.20, -5.0],
        'status': ['ok'] * 5,
    })
    result = StabilityScanner.continuity_check(frame).set_index('k')
    assert bool(result.loc[0.1, 'continuous'])
    assert not bool(result.loc[0.2, 'continuous'])
    assert result.loc[0.2, 'max_slope'] == pytest.approx(4.8)


def test_continuity_skips_failed_points():
    frame = pd.DataFrame({
        'c': [1.0, 2.0],
        'k': [0.1, 0.1],
        'lambda_star': [-0.27, float('nan')],
        'status': ['ok', 'numerical-error'],
    })
    result = StabilityScanner.continuity_check(frame)
    assert bool(result.loc[0, 'continuous'])


def test_failed_point_does_not_raise():
    scanner = StabilityScanner(RunConfig(command='sweep'))
    row = scanner.analyze_point(1.0, 0.5)
    assert row['status'] == 'validation-error'
    assert row['exit_code'] == 1
    assert 'c>2k violated' in row['message']
    assert row['verdict'] == 'Inconclusive'


def test_single_point_sweep():
    cfg = RunConfig(command='sweep', c_values=[1.0], k_values=[0.25], n=2049)
    frame = StabilityScanner(cfg).scan()
    assert len(frame) == 1
    row = frame.iloc[0]
    assert row['status'] == 'ok'
    assert row['n_minus'] == 1
    assert abs(row['lambda_star'] + 0.1616123) < 1e-5


def test_angle_inspection_crosses_three_levels(ref_params, ref_profile):
    scanner = StabilityScanner(RunConfig(command='spectrum'))
    rows = scanner.inspect_angle_scan(ref_params, profile=ref_profile)
    assert len(rows) == 40
    assert rows[0]['theta0'] > 0
    assert [r['crossed'] for r in rows if r['crossed'] is not None] == [0, 1, 2]
