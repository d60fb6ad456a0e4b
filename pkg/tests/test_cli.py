# tests/test_cli.py
# Command-line surface: exit codes, artifacts, config files and baselines.

import json

from core.artifacts import read_frame
from main import main

FAST = ['--n', '2049', '--n-matrix', '256']


def test_profile_writes_artifacts(tmp_path):
    code = main(['profile', '--c', '1', '--k', '0.25', '--out', str(tmp_path)] + FAST)
    assert code == 0
    frame = read_frame(tmp_path / 'profile_c1_k0.25.csv')
    assert list(frame.columns) == ['xi', 'phi', 'phi_xi']
    assert len(frame) == 2049
    meta = json.loads((tmp_path / 'profile_c1_k0.25.json').read_text())
    assert meta['monotone'] is True
    assert abs(meta['phi_max'] - 0.39237478) < 1e-8
    first_line = (tmp_path / 'profile_c1_k0.25.csv').read_text().splitlines()[0]
    assert first_line == f"# config_hash={meta['config_hash']}"


def test_invalid_parameters_exit_1(tmp_path, capsys):
    code = main(['spectrum', '--c', '1', '--k', '0.5', '--out', str(tmp_path)])
    assert code == 1
    assert 'c>2k violated' in capsys.readouterr().err


def test_empty_range_exits_1(tmp_path):
    assert main(['sweep', '--c', '', '--out', str(tmp_path)]) == 1


def test_unknown_flag_exits_1(tmp_path):
    assert main(['profile', '--bogus', '--out', str(tmp_path)]) == 1


def test_config_file_with_flag_override(tmp_path):
    config = tmp_path / 'wave.cfg'
    config.write_text("# reference wave\nc = 1\nk = 0.25\nn = 1025\ntol_eig = 1e-7\n")
    code = main(['profile', '--config', str(config), '--n', '2049', '--out', str(tmp_path)])
    assert code == 0
    echo = json.loads((tmp_path / 'profile_c1_k0.25_config.json').read_text())
    assert echo['n'] == 2049
    assert echo['tol_eig'] == 1e-7
    assert echo['c_values'] == [1.0]


def test_bad_config_key_exits_1(tmp_path):
    config = tmp_path / 'bad.cfg'
    config.write_text("speed = 1\n")
    assert main(['profile', '--config', str(config), '--out', str(tmp_path)]) == 1


def test_config_hash_ignores_output_location(tmp_path):
    for name in ('a', 'b'):
        assert main(['profile', '--out', str(tmp_path / name)] + FAST) == 0
    first = json.loads((tmp_path / 'a' / 'profile_c1_k0.25.json').read_text())
    second = json.loads((tmp_path / 'b' / 'profile_c1_k0.25.json').read_text())
    assert first['config_hash'] == second['config_hash']


def test_baseline_round_trip_and_mismatch(tmp_path):
    baseline = tmp_path / 'ref.json'
    out = str(tmp_path / 'out')
    assert main(['verify', '--save-baseline', str(baseline), '--out', out] + FAST) == 0
    saved = json.loads(baseline.read_text())
    assert saved['values']['negative_count'] == 1
    assert saved['constants']['tol_eig'] == 1e-6

    assert main(['verify', '--baseline', str(baseline), '--out', out] + FAST) == 0
    report = read_frame(tmp_path / 'out' / 'verify_report.csv')
    assert report['ok'].all()

    assert main(['verify', '--baseline', str(baseline), '--tol-eig', '2e-6', '--out', out] + FAST) == 3
    report = read_frame(tmp_path / 'out' / 'verify_report.csv')
    assert not report['ok'].all()


def test_verify_without_baseline_exits_1(tmp_path):
    assert main(['verify', '--out', str(tmp_path)]) == 1
