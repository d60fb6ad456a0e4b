# tests/conftest.py
# Shared fixtures: the reference wave (c, k) = (1, 0.25) and its spectrum.

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core.prufer import compute_spectrum
from core.soliton import WaveParams, compute_profile, dphi_dc


@pytest.fixture(scope='session')
def ref_params():
    return WaveParams(1.0, 0.25)


@pytest.fixture(scope='session')
def ref_profile(ref_params):
    return compute_profile(ref_params)


@pytest.fixture(scope='session')
def ref_spectrum(ref_profile):
    return compute_spectrum(ref_profile)


@pytest.fixture(scope='session')
def ref_dcphi(ref_params, ref_profile):
    return dphi_dc(ref_params, grid=ref_profile.grid)
