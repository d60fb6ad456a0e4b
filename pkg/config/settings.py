# config/settings.py
# Grid, solver and tolerance defaults plus the run configuration
"""
config/settings.py
==================
Central defaults for the DP soliton lab and the RunConfig used by main.py.

Config files are flat key=value text:

    # reference wave
    c = 1
    k = 0.25
    tol_eig = 1e-6

Lists (sweep ranges) are comma separated: ``c = 0.6, 1, 2, 5``.
Command-line flags override file values.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Dict, List, Optional

from core.errors import ValidationError


# ===== GRID & SOLVER DEFAULTS =====

PROFILE_POINTS = 4097           # odd, so xi = 0 is a grid point
TAIL_TOL = 1e-12                # e^{-nu L} target when choosing L
CROSSOVER = 0.5                 # phi / phi_minus where the log-tail phase takes over
PROFILE_RTOL = 1e-13
PROFILE_ATOL = 1e-14

DELTA_C_FACTOR = 1e-4           # delta_c = factor * c
RICHARDSON_TOL = 1e-3

ODE_TOL = 1e-10                 # Prufer angle integration
SHOOT_MAX_STEP = 0.25
EIGEN_MARGIN = 0.05             # scan discrete eigenvalues up to (1 - margin) * band edge
BVP_TOL = 1e-10

MATRIX_POINTS = 1024
PERIODIC_POINTS = 512
JLC_POINTS = 512

DT = 0.01
LINEAR_DT = 0.05
CFL_CONSTANT = 0.5
BLOWUP_FACTOR = 1e3

WORKERS = 1
SEED = 20240101

# ===== TOLERANCES =====

TOLERANCES: Dict[str, float] = {
    'tol_profile': 1e-8,
    'tol_eig': 1e-6,
    'tol_identity': 1e-3,
    'drift_budget': 1e-8,
    'tol_residual': 1e-7,
}

COMMANDS = ('profile', 'functionals', 'spectrum', 'index', 'evolve', 'sweep', 'verify')

# Reference sweep grid
SWEEP_C = [0.6, 1.0, 2.0, 5.0]
SWEEP_K = [0.05, 0.1, 0.25]

# Keys accepted in config files, with their coercion
_FILE_KEYS = {
    'c': 'list', 'k': 'list',
    'L': 'float', 'n': 'int', 'period': 'float',
    'n_periodic': 'int', 'n_matrix': 'int',
    'dt': 'float', 'T': 'float',
    'tol_profile': 'float', 'tol_eig': 'float', 'tol_identity': 'float',
    'drift_budget': 'float', 'tol_residual': 'float',
    'out': 'str', 'baseline': 'str', 'workers': 'int', 'seed': 'int',
}

# Keys that do not change numerical results
_HASH_EXCLUDED = ('out_dir', 'baseline', 'save_baseline', 'config_path', 'workers', 'verbose')


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def parse_list(text: str) -> List[float]:
    """Parse '0.6, 1, 2' into floats. Empty text yields an empty list."""
    items = [item.strip() for item in str(text).split(',')]
    try:
        return [float(item) for item in items if item]
    except ValueError as exc:
        raise ValidationError(f"bad numeric list '{text}': {exc}") from exc


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Read a flat key=value config file.

    Args:
        path: File path

    Returns:
        Dict of coerced values keyed by config-file key names.
    """
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"config file not found: {path}")

    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(p.read_text(encoding='utf-8').splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ValidationError(f"{path}:{lineno}: expected key=value, got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split('=', 1))
        kind = _FILE_KEYS.get(key)
        if kind is None:
            raise ValidationError(f"{path}:{lineno}: unknown key '{key}'")
        try:
            if kind == 'list':
                values[key] = parse_list(value)
            elif kind == 'int':
                values[key] = int(value)
            elif kind == 'float':
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: bad value for '{key}': {exc}") from exc
    return values


@dataclass
class RunConfig:
    """Fully resolved configuration of one CLI invocation."""

    command: str
    c_values: List[float] = field(default_factory=lambda: [1.0])
    k_values: List[float] = field(default_factory=lambda: [0.25])
    half_width: Optional[float] = None
    n: int = PROFILE_POINTS
    period: Optional[float] = None
    n_periodic: int = PERIODIC_POINTS
    n_matrix: int = MATRIX_POINTS
    dt: float = DT
    t_final: Optional[float] = None
    tol_profile: float = TOLERANCES['tol_profile']
    tol_eig: float = TOLERANCES['tol_eig']
    tol_identity: float = TOLERANCES['tol_identity']
    drift_budget: float = TOLERANCES['drift_budget']
    tol_residual: float = TOLERANCES['tol_residual']
    out_dir: str = 'output'
    baseline: Optional[str] = None
    save_baseline: Optional[str] = None
    config_path: Optional[str] = None
    workers: int = WORKERS
    seed: int = SEED
    verbose: bool = False

    @classmethod
    def from_sources(cls, command: str, file_values: Optional[Dict[str, Any]] = None,
                     flags: Optional[Dict[str, Any]] = None) -> 'RunConfig':
        """
        Merge defaults, config-file values and CLI flags (flags win).

        Args:
            command: One of COMMANDS
            file_values: Output of load_config_file (file key names)
            flags: CLI values already mapped to RunConfig field names;
                   None entries mean "not given"
        """
        if command not in COMMANDS:
            raise ValidationError(f"unknown command '{command}'")

        cfg = cls(command=command)
        if command == 'sweep':
            cfg.c_values = list(SWEEP_C)
            cfg.k_values = list(SWEEP_K)

        rename = {'c': 'c_values', 'k': 'k_values', 'L': 'half_width',
                  'T': 't_final', 'out': 'out_dir'}
        for key, value in (file_values or {}).items():
            setattr(cfg, rename.get(key, key), value)
        for key, value in (flags or {}).items():
            if value is not None:
                setattr(cfg, key, value)
        cfg.validate()
        return cfg

    @property
    def tolerances(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in TOLERANCES}

    def validate(self) -> None:
        """Check every numeric field against the preconditions of the modules it feeds."""
        from core.soliton import validate_params

        if not self.c_values or not self.k_values:
            raise ValidationError("empty range: c and k need at least one value each")
        if self.command != 'sweep' and (len(self.c_values) != 1 or len(self.k_values) != 1):
            raise ValidationError(f"'{self.command}' takes a single c and k (use sweep for ranges)")
        for c in self.c_values:
            for k in self.k_values:
                validate_params(c, k)

        if self.n < 5 or self.n % 2 == 0:
            raise ValidationError(f"n must be odd and >= 5, got {self.n}")
        if not _is_power_of_two(self.n - 1):
            raise ValidationError(f"n - 1 must be a power of two, got n={self.n}")
        for name in ('n_periodic', 'n_matrix'):
            value = getattr(self, name)
            if not _is_power_of_two(value) or value < 16:
                raise ValidationError(f"{name} must be a power of two >= 16, got {value}")
        if self.half_width is not None and not (math.isfinite(self.half_width) and self.half_width > 0):
            raise ValidationError(f"L>0 violated: L={self.half_width}")
        if self.period is not None:
            if not (math.isfinite(self.period) and self.period > 0):
                raise ValidationError(f"period>0 violated: period={self.period}")
            if self.half_width is not None and self.period < 2 * self.half_width:
                raise ValidationError(f"period>=2L violated: period={self.period}, L={self.half_width}")
        if not math.isfinite(self.dt) or self.dt == 0:
            raise ValidationError(f"dt must be finite and nonzero, got {self.dt}")
        if self.t_final is not None and not (math.isfinite(self.t_final) and self.t_final > 0):
            raise ValidationError(f"T>0 violated: T={self.t_final}")
        for name, value in self.tolerances.items():
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be positive, got {value}")
        if self.workers < 1:
            raise ValidationError(f"workers>=1 violated: workers={self.workers}")

    def echo(self) -> Dict[str, Any]:
        """Every resolved key, defaults included."""
        return dict(sorted(asdict(self).items()))

    def config_hash(self) -> str:
        """First 12 hex digits of the SHA-256 of the numerically relevant echo."""
        payload = {k: v for k, v in self.echo().items() if k not in _HASH_EXCLUDED}
        text = json.dumps(payload, sort_keys=True, default=str)
        return hashlib.sha256(text.encode('utf-8')).hexdigest()[:12]
