"""
ui/terminal.py
==============
Terminal UI for the DP Soliton Lab

Features:
- Colored output using colorama
- tabulate tables for profiles, functionals, spectra and sweeps
- Verdict color coding (stable / inconclusive / failed)
- ASCII bar chart of the Prufer angle theta(0, lambda)
- Logging handler with [INFO] / [WARN] / [ERROR] tags
"""

import logging
import math
import sys
from typing import Dict, Iterable, List, Optional

import pandas as pd
from tabulate import tabulate

try:
    from colorama import Fore, Style, init
    init(autoreset=True)
    COLORAMA_AVAILABLE = True
except ImportError:
    COLORAMA_AVAILABLE = False
    class Fore:
        CYAN = GREEN = RED = YELLOW = WHITE = MAGENTA = ""
        LIGHTBLACK_EX = LIGHTGREEN_EX = LIGHTCYAN_EX = ""
    class Style:
        BRIGHT = DIM = RESET_ALL = ""


WIDTH = 80


# ===== LOGGING =====

class TaggedFormatter(logging.Formatter):
    """Level tags in the banner style, colored by severity."""

    TAGS = {
        logging.DEBUG: (Style.DIM, '[DEBUG]'),
        logging.INFO: (Fore.CYAN, '[INFO]'),
        logging.WARNING: (Fore.YELLOW, '[WARN]'),
        logging.ERROR: (Fore.RED, '[ERROR]'),
        logging.CRITICAL: (Fore.RED + Style.BRIGHT, '[FATAL]'),
    }

    def format(self, record: logging.LogRecord) -> str:
        color, tag = self.TAGS.get(record.levelno, ('', f'[{record.levelname}]'))
        message = super().format(record)
        return f"{color}  {tag} {message}{Style.RESET_ALL}"


def setup_logging(verbose: bool = False) -> None:
    """Route library logging to stderr; DEBUG when verbose."""
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(TaggedFormatter('%(name)s: %(message)s' if verbose else '%(message)s'))
    root = logging.getLogger()
    for existing in list(root.handlers):
        if isinstance(existing.formatter, TaggedFormatter):
            root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


# ===== BANNERS =====

def print_header(command: str, config_hash: str):
    """Print the run header banner."""
    print()
    print(f"{Fore.CYAN}{Style.BRIGHT}{'=' * WIDTH}")
    print(f"{Fore.CYAN}{Style.BRIGHT}       DP SOLITON LAB: SMOOTH SOLITARY WAVE STABILITY")
    print(f"{Fore.CYAN}{Style.BRIGHT}{'=' * WIDTH}")
    print()
    print(f"{Fore.WHITE}  Command: {Fore.YELLOW}{command}{Fore.WHITE} | Config: {Fore.YELLOW}{config_hash}")
    print()
    print(f"{Fore.CYAN}{'-' * WIDTH}")
    print()


def print_section(title: str):
    print()
    print(f"{Fore.WHITE}{Style.BRIGHT}  {title}")
    print(f"{Fore.WHITE}  {'-' * (WIDTH - 4)}")


def print_key_values(title: str, values: Dict, floatfmt: str = '.10g'):
    """Two-column table of scalar results."""
    print_section(title)
    rows = [(key, value) for key, value in values.items() if not isinstance(value, (list, dict))]
    print(tabulate(rows, headers=['quantity', 'value'], tablefmt='github', floatfmt=floatfmt))


def print_frame(title: str, frame: pd.DataFrame, floatfmt: str = '.8g', max_rows: int = 30):
    print_section(title)
    shown = frame if len(frame) <= max_rows else frame.head(max_rows)
    print(tabulate(shown, headers='keys', tablefmt='github', showindex=False, floatfmt=floatfmt))
    if len(frame) > max_rows:
        print(f"{Style.DIM}  ... {len(frame) - max_rows} more rows in the CSV")


def print_footer(status: str, written: Iterable, exit_code: int = 0):
    """Print run summary footer."""
    files = list(written)
    color = Fore.GREEN if exit_code == 0 else (Fore.YELLOW if exit_code == 3 else Fore.RED)
    print()
    print(f"{Fore.CYAN}{'=' * WIDTH}")
    print(f"{Fore.WHITE}  RUN COMPLETE: {color}{Style.BRIGHT}{status}")
    print(f"{Fore.WHITE}  Files written: {Fore.YELLOW}{len(files)}")
    for path in files[:12]:
        print(f"{Style.DIM}    {path}")
    if len(files) > 12:
        print(f"{Style.DIM}    ... and {len(files) - 12} more")
    print(f"{Fore.CYAN}{'=' * WIDTH}")
    print()


# ===== SPECTRUM =====

def print_spectrum(report: Dict):
    """Eigenvalue table of a SpectralReport payload."""
    print_key_values('ESSENTIAL SPECTRUM & COUNTS', {
        'essential band': f"[{report['essential'][0]:.8g}, {report['essential'][1]:.8g}]",
        'lambda_star': report['lambda_star'],
        'negative count': report['negative_count'],
        'theta(0, 0)': report['theta_at_zero_lambda_zero'],
        'bisection iterations': report['bisection_iterations'],
        'certified below lambda_1': report['certified_below_lambda_1'],
    })
    rows = [(e['lambda'], e['zero_count'], e['parity'], e['multiplicity'], e['residual'],
             f"{Fore.YELLOW}spurious{Style.RESET_ALL}" if e['spurious'] else 'ok')
            for e in report['eigenvalues']]
    print_section('DISCRETE EIGENVALUES (SHOOTING)')
    print(tabulate(rows, headers=['lambda', 'zeros', 'parity', 'mult', 'residual', 'status'],
                   tablefmt='github', floatfmt='.10g'))
    if 'matrix' in report:
        print_key_values('MATRIX ORACLE', report['matrix'])


def print_angle_scan(label: str, rows: List[Dict]):
    """
    Bar chart of theta(0, lambda) over the scan grid.

    Bars are proportional to |theta|; the interval where a level B_k is
    crossed is marked.
    """
    if not rows:
        print(f"{Fore.YELLOW}  No angle data for {label}.")
        return

    max_abs = max(max(abs(r['theta0']) for r in rows), 1e-12)
    bar_max_width = 35

    print()
    print(f"{Fore.CYAN}{Style.BRIGHT}{'=' * 75}")
    print(f"{Fore.CYAN}{Style.BRIGHT}  PRUFER ANGLE INSPECTION: {label}")
    print(f"{Fore.CYAN}{Style.BRIGHT}{'=' * 75}")
    print()
    print(f"{Fore.WHITE}{Style.BRIGHT}  {'lambda':<12} {'theta0':<11} {'B_k':<4} {'Chart':<40}")
    print(f"{Fore.WHITE}  {'-' * 70}")

    for r in rows:
        theta = r['theta0']
        bar_width = max(int(abs(theta) / max_abs * bar_max_width), 1)
        if r['crossed'] is not None:
            bar = '█' * bar_width + f" << B_{r['crossed']}"
            color = f"{Fore.GREEN}{Style.BRIGHT}"
        elif theta > 0:
            bar = '░' * bar_width
            color = f"{Fore.WHITE}{Style.DIM}"
        elif r['level'] % 2 == 0:
            bar = '█' * bar_width
            color = f"{Fore.CYAN}"
        else:
            bar = '▓' * bar_width
            color = f"{Fore.MAGENTA}"
        row = f"  {r['lambda']:<12.6f} {theta:<+11.5f} {r['level']:<4} {bar}"
        print(f"{color}{row}{Style.RESET_ALL}")

    print(f"{Fore.WHITE}  {'-' * 70}")
    crossings = [r['crossed'] for r in rows if r['crossed'] is not None]
    print()
    print(f"{Fore.WHITE}  Levels crossed: {Fore.GREEN}{', '.join(f'B_{k}' for k in crossings) or 'none'}")
    print(f"{Fore.WHITE}  theta(0) range: {Fore.YELLOW}{min(r['theta0'] for r in rows):+.4f} "
          f"to {max(r['theta0'] for r in rows):+.4f} (units of pi/2: "
          f"{min(r['theta0'] for r in rows) / (math.pi / 2):+.3f})")
    print()


# ===== INDEX & SWEEP =====

def _verdict_color(verdict: str, status: str = 'ok') -> str:
    if status != 'ok':
        return f"{Fore.RED}"
    if verdict == 'SpectrallyStable':
        return f"{Fore.GREEN}{Style.BRIGHT}"
    return f"{Fore.YELLOW}"


def print_index_report(report: Dict):
    color = _verdict_color(report['verdict'])
    print_key_values('INDEX CHECKLIST', {key: value for key, value in report.items()
                                         if key not in ('verdict', 'failing_clauses')})
    print()
    print(f"{Fore.WHITE}  Verdict: {color}{report['verdict']}")
    if report.get('failing_clauses'):
        print(f"{Fore.WHITE}  Failing clauses: {Fore.RED}{', '.join(report['failing_clauses'])}")


def print_sweep_table(frame: pd.DataFrame):
    """
    Colour-coded sweep table.

    Columns: c | k | n_minus | lambda_star | quad_form | defect | verdict
    """
    if frame.empty:
        print(f"{Fore.YELLOW}  No results to display.")
        return

    header = (f"{'c':>6} {'k':>6} {'n-':>3} {'lambda_star':>14} {'quad_form':>12} "
              f"{'defect':>10} {'verdict':<18}")
    print(f"{Fore.WHITE}{Style.BRIGHT}{header}")
    print(f"{Fore.WHITE}{'-' * WIDTH}")
    for r in frame.to_dict('records'):
        status = r.get('status', 'ok')
        color = _verdict_color(r.get('verdict', 'Inconclusive'), status)
        if status != 'ok':
            row = f"{r['c']:>6g} {r['k']:>6g} {status:>3} {r.get('message', '')[:52]}"
        else:
            n_minus = r.get('n_minus')
            row = (f"{r['c']:>6g} {r['k']:>6g} {str(n_minus):>3} {r['lambda_star']:>14.9f} "
                   f"{r['quad_form']:>12.7f} {r['defect']:>10.2e} {r['verdict']:<18}")
        print(f"{color}{row}{Style.RESET_ALL}")
    print(f"{Fore.WHITE}{'-' * WIDTH}")


def print_sweep_footer(frame: pd.DataFrame, continuity: Optional[pd.DataFrame] = None):
    total = len(frame)
    stable = int((frame['verdict'] == 'SpectrallyStable').sum())
    failed = int((frame['status'] != 'ok').sum())
    print()
    print(f"{Fore.WHITE}  Points: {Fore.YELLOW}{total}{Fore.WHITE} | "
          f"SpectrallyStable: {Fore.GREEN}{Style.BRIGHT}{stable}{Style.RESET_ALL}{Fore.WHITE} | "
          f"Failed: {Fore.RED}{failed}")
    if continuity is not None and not continuity.empty:
        jumps = continuity.loc[~continuity['continuous'], 'k'].tolist()
        if jumps:
            print(f"{Fore.RED}  lambda_star jumps along c at k = {', '.join(f'{k:g}' for k in jumps)}")
        else:
            print(f"{Fore.WHITE}  lambda_star continuous along c {Fore.GREEN}(all k)")


def print_verify_table(frame: pd.DataFrame):
    print_section('BASELINE COMPARISON')
    for r in frame.to_dict('records'):
        color = Fore.GREEN if r['ok'] else f"{Fore.RED}{Style.BRIGHT}"
        mark = 'OK  ' if r['ok'] else 'FAIL'
        print(f"{color}  {mark} {r['quantity']:<32} expected {r['expected']!s:<24} actual {r['actual']!s}")


def print_progress(c: float, k: float, current: int, total: int):
    """Print progress indicator (overwrites line)."""
    progress = f"  Scanning: c={c:<6g} k={k:<6g} [{current}/{total}]"
    print(f"{Fore.YELLOW}{progress}", end='\r', flush=True)


def print_scan_complete():
    """Print completion message after progress."""
    print(f"{Fore.GREEN}  Sweep complete!{' ' * 50}")
