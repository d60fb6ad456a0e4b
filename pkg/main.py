"""
DP SOLITON LAB: Smooth Solitary Wave Stability
==============================================
Entry point for the Degasperis-Procesi soliton lab.

Usage:
    python main.py profile --c 1 --k 0.25
    python main.py functionals --c 1 --k 0.25
    python main.py spectrum --c 1 --k 0.25
    python main.py index --c 1 --k 0.25
    python main.py evolve --c 1 --k 0.25 --T 400
    python main.py sweep --c 0.6,1,2,5 --k 0.05,0.1,0.25 --workers 4
    python main.py verify --save-baseline ref.json
    python main.py verify --baseline ref.json

Exit codes:
    0  success
    1  validation failure
    2  numerical failure
    3  baseline mismatch (verify)
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from config.settings import COMMANDS, RunConfig, load_config_file, parse_list
from core.artifacts import ArtifactStore, SnapshotWriter, artifact_stem
from core.dp_math import DPMath
from core.errors import BlowUpError, DPLabError, ValidationError
from core.evolution import (
    EvolutionRun,
    evolve,
    evolve_linearized,
    growth_rate_fit,
    orbit_distance,
    periodic_dphi_dc,
    periodic_soliton,
    project_secular,
    random_smooth_field,
)
from core.helmholtz import LineField
from core.prufer import compute_spectrum, prufer_shoot, qe_negativity_check
from core.soliton import SymmetricGrid, WaveParams, compute_profile, xi_of_phi
from core.stability_index import assess_profile
from strategies.stability_scanner import StabilityScanner
from ui.terminal import (
    print_angle_scan,
    print_footer,
    print_frame,
    print_header,
    print_index_report,
    print_key_values,
    print_progress,
    print_scan_complete,
    print_spectrum,
    print_sweep_footer,
    print_sweep_table,
    print_verify_table,
    setup_logging,
)

logger = logging.getLogger('dplab')

LINEAR_T = 200.0


class LabArgumentParser(argparse.ArgumentParser):
    """Argument errors are validation failures (exit 1)."""

    def error(self, message):
        raise ValidationError(message)


# ===== COMMANDS =====

def run_profile(cfg: RunConfig, store: ArtifactStore, scanner: StabilityScanner):
    params = WaveParams(cfg.c_values[0], cfg.k_values[0])
    profile = scanner.build_profile(params)
    stem = artifact_stem('profile', params.c, params.k)

    meta = profile.metadata()
    meta['phi_minus'] = params.phi_minus
    meta['crest_defect'] = abs(profile.values[profile.grid.center] - params.phi_minus)
    meta['traveling_residual'] = DPMath.traveling_residual(profile) / profile.l2_norm()
    meta['monotone'] = profile.is_monotone()
    half = 0.5 * params.phi_minus
    meta['xi_at_half_height'] = xi_of_phi(half, params)

    store.write_frame(f"{stem}.csv", profile.to_frame())
    store.write_json(f"{stem}.json", meta)
    print_key_values(f"PROFILE {params.label()}", meta)


def run_functionals(cfg: RunConfig, store: ArtifactStore, scanner: StabilityScanner):
    params = WaveParams(cfg.c_values[0], cfg.k_values[0])
    c, k = params.c, params.k
    profile = scanner.build_profile(params)
    phi = DPMath.profile_field(profile)
    triple = DPMath.conserved_triple(phi, k)
    direction = LineField(profile.grid, profile.derivative, profile.tail_rate)

    values = {
        'M': triple.M,
        'H': triple.H,
        'S': triple.S,
        'M_closed': DPMath.momentum_closed_form(c, k),
        'S_closed': DPMath.S_closed_form(c, k),
        'S_reduced': DPMath.S_quadrature_reduced(profile),
        'S_z_substitution': DPMath.S_z_substitution(c, k),
        'dSdc_closed': DPMath.dSdc_closed_form(c, k),
        'dSdc_finite_difference': DPMath.dSdc_finite_difference(c, k),
        'Q_c': DPMath.lagrangian_Q(phi, c, k),
        'dQ_c(phi)[phi_xi]': DPMath.gateaux_derivative(phi, direction, c, k),
        'traveling_residual': DPMath.traveling_residual(profile),
    }
    stem = artifact_stem('functionals', c, k)
    store.write_json(f"{stem}.json", values)
    store.write_frame(f"{stem}.csv", pd.DataFrame({'quantity': list(values), 'value': list(values.values())}))
    print_key_values(f"CONSERVED FUNCTIONALS {params.label()}", values, floatfmt='.12g')


def run_spectrum(cfg: RunConfig, store: ArtifactStore, scanner: StabilityScanner):
    params = WaveParams(cfg.c_values[0], cfg.k_values[0])
    profile = scanner.build_profile(params)
    report = compute_spectrum(profile, tol_eig=cfg.tol_eig, n_matrix=cfg.n_matrix)
    qe = qe_negativity_check(profile)
    stem = artifact_stem('spectrum', params.c, params.k)

    payload = report.to_json()
    payload['qe'] = {'max_on_positive_side': qe.max_on_positive_side, 'odd_defect': qe.odd_defect,
                     'sign_changes': qe.sign_changes, 'bvp_defect': qe.bvp_defect,
                     'negative': qe.negative}
    store.write_json(f"{stem}.json", payload)
    store.write_frame(f"{stem}_matrix.csv", report.matrix.to_frame())
    store.write_frame(f"{stem}_trace.csv", prufer_shoot(report.lambda_star, profile).to_frame())

    rows = scanner.inspect_angle_scan(params, profile=profile)
    store.write_frame(f"{stem}_angles.csv", pd.DataFrame(rows))

    print_spectrum(payload)
    print_key_values('Q_E NEGATIVITY', payload['qe'])
    print_angle_scan(params.label(), rows)


def run_index(cfg: RunConfig, store: ArtifactStore, scanner: StabilityScanner):
    params = WaveParams(cfg.c_values[0], cfg.k_values[0])
    profile = scanner.build_profile(params)
    report = assess_profile(profile, tolerances=cfg.tolerances, n_matrix=cfg.n_matrix)
    store.write_json(f"{artifact_stem('index', params.c, params.k)}.json", report.to_json())
    print_index_report(report.to_json())


def run_evolve(cfg: RunConfig, store: ArtifactStore, scanner: StabilityScanner):
    params = WaveParams(cfg.c_values[0], cfg.k_values[0])
    base = scanner.grid_for(params)
    half_width = 0.5 * cfg.period if cfg.period is not None else base.half_width
    profile = compute_profile(params, SymmetricGrid(half_width, cfg.n), cfg.tol_profile)
    circle, u0 = periodic_soliton(profile, cfg.n_periodic)
    t_final = cfg.t_final if cfg.t_final is not None else 5.0 * u0.period / params.c
    stem = artifact_stem('evolve', params.c, params.k)

    run = EvolutionRun(u0, params, dt=cfg.dt, t_final=t_final,
                       snapshot_stride=max(int(round(t_final / abs(cfg.dt))) // 10, 1),
                       record_stride=max(int(round(0.1 / abs(cfg.dt))), 1))
    with SnapshotWriter(store, stem, u0.points) as writer:
        result = evolve(run, on_snapshot=writer)
    distance, shift = orbit_distance(result.final, u0)

    v0 = random_smooth_field(u0.n, u0.period, seed=cfg.seed)
    v0 = project_secular(v0, circle, periodic_dphi_dc(circle))
    linear = evolve_linearized(v0, circle, t_final=LINEAR_T)
    fit = growth_rate_fit(linear.times, linear.norms)

    manifest = result.manifest()
    manifest.update({
        'orbit_distance': distance,
        'orbit_shift': shift,
        'wrapped_tail': float(u0.samples[0] / u0.samples.max()),
        'drift_budget': cfg.drift_budget,
        'drift_within_budget': result.max_drift <= cfg.drift_budget,
        'growth_fit': fit.as_dict(),
        'linear_T': LINEAR_T,
        'seed': cfg.seed,
        'snapshot_files': writer.index,
    })
    store.write_frame(f"{stem}_conserved.csv", result.conserved)
    store.write_frame(f"{stem}_linear.csv", linear.to_frame())
    store.write_json(f"{stem}.json", manifest)

    print_key_values(f"EVOLUTION {params.label()}", {
        'status': result.status,
        't reached': result.t_reached,
        'drift M': result.drift['M'],
        'drift H': result.drift['H'],
        'drift S': result.drift['S'],
        'orbit distance': distance,
        'orbit shift': shift,
        'growth rate sigma': fit.sigma,
        'sigma stderr': fit.stderr,
    })
    if result.status == 'blowup':
        raise BlowUpError(f"evolution blew up at t={result.t_reached:.4f}; partial output written")
    if not manifest['drift_within_budget']:
        logger.warning("conserved drift %.2e exceeds budget %.1e", result.max_drift, cfg.drift_budget)


def _range_stem(command: str, c_values: List[float], k_values: List[float]) -> str:
    def span(values):
        lo, hi = min(values), max(values)
        return f"{lo:g}" if lo == hi else f"{lo:g}-{hi:g}"
    return f"{command}_c{span(c_values)}_k{span(k_values)}"


def run_sweep(cfg: RunConfig, store: ArtifactStore, scanner: StabilityScanner):
    frame = scanner.scan(progress=print_progress)
    print_scan_complete()
    print()
    continuity = scanner.continuity_check(frame)
    stem = _range_stem('sweep', cfg.c_values, cfg.k_values)
    store.write_frame(f"{stem}.csv", frame)
    store.write_json(f"{stem}.json", {
        'points': frame.to_dict('records'),
        'continuity': continuity.to_dict('records'),
        'stable_count': int((frame['verdict'] == 'SpectrallyStable').sum()),
    })
    print_sweep_table(frame)
    print_frame('LAMBDA_STAR CONTINUITY ALONG c', continuity)
    print_sweep_footer(frame, continuity)


def run_verify(cfg: RunConfig, store: ArtifactStore, scanner: StabilityScanner):
    if not cfg.baseline and not cfg.save_baseline:
        raise ValidationError("verify needs --baseline and/or --save-baseline")
    if cfg.save_baseline:
        payload = scanner.save_baseline()
        saved = ArtifactStore(str(Path(cfg.save_baseline).parent), store.config_hash)
        saved.write_json(Path(cfg.save_baseline).name, payload)
        store.written.extend(saved.written)
        print_key_values('BASELINE SAVED', payload['values'])
    if cfg.baseline:
        try:
            frame = scanner.verify(cfg.baseline)
        except DPLabError as exc:
            report = getattr(exc, 'report', None)
            if report is not None:
                store.write_frame('verify_report.csv', report)
                print_verify_table(report)
            raise
        store.write_frame('verify_report.csv', frame)
        print_verify_table(frame)


DISPATCH = {
    'profile': run_profile,
    'functionals': run_functionals,
    'spectrum': run_spectrum,
    'index': run_index,
    'evolve': run_evolve,
    'sweep': run_sweep,
    'verify': run_verify,
}


# ===== ARGUMENTS =====

def build_parser() -> argparse.ArgumentParser:
    common = LabArgumentParser(add_help=False)
    wave = common.add_argument_group('wave & grid')
    wave.add_argument('--c', type=parse_list, dest='c_values', help='Wave speed(s), comma separated')
    wave.add_argument('--k', type=parse_list, dest='k_values', help='Dispersion parameter(s)')
    wave.add_argument('--L', type=float, dest='half_width', help='Half-width of the line grid')
    wave.add_argument('--n', type=int, help='Line grid points (odd, n-1 a power of two)')
    wave.add_argument('--period', type=float, help='Evolution period (>= 2L)')
    wave.add_argument('--n-periodic', type=int, dest='n_periodic', help='Evolution grid size')
    wave.add_argument('--n-matrix', type=int, dest='n_matrix', help='Matrix oracle size')

    stepping = common.add_argument_group('time stepping')
    stepping.add_argument('--dt', type=float, help='Time step (negative runs backward)')
    stepping.add_argument('--T', type=float, dest='t_final', help='Final time')

    tol = common.add_argument_group('tolerances')
    tol.add_argument('--tol-profile', type=float, dest='tol_profile')
    tol.add_argument('--tol-eig', type=float, dest='tol_eig')
    tol.add_argument('--tol-identity', type=float, dest='tol_identity')
    tol.add_argument('--drift-budget', type=float, dest='drift_budget')
    tol.add_argument('--tol-residual', type=float, dest='tol_residual')

    io = common.add_argument_group('output & execution')
    io.add_argument('--out', dest='out_dir', help='Output directory')
    io.add_argument('--baseline', help='Baseline JSON to verify against')
    io.add_argument('--save-baseline', dest='save_baseline', help='Write a baseline JSON')
    io.add_argument('--config', dest='config_path', help='key=value config file')
    io.add_argument('--workers', type=int, help='Worker processes for sweeps')
    io.add_argument('--seed', type=int, help='Seed for random test vectors')
    io.add_argument('--verbose', '-v', action='store_true', default=None, help='Debug logging')

    parser = LabArgumentParser(
        description="DP Soliton Lab: spectral stability of smooth Degasperis-Procesi solitons",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py profile --c 1 --k 0.25
  python main.py spectrum --c 1 --k 0.25
  python main.py sweep --c 0.6,1,2,5 --k 0.05,0.1,0.25
  python main.py verify --baseline ref.json
        """
    )
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True
    helps = {
        'profile': 'Soliton profile on the line grid',
        'functionals': 'M, H, S and the closed forms',
        'spectrum': 'Spectrum of L_c by shooting and matrix oracle',
        'index': 'Index verdict checklist',
        'evolve': 'Periodic DP evolution and linearized growth',
        'sweep': 'Verdicts over a (c, k) grid',
        'verify': 'Save or compare a regression baseline',
    }
    for command in COMMANDS:
        sub.add_parser(command, parents=[common], help=helps[command])
    return parser


def resolve_config(argv: Optional[List[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    flags = {key: value for key, value in vars(args).items() if key != 'command'}
    file_values = load_config_file(args.config_path) if args.config_path else None
    return RunConfig.from_sources(args.command, file_values, flags)


def main(argv: Optional[List[str]] = None) -> int:
    """Parse, validate, dispatch. Returns the process exit code."""
    cfg = None
    store = None
    try:
        cfg = resolve_config(argv)
        setup_logging(cfg.verbose)
        store = ArtifactStore(cfg.out_dir, cfg.config_hash())
        stem = (_range_stem(cfg.command, cfg.c_values, cfg.k_values) if cfg.command == 'sweep'
                else artifact_stem(cfg.command, cfg.c_values[0], cfg.k_values[0]))
        store.write_json(f"{stem}_config.json", cfg.echo())

        print_header(cfg.command, cfg.config_hash())
        DISPATCH[cfg.command](cfg, store, StabilityScanner(cfg))
        print_footer('SUCCESS', store.written, 0)
        return 0
    except DPLabError as exc:
        if cfg is None:
            setup_logging(False)
        logger.error("%s", exc)
        print_footer(type(exc).__name__, store.written if store else [], exc.exit_code)
        return exc.exit_code


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\n  [INTERRUPTED] Run cancelled by user.")
        sys.exit(0)
    except Exception as e:
        print(f"\n\n  [FATAL ERROR] {e}")
        import traceback
        traceback.print_exc()
        sys.exit(2)
