"""
Command-line routes blueprint: ``flask sim <command>``.
"""
import functools
import os
import sys
from typing import Dict, List, Optional, Sequence

import click
import pandas as pd
from flask import Blueprint, current_app

from ..errors import SimulationError
from ..models.circuit import Circuit, LocationKind, count_locations, serialize
from ..services import SimulationService
from ..services.analysis_service import RiTable
from ..services.builder_service import GADGET_KINDS
from ..services.decoder_service import DECODER_MODES
from ..utils.run_utils import RunManifest, hash_templates, log_grid, manifest_path

sim_bp = Blueprint('sim', __name__, cli_group='sim')

BUILD_CHOICES = ('exrec-cnot', 'memory') + GADGET_KINDS
CHECKPOINT_COLUMNS = ['level', 'p', 'seed', 'chunk_start', 'chunk_stop', 'trials', 'failures', 'aborted']

EXIT_RUNTIME = 3


def handle_errors(f):
    """Map library errors to exit codes: bad input 2, simulation failures 3."""
    @functools.wraps(f)
    def decorated(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ValueError as e:
            raise click.UsageError(str(e))
        except SimulationError as e:
            current_app.logger.error('%s failed: %s', f.__name__, e)
            click.echo(f'error: {e}', err=True)
            sys.exit(EXIT_RUNTIME)
    return decorated


def decoder_option(f):
    return click.option('--decoder', type=click.Choice(DECODER_MODES), default=None,
                        help='Decoder mode (defaults to QEC_DECODER_MODE).')(f)


def workers_option(f):
    return click.option('--workers', type=click.IntRange(min=1), default=None,
                        help='Worker processes (defaults to QEC_WORKERS).')(f)


def _simulation(decoder: Optional[str]) -> SimulationService:
    sim = current_app.simulation
    if decoder is None or decoder == sim.decoder_mode:
        return sim
    return SimulationService(decoder_mode=decoder, workers=sim.workers, ec_after_memory=sim.ec_after_memory,
                             max_level=sim.max_level, max_locations=sim.max_locations,
                             chunk_size=sim.chunk_size)


def _manifest(command: str, seed: Optional[int] = None, workers: int = 1, **settings) -> RunManifest:
    builder = current_app.builder
    snapshot = {k: current_app.config.get(k) for k in (
        'QEC_DECODER_MODE', 'QEC_EC_AFTER_MEMORY', 'QEC_MAX_LEVEL', 'QEC_MAX_LOCATIONS',
        'QEC_CHUNK_SIZE', 'QEC_TAIL_WARNING_FRACTION', 'QEC_WILSON_MIN_FAILURES')}
    snapshot.update(settings)
    hashes = hash_templates((name, serialize(t.circuit)) for name, t in builder.templates.items())
    return RunManifest(command, snapshot, seed, workers, hashes)


def _write_manifest(manifest: RunManifest, out: Optional[str]) -> str:
    if out:
        path = manifest_path(out)
    else:
        path = os.path.join(current_app.config.get('QEC_RESULTS_DIR', 'results'),
                            f'{manifest.command}.manifest.json')
    return manifest.write(path)


def _data_swaps(circuit: Circuit) -> int:
    """SWAPs whose two positions both hold data in the circuit's layout."""
    def is_data(pos: int) -> bool:
        return circuit.layout.get(pos, '').split('.')[-1].startswith('d')
    return sum(1 for loc in circuit.locations
               if loc.kind is LocationKind.SWAP and all(is_data(p) for p in loc.positions))


def _counts_line(circuit: Circuit) -> str:
    counts = count_locations(circuit)
    parts = [f'{kind}={n}' for kind, n in counts.items() if kind != 'total' and n]
    return f"total {counts['total']} depth {circuit.depth} " + ' '.join(parts)


@sim_bp.cli.command('build')
@click.option('--level', type=click.IntRange(min=1), required=True, help='Concatenation level.')
@click.option('--gadget', type=click.Choice(BUILD_CHOICES), default='exrec-cnot')
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Circuit text output.')
@click.option('--compare-nonlocal', is_flag=True, help='Also emit the non-local reference EC.')
@handle_errors
def build(level: int, gadget: str, out: Optional[str], compare_nonlocal: bool):
    """Build a gadget circuit and print its location counts."""
    builder = current_app.builder
    if gadget == 'exrec-cnot':
        circuit = builder.build_cnot_exrec(level).circuit
    else:
        _, circuit = builder.build_level_circuit(gadget, level)

    click.echo(_counts_line(circuit))
    if level == 1 and gadget == 'ec':
        click.echo(f'data-data swaps {_data_swaps(circuit)}')
    if out:
        with open(out, 'w', encoding='utf-8') as f:
            f.write(serialize(circuit))
        click.echo(f'wrote {out}')

    totals = {'locations': len(circuit.locations), 'depth': circuit.depth}
    if compare_nonlocal:
        reference = builder.build_nonlocal_syndrome_extraction().circuit
        click.echo('nonlocal ' + _counts_line(reference))
        totals['nonlocal_depth'] = reference.depth
        if out:
            root, ext = os.path.splitext(out)
            with open(f'{root}.nonlocal{ext or ".txt"}', 'w', encoding='utf-8') as f:
                f.write(serialize(reference))

    manifest = _manifest('build', level=level, gadget=gadget)
    _write_manifest(manifest.finish(**totals), out)


@sim_bp.cli.command('rsubset')
@click.option('--level', type=click.IntRange(min=1), required=True)
@click.option('--errors', 'errors', type=click.IntRange(min=0), required=True, help='Faults per trial.')
@click.option('--trials', type=click.IntRange(min=1), required=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='r_i CSV to append to.')
@workers_option
@decoder_option
@handle_errors
def rsubset(level: int, errors: int, trials: int, seed: int, out: Optional[str],
            workers: Optional[int], decoder: Optional[str]):
    """Estimate r_i: the failure fraction with exactly i faults."""
    sim = _simulation(decoder)
    workers = workers or current_app.config.get('QEC_WORKERS', 1)
    summary = sim.estimate_ri(level, errors, trials, seed, workers)
    click.echo(f'{level},{errors},{summary.trials},{summary.failures}')
    if out:
        current_app.analysis.append_ri_row(out, level, errors, summary.trials, summary.failures)
    manifest = _manifest('rsubset', seed, workers, level=level, errors=errors, trials=trials,
                         decoder=sim.decoder_mode)
    _write_manifest(manifest.finish(**summary.to_dict()), out)


def _load_checkpoint(out: str, level: int, p: float, seed: int) -> pd.DataFrame:
    if not out or not os.path.exists(out):
        return pd.DataFrame(columns=CHECKPOINT_COLUMNS)
    frame = pd.read_csv(out)
    return frame[(frame['level'] == level) & (frame['p'] == p) & (frame['seed'] == seed)]


@sim_bp.cli.command('mc')
@click.option('--level', type=click.IntRange(min=1), required=True)
@click.option('--p', 'p', type=click.FloatRange(0.0, 1.0), required=True, help='Per-location fault probability.')
@click.option('--trials', type=click.IntRange(min=1), required=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Checkpoint CSV, one row per chunk.')
@workers_option
@decoder_option
@handle_errors
def mc(level: int, p: float, trials: int, seed: int, out: Optional[str],
       workers: Optional[int], decoder: Optional[str]):
    """Independent-fault campaign, resumable from its checkpoint CSV."""
    sim = _simulation(decoder)
    workers = workers or current_app.config.get('QEC_WORKERS', 1)
    done = _load_checkpoint(out, level, p, seed)
    skip = {(int(r.chunk_start), int(r.chunk_stop)) for r in done.itertuples()}
    if skip:
        current_app.logger.info('resuming: %d chunks already complete', len(skip))

    def checkpoint(chunk, part):
        if not out:
            return
        row = pd.DataFrame([(level, p, seed, chunk[0], chunk[1], part.trials, part.failures, part.aborted)],
                           columns=CHECKPOINT_COLUMNS)
        row.to_csv(out, mode='a', header=not os.path.exists(out), index=False)

    fresh = sim.run_iid(level, p, trials, seed, workers, skip=skip, on_chunk=checkpoint)
    # chunks outside the requested range belong to a different run length
    prior = done[done['chunk_stop'] <= trials]
    fresh.trials += int(prior['trials'].sum())
    fresh.failures += int(prior['failures'].sum())
    fresh.aborted += int(prior['aborted'].sum())
    result = fresh.to_dict()
    click.echo(f"level {level} p {p:g}: {fresh.failures}/{fresh.trials} failures, "
               f"P_fail={result['estimate']:.4g} [{result['lo']:.4g}, {result['hi']:.4g}]"
               + (f', {fresh.aborted} aborted' if fresh.aborted else ''))
    manifest = _manifest('mc', seed, workers, level=level, p=p, trials=trials, decoder=sim.decoder_mode)
    _write_manifest(manifest.finish(**result), out)


def _parse_overrides(values: Sequence[str]) -> Dict[int, int]:
    overrides = {}
    for value in values:
        try:
            level, n = value.split(':')
            overrides[int(level)] = int(n)
        except ValueError:
            raise click.BadParameter(f'expected LEVEL:N, got {value!r}', param_hint='--locations')
    return overrides


def _tables(ri_paths: Sequence[str], locations: Sequence[str], levels: Sequence[int]) -> List[RiTable]:
    analysis = current_app.analysis
    frame = analysis.read_ri_frame(ri_paths)
    overrides = _parse_overrides(locations)
    wanted = sorted(levels) if levels else sorted(int(x) for x in frame['level'].unique())
    return [analysis.table_from_frame(frame, level, overrides.get(level) or current_app.builder.exrec_count(level))
            for level in wanted]


def _grid(p_min: Optional[float], p_max: Optional[float], points: Optional[int]) -> List[float]:
    cfg = current_app.config
    return log_grid(p_min or cfg['P_GRID_MIN'], p_max or cfg['P_GRID_MAX'], points or cfg['P_GRID_POINTS'])


def curve_options(f):
    for option in reversed([
        click.option('--ri', 'ri_paths', multiple=True, required=True, type=click.Path(dir_okay=False),
                     help='r_i CSV files (level,i,trials,failures).'),
        click.option('--level', 'levels', multiple=True, type=int, help='Restrict to these levels.'),
        click.option('--locations', multiple=True, help='Override exRec size as LEVEL:N.'),
        click.option('--p-min', type=float, default=None),
        click.option('--p-max', type=float, default=None),
        click.option('--points', type=click.IntRange(min=2), default=None),
        click.option('--out-dir', type=click.Path(file_okay=False), default=None),
    ]):
        f = option(f)
    return f


def _write_curves(tables: List[RiTable], grid: List[float], out_dir: Optional[str]):
    analysis = current_app.analysis
    out_dir = out_dir or current_app.config.get('QEC_RESULTS_DIR', 'results')
    os.makedirs(out_dir, exist_ok=True)
    curves = []
    for table in tables:
        curve = analysis.curve(table, grid)
        path = analysis.write_curve(os.path.join(out_dir, f'curve_level{table.level}.csv'), curve)
        click.echo(f'level {table.level}: N={table.locations} i_max={table.i_max} -> {path}')
        if table.wilson_rows:
            click.echo(f'  Wilson interval used for i={table.wilson_rows}')
        warned = [pt.p for pt in curve.points if pt.tail_warning]
        if warned:
            click.echo(f'  truncation warning for p >= {min(warned):.3g}')
        curves.append(curve)
    return curves, out_dir


@sim_bp.cli.command('expand')
@curve_options
@handle_errors
def expand(ri_paths, levels, locations, p_min, p_max, points, out_dir):
    """Expand r_i tables into failure-rate curves on a log-spaced p grid."""
    tables = _tables(ri_paths, locations, levels)
    curves, out_dir = _write_curves(tables, _grid(p_min, p_max, points), out_dir)
    manifest = _manifest('expand', ri=list(ri_paths), p_min=p_min, p_max=p_max, points=points)
    _write_manifest(manifest.finish(levels=[c.level for c in curves]),
                    os.path.join(out_dir, 'expand.csv'))


@sim_bp.cli.command('scan')
@curve_options
@click.option('--target', type=float, default=None, help='Target logical failure rate for a resource estimate.')
@click.option('--at-p', type=float, default=None, help='Physical p for the resource estimate.')
@handle_errors
def scan(ri_paths, levels, locations, p_min, p_max, points, out_dir, target, at_p):
    """Expand curves and report crossings between consecutive levels."""
    analysis = current_app.analysis
    tables = _tables(ri_paths, locations, levels)
    curves, out_dir = _write_curves(tables, _grid(p_min, p_max, points), out_dir)
    report = []
    for a, b, result in analysis.crossings(curves):
        if result.status == 'crossing':
            click.echo(f'levels {a}/{b}: p* = {result.p_star:.3g} in [{result.lo:.3g}, {result.hi:.3g}]')
        else:
            click.echo(f'levels {a}/{b}: {result.message}')
        report.append({'levels': [a, b], **result.to_dict()})

    totals = {'crossings': report}
    if target is not None:
        if at_p is None:
            raise click.UsageError('--target requires --at-p')
        estimate = analysis.resource_estimate({t.level: t for t in tables}, at_p, target)
        if estimate.level is None:
            click.echo(f'no level reaches {target:g} at p={at_p:g}')
        else:
            click.echo(f'level {estimate.level} reaches {estimate.pfail:.3g} <= {target:g} at p={at_p:g} '
                       f'using {estimate.qubits_per_block} qubits per block')
        totals['resources'] = estimate.to_dict()

    manifest = _manifest('scan', ri=list(ri_paths), p_min=p_min, p_max=p_max, points=points)
    _write_manifest(manifest.finish(**totals), os.path.join(out_dir, 'scan.csv'))
