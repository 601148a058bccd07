"""
API routes blueprint.
"""
from flask import Blueprint, jsonify, request, current_app

from ..errors import SimulationError
from ..models.circuit import count_locations
from ..models.code412 import CODE, Parity
from ..models.weights import parse_weight
from ..services.analysis_service import RiTable

api_bp = Blueprint('api', __name__, url_prefix='/api')


def _error(message: str, status: int = 400):
    return jsonify({'status': 'error', 'message': message}), status


@api_bp.errorhandler(SimulationError)
def simulation_error(e):
    current_app.logger.warning('API request failed: %s', e)
    return _error(str(e))


@api_bp.route('/health')
def health():
    """Simple liveness endpoint."""
    return jsonify({
        'status': 'ok',
        'decoder_mode': current_app.config.get('QEC_DECODER_MODE'),
        'max_level': current_app.config.get('QEC_MAX_LEVEL'),
        'code': CODE.to_dict(),
    })


@api_bp.route('/counts')
def counts():
    """Location counts of a gadget or of the CNOT exRec at a level."""
    builder = current_app.builder
    try:
        level = int(request.args.get('level', 1))
    except ValueError:
        return _error('level must be an integer')
    gadget = request.args.get('gadget', 'exrec-cnot')

    if gadget == 'exrec-cnot':
        builder.check_level(level)
        return jsonify({
            'level': level,
            'gadget': gadget,
            'total': builder.exrec_count(level),
            'ec': builder.gadget_count('ec', level),
            'cnot': builder.gadget_count('cnot', level),
            'depth': builder.exrec_depth(level),
        })
    if gadget not in builder.templates:
        return _error(f'unknown gadget {gadget!r}')
    if level == 1:
        by_kind = count_locations(builder.templates[gadget].circuit)
    else:
        builder.check_level(level)
        by_kind = {'total': builder.gadget_count(gadget, level)}
    return jsonify({
        'level': level,
        'gadget': gadget,
        'counts': by_kind,
        'total': by_kind['total'],
        'depth': builder.gadget_depth(gadget, level),
    })


@api_bp.route('/match', methods=['POST'])
def match():
    """Apply the decoder's match table to explicit bin weights."""
    data = request.get_json(silent=True) or {}
    try:
        ag1 = parse_weight(str(data.get('ag1', 'inf')))
        ag2 = parse_weight(str(data.get('ag2', 'inf')))
        a = parse_weight(str(data.get('a', 'inf')))
        parity = Parity(data.get('parity', 'even'))
    except ValueError as e:
        return _error(str(e))
    mode = data.get('mode', current_app.decoder.mode)
    return jsonify({'status': 'success', 'row': current_app.decoder.table_row(ag1, ag2, a, parity, mode)})


@api_bp.route('/expand', methods=['POST'])
def expand():
    """Expand posted (i, trials, failures) rows into failure-rate points."""
    data = request.get_json(silent=True) or {}
    analysis = current_app.analysis
    try:
        level = int(data['level'])
        locations = int(data.get('locations') or current_app.builder.exrec_count(level))
        rows = [(int(r['i']), int(r['trials']), int(r['failures'])) for r in data['rows']]
        grid = [float(p) for p in data['p']]
    except (KeyError, TypeError, ValueError) as e:
        return _error(f'invalid request: {e}')
    i_max = data.get('i_max')
    table = RiTable.from_counts(level, locations, rows, int(i_max) if i_max is not None else None,
                                analysis.wilson_min_failures)
    curve = analysis.curve(table, grid)
    return jsonify({
        'status': 'success',
        'level': level,
        'locations': locations,
        'wilson_rows': table.wilson_rows,
        'points': [{'p': pt.p, 'pfail': pt.pfail, 'plo': pt.plo, 'phi': pt.phi,
                    'tail_warning': pt.tail_warning} for pt in curve.points],
    })
