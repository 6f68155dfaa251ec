from flask import Blueprint, current_app, jsonify, request
from models import EXIT_BUDGET_EXCEEDED, EXIT_INPUT_ERROR, Command
from services.deduction import CheckMode
from services.workspace import RunFlags, execute
import logging

kernel_bp = Blueprint('kernel', __name__)
logger = logging.getLogger(__name__)

_HTTP_STATUS = {EXIT_INPUT_ERROR: 400, EXIT_BUDGET_EXCEEDED: 413}


def flags_from_body(data: dict) -> RunFlags:
    """Request fields override the configured budget; raises ValueError on bad values."""
    cfg = current_app.config
    mode = CheckMode(data.get('mode') or cfg.get('LOSET_MODE', 'kernel'))
    budget = data.get('budget')
    threads = data.get('threads')
    return RunFlags(
        mode=mode,
        budget=int(budget) if budget is not None else cfg.get('LOSET_MAX_ROWS'),
        threads=int(threads) if threads is not None else cfg.get('LOSET_THREADS'),
        seed=int(data.get('seed', cfg.get('LOSET_SEED', 0))),
        max_carrier=cfg.get('LOSET_MAX_CARRIER'),
    )


def parse_command(name: str) -> Command:
    return Command(name)


@kernel_bp.route('/<command>', methods=['POST'])
def run_command(command):
    """Run check, eval, translate or topos on the posted workspace"""
    try:
        data = request.get_json(silent=True) or {}
        source = data.get('source')
        if not source:
            return jsonify({
                'status': 'error',
                'message': 'Workspace source is required'
            }), 400

        try:
            cmd = parse_command(command)
            flags = flags_from_body(data)
        except ValueError as e:
            return jsonify({
                'status': 'error',
                'message': f'Invalid request: {str(e)}'
            }), 400

        outcome = execute(cmd, source, flags)
        if outcome.error is not None:
            return jsonify({
                'status': 'error',
                'message': outcome.error['message'],
                'error': outcome.error,
                'exit_code': outcome.exit_code
            }), _HTTP_STATUS.get(outcome.exit_code, 500)

        return jsonify({
            'status': 'success',
            'report': outcome.report,
            'exit_code': outcome.exit_code
        }), 200

    except Exception as e:
        logger.error(f"Error running kernel command {command}: {str(e)}")
        return jsonify({
            'status': 'error',
            'message': 'Failed to run kernel command'
        }), 500
