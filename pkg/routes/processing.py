from flask import Blueprint, jsonify, request
from models import KernelJob, db
from routes.kernel import flags_from_body, parse_command
from services.background_processor import background_processor
import logging

logger = logging.getLogger(__name__)

processing_bp = Blueprint('processing', __name__)

@processing_bp.route('/status', methods=['GET'])
def get_processing_status():
    """Get the current processing status"""
    try:
        status = background_processor.get_processing_status()
        return jsonify({
            'status': 'success',
            'data': status
        })
    except Exception as e:
        logger.error(f"Error getting processing status: {str(e)}")
        return jsonify({
            'status': 'error',
            'message': 'Failed to get processing status'
        }), 500

@processing_bp.route('/start', methods=['POST'])
def start_processing():
    """Start background processing"""
    try:
        background_processor.start()
        return jsonify({
            'status': 'success',
            'message': 'Background processing started'
        })
    except Exception as e:
        logger.error(f"Error starting processing: {str(e)}")
        return jsonify({
            'status': 'error',
            'message': 'Failed to start processing'
        }), 500

@processing_bp.route('/stop', methods=['POST'])
def stop_processing():
    """Stop background processing"""
    try:
        background_processor.stop()
        return jsonify({
            'status': 'success',
            'message': 'Background processing stopped'
        })
    except Exception as e:
        logger.error(f"Error stopping processing: {str(e)}")
        return jsonify({
            'status': 'error',
            'message': 'Failed to stop processing'
        }), 500

@processing_bp.route('/jobs', methods=['POST'])
def submit_job():
    """Queue a workspace run for the background worker"""
    try:
        data = request.get_json(silent=True) or {}
        if not data.get('source') or not data.get('command'):
            return jsonify({
                'status': 'error',
                'message': 'command and source are required'
            }), 400

        try:
            command = parse_command(data['command'])
            flags = flags_from_body(data)
        except ValueError as e:
            return jsonify({
                'status': 'error',
                'message': f'Invalid request: {str(e)}'
            }), 400

        job = background_processor.submit(command, data['source'], mode=flags.mode,
                                          budget=data.get('budget'), threads=data.get('threads'))
        return jsonify({
            'status': 'success',
            'job': job.to_dict()
        }), 201

    except Exception as e:
        db.session.rollback()
        logger.error(f"Error queueing kernel job: {str(e)}")
        return jsonify({
            'status': 'error',
            'message': 'Failed to queue job'
        }), 500

@processing_bp.route('/jobs/<job_id>', methods=['GET'])
def get_job(job_id):
    """Status and report of a queued job"""
    try:
        job = db.session.get(KernelJob, job_id)
        if not job:
            return jsonify({
                'status': 'error',
                'message': 'Job not found'
            }), 404
        return jsonify({
            'status': 'success',
            'job': job.to_dict()
        })
    except Exception as e:
        logger.error(f"Error getting job {job_id}: {str(e)}")
        return jsonify({
            'status': 'error',
            'message': 'Failed to get job'
        }), 500
