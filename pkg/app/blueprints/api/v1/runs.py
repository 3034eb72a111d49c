"""Stored run endpoints."""

from flask import abort, current_app, jsonify, request

from app.blueprints.api.v1 import api_v1_bp
from app.models.run import Run


@api_v1_bp.route('/runs', methods=['GET'])
def list_runs():
    """List stored runs, newest first.

    Query parameters:
        page: Page number (default: 1)
        per_page: Items per page (default: RUNS_PER_PAGE, max: 100)
        command: Only runs of this command ('mega' or 'sweep')
    """
    page = request.args.get('page', 1, type=int)
    per_page = min(request.args.get('per_page', current_app.config['RUNS_PER_PAGE'], type=int), 100)

    query = Run.query
    command = request.args.get('command')
    if command:
        query = query.filter_by(command=command)

    pagination = query.order_by(Run.created_at.desc()) \
        .paginate(page=page, per_page=per_page, error_out=False)

    return jsonify({
        'runs': [run.to_dict(include_result=False) for run in pagination.items],
        'pagination': {
            'page': pagination.page,
            'per_page': pagination.per_page,
            'total': pagination.total,
            'pages': pagination.pages,
            'has_next': pagination.has_next,
            'has_prev': pagination.has_prev
        }
    })


@api_v1_bp.route('/runs/<slug>', methods=['GET'])
def get_run(slug):
    """Get a stored run with its full result."""
    run = Run.query.filter_by(slug=slug).first()

    if not run:
        abort(404)

    return jsonify(run.to_dict())
