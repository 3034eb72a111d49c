"""Application factory for the human-aware planning service."""

import os
from flask import Flask, jsonify

from app.config import config
from app.extensions import db, migrate


def create_app(config_name=None):
    """Create and configure the Flask application.

    Args:
        config_name: Configuration to use ('development', 'production', 'testing').
                    Defaults to FLASK_ENV environment variable or 'development'.

    Returns:
        Configured Flask application instance.
    """
    if config_name is None:
        config_name = os.environ.get('FLASK_ENV', 'development')

    app = Flask(__name__)
    app.config.from_object(config[config_name])

    # Engine modules log through app.services.*, which propagates to this logger
    app.logger.setLevel(app.config.get('LOG_LEVEL', 'INFO'))

    # Initialize extensions
    db.init_app(app)
    migrate.init_app(app, db)

    # Register blueprints
    register_blueprints(app)

    # Register error handlers
    register_error_handlers(app)

    # Register CLI commands
    from app.cli import register_commands
    register_commands(app)

    return app


def register_blueprints(app):
    """Register all application blueprints."""
    from app.blueprints.api.v1 import api_v1_bp

    app.register_blueprint(api_v1_bp, url_prefix='/api/v1')

    @app.route('/')
    def index():
        return jsonify({
            'service': 'human-aware planning',
            'api': '/api/v1',
            'endpoints': ['plan', 'mega', 'sweep', 'mce', 'diff', 'validate', 'runs'],
        })


def register_error_handlers(app):
    """Register error handlers for the application."""

    @app.errorhandler(404)
    def not_found_error(error):
        return jsonify({'error': 'Not found'}), 404

    @app.errorhandler(405)
    def method_not_allowed_error(error):
        return jsonify({'error': 'Method not allowed'}), 405

    @app.errorhandler(500)
    def internal_error(error):
        db.session.rollback()
        return jsonify({'error': 'Internal server error'}), 500
