"""
Concatenated [[4,1,2]] Threshold Simulator Application Factory.

This module contains the application factory for creating Flask app instances.
"""
import logging
import os
from flask import Flask

from .config import config
from .services import AnalysisService, BuilderService, DecoderService, SimulationService
from .services.decoder_service import DECODER_MODES


def create_app(config_name: str = None) -> Flask:
    """
    Application factory for creating Flask app instances.

    Args:
        config_name: Configuration name ('development', 'production', 'testing')

    Returns:
        Configured Flask application instance
    """
    # Determine configuration
    if config_name is None:
        env = os.environ.get('FLASK_ENV', 'development')
        config_name = 'production' if env == 'production' else 'development'

    # Create Flask app
    app = Flask(__name__)

    # Load configuration
    app.config.from_object(config[config_name])

    # Validate required configuration
    if app.config.get('QEC_DECODER_MODE') not in DECODER_MODES:
        raise RuntimeError(f"QEC_DECODER_MODE must be one of {', '.join(DECODER_MODES)}.")

    _configure_logging(app)

    # Initialize services and attach to app
    _init_services(app)

    # Register blueprints
    _register_blueprints(app)

    return app


def _configure_logging(app: Flask):
    level = getattr(logging, str(app.config.get('LOG_LEVEL', 'INFO')).upper(), logging.INFO)
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    app.logger.setLevel(level)


def _init_services(app: Flask):
    """Initialize and attach services to the Flask app."""
    # Builder service
    app.builder = BuilderService(
        ec_after_memory=app.config.get('QEC_EC_AFTER_MEMORY', False),
        max_level=app.config.get('QEC_MAX_LEVEL', 4),
        max_locations=app.config.get('QEC_MAX_LOCATIONS', 5_000_000)
    )

    # Decoder service
    app.decoder = DecoderService(mode=app.config.get('QEC_DECODER_MODE', 'literal'))

    # Simulation service
    app.simulation = SimulationService(
        decoder_mode=app.config.get('QEC_DECODER_MODE', 'literal'),
        workers=app.config.get('QEC_WORKERS', 1),
        ec_after_memory=app.config.get('QEC_EC_AFTER_MEMORY', False),
        max_level=app.config.get('QEC_MAX_LEVEL', 4),
        max_locations=app.config.get('QEC_MAX_LOCATIONS', 5_000_000),
        chunk_size=app.config.get('QEC_CHUNK_SIZE', 4096)
    )

    # Analysis service
    app.analysis = AnalysisService(
        tail_warning_fraction=app.config.get('QEC_TAIL_WARNING_FRACTION', 0.01),
        wilson_min_failures=app.config.get('QEC_WILSON_MIN_FAILURES', 10),
        truncation=app.config.get('TRUNCATION_ORDERS')
    )


def _register_blueprints(app: Flask):
    """Register all blueprints with the Flask app."""
    from .routes import api_bp, sim_bp

    app.register_blueprint(api_bp)
    app.register_blueprint(sim_bp)
