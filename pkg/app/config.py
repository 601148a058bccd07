"""
Configuration classes for the concatenated [[4,1,2]] threshold simulator.
"""
import os
from dotenv import load_dotenv

load_dotenv()


def _env_bool(name: str, default: bool = False) -> bool:
    value = os.environ.get(name)
    if value is None:
        return default
    return value.strip().lower() in ('1', 'true', 'yes', 'on')


class Config:
    """Base configuration class."""

    # Flask
    SECRET_KEY = os.environ.get('FLASK_SECRET_KEY', 'dev-secret-key')

    # Server
    PORT = int(os.environ.get('PORT', 5002))

    # Logging
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')

    # Simulation
    QEC_WORKERS = int(os.environ.get('QEC_WORKERS', 1))
    QEC_DECODER_MODE = os.environ.get('QEC_DECODER_MODE', 'literal')
    QEC_EC_AFTER_MEMORY = _env_bool('QEC_EC_AFTER_MEMORY')
    QEC_MAX_LEVEL = int(os.environ.get('QEC_MAX_LEVEL', 4))
    QEC_MAX_LOCATIONS = int(os.environ.get('QEC_MAX_LOCATIONS', 5_000_000))
    QEC_CHUNK_SIZE = int(os.environ.get('QEC_CHUNK_SIZE', 4096))
    QEC_RESULTS_DIR = os.environ.get('QEC_RESULTS_DIR', 'results')

    # Analysis
    QEC_TAIL_WARNING_FRACTION = float(os.environ.get('QEC_TAIL_WARNING_FRACTION', 0.01))
    QEC_WILSON_MIN_FAILURES = int(os.environ.get('QEC_WILSON_MIN_FAILURES', 10))
    TRUNCATION_ORDERS = {1: 6, 2: 10, 3: 21}
    P_GRID_MIN = 1e-7
    P_GRID_MAX = 1e-4
    P_GRID_POINTS = 31


class DevelopmentConfig(Config):
    """Development configuration."""
    DEBUG = True
    TESTING = False


class ProductionConfig(Config):
    """Production configuration."""
    DEBUG = False
    TESTING = False


class TestingConfig(Config):
    """Testing configuration."""
    DEBUG = True
    TESTING = True
    QEC_WORKERS = 1
    QEC_DECODER_MODE = 'literal'
    QEC_CHUNK_SIZE = 50


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config():
    """Get configuration based on FLASK_ENV environment variable."""
    env = os.environ.get('FLASK_ENV', 'development')
    if env == 'production':
        return ProductionConfig
    return DevelopmentConfig
