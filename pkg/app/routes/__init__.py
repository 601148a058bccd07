"""
Routes package for the threshold simulator.
"""
from .api import api_bp
from .cli import sim_bp

__all__ = ['api_bp', 'sim_bp']
