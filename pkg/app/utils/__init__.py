"""
Utilities package for the threshold simulator.
"""
from .run_utils import RunManifest, content_hash, trial_rng

__all__ = ['RunManifest', 'content_hash', 'trial_rng']
