"""
Services package for the threshold simulator.
"""
from .builder_service import BuilderService
from .decoder_service import DecoderService
from .simulation_service import SimulationService
from .analysis_service import AnalysisService

__all__ = ['BuilderService', 'DecoderService', 'SimulationService', 'AnalysisService']
