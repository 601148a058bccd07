"""
Models package for the threshold simulator.
"""
from .pauli import Basis, ErrorFrame, PauliLetter
from .circuit import Circuit, Location, LocationKind
from .code412 import CODE, LogicalAction, Parity
from .weights import INF, BinSet, BlockBins, EffectClass, MatchOutcome

__all__ = [
    'Basis', 'ErrorFrame', 'PauliLetter',
    'Circuit', 'Location', 'LocationKind',
    'CODE', 'LogicalAction', 'Parity',
    'INF', 'BinSet', 'BlockBins', 'EffectClass', 'MatchOutcome',
]
