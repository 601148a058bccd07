"""
Flag weights, effect classes and per-block decoder state.

A weight w stands for an error probability of order p**w; ``INF`` marks a bin
that no flag has reached.
"""
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, Optional, Union

import numpy as np

from .pauli import Basis

Weight = Union[int, float]
INF: float = math.inf

# Batched bins store int16 weights with WEIGHT_INF standing in for INF; any
# sum of two stored weights still fits in int16.
WEIGHT_INF = 16000
BIN_FIELDS = ('ag1', 'ag2', 'a', 'g1', 'g2', 'joint')
FIELD_INDEX: Dict[str, int] = {name: i for i, name in enumerate(BIN_FIELDS)}


def wadd(a: Weight, b: Weight) -> Weight:
    return INF if a == INF or b == INF else a + b


def wsub(a: Weight, b: Weight) -> Weight:
    """Difference against the selected minimum; ``b`` is never larger than ``a``."""
    if a == INF:
        return INF
    return a - b


def wadd_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.minimum(a + b, WEIGHT_INF).astype(np.int16)


def wsub_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a >= WEIGHT_INF, WEIGHT_INF, a - b).astype(np.int16)


def to_stored(w: Weight) -> int:
    return WEIGHT_INF if w == INF else int(w)


def from_stored(w: int) -> Weight:
    return INF if w >= WEIGHT_INF else int(w)


def format_weight(w: Weight) -> str:
    return 'inf' if w == INF else str(int(w))


def parse_weight(text: str) -> Weight:
    return INF if text.strip().lower() in ('inf', '∞') else int(text)


class EffectClass(str, Enum):
    A = 'A'
    G1 = 'G1'
    G2 = 'G2'
    AG1 = 'AG1'
    AG2 = 'AG2'
    NEXT_G1 = 'NextG1'
    NEXT_G2 = 'NextG2'
    JOINT = 'Joint'


# NextG flags arrive between cycles, after carry-over, so they land on the
# carried AG bins directly.
BIN_FIELD: Dict[EffectClass, str] = {
    EffectClass.A: 'a',
    EffectClass.G1: 'g1',
    EffectClass.G2: 'g2',
    EffectClass.AG1: 'ag1',
    EffectClass.AG2: 'ag2',
    EffectClass.NEXT_G1: 'ag1',
    EffectClass.NEXT_G2: 'ag2',
    EffectClass.JOINT: 'joint',
}


@dataclass
class BinSet:
    """Decoder bins for one block and one error type."""
    ag1: Weight = INF
    ag2: Weight = INF
    a: Weight = INF
    g1: Weight = INF
    g2: Weight = INF
    joint: Weight = INF

    def get(self, cls: EffectClass) -> Weight:
        return getattr(self, BIN_FIELD[cls])

    def lower(self, cls: EffectClass, w: Weight) -> None:
        name = BIN_FIELD[cls]
        if w < getattr(self, name):
            setattr(self, name, w)

    def copy(self) -> 'BinSet':
        return BinSet(**asdict(self))

    def to_dict(self) -> dict:
        return {k: format_weight(v) for k, v in asdict(self).items()}


@dataclass
class BlockBins:
    """Both error types of one block."""
    x: BinSet = field(default_factory=BinSet)
    z: BinSet = field(default_factory=BinSet)

    def __getitem__(self, basis: Basis) -> BinSet:
        return self.x if basis is Basis.X else self.z

    def __setitem__(self, basis: Basis, bins: BinSet) -> None:
        if basis is Basis.X:
            self.x = bins
        else:
            self.z = bins

    def reset(self) -> None:
        self.x = BinSet()
        self.z = BinSet()


class Match(str, Enum):
    NONE = 'None'
    AG1 = 'AG1'
    AG2 = 'AG2'
    A = 'A'


@dataclass
class MatchOutcome:
    """One row of the match table as applied to concrete bins."""
    parity: str
    match: Match
    correction: Optional[int]  # pair index 0/1, or None
    c1: Weight
    c2: Weight
    ce: Weight

    def correction_name(self, basis: Basis) -> str:
        if self.correction is None:
            return 'none'
        names = {Basis.X: ('X1', 'X3'), Basis.Z: ('Z1', 'Z2')}
        return names[basis][self.correction]

    def to_dict(self) -> dict:
        return {
            'parity': self.parity,
            'match': self.match.value,
            'correction': self.correction,
            'c1': format_weight(self.c1),
            'c2': format_weight(self.c2),
            'ce': format_weight(self.ce),
        }
