"""
The [[4,1,2]] subsystem code.

Data roles d1..d4 sit at block offsets 0, 2, 3, 5 and the two ancillas at 1, 4.
Operators are written as strings over the four data roles, e.g. 'XXII'.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Sequence, Tuple

from .pauli import Basis, ErrorFrame

DATA_OFFSETS: Tuple[int, ...] = (0, 2, 3, 5)
ANCILLA_OFFSETS: Tuple[int, ...] = (1, 4)
BLOCK_SIZE = 6

# data roles (0-based) forming the two pairs for each error type
DATA_PAIRS: Dict[Basis, Tuple[Tuple[int, int], Tuple[int, int]]] = {
    Basis.X: ((0, 1), (2, 3)),
    Basis.Z: ((0, 2), (1, 3)),
}

# role receiving the correction for pair 1 / pair 2: X1, X3 and Z1, Z2
CORRECTION_ROLES: Dict[Basis, Tuple[int, int]] = {
    Basis.X: (0, 2),
    Basis.Z: (0, 1),
}

# roles carrying the logical operator of each type: X1X3 and Z1Z2
LOGICAL_ROLES: Dict[Basis, Tuple[int, int]] = {
    Basis.X: (0, 2),
    Basis.Z: (0, 1),
}


@dataclass(frozen=True)
class CodeDefinition:
    stabilizers: Tuple[str, ...] = ('XXXX', 'ZZZZ')
    gauge_generators: Tuple[str, ...] = ('XXII', 'IIXX', 'ZIZI', 'IZIZ')
    logical_x: str = 'XIXI'
    logical_z: str = 'ZZII'

    def to_dict(self) -> dict:
        return {
            'stabilizers': list(self.stabilizers),
            'gauge_generators': list(self.gauge_generators),
            'logical_x': self.logical_x,
            'logical_z': self.logical_z,
            'data_pairs': {basis.name: [[a + 1, b + 1] for a, b in pairs] for basis, pairs in DATA_PAIRS.items()},
        }


CODE = CodeDefinition()


class Parity(str, Enum):
    EVEN = 'even'
    ODD = 'odd'

    @classmethod
    def from_bit(cls, bit: int) -> 'Parity':
        return cls.ODD if bit else cls.EVEN


class LogicalAction(str, Enum):
    TRIVIAL = 'trivial'
    LOGICAL = 'logical'
    DETECTABLE = 'detectable'


def multiply(a: str, b: str) -> str:
    """Phase-free product of two operator strings."""
    table = {'I': 0, 'X': 1, 'Z': 2, 'Y': 3}
    names = 'IXZY'
    return ''.join(names[table[p] ^ table[q]] for p, q in zip(a, b))


def commutes(a: str, b: str) -> bool:
    anti = 0
    for p, q in zip(a, b):
        if p != 'I' and q != 'I' and p != q:
            anti ^= 1
    return anti == 0


def decode_parity(m1: int, m2: int) -> Parity:
    """Even iff the product of the two +-1 outcomes is +1."""
    return Parity.EVEN if m1 * m2 == 1 else Parity.ODD


def pair_class(bits: Sequence[int], basis: Basis) -> Tuple[int, int]:
    """Which data pairs carry a residual of ``basis`` type, modulo gauge."""
    (a1, b1), (a2, b2) = DATA_PAIRS[basis]
    return (bits[a1] ^ bits[b1], bits[a2] ^ bits[b2])


def classify(pairs: Tuple[int, int]) -> LogicalAction:
    if pairs == (0, 0):
        return LogicalAction.TRIVIAL
    if pairs == (1, 1):
        return LogicalAction.LOGICAL
    return LogicalAction.DETECTABLE


def logical_action(frame: ErrorFrame, data_positions: Sequence[int]) -> Dict[Basis, LogicalAction]:
    """Classify the X part and the Z part of a block's residual independently."""
    result = {}
    for basis in Basis:
        bits = [1 if frame.bits(pos) & int(basis) else 0 for pos in data_positions]
        result[basis] = classify(pair_class(bits, basis))
    return result


def decode_transversal_measurement(outcomes: Sequence[int], basis: Basis) -> Tuple[int, bool]:
    """Logical outcome and detection flag from four +-1 readouts.

    Z basis: logical Z1Z2, gauges Z1Z3 and Z2Z4. X basis: logical X1X3, gauges X1X2, X3X4.
    """
    m1, m2, m3, m4 = outcomes
    if basis is Basis.Z:
        return m1 * m2, (m1 * m3) * (m2 * m4) == -1
    return m1 * m3, (m1 * m2) * (m3 * m4) == -1


def decode_measurement_bits(flips: Sequence[int], measured: Basis) -> Tuple[int, bool]:
    """Same decode on flip bits (1 = readout flipped) instead of +-1 values."""
    logical, detected = decode_transversal_measurement([-1 if f else 1 for f in flips], measured)
    return (1 if logical == -1 else 0), detected


def distance_at_level(level: int) -> int:
    if level < 0:
        raise ValueError('level must be non-negative')
    return 2 ** (level + 1)


# Recursive views over concatenated blocks

def pitch(level: int) -> int:
    """Line positions spanned by one block at ``level`` (level 0 is a single qubit)."""
    return BLOCK_SIZE ** level


def sub_block(base: int, level: int, offset: int) -> int:
    """Base position of the level-(level-1) block at ``offset`` inside a level-``level`` block."""
    return base + offset * pitch(level - 1)


def data_sub_blocks(base: int, level: int) -> List[int]:
    return [sub_block(base, level, off) for off in DATA_OFFSETS]


def flip_bit(frame: ErrorFrame, level: int, base: int, basis: Basis) -> int:
    """1 when the block's residual of ``basis`` type flips its logical readout."""
    if level == 0:
        return 1 if frame.bits(base) & int(basis) else 0
    subs = data_sub_blocks(base, level)
    r1, r2 = LOGICAL_ROLES[basis.other]
    return flip_bit(frame, level - 1, subs[r1], basis) ^ flip_bit(frame, level - 1, subs[r2], basis)


def block_action(frame: ErrorFrame, level: int, base: int) -> Dict[Basis, LogicalAction]:
    """Per-basis logical action of a level-``level`` block's residual."""
    result = {}
    subs = data_sub_blocks(base, level)
    for basis in Basis:
        bits = [flip_bit(frame, level - 1, s, basis) for s in subs]
        result[basis] = classify(pair_class(bits, basis))
    return result


def logical_support(level: int, base: int, basis: Basis) -> List[int]:
    """Physical positions of the level-``level`` logical operator of ``basis`` type."""
    if level == 0:
        return [base]
    subs = data_sub_blocks(base, level)
    support: List[int] = []
    for role in LOGICAL_ROLES[basis]:
        support.extend(logical_support(level - 1, subs[role], basis))
    return support


def apply_logical(frame: ErrorFrame, level: int, base: int, basis: Basis) -> None:
    for pos in logical_support(level, base, basis):
        frame.toggle(pos, int(basis))
