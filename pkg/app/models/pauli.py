"""
Phase-free Pauli algebra and error-frame propagation.

Letters are encoded as two-bit masks (X = 1, Z = 2, Y = X|Z) so composition is
XOR and conjugation is bit shuffling.
"""
from enum import IntEnum
from typing import Dict, Iterator, Sequence, Tuple, Union

import numpy as np

from ..errors import LinearityError
from .circuit import LocationKind


class PauliLetter(IntEnum):
    I = 0
    X = 1
    Z = 2
    Y = 3

    @property
    def has_x(self) -> bool:
        return bool(self & 1)

    @property
    def has_z(self) -> bool:
        return bool(self & 2)


class Basis(IntEnum):
    """Error type / measurement basis selector; the value is the letter bit."""
    X = 1
    Z = 2

    @property
    def other(self) -> 'Basis':
        return Basis.Z if self is Basis.X else Basis.X


def compose(a: PauliLetter, b: PauliLetter) -> PauliLetter:
    """Product of two letters with the phase discarded."""
    return PauliLetter(int(a) ^ int(b))


class ErrorFrame:
    """Sparse map of line position to Pauli letter; identity entries are absent."""

    __slots__ = ('_entries',)

    def __init__(self, entries: Union[Dict[int, PauliLetter], None] = None):
        self._entries: Dict[int, int] = {}
        for pos, letter in (entries or {}).items():
            self.toggle(pos, letter)

    def __getitem__(self, pos: int) -> PauliLetter:
        return PauliLetter(self._entries.get(pos, 0))

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Tuple[int, PauliLetter]]:
        for pos in sorted(self._entries):
            yield pos, PauliLetter(self._entries[pos])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ErrorFrame) and self._entries == other._entries

    def __repr__(self) -> str:
        body = ', '.join(f'{pos}: {letter.name}' for pos, letter in self)
        return f'ErrorFrame({{{body}}})'

    def copy(self) -> 'ErrorFrame':
        clone = ErrorFrame()
        clone._entries = dict(self._entries)
        return clone

    def to_dict(self) -> Dict[int, str]:
        return {pos: letter.name for pos, letter in self}

    def bits(self, pos: int) -> int:
        return self._entries.get(pos, 0)

    def toggle(self, pos: int, letter: int) -> None:
        """Multiply the entry at ``pos`` by ``letter``."""
        value = self._entries.get(pos, 0) ^ int(letter)
        if value:
            self._entries[pos] = value
        else:
            self._entries.pop(pos, None)

    def set(self, pos: int, letter: int) -> None:
        if letter:
            self._entries[pos] = int(letter)
        else:
            self._entries.pop(pos, None)

    def clear(self, pos: int) -> None:
        self._entries.pop(pos, None)

    def merge(self, other: 'ErrorFrame') -> 'ErrorFrame':
        """Position-wise composition of two frames."""
        merged = self.copy()
        for pos, letter in other._entries.items():
            merged.toggle(pos, letter)
        return merged


def apply_gate(frame: ErrorFrame, kind: LocationKind, positions: Sequence[int]) -> ErrorFrame:
    """Conjugate ``frame`` in place by one unitary or preparation location."""
    if kind.is_two_qubit:
        a, b = positions
        if abs(a - b) != 1:
            raise LinearityError(f'{kind.value} on non-adjacent positions {a},{b}')
        pa, pb = frame.bits(a), frame.bits(b)
        if kind is LocationKind.CNOT:
            # X flows control -> target, Z flows target -> control
            frame.set(a, pa ^ (pb & 2))
            frame.set(b, pb ^ (pa & 1))
        else:
            frame.set(a, pb)
            frame.set(b, pa)
    elif kind is LocationKind.H:
        (q,) = positions
        p = frame.bits(q)
        frame.set(q, ((p & 1) << 1) | ((p & 2) >> 1))
    elif kind.is_prep:
        frame.clear(positions[0])
    return frame


def flips_measurement(frame: ErrorFrame, position: int, basis: Basis) -> bool:
    """True when the entry anticommutes with the measured observable."""
    return bool(frame.bits(position) & int(basis.other))


def measurement_basis(kind: LocationKind) -> Basis:
    return Basis.Z if kind is LocationKind.MEAS_Z else Basis.X


def sample_error(kind: LocationKind, rng: np.random.Generator) -> Tuple[PauliLetter, ...]:
    """Uniform nontrivial Pauli for the location's arity."""
    if kind.is_two_qubit:
        code = int(rng.integers(1, 16))
        return (PauliLetter(code & 3), PauliLetter(code >> 2))
    return (PauliLetter(int(rng.integers(1, 4))),)
