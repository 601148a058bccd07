"""
Bit-packed Pauli frames and level-1 schedules compiled against them.

A frame stores one X plane and one Z plane of shape ``(width, words)``; bit
``t & 63`` of word ``t >> 6`` in row ``q`` belongs to trial ``t``.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .circuit import Location, LocationKind
from .pauli import Basis

K = LocationKind
WORD_BITS = 64
FRAME_DTYPE = np.dtype('<u8')
_NO_POSITIONS = np.zeros(0, dtype=np.int64)


def words_for(trials: int) -> int:
    return max(1, -(-int(trials) // WORD_BITS))


def pack(mask: np.ndarray, words: int) -> np.ndarray:
    """Boolean per-trial mask -> packed words."""
    padded = np.zeros(words * WORD_BITS, dtype=bool)
    padded[:len(mask)] = mask
    return np.packbits(padded, bitorder='little').view(FRAME_DTYPE)


def unpack(words: np.ndarray, trials: int) -> np.ndarray:
    """Packed words -> boolean per-trial mask of length ``trials``."""
    flat = np.ascontiguousarray(words, dtype=FRAME_DTYPE)
    return np.unpackbits(flat.view(np.uint8), bitorder='little')[:trials].astype(bool)


def trial_bits(trials: np.ndarray) -> np.ndarray:
    return np.left_shift(np.uint64(1), (trials & (WORD_BITS - 1)).astype(np.uint64))


class PackedFrame:
    """Pauli frames for a batch of trials over ``width`` line positions."""

    def __init__(self, width: int, trials: int):
        self.width = width
        self.trials = trials
        self.words = words_for(trials)
        self.x = np.zeros((width, self.words), dtype=FRAME_DTYPE)
        self.z = np.zeros((width, self.words), dtype=FRAME_DTYPE)

    def plane(self, basis: Basis) -> np.ndarray:
        """Rows holding the ``basis`` component of every entry."""
        return self.x if basis is Basis.X else self.z

    def toggle(self, positions: np.ndarray, trials: np.ndarray, letters: np.ndarray) -> None:
        """XOR one letter per (position, trial) pair into the frame."""
        bits = trial_bits(trials)
        words = trials >> 6
        has_x = (letters & 1).astype(bool)
        has_z = (letters & 2).astype(bool)
        np.bitwise_xor.at(self.x, (positions[has_x], words[has_x]), bits[has_x])
        np.bitwise_xor.at(self.z, (positions[has_z], words[has_z]), bits[has_z])

    def apply_logical(self, positions: Sequence[int], basis: Basis, mask: np.ndarray) -> None:
        """Toggle ``basis`` on every row of ``positions`` for the trials set in packed ``mask``."""
        plane = self.plane(basis)
        rows = np.asarray(positions, dtype=np.int64)
        plane[rows] ^= mask

    def parity(self, positions: Sequence[int], basis: Basis) -> np.ndarray:
        """Packed XOR of the ``basis`` bits over ``positions``."""
        rows = self.plane(basis)[np.asarray(positions, dtype=np.int64)]
        return np.bitwise_xor.reduce(rows, axis=0)


@dataclass
class SliceProgram:
    """One level-1 time slice with absolute positions.

    ``pos0``/``pos1``/``two`` are indexed by location order inside the slice,
    which is also the id order.
    """
    first: int
    count: int
    cnot_c: np.ndarray = field(default_factory=lambda: _NO_POSITIONS)
    cnot_t: np.ndarray = field(default_factory=lambda: _NO_POSITIONS)
    swap_to: np.ndarray = field(default_factory=lambda: _NO_POSITIONS)
    swap_from: np.ndarray = field(default_factory=lambda: _NO_POSITIONS)
    h: np.ndarray = field(default_factory=lambda: _NO_POSITIONS)
    prep: np.ndarray = field(default_factory=lambda: _NO_POSITIONS)
    # (template id, position, flipped plane)
    reads: Tuple[Tuple[int, int, Basis], ...] = ()
    pos0: np.ndarray = field(default_factory=lambda: _NO_POSITIONS)
    pos1: np.ndarray = field(default_factory=lambda: _NO_POSITIONS)
    two: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def end(self) -> int:
        return self.first + self.count

    def apply(self, frame: PackedFrame) -> None:
        x, z = frame.x, frame.z
        if len(self.cnot_c):
            x[self.cnot_t] ^= x[self.cnot_c]
            z[self.cnot_c] ^= z[self.cnot_t]
        if len(self.swap_to):
            x[self.swap_to] = x[self.swap_from]
            z[self.swap_to] = z[self.swap_from]
        if len(self.h):
            x[self.h], z[self.h] = z[self.h], x[self.h]
        if len(self.prep):
            x[self.prep] = 0
            z[self.prep] = 0

    def inject(self, frame: PackedFrame, offsets: np.ndarray, trials: np.ndarray, codes: np.ndarray) -> None:
        """Apply faults given by slice-relative location index and fault code."""
        two = self.two[offsets]
        pair = 1 + codes % 15
        letters0 = np.where(two, pair & 3, 1 + codes % 3)
        frame.toggle(self.pos0[offsets], trials, letters0)
        if two.any():
            frame.toggle(self.pos1[offsets[two]], trials[two], pair[two] >> 2)

    def read(self, frame: PackedFrame, readouts: Dict[int, np.ndarray]) -> None:
        for template_id, pos, flipped_by in self.reads:
            readouts[template_id] = frame.plane(flipped_by)[pos].copy()


def compile_slices(slices: Sequence[Sequence[Location]], position_of, first: int = 0) -> List[SliceProgram]:
    """Compile template slices; ``position_of`` maps template positions to line positions."""
    programs = []
    for s in slices:
        cnot_c, cnot_t, swap_a, swap_b, h, prep, reads = [], [], [], [], [], [], []
        pos0, pos1, two = [], [], []
        for loc in s:
            positions = [position_of(p) for p in loc.positions]
            pos0.append(positions[0])
            pos1.append(positions[1] if loc.kind.is_two_qubit else -1)
            two.append(loc.kind.is_two_qubit)
            if loc.kind is K.CNOT:
                cnot_c.append(positions[0])
                cnot_t.append(positions[1])
            elif loc.kind is K.SWAP:
                swap_a.append(positions[0])
                swap_b.append(positions[1])
            elif loc.kind is K.H:
                h.append(positions[0])
            elif loc.kind.is_prep:
                prep.append(positions[0])
            elif loc.kind is K.MEAS_Z:
                reads.append((loc.id, positions[0], Basis.X))
            elif loc.kind is K.MEAS_X:
                reads.append((loc.id, positions[0], Basis.Z))

        def arr(values):
            return np.asarray(values, dtype=np.int64)

        programs.append(SliceProgram(
            first=first, count=len(s),
            cnot_c=arr(cnot_c), cnot_t=arr(cnot_t),
            swap_to=arr(swap_a + swap_b), swap_from=arr(swap_b + swap_a),
            h=arr(h), prep=arr(prep), reads=tuple(reads),
            pos0=arr(pos0), pos1=arr(pos1), two=np.asarray(two, dtype=bool),
        ))
        first += len(s)
    return programs
