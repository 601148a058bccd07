"""
Message-passing decoder service.

Flags raised at template locations are binned by the effect a unit error there
would have at the block's next syndrome-extraction point; odd syndromes are
matched to the lightest consistent bin and the match's complement sets the
weight handed to the level above.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..errors import DecoderInconsistencyError
from ..models.circuit import LocationKind
from ..models.code412 import BLOCK_SIZE, DATA_OFFSETS, DATA_PAIRS, Parity, pair_class
from ..models.gadget import GadgetTemplate, PartStyle
from ..models.pauli import Basis, ErrorFrame, apply_gate, flips_measurement, measurement_basis
from ..models.weights import (
    BIN_FIELDS, INF, WEIGHT_INF, BinSet, EffectClass, Match, MatchOutcome, Weight, format_weight,
    from_stored, wadd, wadd_array, wsub, wsub_array,
)

logger = logging.getLogger(__name__)

DECODER_MODES = ('literal', 'extended')

# component index -> output qubits it covers
COMPONENTS_1Q: Tuple[Tuple[int, ...], ...] = ((0,),)
COMPONENTS_2Q: Tuple[Tuple[int, ...], ...] = ((0,), (1,), (0, 1))


@dataclass(frozen=True)
class Effect:
    basis: Basis
    component: Tuple[int, ...]
    block: int
    cls: EffectClass


EffectMap = Dict[int, List[Effect]]

_EC_CLASSES = {
    (1, (1, 0)): EffectClass.AG1,
    (1, (0, 1)): EffectClass.AG2,
    (1, (0, 0)): EffectClass.A,
    (1, (1, 1)): EffectClass.A,
    (0, (1, 0)): EffectClass.G1,
    (0, (0, 1)): EffectClass.G2,
    (0, (1, 1)): EffectClass.JOINT,
}

_GATE_CLASSES = {
    (1, 0): EffectClass.NEXT_G1,
    (0, 1): EffectClass.NEXT_G2,
    (1, 1): EffectClass.JOINT,
}


def raise_flag(bins: BinSet, cls: EffectClass, w: Weight) -> None:
    """Lower the bin for ``cls`` to ``w`` if ``w`` is smaller."""
    bins.lower(cls, w)


def raise_correlated_flag(bins: BinSet, cls: Optional[EffectClass], w1: Weight, w2: Weight,
                          singles: Sequence[Optional[EffectClass]] = (None, None)) -> None:
    """Correlated pair after a two-qubit location.

    The pair bin takes the larger of the two single weights; the bins of the
    two single errors are updated as well.
    """
    if cls is not None:
        bins.lower(cls, max(w1, w2))
    for single, w in zip(singles, (w1, w2)):
        if single is not None:
            bins.lower(single, w)


def match_and_correct(bins: BinSet, parity: Parity, mode: str = 'literal') -> MatchOutcome:
    """Select the minimum-weight match for the syndrome and emit carry weights."""
    ag1, ag2, a = bins.ag1, bins.ag2, bins.a
    if parity is Parity.EVEN:
        ce = wadd(ag1, ag2)
        if mode == 'extended':
            ce = min(ce, bins.joint)
        return MatchOutcome(parity.value, Match.NONE, None, wadd(ag1, a), wadd(ag2, a), ce)

    if ag1 == INF and ag2 == INF and a == INF:
        raise DecoderInconsistencyError('odd syndrome with no flag in AG1, AG2 or A')
    # ties resolve in the order AG1, AG2, A
    best = min((ag1, 0), (ag2, 1), (a, 2))[1]
    if best == 0:
        return MatchOutcome(parity.value, Match.AG1, 0, wsub(a, ag1), wadd(ag2, a), wsub(ag2, ag1))
    if best == 1:
        return MatchOutcome(parity.value, Match.AG2, 1, wadd(ag1, a), wsub(a, ag2), wsub(ag1, ag2))
    return MatchOutcome(parity.value, Match.A, None, wsub(ag1, a), wsub(ag2, a), wadd(ag1, ag2))


class BatchMatch(NamedTuple):
    """Match outcomes for a batch of trials; ``correction`` is -1, 0 or 1."""
    correction: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    ce: np.ndarray
    inconsistent: np.ndarray


def match_batch(ag1: np.ndarray, ag2: np.ndarray, a: np.ndarray, joint: np.ndarray,
                odd: np.ndarray, mode: str = 'literal') -> BatchMatch:
    """:func:`match_and_correct` over int16 weight arrays, one entry per trial."""
    even_ce = wadd_array(ag1, ag2)
    if mode == 'extended':
        even_ce = np.minimum(even_ce, joint)
    pick_ag1 = (ag1 <= ag2) & (ag1 <= a)
    pick_ag2 = ~pick_ag1 & (ag2 <= a)
    pick_a = ~pick_ag1 & ~pick_ag2

    c1 = np.where(pick_ag1, wsub_array(a, ag1), np.where(pick_ag2, wadd_array(ag1, a), wsub_array(ag1, a)))
    c2 = np.where(pick_ag1, wadd_array(ag2, a), np.where(pick_ag2, wsub_array(a, ag2), wsub_array(ag2, a)))
    ce = np.where(pick_ag1, wsub_array(ag2, ag1), np.where(pick_ag2, wsub_array(ag1, ag2), wadd_array(ag1, ag2)))
    correction = np.where(pick_ag1, 0, np.where(pick_ag2, 1, -1)).astype(np.int8)

    inconsistent = odd & (ag1 >= WEIGHT_INF) & (ag2 >= WEIGHT_INF) & (a >= WEIGHT_INF)
    return BatchMatch(
        correction=np.where(odd & ~inconsistent & ~pick_a, correction, -1).astype(np.int8),
        c1=np.where(odd, c1, wadd_array(ag1, a)).astype(np.int16),
        c2=np.where(odd, c2, wadd_array(ag2, a)).astype(np.int16),
        ce=np.where(odd, ce, even_ce).astype(np.int16),
        inconsistent=inconsistent,
    )


def idle_weight_batch(ag1: np.ndarray, ag2: np.ndarray, joint: np.ndarray, mode: str = 'literal') -> np.ndarray:
    w = wadd_array(ag1, ag2)
    if mode == 'extended':
        w = np.minimum(w, joint)
    return w


def carry_over(bins: BinSet, outcome: Optional[MatchOutcome]) -> BinSet:
    """Bins for the next cycle: AG from the G accumulation and the match's carry weights."""
    if outcome is None:
        return BinSet()
    return BinSet(ag1=min(bins.g1, outcome.c1), ag2=min(bins.g2, outcome.c2))


def idle_weight(bins: BinSet, mode: str = 'literal') -> Weight:
    """Weight of an encoded error on a block that is not followed by its own EC."""
    w = wadd(bins.ag1, bins.ag2)
    if mode == 'extended':
        w = min(w, bins.joint)
    return w


def _unit_frame(positions: Sequence[int], component: Tuple[int, ...], basis: Basis) -> ErrorFrame:
    frame = ErrorFrame()
    for index in component:
        frame.toggle(positions[index], int(basis))
    return frame


def _residual_pairs(frame: ErrorFrame, template: GadgetTemplate, block: int, basis: Basis) -> Tuple[int, int]:
    offset = block * BLOCK_SIZE
    bits = [1 if frame.bits(offset + template.final_position(role)) & int(basis) else 0 for role in range(4)]
    return pair_class(bits, basis)


def compute_effect_map(template: GadgetTemplate) -> EffectMap:
    """Propagate a unit error from every location to the part's extraction point."""
    circuit = template.circuit
    effects: EffectMap = {}
    for loc in circuit.locations:
        components = COMPONENTS_2Q if loc.kind.is_two_qubit else COMPONENTS_1Q
        found: List[Effect] = []
        for basis in Basis:
            if loc.kind.is_measurement and measurement_basis(loc.kind).other is not basis:
                continue
            for component in components:
                found.extend(_effects_of(template, loc, component, basis))
        effects[loc.id] = found
    return effects


def _effects_of(template: GadgetTemplate, loc, component: Tuple[int, ...], basis: Basis) -> List[Effect]:
    circuit = template.circuit
    frame = _unit_frame(loc.positions, component, basis)
    flips: Dict[int, int] = {}

    if loc.kind.is_measurement:
        flips[loc.id] = 1
        if template.style is PartStyle.MEAS:
            role = DATA_OFFSETS.index(loc.positions[0] % BLOCK_SIZE)
            pair = 0 if role in DATA_PAIRS[basis][0] else 1
            cls = EffectClass.NEXT_G1 if pair == 0 else EffectClass.NEXT_G2
            return [Effect(basis, component, loc.positions[0] // BLOCK_SIZE, cls)]

    for s in circuit.slices[loc.timeslice + 1:]:
        for other in s:
            if other.kind.is_measurement:
                if flips_measurement(frame, other.positions[0], measurement_basis(other.kind)):
                    flips[other.id] = 1
            elif other.kind is not LocationKind.MEMORY:
                apply_gate(frame, other.kind, other.positions)

    if template.style is PartStyle.EC:
        first, second = template.readouts[basis]
        f = flips.get(first, 0) ^ flips.get(second, 0)
        cls = _EC_CLASSES.get((f, _residual_pairs(frame, template, 0, basis)))
        return [Effect(basis, component, 0, cls)] if cls is not None else []

    result = []
    for block in range(template.blocks):
        cls = _GATE_CLASSES.get(_residual_pairs(frame, template, block, basis))
        if cls is not None:
            result.append(Effect(basis, component, block, cls))
    return result


class DecoderService:
    """Decoder configuration, cached effect maps and the optional outcome log."""

    def __init__(self, mode: str = 'literal', record: bool = False):
        if mode not in DECODER_MODES:
            raise ValueError(f'unknown decoder mode {mode!r}')
        self.mode = mode
        self.record = record
        self.records: List[dict] = []
        self._effect_maps: Dict[str, EffectMap] = {}

    def effect_map(self, template: GadgetTemplate) -> EffectMap:
        if template.kind not in self._effect_maps:
            self._effect_maps[template.kind] = compute_effect_map(template)
        return self._effect_maps[template.kind]

    def match(self, bins: BinSet, parity: Parity, level: int = 0, base: int = 0,
              basis: Basis = Basis.X) -> MatchOutcome:
        outcome = match_and_correct(bins, parity, self.mode)
        if self.record:
            row = {'level': level, 'base': base, 'basis': basis.name}
            row.update({f'bin_{k}': v for k, v in bins.to_dict().items()})
            row.update(outcome.to_dict())
            row['correction'] = outcome.correction_name(basis)
            self.records.append(row)
        return outcome

    def match_batch(self, bins: np.ndarray, odd: np.ndarray, level: int = 0, base: int = 0,
                    basis: Basis = Basis.X) -> BatchMatch:
        """Batched match on one block's ``(field, trial)`` bin array."""
        ag1, ag2, a, _, _, joint = bins
        outcome = match_batch(ag1, ag2, a, joint, odd, self.mode)
        if self.record:
            self._record_batch(bins, odd, outcome, level, base, basis)
        return outcome

    def _record_batch(self, bins: np.ndarray, odd: np.ndarray, outcome: BatchMatch,
                      level: int, base: int, basis: Basis) -> None:
        names = {Basis.X: ('X1', 'X3'), Basis.Z: ('Z1', 'Z2')}[basis]
        for t in range(len(odd)):
            row = {'level': level, 'base': base, 'basis': basis.name}
            row.update({f'bin_{name}': format_weight(from_stored(int(bins[i, t])))
                        for i, name in enumerate(BIN_FIELDS)})
            picked = 'None'
            if odd[t]:
                values = (bins[0, t], bins[1, t], bins[2, t])
                picked = ('AG1', 'AG2', 'A')[min(range(3), key=lambda i: (values[i], i))]
            correction = int(outcome.correction[t])
            row.update({
                'parity': 'odd' if odd[t] else 'even',
                'match': picked,
                'correction': names[correction] if correction >= 0 else 'none',
                'c1': format_weight(from_stored(int(outcome.c1[t]))),
                'c2': format_weight(from_stored(int(outcome.c2[t]))),
                'ce': format_weight(from_stored(int(outcome.ce[t]))),
            })
            self.records.append(row)

    def idle_weight(self, bins: BinSet) -> Weight:
        return idle_weight(bins, self.mode)

    def idle_weight_batch(self, bins: np.ndarray) -> np.ndarray:
        return idle_weight_batch(bins[0], bins[1], bins[5], self.mode)

    def dump_outcomes(self, path: str) -> int:
        """Write recorded match outcomes as CSV; returns the row count."""
        frame = pd.DataFrame(self.records, columns=[
            'level', 'base', 'basis', 'bin_ag1', 'bin_ag2', 'bin_a', 'bin_g1', 'bin_g2', 'bin_joint',
            'parity', 'match', 'correction', 'c1', 'c2', 'ce',
        ])
        frame.to_csv(path, index=False)
        logger.info('wrote %d match outcomes to %s', len(frame), path)
        return len(frame)

    @staticmethod
    def table_row(ag1: Weight, ag2: Weight, a: Weight, parity: Parity, mode: str = 'literal') -> dict:
        """Match-table row for explicit bin values, as plain strings."""
        outcome = match_and_correct(BinSet(ag1=ag1, ag2=ag2, a=a), parity, mode)
        row = outcome.to_dict()
        row.update({'ag1': format_weight(ag1), 'ag2': format_weight(ag2), 'a': format_weight(a)})
        return row
