"""
Simulation service: co-simulates the Pauli frame and the decoder through the
CNOT extended rectangle and aggregates trial outcomes.

Trials run in batches. The frame is bit-packed over trials and every decoder
bin is an int16 array with one entry per trial, so a batch walks the gadget
tree once.
"""
import logging
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from multiprocessing import Pool
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import CircuitError
from ..models.circuit import Circuit, Location
from ..models.code412 import (
    BLOCK_SIZE, CORRECTION_ROLES, DATA_PAIRS, data_sub_blocks, logical_support, pitch,
)
from ..models.gadget import ExRec, GadgetTemplate, PartStyle
from ..models.pauli import Basis, PauliLetter
from ..models.schedule import PackedFrame, SliceProgram, compile_slices, pack, unpack
from ..models.weights import BIN_FIELD, BIN_FIELDS, FIELD_INDEX, WEIGHT_INF
from ..utils.run_utils import chunk_ranges, trial_rng
from .builder_service import BuilderService
from .decoder_service import DecoderService

logger = logging.getLogger(__name__)

Placement = Dict[int, Tuple[PauliLetter, ...]]

PHYSICAL_WEIGHT = 1
IMMUNE_BASIS = {'prep_z': Basis.Z, 'prep_x': Basis.X}
# codes 0..44 cover the 15 two-qubit and, modulo 3, the 3 one-qubit Paulis uniformly
FAULT_CODES = 45
_NO_FAULT = 1 << 62
_CARRIED = (FIELD_INDEX['ag1'], FIELD_INDEX['ag2'], FIELD_INDEX['joint'])


def _bi(basis: Basis) -> int:
    return int(basis) - 1


@dataclass(frozen=True)
class ExactErrors:
    count: int


@dataclass(frozen=True)
class Iid:
    p: float


@dataclass
class TrialConfig:
    level: int
    mode: Union[ExactErrors, Iid]
    seed: int = 0
    decoder_mode: str = 'literal'
    trial_index: int = 0

    def __post_init__(self):
        if isinstance(self.mode, ExactErrors) and self.mode.count < 0:
            raise ValueError('error count must be non-negative')
        if isinstance(self.mode, Iid) and not 0.0 <= self.mode.p <= 1.0:
            raise ValueError('p must lie in [0, 1]')


@dataclass
class TrialOutcome:
    success_x: bool
    success_z: bool
    odd_syndromes: Dict[int, int] = field(default_factory=dict)
    aborted: bool = False

    @property
    def success(self) -> bool:
        return self.success_x and self.success_z and not self.aborted


@dataclass
class RunSummary:
    level: int
    mode: str
    parameter: float
    trials: int = 0
    failures: int = 0
    aborted: int = 0

    @property
    def estimate(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    @property
    def std_error(self) -> float:
        if not self.trials:
            return 0.0
        r = self.estimate
        return math.sqrt(r * (1.0 - r) / self.trials)

    def add(self, outcome: TrialOutcome) -> None:
        self.trials += 1
        if outcome.aborted:
            self.aborted += 1
        elif not outcome.success:
            self.failures += 1

    def merge(self, other: 'RunSummary') -> 'RunSummary':
        return RunSummary(self.level, self.mode, self.parameter, self.trials + other.trials,
                          self.failures + other.failures, self.aborted + other.aborted)

    def to_dict(self) -> dict:
        data = asdict(self)
        data.update({'estimate': self.estimate, 'std_error': self.std_error,
                     'lo': max(0.0, self.estimate - 2 * self.std_error),
                     'hi': min(1.0, self.estimate + 2 * self.std_error)})
        return data


@dataclass
class BatchOutcome:
    """Per-trial verdicts of one batch; ``odd`` counts odd syndromes per level."""
    success_x: np.ndarray
    success_z: np.ndarray
    aborted: np.ndarray
    odd: np.ndarray

    @property
    def trials(self) -> int:
        return len(self.aborted)

    @property
    def failed(self) -> np.ndarray:
        return ~self.aborted & ~(self.success_x & self.success_z)

    def trial(self, index: int) -> TrialOutcome:
        odd = {level: int(n) for level, n in enumerate(self.odd[:, index]) if n}
        return TrialOutcome(bool(self.success_x[index]), bool(self.success_z[index]), odd,
                            aborted=bool(self.aborted[index]))

    def summarize(self, level: int, mode: str, parameter: float) -> RunSummary:
        return RunSummary(level, mode, parameter, self.trials, int(self.failed.sum()),
                          int(self.aborted.sum()))


@dataclass
class SingleErrorCensus:
    level: int
    locations: int
    r1: float
    failing: List[Tuple[int, str, str]] = field(default_factory=list)
    by_letter: Dict[str, int] = field(default_factory=dict)
    # failing patterns made only of X (resp. Z) letters
    by_type: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class FaultBatch:
    """Faults of a batch sorted by location id; ``codes`` index :data:`FAULT_CODES`."""
    trials: int
    ids: np.ndarray
    owners: np.ndarray
    codes: np.ndarray

    @classmethod
    def from_lists(cls, trials: int, ids: Sequence[np.ndarray], codes: Sequence[np.ndarray]) -> 'FaultBatch':
        flat_ids = np.concatenate(list(ids) or [np.zeros(0, np.int64)]).astype(np.int64)
        flat_codes = np.concatenate(list(codes) or [np.zeros(0, np.int64)]).astype(np.int64)
        owners = np.repeat(np.arange(len(ids), dtype=np.int64), [len(a) for a in ids])
        order = np.argsort(flat_ids, kind='stable')
        return cls(trials, flat_ids[order], owners[order], flat_codes[order])

    @classmethod
    def from_placements(cls, placements: Sequence[Placement]) -> 'FaultBatch':
        ids, codes = [], []
        for placement in placements:
            ids.append(np.fromiter(placement.keys(), dtype=np.int64, count=len(placement)))
            codes.append(np.array([letters_code(p) for p in placement.values()], dtype=np.int64))
        return cls.from_lists(len(placements), ids, codes)


def letters_code(paulis: Tuple[int, ...]) -> int:
    """Fault code of a nontrivial Pauli, one letter per output qubit."""
    if len(paulis) == 2:
        return (int(paulis[0]) | int(paulis[1]) << 2) - 1
    return int(paulis[0]) - 1


def code_letters(code: int, two_qubit: bool) -> Tuple[PauliLetter, ...]:
    if two_qubit:
        pair = 1 + code % 15
        return (PauliLetter(pair & 3), PauliLetter(pair >> 2))
    return (PauliLetter(1 + code % 3),)


def draw_exact(total: int, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """``count`` distinct location ids and their fault codes."""
    if count > total:
        raise ValueError(f'cannot place {count} errors on {total} locations')
    ids = np.sort(rng.choice(total, size=count, replace=False)) if count else np.zeros(0, np.int64)
    return ids, rng.integers(0, FAULT_CODES, size=count)


def draw_iid(total: int, p: float, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Each of ``total`` locations fails independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError('p must lie in [0, 1]')
    return draw_exact(total, int(rng.binomial(total, p)), rng)


def _placement(locations: List[Location], ids: np.ndarray, codes: np.ndarray) -> Placement:
    return {int(i): code_letters(int(c), locations[int(i)].kind.is_two_qubit) for i, c in zip(ids, codes)}


def inject_exact(circuit: Circuit, count: int, rng: np.random.Generator,
                 locations: Optional[List[Location]] = None) -> Placement:
    """Errors on exactly ``count`` distinct locations chosen uniformly."""
    locations = locations if locations is not None else circuit.locations
    return _placement(locations, *draw_exact(len(locations), count, rng))


def inject_iid(circuit: Circuit, p: float, rng: np.random.Generator,
               locations: Optional[List[Location]] = None) -> Placement:
    """Each location fails independently with probability ``p``."""
    locations = locations if locations is not None else circuit.locations
    return _placement(locations, *draw_iid(len(locations), p, rng))


def sample_faults(total: int, kind: str, parameter: float, seed: int, indices: Sequence[int]) -> FaultBatch:
    """Faults for campaign trials ``indices``; each trial draws from its own stream."""
    ids, codes = [], []
    for index in indices:
        rng = trial_rng(seed, index)
        if kind == 'exact':
            drawn = draw_exact(total, int(parameter), rng)
        else:
            drawn = draw_iid(total, float(parameter), rng)
        ids.append(drawn[0])
        codes.append(drawn[1])
    return FaultBatch.from_lists(len(ids), ids, codes)


@dataclass
class _PieceProgram:
    template: GadgetTemplate
    slices: List[SliceProgram]
    blocks: np.ndarray
    flags: np.ndarray


@dataclass
class _Program:
    """A level-1 gadget compiled for fixed block bases."""
    kind: str
    bases: Tuple[int, ...]
    pieces: List[_PieceProgram]
    count: int


@dataclass
class _GadgetResult:
    # block base -> basis index -> weight per trial
    weights: Dict[int, Dict[int, np.ndarray]] = field(default_factory=dict)
    readout: Optional[np.ndarray] = None


class TrialRunner:
    """Executes the level-``level`` CNOT exRec on batches of trials.

    Location ids are allocated in the builder's execution order, so a fault
    at id ``k`` hits the same location as id ``k`` of the built exRec circuit.
    """

    def __init__(self, level: int, builder: BuilderService, decoder: DecoderService):
        builder.check_level(level)
        self.level = level
        self.builder = builder
        self.decoder = decoder
        self.total = builder.exrec_count(level)
        self.bases = (0, pitch(level))
        self.width = 2 * pitch(level)
        self._exrec: Optional[ExRec] = None
        self._programs: Dict[Tuple[str, Tuple[int, ...]], _Program] = {}
        self._raises: Dict[str, Dict[int, List[Tuple[int, int, int, Tuple[int, ...]]]]] = {}
        self._layers: Dict[Tuple[str, int], List[Tuple[List[Location], int, List[bool]]]] = {}
        self._supports: Dict[Tuple[int, int, Basis], np.ndarray] = {}
        self._padding_flags = self._flag_table(builder.templates['memory'])[0]
        self._reset(FaultBatch(1, *(np.zeros(0, np.int64),) * 3))

    @property
    def exrec(self) -> ExRec:
        """The materialised exRec, built on first use."""
        if self._exrec is None:
            self._exrec = self.builder.build_cnot_exrec(self.level)
        return self._exrec

    @property
    def locations(self) -> List[Location]:
        return self.exrec.circuit.locations

    def _reset(self, faults: FaultBatch) -> None:
        trials = faults.trials
        self.trials = trials
        self.frame = PackedFrame(self.width, trials)
        self.bins = {lvl: np.full((self.width // pitch(lvl), 2, len(BIN_FIELDS), trials), WEIGHT_INF,
                                  dtype=np.int16)
                     for lvl in range(1, self.level + 1)}
        self.odd = np.zeros((self.level + 1, trials), dtype=np.int32)
        self.aborted = np.zeros(trials, dtype=bool)
        self.inject = True
        self._faults = faults
        self._cursor = 0
        self._next_id = 0
        self._upcoming = int(faults.ids[0]) if len(faults.ids) else _NO_FAULT
        self._inf = np.full(trials, WEIGHT_INF, dtype=np.int16)

    # Public entry points

    def run(self, placement: Placement) -> TrialOutcome:
        return self.run_batch(FaultBatch.from_placements([placement])).trial(0)

    def run_batch(self, faults: FaultBatch) -> BatchOutcome:
        self._reset(faults)
        for kind, bases in self._exrec_plan():
            self._run_gadget(kind, self.level, bases)
        if self._next_id != self.total:
            raise CircuitError(f'walked {self._next_id} locations, expected {self.total}')
        self.errorless_pass()
        outcome = self.classify()
        if outcome.aborted.any():
            logger.warning('%d of %d trials aborted on an inconsistent decoder state',
                           int(outcome.aborted.sum()), outcome.trials)
        return outcome

    def errorless_pass(self) -> None:
        """One EC per top-level block with injection switched off."""
        self.inject = False
        for base in self.bases:
            self._run_gadget('ec', self.level, (base,))

    def classify(self) -> BatchOutcome:
        level = self.level
        success = {basis: np.ones(self.trials, dtype=bool) for basis in Basis}
        for base in self.bases:
            subs = data_sub_blocks(base, level)
            for basis in Basis:
                bits = [unpack(self.frame.parity(self._support(level - 1, s, basis.other), basis), self.trials)
                        for s in subs]
                (a1, b1), (a2, b2) = DATA_PAIRS[basis]
                success[basis] &= ~((bits[a1] ^ bits[b1]) | (bits[a2] ^ bits[b2]))
        return BatchOutcome(success[Basis.X], success[Basis.Z], self.aborted.copy(), self.odd.copy())

    def _exrec_plan(self) -> List[Tuple[str, Tuple[int, ...]]]:
        first, second = self.bases
        return [('ec', (first,)), ('ec', (second,)), ('cnot', self.bases), ('ec', (first,)), ('ec', (second,))]

    # Fault bookkeeping

    def _claim(self, count: int) -> Tuple[int, bool]:
        """Allocate ``count`` ids; the flag tells whether any fault falls inside them."""
        start = self._next_id
        self._next_id += count
        return start, self.inject and self._upcoming < self._next_id

    def _take(self, stop: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        faults = self._faults
        lo = self._cursor
        hi = lo + int(np.searchsorted(faults.ids[lo:], stop, side='left'))
        self._cursor = hi
        self._upcoming = int(faults.ids[hi]) if hi < len(faults.ids) else _NO_FAULT
        return faults.ids[lo:hi], faults.owners[lo:hi], faults.codes[lo:hi]

    # Gadget execution

    def _run_gadget(self, kind: str, level: int, bases: Tuple[int, ...]) -> _GadgetResult:
        if level == 1:
            return self._run_program(self._program(kind, bases))
        template = self.builder.templates[kind]
        result = _GadgetResult()
        width = pitch(level - 1)
        for piece in template.pieces():
            self._enter_part(piece, level, bases)
            raises = self._raise_table(piece)
            readouts: Dict[int, np.ndarray] = {}
            for template_slice, depth, padded in self._layer_plan(piece, level):
                idle: List[int] = []
                for loc, pad in zip(template_slice, padded):
                    subs = self.builder.sub_bases(loc, bases, level)
                    unit_kind, unit_bases = self.builder.unit(loc, subs)
                    per_sub: Dict[int, Dict[int, np.ndarray]] = {}
                    if unit_kind is not None:
                        body = self._run_gadget(unit_kind, level - 1, unit_bases)
                        per_sub.update(body.weights)
                        if body.readout is not None:
                            readouts[loc.id] = body.readout
                    if self.builder.needs_ec(unit_kind):
                        for sub in subs:
                            per_sub.update(self._run_gadget('ec', level - 1, (sub,)).weights)
                    self._raise(level, bases, raises[loc.id], subs, per_sub)
                    if pad:
                        idle.extend(subs)
                if idle:
                    self._pad(idle, width)
            self._exit_part(piece, kind, level, bases, readouts, result)
        return result

    def _run_program(self, program: _Program) -> _GadgetResult:
        start, faulty = self._claim(program.count)
        result = _GadgetResult()
        for piece in program.pieces:
            self._enter_part(piece.template, 1, program.bases)
            words: Dict[int, np.ndarray] = {}
            for sl in piece.slices:
                sl.apply(self.frame)
                if faulty and self._upcoming < start + sl.end:
                    ids, owners, codes = self._take(start + sl.end)
                    sl.inject(self.frame, ids - (start + sl.first), owners, codes)
                sl.read(self.frame, words)
            view = self.bins[1][piece.blocks]
            self.bins[1][piece.blocks] = np.minimum(view, piece.flags[..., None])
            readouts = {i: unpack(w, self.trials) for i, w in words.items()}
            self._exit_part(piece.template, program.kind, 1, program.bases, readouts, result)
        return result

    def _pad(self, subs: List[int], width: int) -> None:
        """Stretched Memory on every position of ``subs``, in sub then position order."""
        count = len(subs) * width
        start, faulty = self._claim(count)
        if faulty:
            ids, owners, codes = self._take(start + count)
            k = ids - start
            positions = np.asarray(subs, dtype=np.int64)[k // width] + k % width
            self.frame.toggle(positions, owners, 1 + codes % 3)
        bins = self.bins[1]
        for sub in subs:
            lo = sub // BLOCK_SIZE
            hi = lo + max(1, width // BLOCK_SIZE)
            bins[lo:hi] = np.minimum(bins[lo:hi], self._padding_flags[None, :, :, None])

    def _raise(self, level: int, bases: Tuple[int, ...], raises, subs: Tuple[int, ...],
               per_sub: Dict[int, Dict[int, np.ndarray]]) -> None:
        step = pitch(level)
        below = self.bins[level - 1]
        below_step = pitch(level - 1)
        cache: Dict[Tuple[int, int], np.ndarray] = {}

        def weight(component: int, bi: int) -> np.ndarray:
            key = (component, bi)
            if key not in cache:
                sub = subs[component]
                if sub in per_sub:
                    cache[key] = per_sub[sub][bi]
                else:
                    cache[key] = self.decoder.idle_weight_batch(below[sub // below_step, bi])
            return cache[key]

        bins = self.bins[level]
        for block, bi, field_index, component in raises:
            if len(component) == 2:
                w = np.maximum(weight(component[0], bi), weight(component[1], bi))
            else:
                w = weight(component[0], bi)
            row = bins[bases[block] // step, bi, field_index]
            np.minimum(row, w, out=row)

    def _enter_part(self, piece: GadgetTemplate, level: int, bases: Tuple[int, ...]) -> None:
        bins = self.bins[level]
        step = pitch(level)
        if piece.kind in ('cnot', 'cnot_rev'):
            control, target = bases if piece.kind == 'cnot' else bases[::-1]
            c, t = control // step, target // step
            x, z = _bi(Basis.X), _bi(Basis.Z)
            for f in _CARRIED:
                np.minimum(bins[t, x, f], bins[c, x, f], out=bins[t, x, f])
                np.minimum(bins[c, z, f], bins[t, z, f], out=bins[c, z, f])
        elif piece.kind == 'swap':
            a, b = bases[0] // step, bases[1] // step
            bins[[a, b]] = bins[[b, a]]
        elif piece.kind == 'h_layer':
            block = bases[0] // step
            bins[block] = bins[block, ::-1].copy()
        elif piece.style is PartStyle.PREP:
            bins[bases[0] // step] = WEIGHT_INF

    def _exit_part(self, piece: GadgetTemplate, kind: str, level: int, bases: Tuple[int, ...],
                   readouts: Dict[int, np.ndarray], result: _GadgetResult) -> None:
        base = bases[0]
        block = base // pitch(level)
        bins = self.bins[level]
        if piece.style is PartStyle.EC:
            weights = {}
            for basis in Basis:
                bi = _bi(basis)
                first, second = piece.readouts[basis]
                odd = readouts[first] ^ readouts[second]
                self.odd[level] += odd
                if IMMUNE_BASIS.get(kind) is basis:
                    self._correct(piece, level, base, basis, 0, odd)
                    bins[block, bi] = WEIGHT_INF
                    weights[bi] = self._inf
                    continue
                outcome = self.decoder.match_batch(bins[block, bi], odd, level, base, basis)
                self.aborted |= outcome.inconsistent
                for pair in (0, 1):
                    self._correct(piece, level, base, basis, pair, outcome.correction == pair)
                ag1 = np.minimum(bins[block, bi, FIELD_INDEX['g1']], outcome.c1)
                ag2 = np.minimum(bins[block, bi, FIELD_INDEX['g2']], outcome.c2)
                bins[block, bi] = WEIGHT_INF
                bins[block, bi, FIELD_INDEX['ag1']] = ag1
                bins[block, bi, FIELD_INDEX['ag2']] = ag2
                weights[bi] = outcome.ce
            result.weights[base] = weights
        elif piece.style is PartStyle.MEAS:
            measured = piece.measured
            flipped_by = measured.other
            order = sorted((loc for loc in piece.circuit.locations if loc.kind.is_measurement),
                           key=lambda loc: loc.positions[0])
            m = [readouts[loc.id] for loc in order]
            result.readout = m[0] ^ m[1] if measured is Basis.Z else m[0] ^ m[2]
            detected = m[0] ^ m[1] ^ m[2] ^ m[3]
            idle = self.decoder.idle_weight_batch(bins[block, _bi(flipped_by)])
            result.weights[base] = {
                _bi(flipped_by): np.where(detected, 0, idle).astype(np.int16),
                _bi(measured): self._inf,
            }

    def _correct(self, piece: GadgetTemplate, level: int, base: int, basis: Basis, pair: int,
                 mask: np.ndarray) -> None:
        if not mask.any():
            return
        role = CORRECTION_ROLES[basis][pair]
        sub = base + piece.final_position(role) * pitch(level - 1)
        self.frame.apply_logical(self._support(level - 1, sub, basis), basis, pack(mask, self.frame.words))

    # Compiled tables

    def _support(self, level: int, base: int, basis: Basis) -> np.ndarray:
        key = (level, base, basis)
        if key not in self._supports:
            self._supports[key] = np.asarray(logical_support(level, base, basis), dtype=np.int64)
        return self._supports[key]

    def _flag_table(self, piece: GadgetTemplate) -> np.ndarray:
        """Level-1 flags of a part as ``(block, basis, field)`` weights."""
        table = np.full((piece.blocks, 2, len(BIN_FIELDS)), WEIGHT_INF, dtype=np.int16)
        for effects in self.decoder.effect_map(piece).values():
            for effect in effects:
                table[effect.block, _bi(effect.basis), FIELD_INDEX[BIN_FIELD[effect.cls]]] = PHYSICAL_WEIGHT
        return table

    def _raise_table(self, piece: GadgetTemplate) -> Dict[int, List[Tuple[int, int, int, Tuple[int, ...]]]]:
        if piece.kind not in self._raises:
            self._raises[piece.kind] = {
                loc_id: [(e.block, _bi(e.basis), FIELD_INDEX[BIN_FIELD[e.cls]], e.component) for e in effects]
                for loc_id, effects in self.decoder.effect_map(piece).items()
            }
        return self._raises[piece.kind]

    def _layer_plan(self, piece: GadgetTemplate, level: int) -> List[Tuple[List[Location], int, List[bool]]]:
        key = (piece.kind, level)
        if key not in self._layers:
            plan = []
            for s in piece.circuit.slices:
                depth = self.builder.layer_depth(s, level)
                plan.append((s, depth, [self.builder.unit_depth(loc, level) < depth for loc in s]))
            self._layers[key] = plan
        return self._layers[key]

    def _program(self, kind: str, bases: Tuple[int, ...]) -> _Program:
        key = (kind, bases)
        if key not in self._programs:
            template = self.builder.templates[kind]

            def position_of(p: int) -> int:
                return bases[p // BLOCK_SIZE] + p % BLOCK_SIZE

            pieces, first = [], 0
            for piece in template.pieces():
                slices = compile_slices(piece.circuit.slices, position_of, first)
                first = slices[-1].end if slices else first
                blocks = np.asarray([b // BLOCK_SIZE for b in bases[:piece.blocks]], dtype=np.int64)
                pieces.append(_PieceProgram(piece, slices, blocks, self._flag_table(piece)))
            self._programs[key] = _Program(kind, bases, pieces, first)
        return self._programs[key]


# Worker-side cache so each process compiles a runner once.
_WORKER_RUNNERS: Dict[Tuple, TrialRunner] = {}


def _runner_for(level: int, decoder_mode: str, ec_after_memory: bool, max_level: int,
                max_locations: int) -> TrialRunner:
    key = (level, decoder_mode, ec_after_memory, max_level, max_locations)
    if key not in _WORKER_RUNNERS:
        builder = BuilderService(ec_after_memory=ec_after_memory, max_level=max_level,
                                 max_locations=max_locations)
        _WORKER_RUNNERS[key] = TrialRunner(level, builder, DecoderService(decoder_mode))
    return _WORKER_RUNNERS[key]


def _run_chunk(args: Tuple) -> RunSummary:
    """Run trials [start, stop) of a campaign as one batch; the unit of parallel work."""
    (level, decoder_mode, ec_after_memory, max_level, max_locations,
     kind, parameter, seed, start, stop) = args
    runner = _runner_for(level, decoder_mode, ec_after_memory, max_level, max_locations)
    faults = sample_faults(runner.total, kind, parameter, seed, range(start, stop))
    return runner.run_batch(faults).summarize(level, kind, parameter)


class SimulationService:
    """Service class for trial campaigns."""

    def __init__(self, decoder_mode: str = 'literal', workers: int = 1, ec_after_memory: bool = False,
                 max_level: int = 4, max_locations: int = 5_000_000, chunk_size: int = 4096):
        self.decoder_mode = decoder_mode
        self.workers = max(1, int(workers))
        self.ec_after_memory = ec_after_memory
        self.max_level = max_level
        self.max_locations = max_locations
        self.chunk_size = chunk_size

    def runner(self, level: int, decoder_mode: Optional[str] = None) -> TrialRunner:
        return _runner_for(level, decoder_mode or self.decoder_mode, self.ec_after_memory,
                           self.max_level, self.max_locations)

    def run_trial(self, config: TrialConfig) -> TrialOutcome:
        """One trial whose randomness comes from (seed, trial_index)."""
        runner = self.runner(config.level, config.decoder_mode)
        if isinstance(config.mode, ExactErrors):
            kind, parameter = 'exact', config.mode.count
        else:
            kind, parameter = 'iid', config.mode.p
        faults = sample_faults(runner.total, kind, parameter, config.seed, [config.trial_index])
        return runner.run_batch(faults).trial(0)

    def _campaign(self, level: int, kind: str, parameter: float, trials: int, seed: int,
                  workers: Optional[int] = None, chunks: Optional[List[Tuple[int, int]]] = None,
                  on_chunk: Optional[Callable[[Tuple[int, int], RunSummary], None]] = None) -> RunSummary:
        workers = max(1, int(workers or self.workers))
        chunks = chunks if chunks is not None else chunk_ranges(trials, self.chunk_size)
        jobs = [(level, self.decoder_mode, self.ec_after_memory, self.max_level, self.max_locations,
                 kind, parameter, seed, start, stop) for start, stop in chunks]
        total = RunSummary(level, kind, parameter)
        if workers == 1 or len(jobs) <= 1:
            results = map(_run_chunk, jobs)
            for chunk, part in zip(chunks, results):
                total = total.merge(part)
                self._report(chunk, part, total, on_chunk)
        else:
            with Pool(processes=workers) as pool:
                for chunk, part in zip(chunks, pool.imap(_run_chunk, jobs)):
                    total = total.merge(part)
                    self._report(chunk, part, total, on_chunk)
        return total

    @staticmethod
    def _report(chunk, part: RunSummary, total: RunSummary, on_chunk) -> None:
        logger.info('chunk %d-%d: %d/%d failures (running %d/%d)', chunk[0], chunk[1],
                    part.failures, part.trials, total.failures, total.trials)
        if on_chunk is not None:
            on_chunk(chunk, part)

    def estimate_ri(self, level: int, errors: int, trials: int, seed: int,
                    workers: Optional[int] = None) -> RunSummary:
        """Failure fraction with exactly ``errors`` faults per trial."""
        if trials < 1:
            raise ValueError('trials must be at least 1')
        total_locations = self.runner(level).total
        if errors > total_locations:
            raise ValueError(f'cannot place {errors} errors on {total_locations} locations')
        return self._campaign(level, 'exact', errors, trials, seed, workers)

    def run_iid(self, level: int, p: float, trials: int, seed: int, workers: Optional[int] = None,
                skip: Optional[set] = None,
                on_chunk: Optional[Callable[[Tuple[int, int], RunSummary], None]] = None) -> RunSummary:
        """Independent-fault campaign; chunks listed in ``skip`` are left out."""
        if not 0.0 <= p <= 1.0:
            raise ValueError('p must lie in [0, 1]')
        chunks = [c for c in chunk_ranges(trials, self.chunk_size) if not skip or c not in skip]
        return self._campaign(level, 'iid', p, trials, seed, workers, chunks, on_chunk)

    def enumerate_single_errors(self, level: int) -> SingleErrorCensus:
        """Exact r1: every location, every nontrivial Pauli, each location weighted equally."""
        runner = self.runner(level)
        locations = runner.locations
        patterns: List[Tuple[int, int]] = []
        for loc in locations:
            options = 15 if loc.kind.is_two_qubit else 3
            patterns.extend((loc.id, code) for code in range(options))

        failed_by_location: Dict[int, int] = defaultdict(int)
        census = SingleErrorCensus(level, len(locations), 0.0)
        letters: Dict[str, int] = defaultdict(int)
        types = {'X': 0, 'Z': 0}
        for start, stop in chunk_ranges(len(patterns), self.chunk_size):
            chunk = patterns[start:stop]
            ids = [np.array([loc_id], dtype=np.int64) for loc_id, _ in chunk]
            codes = [np.array([code], dtype=np.int64) for _, code in chunk]
            outcome = runner.run_batch(FaultBatch.from_lists(len(chunk), ids, codes))
            for (loc_id, code), failed in zip(chunk, outcome.failed):
                if not failed:
                    continue
                loc = locations[loc_id]
                paulis = code_letters(code, loc.kind.is_two_qubit)
                name = ''.join(p.name for p in paulis)
                census.failing.append((loc_id, loc.kind.value, name))
                letters[name] += 1
                failed_by_location[loc_id] += 1
                for letter in ('X', 'Z'):
                    if set(name) <= {letter, 'I'}:
                        types[letter] += 1

        total = sum(n / (15 if locations[i].kind.is_two_qubit else 3) for i, n in failed_by_location.items())
        census.r1 = total / len(locations) if locations else 0.0
        census.by_letter = dict(letters)
        census.by_type = types
        logger.info('level-%d single-error census: r1=%.6g, %d failing patterns (X-type %d, Z-type %d)',
                    level, census.r1, len(census.failing), types['X'], types['Z'])
        return census
