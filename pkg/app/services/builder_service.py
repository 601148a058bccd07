"""
Builder service for nearest-neighbour [[4,1,2]] gadgets.

Level-1 templates are written out gate by gate; higher levels replace every
template location with the encoded gadget of the same kind and follow each
encoded operation with error correction on the blocks it touched.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import CircuitError, ResourceLimitError
from ..models.circuit import Circuit, Location, LocationKind, concatenate, validate_linear
from ..models.code412 import ANCILLA_OFFSETS, BLOCK_SIZE, DATA_OFFSETS, pitch
from ..models.gadget import ExRec, Gadget, GadgetTemplate, Layer, Op, Part, PartStyle
from ..models.pauli import Basis

logger = logging.getLogger(__name__)

K = LocationKind
ROLE_NAMES = ('d1', 'a1', 'd2', 'd3', 'a2', 'd4')
SlicePlan = List[List[Tuple[LocationKind, Tuple[int, ...]]]]

# Gadgets that receive error correction after them when used as a location.
NEEDS_EC = frozenset({'cnot', 'cnot_rev', 'swap', 'h', 'prep_z', 'prep_x'})

GADGET_KINDS = ('ec', 'cnot', 'cnot_rev', 'swap', 'h', 'prep_z', 'prep_x', 'meas_z', 'meas_x')


def _layout(blocks: int) -> Dict[int, str]:
    if blocks == 1:
        return dict(enumerate(ROLE_NAMES))
    layout = {}
    for b, prefix in zip(range(blocks), 'AB'):
        for off, role in enumerate(ROLE_NAMES):
            layout[b * BLOCK_SIZE + off] = f'{prefix}.{role}'
    return layout


def _template_circuit(width: int, plan: SlicePlan, layout: Dict[int, str],
                      permutation: Tuple[int, ...] = (0, 1, 2, 3)) -> Circuit:
    """Turn slice specs into a circuit, filling idle positions with Memory."""
    locations = []
    for t, entries in enumerate(plan):
        busy = set()
        for kind, positions in entries:
            locations.append(Location(kind, tuple(positions), timeslice=t, level=1))
            busy.update(positions)
        locations.extend(Location(K.MEMORY, (p,), timeslice=t, level=1)
                         for p in range(width) if p not in busy)
    return Circuit.from_locations(width, locations, layout, permutation)


def _ids_at(circuit: Circuit, kind: LocationKind, positions: Sequence[int]) -> Tuple[int, ...]:
    """Ids of the last ``kind`` locations on each of ``positions``."""
    found = {}
    for loc in circuit.locations:
        if loc.kind is kind and loc.positions[0] in positions:
            found[loc.positions[0]] = loc.id
    return tuple(found[p] for p in positions)


def transposition_network(target: Sequence[int]) -> List[List[Tuple[int, int]]]:
    """Adjacent-transposition slices that move position target[i] to slot i.

    Each slice swaps every out-of-order neighbour pair it can, scanning left to
    right and skipping positions already used in the slice.
    """
    rank = {pos: i for i, pos in enumerate(target)}
    if sorted(rank) != list(range(len(target))):
        raise CircuitError(f'interleave target {tuple(target)} is not a permutation')
    order = [rank[pos] for pos in range(len(target))]
    slices: List[List[Tuple[int, int]]] = []
    while order != sorted(order):
        swaps = []
        i = 0
        while i < len(order) - 1:
            if order[i] > order[i + 1]:
                order[i], order[i + 1] = order[i + 1], order[i]
                swaps.append((i, i + 1))
                i += 2
            else:
                i += 1
        slices.append(swaps)
    return slices


# d2 and d3 of each block trade places before the interleave and again after
# the de-interleave
BLOCK_REORDER = ((2, 3), (8, 9))
# A.a1 A.a2 | A.d1 B.d1 A.d3 B.d3 A.d2 B.d2 A.d4 B.d4 | B.a1 B.a2 (after the reorder)
INTERLEAVE_TARGET = (1, 4, 0, 6, 2, 8, 3, 9, 5, 11, 7, 10)
TRANSVERSAL_PAIRS = ((2, 3), (4, 5), (6, 7), (8, 9))


class BuilderService:
    """Builds templates, level-n gadgets and the CNOT extended rectangle."""

    def __init__(self, ec_after_memory: bool = False, max_level: int = 4,
                 max_locations: int = 5_000_000):
        self.ec_after_memory = ec_after_memory
        self.max_level = max_level
        self.max_locations = max_locations
        self.templates: Dict[str, GadgetTemplate] = {}
        self._depths: Dict[Tuple[str, int], int] = {}
        self._counts: Dict[Tuple[str, int], int] = {}
        self._register_templates()

    # Level-1 templates

    def build_syndrome_extraction(self, final_swap: bool = True) -> GadgetTemplate:
        """Two-ancilla gauge measurement on [d1, a1, d2, d3, a2, d4]."""
        last = [(K.MEAS_Z, (1,)), (K.MEAS_Z, (4,))]
        if final_swap:
            last.append((K.SWAP, (2, 3)))
        plan: SlicePlan = [
            [(K.PREP_X, (1,)), (K.PREP_X, (4,))],
            [(K.CNOT, (1, 0)), (K.CNOT, (4, 5))],
            [(K.CNOT, (1, 2)), (K.CNOT, (4, 3))],
            [(K.MEAS_X, (1,)), (K.MEAS_X, (4,)), (K.SWAP, (2, 3))],
            [(K.PREP_Z, (1,)), (K.PREP_Z, (4,))],
            [(K.CNOT, (0, 1)), (K.CNOT, (5, 4))],
            [(K.CNOT, (2, 1)), (K.CNOT, (3, 4))],
            last,
        ]
        permutation = (0, 1, 2, 3) if final_swap else (0, 2, 1, 3)
        circuit = _template_circuit(BLOCK_SIZE, plan, _layout(1), permutation)
        readouts = {
            Basis.X: _ids_at(circuit, K.MEAS_Z, ANCILLA_OFFSETS),
            Basis.Z: _ids_at(circuit, K.MEAS_X, ANCILLA_OFFSETS),
        }
        kind = 'ec' if final_swap else 'ec_noswap'
        return GadgetTemplate(kind, 1, circuit, PartStyle.EC, readouts=readouts)

    def build_nonlocal_syndrome_extraction(self) -> GadgetTemplate:
        """Reference circuit with arbitrary-range CNOTs on [d1, d2, d3, d4, a1, a2]."""
        plan: SlicePlan = [
            [(K.PREP_X, (4,)), (K.PREP_X, (5,))],
            [(K.CNOT, (4, 0)), (K.CNOT, (5, 2))],
            [(K.CNOT, (4, 1)), (K.CNOT, (5, 3))],
            [(K.MEAS_X, (4,)), (K.MEAS_X, (5,))],
            [(K.PREP_Z, (4,)), (K.PREP_Z, (5,))],
            [(K.CNOT, (0, 4)), (K.CNOT, (1, 5))],
            [(K.CNOT, (2, 4)), (K.CNOT, (3, 5))],
            [(K.MEAS_Z, (4,)), (K.MEAS_Z, (5,))],
        ]
        layout = dict(enumerate(('d1', 'd2', 'd3', 'd4', 'a1', 'a2')))
        circuit = _template_circuit(BLOCK_SIZE, plan, layout)
        return GadgetTemplate('ec_nonlocal', 1, circuit, PartStyle.EC)

    def build_encoded_gate(self, kind: LocationKind, reverse: bool = False) -> GadgetTemplate:
        """Reorder and interleave two blocks, act transversally, then undo both."""
        if kind not in (K.CNOT, K.SWAP):
            raise CircuitError(f'no encoded two-block gate for {kind.value}')
        network = transposition_network(INTERLEAVE_TARGET)
        if kind is K.CNOT:
            middle = [(K.CNOT, (b, a) if reverse else (a, b)) for a, b in TRANSVERSAL_PAIRS]
        else:
            middle = [(K.SWAP, pair) for pair in TRANSVERSAL_PAIRS]
        reorder = [(K.SWAP, pair) for pair in BLOCK_REORDER]
        plan: SlicePlan = [reorder]
        plan.extend([(K.SWAP, pair) for pair in s] for s in network)
        plan.append(middle)
        plan.extend([(K.SWAP, pair) for pair in s] for s in reversed(network))
        plan.append(list(reorder))
        circuit = _template_circuit(2 * BLOCK_SIZE, plan, _layout(2))
        name = 'swap' if kind is K.SWAP else ('cnot_rev' if reverse else 'cnot')
        return GadgetTemplate(name, 1, circuit, PartStyle.GATE, blocks=2)

    def _transversal_layer(self, kind: LocationKind, name: str, style: PartStyle,
                           measured: Optional[Basis] = None) -> GadgetTemplate:
        plan: SlicePlan = [[(kind, (off,)) for off in DATA_OFFSETS]] if kind is not K.MEMORY else [[]]
        circuit = _template_circuit(BLOCK_SIZE, plan, _layout(1))
        return GadgetTemplate(name, 1, circuit, style, measured=measured)

    def build_encoded_h(self) -> GadgetTemplate:
        """Transversal H, then syndrome extraction without its final SWAP."""
        h_part = self._transversal_layer(K.H, 'h_layer', PartStyle.GATE)
        ec_part = self.build_syndrome_extraction(final_swap=False)
        circuit = concatenate(h_part.circuit, ec_part.circuit)
        return GadgetTemplate('h', 1, circuit, PartStyle.GATE, parts=(h_part, ec_part))

    def build_encoded_prep(self, basis: Basis) -> GadgetTemplate:
        """Transversal preparation followed by one EC cycle."""
        kind = K.PREP_Z if basis is Basis.Z else K.PREP_X
        name = f'prep_{basis.name.lower()}'
        layer = self._transversal_layer(kind, f'{name}_layer', PartStyle.PREP)
        ec_part = self.templates.get('ec') or self.build_syndrome_extraction()
        circuit = concatenate(layer.circuit, ec_part.circuit)
        return GadgetTemplate(name, 1, circuit, PartStyle.PREP, parts=(layer, ec_part))

    def build_encoded_meas(self, basis: Basis) -> GadgetTemplate:
        kind = K.MEAS_Z if basis is Basis.Z else K.MEAS_X
        return self._transversal_layer(kind, f'meas_{basis.name.lower()}', PartStyle.MEAS, measured=basis)

    def build_encoded_memory(self) -> GadgetTemplate:
        return self._transversal_layer(K.MEMORY, 'memory', PartStyle.MEMORY)

    def _register_templates(self) -> None:
        self.templates['ec'] = self.build_syndrome_extraction()
        self.templates['ec_noswap'] = self.build_syndrome_extraction(final_swap=False)
        self.templates['cnot'] = self.build_encoded_gate(K.CNOT)
        self.templates['cnot_rev'] = self.build_encoded_gate(K.CNOT, reverse=True)
        self.templates['swap'] = self.build_encoded_gate(K.SWAP)
        self.templates['h'] = self.build_encoded_h()
        for basis in Basis:
            prep = self.build_encoded_prep(basis)
            meas = self.build_encoded_meas(basis)
            self.templates[prep.kind] = prep
            self.templates[meas.kind] = meas
        self.templates['memory'] = self.build_encoded_memory()
        for template in self.templates.values():
            for piece in template.pieces() + (template,):
                report = validate_linear(piece.circuit)
                if not report:
                    raise CircuitError(f'template {piece.kind} is not linear: {report.violation}')

    # Recursion

    def unit(self, loc: Location, subs: Tuple[int, ...]) -> Tuple[Optional[str], Tuple[int, ...]]:
        """Encoded gadget kind and its ordered block bases for one template location."""
        kind = loc.kind
        if kind is K.MEMORY:
            return None, subs
        if kind is K.CNOT:
            control, target = subs
            return ('cnot', subs) if control < target else ('cnot_rev', (target, control))
        if kind is K.SWAP:
            return 'swap', tuple(sorted(subs))
        names = {K.PREP_Z: 'prep_z', K.PREP_X: 'prep_x', K.MEAS_Z: 'meas_z', K.MEAS_X: 'meas_x', K.H: 'h'}
        return names[kind], subs

    def needs_ec(self, gadget_kind: Optional[str]) -> bool:
        if gadget_kind is None:
            return self.ec_after_memory
        return gadget_kind in NEEDS_EC

    @staticmethod
    def sub_bases(loc: Location, bases: Tuple[int, ...], level: int) -> Tuple[int, ...]:
        """Base positions of the level-(level-1) blocks under one template location."""
        step = pitch(level - 1)
        return tuple(bases[p // BLOCK_SIZE] + (p % BLOCK_SIZE) * step for p in loc.positions)

    def gadget_depth(self, kind: str, level: int) -> int:
        """Physical depth of a level-``level`` gadget, without building it."""
        key = (kind, level)
        if key not in self._depths:
            template = self.templates[kind]
            if level == 1:
                self._depths[key] = template.depth
            else:
                self._depths[key] = sum(self.layer_depth(s, level)
                                        for piece in template.pieces() for s in piece.circuit.slices)
        return self._depths[key]

    def unit_depth(self, loc: Location, level: int) -> int:
        kind, _ = self.unit(loc, tuple(loc.positions))
        body = 0 if kind is None else self.gadget_depth(kind, level - 1)
        if self.needs_ec(kind):
            body += self.gadget_depth('ec', level - 1)
        return body

    def layer_depth(self, template_slice: List[Location], level: int) -> int:
        return max([1] + [self.unit_depth(loc, level) for loc in template_slice])

    def gadget_count(self, kind: str, level: int) -> int:
        """Physical location count of a level-``level`` gadget, without building it.

        A unit that ends before its layer does leaves one stretched Memory
        location on every physical position of its blocks.
        """
        key = (kind, level)
        if key not in self._counts:
            template = self.templates[kind]
            if level == 1:
                self._counts[key] = sum(len(s) for p in template.pieces() for s in p.circuit.slices)
            else:
                width = pitch(level - 1)
                total = 0
                for piece in template.pieces():
                    for s in piece.circuit.slices:
                        depth = self.layer_depth(s, level)
                        for loc in s:
                            unit_kind, _ = self.unit(loc, tuple(loc.positions))
                            if unit_kind is not None:
                                total += self.gadget_count(unit_kind, level - 1)
                            if self.needs_ec(unit_kind):
                                total += len(loc.positions) * self.gadget_count('ec', level - 1)
                            if self.unit_depth(loc, level) < depth:
                                total += len(loc.positions) * width
                self._counts[key] = total
        return self._counts[key]

    def exrec_count(self, level: int) -> int:
        return 4 * self.gadget_count('ec', level) + self.gadget_count('cnot', level)

    def exrec_depth(self, level: int) -> int:
        return 2 * self.gadget_depth('ec', level) + self.gadget_depth('cnot', level)

    def check_level(self, level: int) -> None:
        if level < 1:
            raise CircuitError(f'level must be at least 1, got {level}')
        if level > self.max_level:
            raise ResourceLimitError(f'level {level} exceeds the configured maximum {self.max_level}')

    def build_gadget(self, kind: str, level: int, bases: Tuple[int, ...], start: int = 0) -> Gadget:
        """Recursively build a level-``level`` gadget whose first slice is ``start``."""
        if kind not in self.templates:
            raise CircuitError(f'unknown gadget kind {kind!r}')
        template = self.templates[kind]
        gadget = Gadget(kind, level, tuple(bases), start, self.gadget_depth(kind, level))
        t = start
        for piece in template.pieces():
            layers = []
            for s in piece.circuit.slices:
                layer, depth = self._build_layer(piece, s, level, gadget.bases, t)
                layers.append(layer)
                t += depth
            gadget.parts.append(Part(piece, layers))
        return gadget

    def _build_layer(self, piece: GadgetTemplate, template_slice: List[Location], level: int,
                     bases: Tuple[int, ...], t: int) -> Tuple[Layer, int]:
        if level == 1:
            ops = []
            for loc in template_slice:
                subs = self.sub_bases(loc, bases, 1)
                body = Location(loc.kind, subs, timeslice=t, level=1)
                ops.append(Op(loc.id, loc.kind, subs, body))
            return Layer(ops), 1

        depth = self.layer_depth(template_slice, level)
        layer = Layer([])
        width = pitch(level - 1)
        for loc in template_slice:
            subs = self.sub_bases(loc, bases, level)
            unit_kind, unit_bases = self.unit(loc, subs)
            body = None
            end = t
            if unit_kind is not None:
                body = self.build_gadget(unit_kind, level - 1, unit_bases, t)
                end += body.depth
            followups = []
            if self.needs_ec(unit_kind):
                followups = [self.build_gadget('ec', level - 1, (sub,), end) for sub in subs]
                end += self.gadget_depth('ec', level - 1)
            layer.ops.append(Op(loc.id, loc.kind, subs, body, followups))
            if end < t + depth:
                for sub in subs:
                    layer.padding.extend(Location(K.MEMORY, (pos,), timeslice=end, level=level,
                                                  duration=t + depth - end)
                                         for pos in range(sub, sub + width))
        return layer, depth

    def build_level_circuit(self, kind: str, level: int) -> Tuple[Gadget, Circuit]:
        """Flattened circuit of one gadget placed at position 0."""
        self.check_level(level)
        blocks = self.templates[kind].blocks
        self._check_size(self.gadget_count(kind, level))
        bases = tuple(b * pitch(level) for b in range(blocks))
        gadget = self.build_gadget(kind, level, bases)
        circuit = Circuit.from_locations(blocks * pitch(level), list(gadget.locations()),
                                         self._top_layout(bases, level), keep_order=True, level=level)
        return gadget, circuit

    def build_cnot_exrec(self, level: int) -> ExRec:
        """Leading EC on both blocks, encoded CNOT, trailing EC on both blocks.

        Location ids follow execution order: gadget by gadget, and inside a
        gadget depth first with each layer's idle padding after its units.
        """
        self.check_level(level)
        total = self.exrec_count(level)
        self._check_size(total)
        bases = (0, pitch(level))
        ec_depth = self.gadget_depth('ec', level)
        cnot_depth = self.gadget_depth('cnot', level)
        gadgets = [self.build_gadget('ec', level, (b,), 0) for b in bases]
        gadgets.append(self.build_gadget('cnot', level, bases, ec_depth))
        gadgets.extend(self.build_gadget('ec', level, (b,), ec_depth + cnot_depth) for b in bases)
        final_start = self.exrec_depth(level)
        final_ecs = [self.build_gadget('ec', level, (b,), final_start) for b in bases]
        locations = [loc for g in gadgets for loc in g.locations()]
        circuit = Circuit.from_locations(2 * pitch(level), locations, self._top_layout(bases, level),
                                         keep_order=True, level=level)
        logger.info('built level-%d CNOT exRec with %d locations over %d slices',
                    level, len(locations), circuit.depth)
        return ExRec(level, bases, gadgets, final_ecs, circuit)

    def _check_size(self, total: int) -> None:
        if total > self.max_locations:
            raise ResourceLimitError(
                f'circuit would hold {total} locations, above the limit of {self.max_locations}')

    @staticmethod
    def _top_layout(bases: Tuple[int, ...], level: int) -> Dict[int, str]:
        step = pitch(level - 1)
        layout = {}
        for index, base in enumerate(bases):
            for off, role in enumerate(ROLE_NAMES):
                layout[base + off * step] = f'B{index}.{role}' if len(bases) > 1 else role
        return layout
