"""
Time-sliced circuit representation on a linear array.

A circuit is a list of slices; every slice covers every line position exactly
once, idle positions carrying explicit Memory locations. A Memory location may
last several slices, in which case it covers its position until it ends.
"""
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from ..errors import CircuitError, CircuitParseError


class LocationKind(str, Enum):
    """Elementary location types."""
    PREP_Z = 'PrepZ'
    PREP_X = 'PrepX'
    MEAS_Z = 'MeasZ'
    MEAS_X = 'MeasX'
    MEMORY = 'Memory'
    CNOT = 'CNOT'
    SWAP = 'SWAP'
    H = 'H'

    @property
    def is_two_qubit(self) -> bool:
        return self in (LocationKind.CNOT, LocationKind.SWAP)

    @property
    def is_prep(self) -> bool:
        return self in (LocationKind.PREP_Z, LocationKind.PREP_X)

    @property
    def is_measurement(self) -> bool:
        return self in (LocationKind.MEAS_Z, LocationKind.MEAS_X)


@dataclass(eq=False)
class Location:
    """One elementary fault site. For CNOT the first position is the control."""
    kind: LocationKind
    positions: Tuple[int, ...]
    timeslice: int = 0
    level: int = 1
    id: int = -1
    duration: int = 1

    def key(self) -> Tuple[int, int]:
        return (self.timeslice, min(self.positions))

    def token(self, offset: int = 0, level: Optional[int] = None) -> str:
        """``Kind@p[,q]``, then ``*duration`` for stretched Memory and ``/level`` when it differs."""
        text = f"{self.kind.value}@{','.join(str(p - offset) for p in self.positions)}"
        if self.duration != 1:
            text += f'*{self.duration}'
        if level is not None and self.level != level:
            text += f'/{self.level}'
        return text

    def to_dict(self) -> dict:
        return {
            'id': self.id,
            'kind': self.kind.value,
            'positions': list(self.positions),
            'timeslice': self.timeslice,
            'duration': self.duration,
            'level': self.level,
        }


@dataclass
class Violation:
    """First offending location of a circuit that is not linear-valid."""
    slice_index: int
    location_id: int
    reason: str


@dataclass
class ValidationReport:
    ok: bool
    violation: Optional[Violation] = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class Circuit:
    """Ordered slices of locations with block metadata.

    ``layout`` maps line position to its role name (``d1``..``d4``, ``a1``, ``a2``,
    optionally prefixed by a block index); ``permutation`` is the output
    permutation Q of the data roles. ``slices[t]`` holds the locations that
    start in slice t.
    """
    width: int
    slices: List[List[Location]] = field(default_factory=list)
    layout: Dict[int, str] = field(default_factory=dict)
    permutation: Tuple[int, ...] = (0, 1, 2, 3)
    level: int = 1

    @classmethod
    def from_locations(cls, width: int, locations: List[Location],
                       layout: Optional[Dict[int, str]] = None,
                       permutation: Tuple[int, ...] = (0, 1, 2, 3),
                       keep_order: bool = False, level: int = 1) -> 'Circuit':
        """Group locations by timeslice and assign dense ids.

        Ids follow canonical (timeslice, position) order unless ``keep_order``
        is set, in which case they follow the order of ``locations``.
        """
        ordered = list(locations) if keep_order else sorted(locations, key=Location.key)
        depth = max((loc.timeslice + loc.duration for loc in ordered), default=0)
        slices: List[List[Location]] = [[] for _ in range(depth)]
        for loc_id, loc in enumerate(ordered):
            loc.id = loc_id
            slices[loc.timeslice].append(loc)
        return cls(width=width, slices=slices, layout=dict(layout or {}), permutation=permutation,
                   level=level)

    @property
    def depth(self) -> int:
        return len(self.slices)

    @property
    def locations(self) -> List[Location]:
        """All locations in id order."""
        return sorted((loc for s in self.slices for loc in s), key=lambda loc: loc.id)

    def renumber(self) -> None:
        next_id = 0
        for index, s in enumerate(self.slices):
            s.sort(key=lambda loc: min(loc.positions))
            for loc in s:
                loc.timeslice = index
                loc.id = next_id
                next_id += 1


def validate_linear(circuit: Circuit) -> ValidationReport:
    """Check adjacency, disjointness, full coverage and dense ids.

    A stretched Memory location covers its position from its start slice
    through ``duration`` slices.
    """
    busy_until = [0] * circuit.width
    ids = set()
    for index, s in enumerate(circuit.slices):
        for loc in s:
            if loc.id in ids or loc.id < 0:
                return ValidationReport(False, Violation(index, loc.id, 'location ids are not dense'))
            ids.add(loc.id)
            if len(loc.positions) != (2 if loc.kind.is_two_qubit else 1):
                return ValidationReport(False, Violation(index, loc.id, 'wrong number of positions'))
            if loc.kind.is_two_qubit and abs(loc.positions[0] - loc.positions[1]) != 1:
                return ValidationReport(False, Violation(index, loc.id, 'non-adjacent two-qubit location'))
            if loc.duration < 1 or (loc.duration > 1 and loc.kind is not LocationKind.MEMORY):
                return ValidationReport(False, Violation(index, loc.id, f'invalid duration {loc.duration}'))
            for pos in loc.positions:
                if not 0 <= pos < circuit.width:
                    return ValidationReport(False, Violation(index, loc.id, f'position {pos} outside width'))
                if busy_until[pos] > index:
                    return ValidationReport(False, Violation(index, loc.id, f'position {pos} used twice'))
                busy_until[pos] = index + loc.duration
        idle = [pos for pos, until in enumerate(busy_until) if until <= index]
        if idle:
            last_id = s[-1].id if s else -1
            return ValidationReport(False, Violation(index, last_id, f'position {idle[0]} not covered'))
    if ids and max(ids) != len(ids) - 1:
        return ValidationReport(False, Violation(circuit.depth - 1, max(ids), 'location ids are not dense'))
    return ValidationReport(True)


def count_locations(circuit: Circuit) -> Dict[str, int]:
    """Counts by kind name plus the total N under key ``total``."""
    counts = Counter(loc.kind.value for s in circuit.slices for loc in s)
    result = {kind.value: counts.get(kind.value, 0) for kind in LocationKind}
    result['total'] = sum(counts.values())
    return result


def concatenate(a: Circuit, b: Circuit, offset: int = 0) -> Circuit:
    """Append the slices of ``b``, shifted by ``offset``, after those of ``a``.

    Positions of ``a`` not reached by ``b`` idle through ``b``'s slices.
    """
    if not b.slices:
        return _copy(a)
    if not a.slices and a.width == 0:
        a = Circuit(width=b.width + offset, layout=dict(a.layout), permutation=a.permutation, level=b.level)
    if offset < 0 or b.width + offset > a.width:
        raise CircuitError(f'offset {offset} places a width-{b.width} circuit outside width {a.width}')

    layout = dict(a.layout)
    for pos, role in b.layout.items():
        shifted = pos + offset
        if shifted in layout and layout[shifted] != role:
            raise CircuitError(f'block layouts disagree at position {shifted}: {layout[shifted]} vs {role}')
        layout[shifted] = role

    merged = _copy(a)
    merged.layout = layout
    merged.permutation = tuple(b.permutation[slot] for slot in a.permutation)
    covered = set(range(offset, offset + b.width))
    for s in b.slices:
        new_slice = [Location(loc.kind, tuple(p + offset for p in loc.positions), level=loc.level,
                              duration=loc.duration) for loc in s]
        new_slice.extend(Location(LocationKind.MEMORY, (pos,), level=merged.level)
                         for pos in range(a.width) if pos not in covered)
        merged.slices.append(new_slice)
    merged.renumber()
    return merged


def _copy(c: Circuit) -> Circuit:
    slices = [[Location(loc.kind, loc.positions, level=loc.level, duration=loc.duration) for loc in s]
              for s in c.slices]
    copy = Circuit(width=c.width, slices=slices, layout=dict(c.layout), permutation=c.permutation, level=c.level)
    copy.renumber()
    return copy


# Canonical text form

_TOKEN = re.compile(r'^([A-Za-z]+)@(\d+)(?:,(\d+))?(?:\*(\d+))?(?:/(\d+))?$')
# a slice in which no location starts, every position still inside a stretched Memory
EMPTY_SLICE = '~'


def serialize(circuit: Circuit) -> str:
    """One slice per line, tokens ordered by their smallest position.

    Location levels that differ from the circuit's ``# level`` header are
    written as a ``/level`` suffix; ids are not part of the text.
    """
    lines = [f'# width {circuit.width}']
    if circuit.level != 1:
        lines.append(f'# level {circuit.level}')
    if circuit.layout:
        lines.append('# layout ' + ' '.join(f'{p}:{r}' for p, r in sorted(circuit.layout.items())))
    if tuple(circuit.permutation) != (0, 1, 2, 3):
        lines.append('# permutation ' + ' '.join(str(i) for i in circuit.permutation))
    for s in circuit.slices:
        tokens = [loc.token(level=circuit.level) for loc in sorted(s, key=lambda loc: min(loc.positions))]
        lines.append(' '.join(tokens) if tokens else EMPTY_SLICE)
    return '\n'.join(lines) + '\n'


def parse(text: str) -> Circuit:
    """Inverse of :func:`serialize`; rejects malformed slices. Ids are canonical."""
    width: Optional[int] = None
    level = 1
    layout: Dict[int, str] = {}
    permutation: Tuple[int, ...] = (0, 1, 2, 3)
    slices: List[List[Location]] = []
    busy_until: List[int] = []
    next_id = 0

    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith('#'):
            words = stripped[1:].split()
            if words[:1] == ['width'] and len(words) == 2 and words[1].isdigit():
                width = int(words[1])
                busy_until = [0] * width
            elif words[:1] == ['level'] and len(words) == 2 and words[1].isdigit():
                level = int(words[1])
            elif words[:1] == ['layout']:
                for item in words[1:]:
                    pos, _, role = item.partition(':')
                    layout[int(pos)] = role
            elif words[:1] == ['permutation']:
                permutation = tuple(int(w) for w in words[1:])
            continue
        if width is None:
            raise CircuitParseError('slice before width header', line_no, 1)

        index = len(slices)
        current: List[Location] = []
        tokens = [] if stripped == EMPTY_SLICE else list(re.finditer(r'\S+', raw))
        for match in tokens:
            column = match.start() + 1
            token = match.group(0)
            parsed = _TOKEN.match(token)
            if parsed is None:
                raise CircuitParseError(f'malformed token {token!r}', line_no, column)
            try:
                kind = LocationKind(parsed.group(1))
            except ValueError:
                raise CircuitParseError(f'unknown location kind {parsed.group(1)!r}', line_no, column)
            positions = tuple(int(g) for g in parsed.group(2, 3) if g is not None)
            duration = int(parsed.group(4) or 1)
            loc_level = int(parsed.group(5)) if parsed.group(5) else level
            if len(positions) != (2 if kind.is_two_qubit else 1):
                raise CircuitParseError(f'{kind.value} takes {2 if kind.is_two_qubit else 1} positions',
                                        line_no, column, next_id)
            if kind.is_two_qubit and abs(positions[0] - positions[1]) != 1:
                raise CircuitParseError('non-adjacent two-qubit location', line_no, column, next_id)
            if duration < 1 or (duration > 1 and kind is not LocationKind.MEMORY):
                raise CircuitParseError(f'{kind.value} cannot last {duration} slices', line_no, column, next_id)
            for pos in positions:
                if pos >= width:
                    raise CircuitParseError(f'position {pos} outside width {width}', line_no, column, next_id)
                if busy_until[pos] > index:
                    raise CircuitParseError(f'position {pos} used twice in slice', line_no, column, next_id)
                busy_until[pos] = index + duration
            current.append(Location(kind, positions, timeslice=index, level=loc_level, id=next_id,
                                    duration=duration))
            next_id += 1
        idle = [pos for pos, until in enumerate(busy_until) if until <= index]
        if idle:
            raise CircuitParseError(f'position {idle[0]} not covered', line_no, len(raw) + 1)
        slices.append(current)

    if width is None:
        raise CircuitParseError('missing width header', 1, 1)
    return Circuit(width=width, slices=slices, layout=layout, permutation=permutation, level=level)
