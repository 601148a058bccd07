"""
Gadget templates and the recursive gadget tree built from them.

A template is a level-1 circuit on one or two blocks. A level-k gadget repeats
its template's slices with every location replaced by a level-(k-1) unit.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple, Union

from .circuit import Circuit, Location, LocationKind
from .code412 import DATA_OFFSETS
from .pauli import Basis


class PartStyle(str, Enum):
    """How the simulator finishes a template part."""
    EC = 'ec'
    GATE = 'gate'
    PREP = 'prep'
    MEAS = 'meas'
    MEMORY = 'memory'


@dataclass(eq=False)
class GadgetTemplate:
    kind: str
    level: int
    circuit: Circuit
    style: PartStyle
    blocks: int = 1
    parts: Tuple['GadgetTemplate', ...] = ()
    # EC parts: ids of the two readouts that decode each error type
    readouts: Dict[Basis, Tuple[int, int]] = field(default_factory=dict)
    # MEAS parts: the measured basis
    measured: Optional[Basis] = None

    def pieces(self) -> Tuple['GadgetTemplate', ...]:
        return self.parts or (self,)

    @property
    def depth(self) -> int:
        return sum(p.circuit.depth for p in self.pieces())

    def final_position(self, role: int) -> int:
        """Block offset holding data role ``role`` after this part."""
        return DATA_OFFSETS[self.circuit.permutation[role]]


@dataclass(eq=False)
class Op:
    """One template location realised at some level."""
    template_id: int
    kind: LocationKind
    subs: Tuple[int, ...]
    body: Union[Location, 'Gadget', None]
    followups: List['Gadget'] = field(default_factory=list)


@dataclass(eq=False)
class Layer:
    ops: List[Op]
    padding: List[Location] = field(default_factory=list)


@dataclass(eq=False)
class Part:
    template: GadgetTemplate
    layers: List[Layer]


@dataclass(eq=False)
class Gadget:
    kind: str
    level: int
    bases: Tuple[int, ...]
    start: int
    depth: int
    parts: List[Part] = field(default_factory=list)

    def locations(self) -> Iterator[Location]:
        for part in self.parts:
            for layer in part.layers:
                for op in layer.ops:
                    if isinstance(op.body, Location):
                        yield op.body
                    elif op.body is not None:
                        yield from op.body.locations()
                    for ec in op.followups:
                        yield from ec.locations()
                yield from layer.padding


@dataclass(eq=False)
class ExRec:
    """Leading ECs, encoded CNOT and trailing ECs on two level-n blocks."""
    level: int
    bases: Tuple[int, int]
    gadgets: List[Gadget]
    final_ecs: List[Gadget]
    circuit: Circuit

    @property
    def ec_count(self) -> int:
        return sum(1 for g in self.gadgets if g.kind == 'ec')
