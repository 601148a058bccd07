"""
Tests for the circuit builder service.
"""
import pytest

from app.errors import CircuitError, ResourceLimitError
from app.models.circuit import LocationKind, count_locations, validate_linear
from app.models.code412 import DATA_OFFSETS, LogicalAction, block_action, logical_action
from app.models.pauli import Basis, ErrorFrame, PauliLetter, apply_gate
from app.services.builder_service import (
    BLOCK_REORDER, INTERLEAVE_TARGET, TRANSVERSAL_PAIRS, BuilderService, transposition_network,
)

K = LocationKind


def _propagate(frame: ErrorFrame, circuit) -> ErrorFrame:
    """Errorless propagation through every location of a circuit."""
    for loc in circuit.locations:
        apply_gate(frame, loc.kind, loc.positions)
    return frame


def _logical_frame(basis: Basis) -> ErrorFrame:
    roles = (0, 2) if basis is Basis.X else (0, 1)
    return ErrorFrame({DATA_OFFSETS[r]: PauliLetter(int(basis)) for r in roles})


class TestSyndromeExtraction:
    """Tests for the level-1 syndrome-extraction template."""

    def test_depth_and_size(self, builder):
        """Test that the template has 8 slices and 38 locations."""
        circuit = builder.templates['ec'].circuit
        assert circuit.depth == 8
        assert len(circuit.locations) == 38

    def test_same_depth_as_nonlocal(self, builder):
        """Test that the nearest-neighbour EC is as deep as the non-local one."""
        reference = builder.build_nonlocal_syndrome_extraction().circuit
        assert reference.depth == builder.templates['ec'].circuit.depth

    def test_two_data_swaps(self, builder):
        """Test that exactly the two middle data positions are swapped, twice."""
        circuit = builder.templates['ec'].circuit
        swaps = [loc for loc in circuit.locations if loc.kind is K.SWAP]
        assert [loc.positions for loc in swaps] == [(2, 3), (2, 3)]
        assert [loc.timeslice for loc in swaps] == [3, 7]

    def test_data_ancilla_cnots(self, builder):
        """Test that every CNOT couples a data position to an ancilla position."""
        circuit = builder.templates['ec'].circuit
        cnots = [loc for loc in circuit.locations if loc.kind is K.CNOT]
        assert len(cnots) == 8
        for loc in cnots:
            roles = sorted(circuit.layout[p][0] for p in loc.positions)
            assert roles == ['a', 'd']

    def test_readouts(self, builder):
        """Test that X errors are read by MeasZ and Z errors by MeasX."""
        template = builder.templates['ec']
        locations = {loc.id: loc for loc in template.circuit.locations}
        assert all(locations[i].kind is K.MEAS_Z for i in template.readouts[Basis.X])
        assert all(locations[i].kind is K.MEAS_X for i in template.readouts[Basis.Z])

    @pytest.mark.parametrize('gauge', ['XXII', 'IIXX', 'ZIZI', 'IZIZ'])
    def test_gauge_invariance(self, builder, gauge):
        """Test that gauge frames pass through the EC with trivial action."""
        frame = ErrorFrame()
        for role, letter in enumerate(gauge):
            if letter != 'I':
                frame.toggle(DATA_OFFSETS[role], PauliLetter[letter])
        _propagate(frame, builder.templates['ec'].circuit)
        action = logical_action(frame, DATA_OFFSETS)
        assert action[Basis.X] is LogicalAction.TRIVIAL
        assert action[Basis.Z] is LogicalAction.TRIVIAL

    def test_swap_xx_failure_is_undetected_logical(self, builder):
        """Test that XX after the first data SWAP leaves even parity and a logical error."""
        circuit = builder.templates['ec'].circuit
        frame = ErrorFrame()
        flips = {}
        for loc in circuit.locations:
            if loc.kind.is_measurement:
                flips[loc.id] = frame.bits(loc.positions[0]) & int(Basis.X)
                continue
            apply_gate(frame, loc.kind, loc.positions)
            if loc.kind is K.SWAP and loc.timeslice == 3:
                frame.toggle(2, PauliLetter.X)
                frame.toggle(3, PauliLetter.X)
        first, second = builder.templates['ec'].readouts[Basis.X]
        assert bool(flips[first]) == bool(flips[second])
        assert logical_action(frame, DATA_OFFSETS)[Basis.X] is LogicalAction.LOGICAL


class TestEncodedGates:
    """Tests for the encoded two-block gates."""

    def test_network_shape(self):
        """Test that the interleave network takes three slices and fourteen swaps."""
        network = transposition_network(INTERLEAVE_TARGET)
        assert len(network) == 3
        assert sum(len(s) for s in network) == 14

    def test_cnot_size(self, builder):
        """Test the encoded CNOT's depth and counts."""
        circuit = builder.templates['cnot'].circuit
        counts = count_locations(circuit)
        assert circuit.depth == 9
        assert counts['total'] == 72
        assert counts['CNOT'] == 4
        assert counts['SWAP'] == 32

    def test_swap_replaces_cnots(self, builder):
        """Test that the encoded SWAP matches the CNOT with CNOTs replaced."""
        cnot = count_locations(builder.templates['cnot'].circuit)
        swap = count_locations(builder.templates['swap'].circuit)
        assert swap['total'] == cnot['total']
        assert swap['SWAP'] == cnot['SWAP'] + cnot['CNOT']

    def test_transversal_pairs_match_roles(self, builder):
        """Test that each transversal CNOT joins the same data role of both blocks."""
        circuit = builder.templates['cnot'].circuit
        middle = circuit.slices[4]
        gates = [loc for loc in middle if loc.kind is K.CNOT]
        assert sorted(loc.positions for loc in gates) == [(2, 3), (4, 5), (6, 7), (8, 9)]
        # interleaved order puts A.dk directly above B.dk
        for a, b in TRANSVERSAL_PAIRS:
            assert INTERLEAVE_TARGET[b] == INTERLEAVE_TARGET[a] + 6

    @pytest.mark.parametrize('kind,control,target', [('cnot', 0, 6), ('cnot_rev', 6, 0)])
    def test_logical_cnot_action(self, builder, kind, control, target):
        """Test that the encoded CNOT copies logical X forward and logical Z back."""
        frame = ErrorFrame({control + 0: PauliLetter.X, control + 3: PauliLetter.X})
        _propagate(frame, builder.templates[kind].circuit)
        assert block_action(frame, 1, control)[Basis.X] is LogicalAction.LOGICAL
        assert block_action(frame, 1, target)[Basis.X] is LogicalAction.LOGICAL

        frame = ErrorFrame({target + 0: PauliLetter.Z, target + 2: PauliLetter.Z})
        _propagate(frame, builder.templates[kind].circuit)
        assert block_action(frame, 1, control)[Basis.Z] is LogicalAction.LOGICAL
        assert block_action(frame, 1, target)[Basis.Z] is LogicalAction.LOGICAL

    def test_network_fault_hits_both_blocks(self, builder):
        """Test that a single SWAP fault before the transversal CNOT can leave logicals on both blocks."""
        circuit = builder.templates['cnot'].circuit
        found = []
        for loc in circuit.locations:
            if loc.kind is not K.SWAP or loc.timeslice > 3:
                continue
            for code in range(1, 16):
                frame = ErrorFrame()
                for later in circuit.locations:
                    apply_gate(frame, later.kind, later.positions)
                    if later is loc:
                        frame.toggle(loc.positions[0], code & 3)
                        frame.toggle(loc.positions[1], code >> 2)
                for basis in Basis:
                    if all(block_action(frame, 1, base)[basis] is LogicalAction.LOGICAL for base in (0, 6)):
                        found.append((loc.timeslice, loc.positions, code, basis))
        assert (0, (2, 3), 5, Basis.X) in found
        assert {basis for *_, basis in found} == {Basis.X, Basis.Z}

    def test_reorder_wraps_network(self, builder):
        """Test that the first and last slices of the encoded CNOT trade d2 and d3 in each block."""
        circuit = builder.templates['cnot'].circuit
        for index in (0, circuit.depth - 1):
            swaps = sorted(loc.positions for loc in circuit.slices[index] if loc.kind is K.SWAP)
            assert swaps == sorted(BLOCK_REORDER)

    def test_network_rejects_non_permutation(self):
        """Test that an interleave target with a repeated position is refused."""
        with pytest.raises(CircuitError):
            transposition_network((0, 0, 1))

    def test_encoded_swap_single_faults(self, builder):
        """Test that no single fault in the encoded SWAP leaves logical errors on both blocks."""
        circuit = builder.templates['swap'].circuit
        for loc in circuit.locations:
            options = ([(PauliLetter(c & 3), PauliLetter(c >> 2)) for c in range(1, 16)]
                       if loc.kind.is_two_qubit else [(PauliLetter(c),) for c in range(1, 4)])
            for paulis in options:
                frame = ErrorFrame()
                for later in circuit.locations:
                    apply_gate(frame, later.kind, later.positions)
                    if later is loc:
                        for pos, letter in zip(loc.positions, paulis):
                            frame.toggle(pos, letter)
                for basis in Basis:
                    both = [block_action(frame, 1, base)[basis] is LogicalAction.LOGICAL for base in (0, 6)]
                    assert not all(both)


class TestEncodedSingleBlockGadgets:
    """Tests for H, preparation, measurement and memory templates."""

    def test_h_depth(self, builder):
        """Test that the encoded H is one slice deeper than the EC."""
        assert builder.templates['h'].depth == builder.templates['ec'].depth + 1

    def test_h_layer_precedes_ec(self, builder):
        """Test that the encoded H applies the transversal H before syndrome extraction."""
        template = builder.templates['h']
        assert [part.kind for part in template.parts] == ['h_layer', 'ec_noswap']
        first = template.circuit.slices[0]
        assert sorted(loc.positions[0] for loc in first if loc.kind is LocationKind.H) == list(DATA_OFFSETS)
        assert all(loc.kind is not LocationKind.H for s in template.circuit.slices[1:] for loc in s)

    def test_h_exchanges_logicals(self, builder):
        """Test that the encoded H maps logical X to logical Z."""
        frame = _propagate(_logical_frame(Basis.X), builder.templates['h'].circuit)
        action = logical_action(frame, DATA_OFFSETS)
        assert action[Basis.Z] is LogicalAction.LOGICAL
        assert action[Basis.X] is LogicalAction.TRIVIAL

    def test_h_twice_is_identity(self, builder):
        """Test that two encoded H gadgets restore the logical frame."""
        for basis in Basis:
            frame = _propagate(_logical_frame(basis), builder.templates['h'].circuit)
            frame = _propagate(frame, builder.templates['h'].circuit)
            action = logical_action(frame, DATA_OFFSETS)
            assert action[basis] is LogicalAction.LOGICAL
            assert action[basis.other] is LogicalAction.TRIVIAL

    def test_prep_ends_with_ec(self, builder):
        """Test that preparation is a transversal layer followed by one EC."""
        prep = builder.templates['prep_z']
        assert [p.kind for p in prep.parts] == ['prep_z_layer', 'ec']
        assert prep.circuit.depth == 9
        first = [loc.kind for loc in prep.circuit.slices[0] if loc.positions[0] in DATA_OFFSETS]
        assert first == [K.PREP_Z] * 4

    def test_meas_layer(self, builder):
        """Test that measurement is a single transversal slice."""
        meas = builder.templates['meas_x']
        assert meas.circuit.depth == 1
        assert meas.measured is Basis.X
        assert count_locations(meas.circuit)['MeasX'] == 4


class TestRecursion:
    """Tests for level-n construction."""

    def test_exrec_level_one(self, builder, exrec1):
        """Test the level-1 CNOT exRec's size and structure."""
        assert len(exrec1.circuit.locations) == 224
        assert builder.exrec_count(1) == 224
        assert exrec1.ec_count == 4
        assert exrec1.circuit.depth == 2 * 8 + 9
        assert validate_linear(exrec1.circuit)

    def test_level_one_gadgets_match_templates(self, builder):
        """Test that a level-1 gadget reproduces its template's counts."""
        for kind in ('ec', 'cnot', 'h', 'prep_x', 'meas_z'):
            _, circuit = builder.build_level_circuit(kind, 1)
            assert len(circuit.locations) == builder.gadget_count(kind, 1)
            assert circuit.depth == builder.gadget_depth(kind, 1)

    def test_deterministic_ids(self, builder):
        """Test that repeated builds give identical ids."""
        a = builder.build_cnot_exrec(1).circuit
        b = builder.build_cnot_exrec(1).circuit
        assert [(l.id, l.kind, l.positions) for l in a.locations] == [(l.id, l.kind, l.positions) for l in b.locations]

    def test_level_zero_rejected(self, builder):
        """Test that level 0 is a construction error."""
        with pytest.raises(CircuitError):
            builder.build_cnot_exrec(0)

    def test_level_above_maximum(self):
        """Test that levels above the configured maximum are refused."""
        with pytest.raises(ResourceLimitError):
            BuilderService(max_level=2).build_cnot_exrec(3)

    def test_location_limit(self):
        """Test that the size guard refuses before building."""
        with pytest.raises(ResourceLimitError):
            BuilderService(max_locations=1000).build_cnot_exrec(2)

    def test_counts_grow_with_level(self, builder):
        """Test that predicted exRec sizes grow with the level."""
        sizes = [builder.exrec_count(level) for level in (1, 2, 3)]
        assert sizes[0] < sizes[1] < sizes[2]

    def test_exrec_counts_by_level(self, builder):
        """Test the predicted exRec sizes for levels one to three."""
        assert builder.exrec_depth(1) == 25
        assert builder.gadget_count('ec', 2) == 1976
        assert builder.gadget_count('cnot', 2) == 5544
        assert [builder.exrec_count(level) for level in (1, 2, 3)] == [224, 13448, 793264]

    def test_prep_followed_by_ec(self, builder):
        """Test that an encoded preparation unit carries its own EC at level 2."""
        layer = builder.templates['prep_z'].parts[0].circuit.slices[0]
        prep = next(loc for loc in layer if loc.kind is K.PREP_Z)
        assert builder.needs_ec('prep_z')
        assert builder.unit_depth(prep, 2) == builder.gadget_depth('prep_z', 1) + builder.gadget_depth('ec', 1)

    def test_level_two_padding_is_stretched(self, builder):
        """Test that idle sub-blocks get one Memory location per position that spans the wait."""
        _, circuit = builder.build_level_circuit('ec', 2)
        assert validate_linear(circuit)
        assert len(circuit.locations) == builder.gadget_count('ec', 2)
        stretched = [loc for loc in circuit.locations if loc.duration > 1]
        assert stretched
        assert all(loc.kind is K.MEMORY and loc.level == 2 for loc in stretched)

    def test_memory_ec_policy(self):
        """Test that enabling EC after encoded memory enlarges level-2 gadgets."""
        assert BuilderService(ec_after_memory=True).exrec_count(2) > BuilderService().exrec_count(2)

    @pytest.mark.slow
    def test_exrec_level_two(self, builder):
        """Test that the built level-2 exRec is linear and matches its predicted size."""
        exrec = builder.build_cnot_exrec(2)
        assert validate_linear(exrec.circuit)
        assert len(exrec.circuit.locations) == builder.exrec_count(2)
        assert exrec.circuit.depth == 2 * builder.gadget_depth('ec', 2) + builder.gadget_depth('cnot', 2)
