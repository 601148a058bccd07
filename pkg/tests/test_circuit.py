"""
Tests for the circuit representation.
"""
import pytest

from app.errors import CircuitError, CircuitParseError
from app.models.circuit import (
    Circuit, Location, LocationKind, concatenate, count_locations, parse, serialize, validate_linear,
)

K = LocationKind


def _idle_circuit(width: int, depth: int) -> Circuit:
    locations = [Location(K.MEMORY, (p,), timeslice=t) for t in range(depth) for p in range(width)]
    return Circuit.from_locations(width, locations)


class TestValidateLinear:
    """Tests for validate_linear."""

    def test_builder_templates_validate(self, builder):
        """Test that every registered template is linear-valid."""
        for template in builder.templates.values():
            assert validate_linear(template.circuit)

    def test_non_adjacent_cnot(self):
        """Test that a CNOT on (0, 2) is reported at that location."""
        circuit = Circuit.from_locations(3, [
            Location(K.CNOT, (0, 2), timeslice=0),
            Location(K.MEMORY, (1,), timeslice=0),
        ])
        report = validate_linear(circuit)
        assert not report
        assert report.violation.location_id == 0
        assert 'non-adjacent' in report.violation.reason

    def test_position_used_twice(self):
        """Test that a slice using a position twice is reported."""
        circuit = Circuit.from_locations(2, [
            Location(K.CNOT, (0, 1), timeslice=0),
            Location(K.MEMORY, (1,), timeslice=0),
        ])
        report = validate_linear(circuit)
        assert not report
        assert 'used twice' in report.violation.reason

    def test_uncovered_position(self):
        """Test that an idle position without Memory is reported."""
        circuit = Circuit.from_locations(2, [Location(K.PREP_Z, (0,), timeslice=0)])
        assert not validate_linear(circuit)


class TestCountLocations:
    """Tests for count_locations."""

    def test_empty(self):
        """Test that an empty circuit has no locations."""
        assert count_locations(Circuit(width=0))['total'] == 0

    def test_total_matches_slices(self, exrec1):
        """Test that the total equals the sum of slice sizes."""
        circuit = exrec1.circuit
        assert count_locations(circuit)['total'] == sum(len(s) for s in circuit.slices)

    def test_ec_breakdown(self, builder):
        """Test the per-kind counts of the syndrome-extraction template."""
        counts = count_locations(builder.templates['ec'].circuit)
        assert counts['total'] == 38
        assert counts['CNOT'] == 8
        assert counts['SWAP'] == 2
        assert counts['PrepX'] == counts['PrepZ'] == counts['MeasX'] == counts['MeasZ'] == 2
        assert counts['Memory'] == 20


class TestConcatenate:
    """Tests for concatenate."""

    def test_additive(self, builder):
        """Test that concatenating two ECs doubles the location count."""
        ec = builder.templates['ec'].circuit
        joined = concatenate(ec, ec)
        assert count_locations(joined)['total'] == 2 * count_locations(ec)['total']
        assert joined.depth == 2 * ec.depth
        assert validate_linear(joined)

    def test_empty_right_operand(self, builder):
        """Test that appending an empty circuit changes nothing."""
        ec = builder.templates['ec'].circuit
        assert serialize(concatenate(ec, Circuit(width=6))) == serialize(ec)

    def test_empty_left_operand_with_offset(self):
        """Test that an empty left operand still covers the positions before the offset."""
        narrow = Circuit.from_locations(2, [Location(K.CNOT, (0, 1), timeslice=0)])
        joined = concatenate(Circuit(width=0), narrow, offset=2)
        assert joined.width == 4
        assert validate_linear(joined)
        assert [loc.token() for loc in joined.slices[0]] == ['Memory@0', 'Memory@1', 'CNOT@2,3']

    def test_offset_overflow(self, builder):
        """Test that an offset past the width is rejected."""
        ec = builder.templates['ec'].circuit
        with pytest.raises(CircuitError):
            concatenate(ec, ec, offset=1)

    def test_narrow_circuit_is_padded(self):
        """Test that positions outside the appended circuit idle."""
        wide = _idle_circuit(4, 1)
        narrow = Circuit.from_locations(2, [Location(K.CNOT, (0, 1), timeslice=0)])
        joined = concatenate(wide, narrow, offset=2)
        assert validate_linear(joined)
        assert [loc.token() for loc in joined.slices[1]] == ['Memory@0', 'Memory@1', 'CNOT@2,3']

    def test_conflicting_layouts(self):
        """Test that disagreeing role maps are rejected."""
        a = _idle_circuit(2, 1)
        a.layout = {0: 'd1'}
        b = _idle_circuit(2, 1)
        b.layout = {0: 'a1'}
        with pytest.raises(CircuitError):
            concatenate(a, b)

    def test_permutations_compose(self, builder):
        """Test that two half-swapped cycles compose back to the identity."""
        noswap = builder.templates['ec_noswap'].circuit
        assert noswap.permutation == (0, 2, 1, 3)
        assert concatenate(noswap, noswap).permutation == (0, 1, 2, 3)


class TestSerialize:
    """Tests for serialize and parse."""

    def test_round_trip(self, builder):
        """Test that parse and serialize are inverse on templates."""
        for template in builder.templates.values():
            text = serialize(template.circuit)
            assert serialize(parse(text)) == text

    def test_deterministic(self, builder):
        """Test that serializing twice gives identical text."""
        ec = builder.templates['ec'].circuit
        assert serialize(ec) == serialize(ec)

    def test_header_and_first_slice(self, builder):
        """Test the canonical text of the syndrome-extraction template."""
        lines = serialize(builder.templates['ec'].circuit).splitlines()
        assert lines[0] == '# width 6'
        assert lines[1] == '# layout 0:d1 1:a1 2:d2 3:d3 4:a2 5:d4'
        assert lines[2] == 'Memory@0 PrepX@1 Memory@2 Memory@3 PrepX@4 Memory@5'

    def test_permutation_header(self, builder):
        """Test that a nontrivial output permutation is written out."""
        text = serialize(builder.templates['ec_noswap'].circuit)
        assert '# permutation 0 2 1 3' in text
        assert parse(text).permutation == (0, 2, 1, 3)

    def test_level_two_round_trip(self, builder):
        """Test that a level-2 circuit keeps its level, per-location levels and stretched Memory."""
        _, circuit = builder.build_level_circuit('ec', 2)
        text = serialize(circuit)
        assert '# level 2' in text
        parsed = parse(text)
        assert parsed.level == 2
        assert serialize(parsed) == text
        assert count_locations(parsed) == count_locations(circuit)
        assert sorted(loc.duration for loc in parsed.locations) == sorted(loc.duration for loc in circuit.locations)
        assert {loc.level for loc in parsed.locations} == {1, 2}

    def test_stretched_memory_and_empty_slice(self):
        """Test that a Memory lasting two slices leaves an empty second slice."""
        text = '# width 2\nMemory@0*2 Memory@1*2\n~\n'
        parsed = parse(text)
        assert parsed.depth == 2
        assert parsed.slices[1] == []
        assert [loc.duration for loc in parsed.locations] == [2, 2]
        assert validate_linear(parsed)
        assert serialize(parsed) == text

    def test_stretched_gate_rejected(self):
        """Test that only Memory may span several slices."""
        with pytest.raises(CircuitParseError):
            parse('# width 2\nCNOT@0,1*2\n~\n')

    def test_non_adjacent_cnot_rejected(self):
        """Test that parse reports a non-adjacent CNOT with its location id."""
        with pytest.raises(CircuitParseError) as excinfo:
            parse('# width 3\nCNOT@0,2 Memory@1\n')
        assert excinfo.value.line == 2
        assert excinfo.value.column == 1
        assert excinfo.value.location_id == 0

    def test_malformed_token(self):
        """Test that malformed tokens carry line and column."""
        with pytest.raises(CircuitParseError) as excinfo:
            parse('# width 2\nMemory@0 Memory@1\nMemory@0 Bogus\n')
        assert excinfo.value.line == 3
        assert excinfo.value.column == 10
