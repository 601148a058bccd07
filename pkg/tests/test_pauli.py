"""
Tests for the Pauli frame kernel.
"""
import numpy as np
import pytest
from scipy import stats

from app.errors import LinearityError
from app.models.circuit import LocationKind
from app.models.pauli import (
    Basis, ErrorFrame, PauliLetter, apply_gate, compose, flips_measurement, sample_error,
)

I, X, Y, Z = PauliLetter.I, PauliLetter.X, PauliLetter.Y, PauliLetter.Z
K = LocationKind
ALL_PAIRS = [(PauliLetter(c & 3), PauliLetter(c >> 2)) for c in range(1, 16)]


class TestCompose:
    """Tests for compose."""

    def test_x_times_z_is_y(self):
        """Test that X times Z is Y with the phase dropped."""
        assert compose(X, Z) is Y

    def test_involution(self):
        """Test that every letter squares to identity."""
        for letter in PauliLetter:
            assert compose(letter, letter) is I

    def test_identity(self):
        """Test that I is the identity."""
        assert compose(I, Y) is Y


class TestErrorFrame:
    """Tests for ErrorFrame."""

    def test_absent_position_is_identity(self):
        """Test that lookups of absent positions return I."""
        assert ErrorFrame()[7] is I

    def test_toggle_removes_identity_entries(self):
        """Test that cancelling an entry removes it."""
        frame = ErrorFrame({3: X})
        frame.toggle(3, X)
        assert len(frame) == 0

    def test_merge(self):
        """Test that merging composes position-wise."""
        merged = ErrorFrame({0: X, 1: Z}).merge(ErrorFrame({0: Z}))
        assert merged.to_dict() == {0: 'Y', 1: 'Z'}


class TestApplyGate:
    """Tests for apply_gate."""

    def test_cnot_copies_x_forward(self):
        """Test that CNOT copies X from control to target."""
        frame = apply_gate(ErrorFrame({4: X}), K.CNOT, (4, 5))
        assert frame.to_dict() == {4: 'X', 5: 'X'}

    def test_cnot_copies_z_backward(self):
        """Test that CNOT copies Z from target to control."""
        frame = apply_gate(ErrorFrame({5: Z}), K.CNOT, (4, 5))
        assert frame.to_dict() == {4: 'Z', 5: 'Z'}

    def test_cnot_with_control_on_the_right(self):
        """Test that the first position is the control regardless of order."""
        frame = apply_gate(ErrorFrame({5: X}), K.CNOT, (5, 4))
        assert frame.to_dict() == {4: 'X', 5: 'X'}

    def test_hadamard_keeps_y(self):
        """Test that H maps Y to Y."""
        assert apply_gate(ErrorFrame({2: Y}), K.H, (2,))[2] is Y

    def test_hadamard_exchanges_x_and_z(self):
        """Test that H exchanges X and Z."""
        assert apply_gate(ErrorFrame({2: X}), K.H, (2,))[2] is Z

    def test_prep_clears(self):
        """Test that preparation resets the entry."""
        assert len(apply_gate(ErrorFrame({1: Y}), K.PREP_X, (1,))) == 0

    def test_swap_twice_is_identity(self):
        """Test that applying SWAP twice restores every two-qubit frame."""
        for a, b in ALL_PAIRS:
            frame = ErrorFrame({0: a, 1: b})
            once = apply_gate(frame.copy(), K.SWAP, (0, 1))
            assert once[0] is b and once[1] is a
            assert apply_gate(once, K.SWAP, (0, 1)) == frame

    def test_non_adjacent_rejected(self):
        """Test that two-qubit gates on non-adjacent positions raise."""
        with pytest.raises(LinearityError):
            apply_gate(ErrorFrame(), K.CNOT, (0, 2))

    @pytest.mark.parametrize('kind', [K.CNOT, K.SWAP])
    def test_linearity(self, kind):
        """Test that conjugating a product equals the product of conjugates."""
        for a1, b1 in ALL_PAIRS:
            for a2, b2 in ALL_PAIRS:
                f1 = ErrorFrame({0: a1, 1: b1})
                f2 = ErrorFrame({0: a2, 1: b2})
                joint = apply_gate(f1.merge(f2), kind, (0, 1))
                separate = apply_gate(f1.copy(), kind, (0, 1)).merge(apply_gate(f2.copy(), kind, (0, 1)))
                assert joint == separate


class TestFlipsMeasurement:
    """Tests for flips_measurement."""

    def test_x_flips_z_readout(self):
        """Test that X anticommutes with a Z measurement."""
        assert flips_measurement(ErrorFrame({0: X}), 0, Basis.Z) is True

    def test_z_invisible_to_z_readout(self):
        """Test that Z commutes with a Z measurement."""
        assert flips_measurement(ErrorFrame({0: Z}), 0, Basis.Z) is False

    def test_y_flips_both(self):
        """Test that Y flips readouts in either basis."""
        frame = ErrorFrame({0: Y})
        assert flips_measurement(frame, 0, Basis.Z) and flips_measurement(frame, 0, Basis.X)

    def test_empty_frame(self):
        """Test that an empty frame flips nothing."""
        assert flips_measurement(ErrorFrame(), 3, Basis.X) is False


class TestSampleError:
    """Tests for sample_error."""

    def test_single_qubit_uniform(self):
        """Test that single-qubit draws are uniform over X, Y and Z."""
        rng = np.random.default_rng(11)
        draws = [sample_error(K.MEMORY, rng)[0] for _ in range(30000)]
        counts = [draws.count(letter) for letter in (X, Y, Z)]
        assert I not in draws
        assert stats.chisquare(counts).pvalue > 0.001

    def test_two_qubit_uniform_and_nontrivial(self):
        """Test that two-qubit draws cover the 15 nontrivial pairs uniformly."""
        rng = np.random.default_rng(12)
        draws = [sample_error(K.CNOT, rng) for _ in range(100000)]
        assert (I, I) not in draws
        counts = [draws.count(pair) for pair in ALL_PAIRS]
        assert sum(counts) == len(draws)
        assert stats.chisquare(counts).pvalue > 0.001
