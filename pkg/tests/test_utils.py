# tests/test_utils.py
from hypothesis import given, strategies as st

from csaforge.types import CarrySaveNumber
from csaforge.utils import bits_of, ceil_log, from_bits, set_bit_positions, third_differences


class TestBits:
    def test_bits_of_is_little_endian(self):
        assert bits_of(6, 4) == [0, 1, 1, 0]

    @given(st.integers(min_value=0, max_value=2**40))
    def test_from_bits_inverts_bits_of(self, value):
        assert from_bits(bits_of(value, 41)) == value

    def test_set_bit_positions(self):
        assert set_bit_positions(0) == []
        assert set_bit_positions(0b10110) == [1, 2, 4]


class TestCeilLog:
    def test_exact_power_does_not_round_up(self):
        assert ceil_log(9 / 4, 1.5) == 2
        assert ceil_log(8, 2) == 3

    def test_values_at_most_one(self):
        assert ceil_log(1, 1.5) == 0
        assert ceil_log(0.5, 2) == 0

    def test_rounds_up_between_powers(self):
        assert ceil_log(6, 1.5) == 5


def test_third_differences_vanish_on_quadratic():
    values = [3 * x * x - 2 * x + 1 for x in range(6)]
    assert third_differences(values) == [0, 0, 0]


class TestCarrySaveNumber:
    def test_value_is_sum_of_parts(self):
        c = CarrySaveNumber(u=0b1010, v=0b0110)
        assert c.value == 16
        assert c.u_bit(1) == 1
        assert c.v_bit(0) == 0
        assert c.bit_length() == 4

    def test_rejects_low_carry_bit(self):
        import pytest
        from pydantic import ValidationError

        with pytest.raises(ValidationError):
            CarrySaveNumber(u=0, v=1)
