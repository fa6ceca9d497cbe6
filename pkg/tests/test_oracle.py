import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csaforge.exceptions import ModulusError, ParameterDomainError
from csaforge.oracle import (
    check_modulus,
    make_vectors,
    modular_adder_trace,
    oracle_csa_bit,
    oracle_modexp,
    oracle_modmul,
    oracle_modular_adder,
    oracle_two_two,
    residues,
)


@st.composite
def adder_case(draw):
    n = draw(st.integers(min_value=2, max_value=12))
    m = draw(st.integers(min_value=1 << (n - 1), max_value=(1 << n) - 1).filter(lambda x: x % 2))
    top = (1 << (n + 2)) - 1
    a, b, c = (draw(st.integers(min_value=0, max_value=top)) for _ in range(3))
    return n, m, a, b, c


class TestModulus:
    @pytest.mark.parametrize("n, m", [(3, 5), (3, 7), (4, 9), (2, 3)])
    def test_valid(self, n, m):
        check_modulus(n, m)

    @pytest.mark.parametrize("n, m", [(3, 6), (3, 3), (4, 7), (3, 9), (2, 1)])
    def test_invalid(self, n, m):
        with pytest.raises(ModulusError):
            check_modulus(n, m)

    def test_short_register(self):
        with pytest.raises(ParameterDomainError):
            check_modulus(1, 1)

    def test_residues(self):
        assert residues(3, 7) == (2, 2, 4)
        assert residues(3, 5) == (1, 1, 2)


def test_single_bit_adders():
    for a in (0, 1):
        for b in (0, 1):
            assert oracle_two_two(a, b) == (a ^ b, a & b)
            for c in (0, 1):
                s, carry = oracle_csa_bit(a, b, c)
                assert s + 2 * carry == a + b + c


class TestModularAdder:
    @settings(max_examples=300, deadline=None)
    @given(adder_case())
    def test_congruent_and_bounded(self, case):
        n, m, a, b, c = case
        u, v = oracle_modular_adder(a, b, c, n, m)
        assert (u + v - (a + b + c)) % m == 0
        assert 0 <= u < 1 << (n + 2)
        assert 0 <= v < 1 << (n + 2)

    def test_output_feeds_back(self):
        n, m = 4, 11
        u, v = 0, 0
        total = 0
        for c in range(1 << (n + 2)):
            u, v = oracle_modular_adder(u, v, c, n, m)
            total += c
        assert (u + v) % m == total % m

    def test_trace_layers(self):
        trace = modular_adder_trace(7, 9, 30, 3, 7)
        assert len(trace.layers) == 4
        assert trace.layers[0].value == 7 + 9 + 30
        assert set(trace.controls) == {"v4", "u4", "v5"}
        assert trace.result.value % 7 == 46 % 7

    def test_input_too_wide(self):
        with pytest.raises(ParameterDomainError):
            oracle_modular_adder(32, 0, 0, 3, 7)


def test_modmul_and_modexp():
    assert oracle_modmul(5, 6, 7) == 2
    assert oracle_modexp(3, 5, 7) == 5
    with pytest.raises(ParameterDomainError):
        oracle_modmul(1, 1, 1)


class TestVectors:
    def test_exhaustive_when_budget_covers_domain(self):
        vectors = make_vectors("multiplier", {"n": 2, "m": 3})
        assert len(vectors) == 16
        assert len(set(vectors.inputs())) == 16

    def test_budget_keeps_corners(self):
        vectors = make_vectors("adder", {"n": 4, "m": 11}, budget=40, seed=3)
        assert len(vectors) == 40
        assert vectors.inputs()[0] == (0, 0, 0)
        assert (63, 63, 63) in vectors.inputs()
        for inputs, expected in vectors.vectors:
            assert expected == oracle_modular_adder(*inputs, 4, 11)

    def test_seeded(self):
        a = make_vectors("adder", {"n": 5, "m": 21}, budget=30, seed=9)
        b = make_vectors("adder", {"n": 5, "m": 21}, budget=30, seed=9)
        assert a.vectors == b.vectors

    def test_modexp_vectors(self):
        vectors = make_vectors("modexp", {"a": 3, "m": 7, "t": 3})
        assert dict(vectors.vectors)[(1, 0, 1)] == 5

    def test_budget_below_corners(self):
        with pytest.raises(ParameterDomainError):
            make_vectors("adder", {"n": 4, "m": 11}, budget=2)

    def test_unknown_block(self):
        with pytest.raises(ParameterDomainError):
            make_vectors("divider", {})
