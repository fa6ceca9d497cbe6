import itertools

import pytest

from csaforge.exceptions import CircuitError, ModulusError, ParameterDomainError
from csaforge.hier import flatten
from csaforge.modexp import (
    asymptotic_comparison,
    build_controlled_load,
    build_modexp_tree,
    constructed_depth,
    depth_differences,
    depth_profile,
    estimate_modexp,
    estimate_modexp_constructed,
    estimate_serial_modexp,
    plan_modexp,
    qcla_conversion_resources,
    semantic_modexp,
)
from csaforge.mult import build_modular_multiplier, build_symbolic_multiplier
from csaforge.oracle import oracle_modexp
from csaforge.sim import read_registers, run, run_semantic
from csaforge.utils import from_bits


class TestPlan:
    def test_defaults(self):
        plan = plan_modexp(3)
        assert (plan.m, plan.a, plan.t) == (7, 2, 3 * 2867)
        assert plan.levels == 14

    def test_repeated_squares(self):
        plan = plan_modexp(3, 7, 3, t=4)
        assert plan.leaf_residues == [3, 2, 4, 2]

    def test_leaf_values(self):
        plan = plan_modexp(3, 7, 3, t=3)
        assert plan.leaf_values([1, 0, 1]) == [3, 1, 4]
        with pytest.raises(ParameterDomainError):
            plan.leaf_values([1, 0])

    @pytest.mark.parametrize("kwargs", [{"t": 1}, {"a": 0}, {"a": 7}])
    def test_invalid(self, kwargs):
        with pytest.raises(ParameterDomainError):
            plan_modexp(3, 7, **kwargs)

    def test_bad_modulus(self):
        with pytest.raises(ModulusError):
            plan_modexp(3, 9)


class TestSemantics:
    @pytest.mark.parametrize("controls, expected", [((1, 0, 1), 5), ((1, 1, 0), 6), ((0, 0, 0), 1)])
    def test_known_values(self, controls, expected):
        assert semantic_modexp(plan_modexp(3, 7, 3, t=3), controls) == expected

    def test_all_controls_match_oracle(self):
        plan = plan_modexp(3, 7, 3, t=4)
        for controls in itertools.product((0, 1), repeat=4):
            assert semantic_modexp(plan, controls) == oracle_modexp(3, from_bits(controls), 7)

    def test_tree_semantic(self):
        tree = build_modexp_tree(plan_modexp(3, 7, 3, t=5))
        assert run_semantic(tree, {"p": [1, 0, 1, 0, 1]}) == pow(3, 21, 7)


class TestControlledLoad:
    @pytest.mark.parametrize("p0, p1", list(itertools.product((0, 1), repeat=2)))
    def test_loads_value_or_one(self, p0, p1):
        circuit = build_controlled_load(3, [3, 4]).leaf
        initial = {}
        for name, bit in (("p0", p0), ("p1", p1)):
            if bit:
                initial[circuit.register(name)[0].key] = 1
        out = read_registers(run(circuit, initial), circuit)
        assert out["value0"] == (3 if p0 else 1)
        assert out["value1"] == (4 if p1 else 1)
        assert (out["p0"], out["p1"]) == (p0, p1)

    def test_operand_count(self):
        with pytest.raises(ParameterDomainError):
            build_controlled_load(3, [])
        with pytest.raises(ParameterDomainError):
            build_controlled_load(3, [1, 2, 3])

    def test_semantic(self):
        block = build_controlled_load(3, [3, 4])
        assert run_semantic(block, {"p": [0, 1]}) == [1, 4]


class TestTree:
    def test_structure(self):
        tree = build_modexp_tree(plan_modexp(3, 7, 3, t=5))
        multiplier = build_modular_multiplier(3, 7).rollup()
        r = tree.rollup()
        # loads, first products, then two merge levels
        assert len(tree.stages) == 4
        # slot 2 only ever holds its load; it is merged into slot 0
        load = tree.resolve(("mul.2",)).rollup()
        assert r.width == 2 * multiplier.width + load.width
        assert r.module_width == 3
        assert r.module_size == 2 * 9 + multiplier.module_size

    def test_symbolic_teleports_block_flattening(self):
        with pytest.raises(CircuitError):
            flatten(build_modexp_tree(plan_modexp(3, 7, 3, t=4)))

    def test_two_leaves(self):
        tree = build_modexp_tree(plan_modexp(2, 3, 2, t=2))
        assert len(tree.stages) == 2


class TestEstimates:
    def test_closed_form(self):
        bound = estimate_modexp(2)
        assert bound.depth == 71731
        assert bound.module_width == 2868
        assert estimate_modexp(4).module_depth == 30

    def test_qcla_conversion(self):
        r = qcla_conversion_resources(4)
        assert (r.depth, r.width) == (140, 380)
        assert qcla_conversion_resources(2).depth == 84

    def test_constructed_adds_conversion(self):
        tree = build_modexp_tree(plan_modexp(2, 3, t=4)).rollup()
        r = estimate_modexp_constructed(2, t=4)
        assert r.depth == tree.depth + 84
        assert r.width == tree.width

    def test_serial_chains_multipliers(self):
        r = estimate_serial_modexp(3, 7, a=3)
        bases = [3, 2, 4, 2, 4, 2]
        depths = [build_modular_multiplier(3, 7, "serial", a).rollup().depth for a in bases]
        assert r.depth == sum(depths)

    def test_serial_bad_modulus(self):
        with pytest.raises(ModulusError):
            estimate_serial_modexp(3, 8)


class TestConstructedDepth:
    @pytest.fixture(scope="class")
    def profile(self):
        return depth_profile(range(2, 17))

    def test_depth_grows_with_n(self, profile):
        assert profile.depths == sorted(profile.depths)
        assert profile.depths[-1] > profile.depths[0]

    def test_doubling_n_stays_far_from_doubling_depth(self, profile):
        ratios = profile.doubling_ratios()
        assert sorted(ratios) == [2, 3, 4, 5, 6, 7, 8]
        assert all(1 < r < 1.5 for r in ratios.values())

    def test_quadratic_in_log_n(self, profile):
        assert profile.max_relative_residual < 0.2

    def test_third_differences_small(self, profile):
        (difference,) = depth_differences()
        assert abs(difference) < 0.1 * profile.depths[-1]

    def test_depth_adds_levels(self):
        plan = plan_modexp(3, t=8)
        multiplier = build_symbolic_multiplier(3, 7)
        tree = build_modexp_tree(plan, multiplier)
        load = max(p.block.rollup().depth for p in tree.stages[0].placements)
        mult = multiplier.rollup().depth
        assert len(tree.stages) == plan.levels + 1
        assert tree.rollup().depth == load + mult + (plan.levels - 1) * (mult + 1)
        assert constructed_depth(3, t=8) == tree.rollup().depth

    def test_domain(self):
        with pytest.raises(ParameterDomainError):
            depth_profile([2, 4])
        with pytest.raises(ParameterDomainError):
            depth_profile([1, 2, 3])
        with pytest.raises(ParameterDomainError):
            depth_differences((1, 2, 3))


def test_comparison_table():
    rows = asymptotic_comparison()
    assert len(rows) == 11
    assert rows[-1].depth == "O(log^2 n)"
    assert {row.architecture for row in rows} >= {"AC", "1D NTC", "2D CCNTCM"}
