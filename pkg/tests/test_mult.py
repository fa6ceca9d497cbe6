import math

import pytest
from conftest import cat, random_qubit
from hypothesis import given, settings
from hypothesis import strategies as st

from csaforge.circuit import CircuitBuilder
from csaforge.exceptions import CircuitError, ModulusError, ParameterDomainError
from csaforge.formulas import check_bounds, evaluate_bound, mma_height, t_prime
from csaforge.hier import flatten, symbolic
from csaforge.layout import verify_architecture
from csaforge.mult import (
    build_mma_tree,
    build_modular_multiplier,
    build_partial_products,
    build_serial_partial_products,
    build_symbolic_multiplier,
    cse_layout,
    emit_copy_rounds,
    mma_schedule,
    partial_product_values,
    plan_partial_products,
    ppc_lattice_geometry,
    reduce_numbers,
    semantic_multiply,
    semantic_multiply_serial,
)
from csaforge.resources import ResourceReport, count_resources
from csaforge.sim import SimState, fidelity, read_registers, run, run_semantic
from csaforge.types import CarrySaveNumber
from csaforge.utils import set_bit_positions


@st.composite
def cse_input(draw, n):
    limit = 1 << (n + 2)
    u = draw(st.integers(min_value=0, max_value=limit - 1))
    v = draw(st.integers(min_value=0, max_value=limit // 2 - 1)) * 2
    return CarrySaveNumber(u=u, v=v)


class TestPlanning:
    def test_cse_layout(self):
        assert cse_layout(2) == [("u", 0), ("u", 1), ("v", 1), ("u", 2), ("v", 2), ("u", 3), ("v", 3)]

    @pytest.mark.parametrize("n", range(2, 13))
    @pytest.mark.parametrize("modulus", ["all_ones", "half_plus_one"])
    def test_t_prime_matches_closed_form(self, n, modulus):
        m = (1 << n) - 1 if modulus == "all_ones" else (1 << (n - 1)) + 1
        plan = plan_partial_products(n, m)
        assert plan.t_prime == t_prime(n)
        assert plan.t_prime_bound == t_prime(n)
        assert len(plan.z_sites) == 2 * n * n + 14 * n + 8
        assert len(plan.single_bit_groups) == 2 * n + 3

    @pytest.mark.parametrize("n, m", [(4, 11), (6, 45), (8, 255)])
    def test_numbers_fit_n_bits(self, n, m):
        plan = plan_partial_products(n, m)
        placed = 0
        for parts in plan.numbers():
            positions = [pos for part in parts for pos in set_bit_positions(part.residue)]
            assert len(set(positions)) == len(positions)
            assert all(0 <= pos < n for pos in positions)
            placed += len(parts)
        assert placed == (2 * n + 3) ** 2

    def test_overflow_fills_z_sites(self):
        plan = plan_partial_products(5, 31)
        filled = [extra for extra in plan.z_site_fill if extra]
        assert filled
        for site, extra in zip(plan.z_sites, plan.z_site_fill, strict=True):
            assert all(part.significance < 5 for part in extra)
            assert site.residue & sum(part.residue for part in extra) == 0

    def test_plans_are_memoized(self):
        assert plan_partial_products(3, 7) is plan_partial_products(3, 7)

    def test_serial_plan(self):
        plan = plan_partial_products(3, 7, "serial", a=3)
        assert [site.residue for site in plan.z_sites] == [3, 6, 5]
        assert plan.t_prime == 3
        assert plan.t_prime_bound == 3

    def test_serial_needs_operand(self):
        with pytest.raises(ParameterDomainError):
            plan_partial_products(3, 7, "serial")

    def test_unknown_variant(self):
        with pytest.raises(ParameterDomainError):
            plan_partial_products(3, 7, "diagonal")

    def test_bad_modulus(self):
        with pytest.raises(ModulusError):
            plan_partial_products(3, 4)

    def test_lattice_geometry(self):
        geometry = ppc_lattice_geometry(2)
        assert geometry.side == 21
        assert geometry.rounds == 3
        assert geometry.live_lines == [1, 3, 7]
        assert geometry.intersections == [1, 9, 49]


class TestPartialProducts:
    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_sum_is_congruent(self, data):
        n, m = 3, 7
        x, y = data.draw(cse_input(n)), data.draw(cse_input(n))
        plan = plan_partial_products(n, m)
        assert sum(partial_product_values(plan, x, y)) % m == x.value * y.value % m

    def test_integers_accepted(self):
        plan = plan_partial_products(3, 5)
        assert sum(partial_product_values(plan, 4, 3)) % 5 == 2

    def test_oversized_input(self):
        plan = plan_partial_products(3, 7)
        with pytest.raises(ParameterDomainError):
            partial_product_values(plan, CarrySaveNumber(u=32), CarrySaveNumber())

    @pytest.mark.parametrize("n", [2, 3])
    def test_circuit_within_formula(self, n):
        plan = plan_partial_products(n, (1 << n) - 1)
        block = build_partial_products(plan)
        assert block.kind == "ppc"
        assert check_bounds(block.rollup(), "ppc", n).passed
        z_registers = [name for name in block.leaf.registers if name.startswith("z")]
        assert len(z_registers) == plan.t_prime

    def test_copy_rounds_follow_lattice(self):
        block = build_partial_products(plan_partial_products(2, 3))
        circuit = block.leaf
        side = ppc_lattice_geometry(2).side
        for qubit in circuit.qubits:
            x, y = qubit.coord
            assert 0 <= x < side
            assert -side < y < side
        assert verify_architecture(circuit).ok

    def test_depth_grows_with_rounds_not_n(self):
        reports = {
            n: build_partial_products(plan_partial_products(n, (1 << n) - 1)).rollup()
            for n in (4, 8, 16)
        }
        # one more copy round per doubling of n
        assert reports[8].depth - reports[4].depth <= 30
        assert reports[16].depth - reports[8].depth <= 30
        assert check_bounds(reports[16], "ppc", 16).passed

    def test_parallel_builder_rejects_serial_plan(self):
        with pytest.raises(ParameterDomainError):
            build_partial_products(plan_partial_products(3, 7, "serial", a=2))
        with pytest.raises(ParameterDomainError):
            build_serial_partial_products(plan_partial_products(3, 7))

    @pytest.mark.parametrize("x", range(8))
    def test_serial_circuit_simulates(self, x):
        plan = plan_partial_products(3, 7, "serial", a=3)
        circuit = build_serial_partial_products(plan).leaf
        initial = {q.key: 1 for i, q in enumerate(circuit.register("x")) if (x >> i) & 1}
        state = run(circuit, initial, seed=x)
        names = [f"z{i}" for i in range(plan.t_prime)]
        values = read_registers(state, circuit, names)
        assert [values[name] for name in names] == partial_product_values(plan, x)


class TestCopyRounds:
    @staticmethod
    def _line(size, rounds=None):
        b = CircuitBuilder(f"copies[{size}]")
        homes = [b.qubit((x, 0)) for x in range(size)]
        emit_copy_rounds(b, homes, (size - 1).bit_length() if rounds is None else rounds, 1)
        b.register("source", [homes[0]])
        b.register("out", homes)
        return b.build()

    @pytest.mark.parametrize("size", [2, 3, 5, 7, 9])
    def test_every_home_holds_the_source(self, rng, size):
        c = self._line(size)
        out = c.register("out")
        for seed in range(3):
            alpha, beta = random_qubit(rng)
            state = SimState.product(c.qubits, {out[0].key: (alpha, beta)})
            state = run(c, state, seed=seed)
            assert fidelity(state, out, cat(alpha, beta, size)) == pytest.approx(1, abs=1e-9)

    def test_depth_per_round_is_bounded(self):
        depths = [self._line(1 << r).depth for r in range(2, 8)]
        steps = [b - a for a, b in zip(depths, depths[1:], strict=False)]
        assert all(0 < step <= 12 for step in steps)
        assert depths[-1] < (1 << 7) - 1

    def test_layout_rules_hold(self):
        assert verify_architecture(self._line(13)).ok

    def test_too_few_rounds(self):
        with pytest.raises(ParameterDomainError):
            self._line(9, rounds=3)


class TestMmaSchedule:
    def test_eighteen_numbers(self):
        schedule = mma_schedule(18)
        assert schedule.height == 6
        assert schedule.tile_count == 16

    def test_every_number_consumed_once(self):
        schedule = mma_schedule(29)
        produced = set(range(29)) | {o for stage in schedule.stages for s in stage for o in s.outputs}
        assert set(schedule.consumers) == produced - set(schedule.result)

    @pytest.mark.parametrize("t", range(3, 101))
    def test_height_near_closed_form(self, t):
        assert mma_schedule(t).height <= mma_height(t) + 1

    def test_too_few_numbers(self):
        with pytest.raises(ParameterDomainError):
            mma_schedule(2)

    def test_tree_rollup(self):
        tree = build_mma_tree(5, 3, 7)
        r = tree.rollup()
        tile = tree.resolve(("s0.t0",)).rollup()
        assert r.width == 3 * tile.width
        assert r.module_width == 3
        assert r.module_depth >= 1

    def test_symbolic_tiles_count_their_traffic(self):
        tile = symbolic("tile", ResourceReport(D=10, S=20, W=9, Wbar=1))
        tree = build_mma_tree(5, 3, 7, tile=tile)
        assert [stage.teleports for stage in tree.stages] == [0, 5, 15]
        assert tree.rollup().depth == 10 + 2 * (1 + 10)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(min_value=0, max_value=31), min_size=3, max_size=20))
    def test_reduce_is_congruent(self, numbers):
        result = reduce_numbers(numbers, 3, 7)
        assert result.value % 7 == sum(numbers) % 7
        assert result.u < 32
        assert result.v < 32


class TestMultiplier:
    @settings(max_examples=100, deadline=None)
    @given(st.data())
    def test_semantic_multiply(self, data):
        n, m = 3, 5
        x, y = data.draw(cse_input(n)), data.draw(cse_input(n))
        assert semantic_multiply(x, y, n, m).value % m == x.value * y.value % m

    @pytest.mark.parametrize("x", range(8))
    def test_semantic_serial(self, x):
        assert semantic_multiply_serial(x, 3, 3, 7).value % 7 == 3 * x % 7

    def test_block_semantic(self):
        block = build_modular_multiplier(3, 7)
        out = run_semantic(block, {"x": CarrySaveNumber(u=5), "y": CarrySaveNumber(u=6)})
        assert out.value % 7 == 2
        serial = build_modular_multiplier(3, 7, "serial", a=3)
        assert run_semantic(serial, {"x": 4}).value % 7 == 5

    def test_block_structure(self):
        block = build_modular_multiplier(2, 3)
        assert block.params["t_prime"] == plan_partial_products(2, 3).t_prime
        assert [p.label for p in block.children()] == ["ppc", "mma", "out", "mma", "ppc"]
        assert block.stages[3].placements[0].block.mirrored

    def test_flattened_matches_rollup(self):
        block = build_modular_multiplier(2, 3, "serial", a=2)
        flat = count_resources(flatten(block))
        rolled = block.rollup()
        assert (flat.depth, flat.size, flat.width) == (rolled.depth, rolled.size, rolled.width)

    @pytest.mark.parametrize("n", [2, 4, 9])
    def test_symbolic_multiplier_depth(self, n):
        m = (1 << n) - 1
        height = mma_schedule(t_prime(n)).height
        ppc = math.ceil(evaluate_bound("ppc", n).depth)
        block = build_symbolic_multiplier(n, m)
        assert [p.label for p in block.children()] == ["ppc", "mma", "out", "mma", "ppc"]
        assert block.rollup().depth == 2 * ppc + 750 * height + 3
        with pytest.raises(CircuitError):
            flatten(block)
