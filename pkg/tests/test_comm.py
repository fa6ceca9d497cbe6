import itertools

import pytest
from conftest import cat, random_qubit

from csaforge.circuit import CircuitBuilder, GateKind
from csaforge.comm import (
    build_bell_measure,
    build_fanout,
    build_teleport,
    build_unfanout,
    emit_fanout,
    merge_corrections,
    pauli_counts,
)
from csaforge.exceptions import AdjacencyError, UnsupportedLength
from csaforge.layout import verify_architecture
from csaforge.resources import count_resources
from csaforge.sim import SimState, fidelity, run


def _run_with_source(c, alpha, beta, **kwargs):
    source = c.register("source")[0]
    state = SimState.product(c.qubits, {source.key: (alpha, beta)})
    return run(c, state, **kwargs)


class TestBellMeasure:
    def test_counts(self):
        r = count_resources(build_bell_measure())
        assert (r.depth, r.size, r.width) == (3, 4, 2)

    def test_parity_bit_of_01(self):
        c = build_bell_measure()
        state = run(c, {c.register("q2")[0].key: 1}, seed=3)
        # slots: k (parity) is measured first
        assert state.record[0] == 1

    def test_rejects_distant_qubits(self):
        with pytest.raises(AdjacencyError):
            build_bell_measure((0, 0), (2, 0))


class TestTableOneBounds:
    @pytest.mark.parametrize("n", [3, 5, 7, 9])
    def test_teleport(self, n):
        r = count_resources(build_teleport(n))
        assert r.depth <= 7
        assert r.size <= 3 * n + 4
        assert r.width <= n + 1

    @pytest.mark.parametrize("n", range(2, 10))
    def test_fanout(self, n):
        r = count_resources(build_fanout(n))
        assert r.depth <= 9
        assert r.size <= 10 * n - 9
        assert r.width <= 3 * n - 1

    @pytest.mark.parametrize("n", range(2, 10))
    def test_unfanout(self, n):
        r = count_resources(build_unfanout(n))
        assert r.depth <= 6
        assert r.size <= 3 * n + 2
        assert r.width <= n

    def test_depth_is_constant(self):
        assert len({build_fanout(n).depth for n in range(2, 10)}) == 1
        assert len({build_teleport(n).depth for n in (3, 5, 7, 9)}) == 1

    @pytest.mark.parametrize(
        "circuit", [build_teleport(5), build_fanout(4), build_unfanout(5), build_unfanout(4)]
    )
    def test_layout(self, circuit):
        assert verify_architecture(circuit).ok


class TestLengths:
    def test_teleport_needs_odd_length(self):
        with pytest.raises(UnsupportedLength):
            build_teleport(4)
        with pytest.raises(UnsupportedLength):
            build_teleport(1)

    def test_fanout_line_multiple_of_three(self):
        b = CircuitBuilder("bad")
        source = b.qubit((0, 0))
        line = [b.qubit((x, 0)) for x in range(1, 5)]
        with pytest.raises(UnsupportedLength):
            emit_fanout(b, source, line)

    def test_unfanout_needs_two(self):
        with pytest.raises(UnsupportedLength):
            build_unfanout(1)


class TestTeleportChannel:
    @pytest.mark.parametrize("n", [3, 5, 7])
    def test_random_states_and_seeds(self, rng, n):
        c = build_teleport(n)
        target = c.register("target")
        for _ in range(20):
            alpha, beta = random_qubit(rng)
            for seed in range(3):
                state = _run_with_source(c, alpha, beta, seed=seed)
                assert fidelity(state, target, [alpha, beta]) == pytest.approx(1, abs=1e-9)

    def test_every_outcome_branch(self, rng):
        c = build_teleport(5)
        alpha, beta = random_qubit(rng)
        for outcomes in itertools.product((0, 1), repeat=c.record_size):
            state = _run_with_source(c, alpha, beta, outcomes=outcomes)
            assert fidelity(state, c.register("target"), [alpha, beta]) == pytest.approx(1)

    def test_basis_one_arrives(self):
        c = build_teleport(7, reset=True)
        state = run(c, {c.register("source")[0].key: 1}, seed=11)
        assert state.bit(c.register("target")[0]) == 1
        others = [q for q in c.qubits if q not in c.register("target")]
        assert all(state.bit(q) == 0 for q in others)

    def test_unmerged_corrections_agree(self, rng):
        c = build_teleport(7, merged=False)
        alpha, beta = random_qubit(rng)
        state = _run_with_source(c, alpha, beta, seed=5)
        assert fidelity(state, c.register("target"), [alpha, beta]) == pytest.approx(1)


class TestFanoutChannel:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_random_states(self, rng, n):
        c = build_fanout(n)
        out = c.register("out")
        for _ in range(20):
            alpha, beta = random_qubit(rng)
            for seed in range(3):
                state = _run_with_source(c, alpha, beta, seed=seed)
                assert fidelity(state, out, cat(alpha, beta, n)) == pytest.approx(1, abs=1e-9)

    def test_every_outcome_branch(self, rng):
        c = build_fanout(3)
        alpha, beta = random_qubit(rng)
        for outcomes in itertools.product((0, 1), repeat=c.record_size):
            state = _run_with_source(c, alpha, beta, outcomes=outcomes)
            assert fidelity(state, c.register("out"), cat(alpha, beta, 3)) == pytest.approx(1)

    def test_merge_reproduces_merged_builder(self):
        unmerged = build_fanout(5, merged=False)
        merged = merge_corrections(unmerged)
        assert merged.size == build_fanout(5).size
        assert merged.size < unmerged.size
        for per in pauli_counts(merged).values():
            assert per[GateKind.X] <= 1
            assert per[GateKind.Z] <= 1

    def test_merge_without_runs_is_identity(self):
        c = build_bell_measure()
        assert merge_corrections(c) is c


class TestUnfanoutChannel:
    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_collapses_cat_state(self, rng, n):
        c = build_unfanout(n)
        line = c.register("in")
        for _ in range(20):
            alpha, beta = random_qubit(rng)
            for seed in range(3):
                initial = SimState.from_amplitudes(c.qubits, line, cat(alpha, beta, n))
                state = run(c, initial, seed=seed)
                target = c.register("target")
                assert fidelity(state, target, [alpha, beta]) == pytest.approx(1, abs=1e-9)

    def test_fanout_then_unfanout_is_identity(self, rng):
        n = 4
        fan, unfan = build_fanout(n), build_unfanout(n)
        out = fan.register("out")
        line = unfan.register("in")
        for seed in range(3):
            alpha, beta = random_qubit(rng)
            state = _run_with_source(fan, alpha, beta, seed=seed)
            mapping = {q.key: ("fanout", q.index) for q in fan.qubits}
            mapping.update({q.key: l.key for q, l in zip(out, line, strict=True)})
            state = run(unfan, state.renamed(mapping), seed=seed)
            assert fidelity(state, unfan.register("target"), [alpha, beta]) == pytest.approx(1)
