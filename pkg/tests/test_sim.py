"""State-vector simulator: gate kernels against explicit Kronecker-product matrices."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lchs_fvm import sim
from lchs_fvm.blocks import kron_all

I2 = np.eye(2)
P1 = np.diag([0.0, 1.0])
P0 = np.diag([1.0, 0.0])


def embed(nq, gate):
    """Dense matrix of ``gate`` built from projectors: I - P_c + P_c (x) U on the target."""
    if gate.kind == "GPHASE":
        return np.exp(1j * gate.angle) * np.eye(2 ** nq)
    u = gate.matrix2()
    # factors are listed from the highest qubit down to qubit 0
    def factor(q, on_target, ctl_proj):
        if q == gate.target:
            return u if on_target else I2
        if q in gate.controls:
            return ctl_proj
        return I2
    full = kron_all([factor(q, True, P1) for q in reversed(range(nq))])
    # subtract the controlled-target part and add identity on the same subspace
    ctl_only = kron_all([factor(q, False, P1) for q in reversed(range(nq))])
    return np.eye(2 ** nq) - ctl_only + full


def random_state(nq, rng):
    v = rng.normal(size=2 ** nq) + 1j * rng.normal(size=2 ** nq)
    return v / np.linalg.norm(v)


class TestGate:
    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            sim.Gate("CZ", 0)

    def test_rejects_control_on_target(self):
        with pytest.raises(ValueError):
            sim.Gate("X", 1, (1,))

    def test_rejects_duplicate_controls(self):
        with pytest.raises(ValueError):
            sim.Gate("X", 0, (1, 1))

    def test_global_phase_takes_no_qubits(self):
        with pytest.raises(ValueError):
            sim.Gate("GPHASE", 0, angle=0.1)

    def test_non_unitary_matrix_rejected(self):
        with pytest.raises(ValueError):
            sim.single_qubit(0, np.array([[1, 1], [0, 1]]))

    def test_with_control_turns_global_phase_into_phase(self):
        g = sim.global_phase(0.7).with_control(3)
        assert g.kind == "P" and g.target == 3 and g.angle == 0.7

    @pytest.mark.parametrize("gate", [sim.hadamard(0), sim.pauli_x(0), sim.phase(0, 0.3),
                                      sim.mc_rz([1], 0, 1.1), sim.single_qubit(0, np.array([[0, 1j], [1j, 0]]))])
    def test_adjoint_inverts(self, gate):
        c = sim.Circuit(2, [gate, gate.adjoint()])
        np.testing.assert_allclose(sim.circuit_unitary(c), np.eye(4), atol=1e-14)

    def test_rz_matrix(self):
        np.testing.assert_allclose(sim.mc_rz([], 0, 0.8).matrix2(), np.diag(np.exp([-0.4j, 0.4j])))

    def test_describe_round_trips_angle(self):
        g = sim.mc_rz([2, 3], 1, 0.123456789012345678)
        kind, tgt, ctl, ang = g.describe().split()
        assert (kind, tgt, ctl) == ("RZ", "1", "2,3")
        assert float(ang) == g.angle


class TestKernels:
    @pytest.mark.parametrize("gate", [
        sim.hadamard(1), sim.pauli_x(2), sim.cnot(0, 2), sim.cnot(2, 0), sim.phase(1, 0.9, [0, 2]),
        sim.mc_rz([0, 1], 2, -1.3), sim.global_phase(0.4),
        sim.Gate("U", 0, (2,), matrix=np.array([[0.6, 0.8j], [0.8j, 0.6]])),
        sim.Gate("H", 1, (0, 2)),
    ])
    def test_gate_matches_embedded_matrix(self, gate):
        c = sim.Circuit(3, [gate])
        np.testing.assert_allclose(sim.circuit_unitary(c), embed(3, gate), atol=1e-14)

    def test_qubit_zero_is_least_significant(self):
        st_ = sim.QuantumState.zero(3)
        sim.apply_gate(st_, sim.pauli_x(0))
        assert np.argmax(np.abs(st_.amplitudes)) == 1

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1))
    def test_random_circuit_matches_product_of_embeddings(self, seed):
        rng = np.random.default_rng(seed)
        nq = 4
        gates = []
        for _ in range(12):
            qs = rng.permutation(nq)
            kind = rng.choice(["H", "X", "P", "RZ"])
            nc = int(rng.integers(0, 3))
            gates.append(sim.Gate(str(kind), int(qs[0]), tuple(int(q) for q in qs[1:1 + nc]),
                                  0.0 if kind in ("H", "X") else float(rng.uniform(-3, 3))))
        c = sim.Circuit(nq, gates)
        dense = np.eye(2 ** nq, dtype=complex)
        for g in gates:
            dense = embed(nq, g) @ dense
        np.testing.assert_allclose(sim.circuit_unitary(c), dense, atol=1e-12)
        psi = random_state(nq, rng)
        out = sim.run_circuit(sim.QuantumState(nq, psi.copy()), c)
        np.testing.assert_allclose(out.amplitudes, dense @ psi, atol=1e-12)
        assert out.norm() == pytest.approx(1.0, abs=1e-12)

    def test_run_on_columns_matches_state_runs(self):
        rng = np.random.default_rng(2)
        c = sim.Circuit(3, [sim.hadamard(0), sim.cnot(0, 1), sim.mc_rz([1], 2, 0.5)])
        cols = np.stack([random_state(3, rng) for _ in range(4)], axis=1)
        out = sim.run_on_columns(cols, c)
        for k in range(4):
            ref = sim.run_circuit(sim.QuantumState(3, cols[:, k].copy()), c).amplitudes
            np.testing.assert_allclose(out[:, k], ref, atol=1e-14)

    def test_apply_register_unitary(self):
        rng = np.random.default_rng(4)
        psi = random_state(4, rng)
        u, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        out = sim.apply_register_unitary(sim.QuantumState(4, psi.copy()), u, 1, 2)
        full = np.kron(np.kron(I2, u), I2)
        np.testing.assert_allclose(out.amplitudes, full @ psi, atol=1e-13)


class TestCircuit:
    def test_append_checks_range(self):
        with pytest.raises(IndexError):
            sim.Circuit(2).append(sim.hadamard(2))

    def test_extend_rejects_wider(self):
        with pytest.raises(ValueError):
            sim.Circuit(2).extend(sim.Circuit(3))

    def test_inverse(self):
        c = sim.Circuit(2, [sim.hadamard(0), sim.phase(1, 0.4, [0]), sim.mc_rz([], 1, 0.2)])
        u = sim.circuit_unitary(c)
        np.testing.assert_allclose(sim.circuit_unitary(c.inverse()), u.conj().T, atol=1e-14)

    def test_controlled_matches_block_matrix(self):
        c = sim.Circuit(2, [sim.hadamard(0), sim.cnot(0, 1), sim.global_phase(0.3)])
        cc = sim.controlled(c, 2)
        u = sim.circuit_unitary(c)
        expect = np.block([[np.eye(4), np.zeros((4, 4))], [np.zeros((4, 4)), u]])
        np.testing.assert_allclose(sim.circuit_unitary(cc), expect, atol=1e-14)

    def test_controlled_bumps_block_controls(self):
        c = sim.Circuit(1, blocks=[("W", 1, 0)])
        assert sim.controlled(c, 1).blocks == [("W", 1, 1)]

    def test_tally_keys(self):
        c = sim.Circuit(3, [sim.cnot(0, 1), sim.cnot(1, 2), sim.hadamard(0), sim.mc_rz([0, 1], 2, 1.0)])
        assert c.tally() == {"H/c0": 1, "RZ/c2": 1, "X/c1": 2}

    def test_dump_one_line_per_gate(self):
        c = sim.Circuit(2, [sim.hadamard(0), sim.global_phase(0.5)])
        assert c.dump().splitlines() == ["H 0 - 0", "GPHASE - - 0.5"]

    def test_unitary_size_limit(self):
        with pytest.raises(ValueError):
            sim.circuit_unitary(sim.Circuit(sim.MAX_UNITARY_QUBITS + 1))

    def test_state_width_mismatch(self):
        with pytest.raises(ValueError):
            sim.run_circuit(sim.QuantumState.zero(2), sim.Circuit(3))

    def test_state_length_checked(self):
        with pytest.raises(ValueError):
            sim.QuantumState(2, np.ones(3))
