"""Shift-operator generators and the circuits that exponentiate them."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lchs_fvm import blocks
from lchs_fvm.sim import Circuit, circuit_unitary, controlled, pauli_x

angles = st.floats(-math.pi, math.pi, allow_nan=False)


def expm_dense(h, t):
    """Independent route: scipy's Pade exponential."""
    from scipy.linalg import expm
    return expm(-1j * t * h)


class TestGenerators:
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_ladder_sum_is_decrement_shift(self, n):
        total = sum(blocks.s_minus(n, j) for j in range(1, n + 1))
        np.testing.assert_array_equal(total, np.eye(2 ** n, k=1))
        np.testing.assert_array_equal(blocks.shift_minus(n), np.eye(2 ** n, k=1))

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_ladder_terms_have_disjoint_support(self, n):
        masks = [blocks.s_minus(n, j) != 0 for j in range(1, n + 1)]
        assert sum(m.sum() for m in masks) == 2 ** n - 1
        assert not np.any(np.sum(masks, axis=0) > 1)

    def test_h1_h2_reassemble_the_shift_generator(self):
        n, lam = 4, 0.37
        H = blocks.h1(n, lam) + blocks.h2(n, lam)
        expect = np.exp(1j * lam) * np.eye(16, k=1) + np.exp(-1j * lam) * np.eye(16, k=-1)
        np.testing.assert_allclose(H, expect)

    def test_corner_couples_first_and_last(self):
        c = blocks.corner(3, 0.2)
        assert c[7, 0] == pytest.approx(np.exp(0.2j))
        assert c[0, 7] == pytest.approx(np.exp(-0.2j))
        assert np.count_nonzero(c) == 2

    @pytest.mark.parametrize("bit,index", [(0, 0), (1, 7)])
    def test_projectors(self, bit, index):
        P = blocks.proj_all(3, bit)
        assert P[index, index] == 1 and np.count_nonzero(P) == 1

    def test_expm_hermitian_matches_pade(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        h = a + a.conj().T
        np.testing.assert_allclose(blocks.expm_hermitian(h, 0.7), expm_dense(h, 0.7), atol=1e-12)


class TestBuilders:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 5), st.data(), angles, angles)
    def test_wj_equals_exponential(self, n, data, theta, lam):
        j = data.draw(st.integers(1, n))
        U = circuit_unitary(blocks.build_Wj(n, j, theta, lam))
        np.testing.assert_allclose(U, expm_dense(blocks.ladder_term(n, j, lam), theta), atol=1e-10)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 5), angles)
    def test_s_blocks(self, n, theta):
        for bit, build in ((0, blocks.build_Sn0), (1, blocks.build_Sn1)):
            U = circuit_unitary(build(n, theta))
            np.testing.assert_allclose(U, expm_dense(blocks.proj_all(n, bit), theta), atol=1e-10)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 5), angles, angles)
    def test_v_block(self, n, theta, lam):
        U = circuit_unitary(blocks.build_Vn(n, theta, lam))
        np.testing.assert_allclose(U, expm_dense(blocks.corner(n, lam), theta), atol=1e-10)

    def test_v_needs_two_qubits(self):
        with pytest.raises(ValueError):
            blocks.build_Vn(1, 0.1, 0.0)

    def test_index_checked(self):
        with pytest.raises(IndexError):
            blocks.build_Wj(3, 4, 0.1, 0.0)

    def test_offset_embeds_in_larger_register(self):
        n, off, nq = 2, 1, 4
        U = circuit_unitary(blocks.build_Wj(n, 2, 0.3, 0.5, offset=off, num_qubits=nq))
        small = expm_dense(blocks.ladder_term(n, 2, 0.5), 0.3)
        np.testing.assert_allclose(U, np.kron(np.eye(2), np.kron(small, np.eye(2))), atol=1e-12)

    def test_global_phase(self):
        U = circuit_unitary(blocks.build_global_phase(0.4, 2))
        np.testing.assert_allclose(U, np.exp(0.4j) * np.eye(4))

    def test_block_tags(self):
        assert blocks.build_Wj(3, 2, 0.1, 0.0).blocks == [("W", 2, 0)]
        assert blocks.build_Vn(3, 0.1, 0.0).blocks == [("V", 3, 0)]
        assert blocks.build_Sn0(3, 0.1).blocks == [("S0", 3, 0)]


class TestPowerSelect:
    def test_callable_base_matches_dense_select(self):
        n, theta, lam = 2, 0.21, 0.4
        anc = [2, 3]
        circ = blocks.power_select(lambda k: blocks.build_Wj(n, 1, k * theta, lam), anc)
        U = circuit_unitary(circ)
        gen = blocks.ladder_term(n, 1, lam)
        expect = blocks.dense_select([expm_dense(gen, j * theta) for j in range(4)])
        np.testing.assert_allclose(U, expect, atol=1e-12)

    def test_circuit_base_repeats(self):
        base = Circuit(1, [pauli_x(0)], label="X")
        U = circuit_unitary(blocks.power_select(base, [1]))
        X = np.array([[0, 1], [1, 0]])
        np.testing.assert_allclose(U, blocks.dense_select([np.eye(2), X]), atol=1e-14)

    def test_overlapping_ancilla_rejected(self):
        with pytest.raises(ValueError):
            blocks.power_select(lambda k: blocks.build_Wj(2, 2, k * 0.1, 0.0), [1])

    def test_controlled_block_is_block_diagonal(self):
        c = controlled(blocks.build_Vn(2, 0.3, 0.1), 2)
        U = circuit_unitary(c)
        np.testing.assert_allclose(U[:4, 4:], 0, atol=1e-14)
        np.testing.assert_allclose(U[:4, :4], np.eye(4), atol=1e-14)
