"""Circuit builders for the shift-operator exponentials, and their dense generators.

Indexing follows the ladder convention: ladder qubit ``j`` (1-based, ``1 <= j <= n``)
is simulator qubit ``offset + j - 1``.  The elementary matrices are
``sigma01 = |0><1|``, ``sigma10 = |1><0|``, ``sigma00 = |0><0|``, ``sigma11 = |1><1|``.
"""
from __future__ import annotations

from functools import reduce
from typing import Callable, Sequence

import numpy as np

from .sim import Circuit, cnot, controlled, global_phase, hadamard, mc_phase, mc_rz, pauli_x, phase

SIGMA01 = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA10 = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA00 = np.array([[1, 0], [0, 0]], dtype=complex)
SIGMA11 = np.array([[0, 0], [0, 1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats, np.eye(1, dtype=complex))


def s_minus(n: int, j: int) -> np.ndarray:
    """``I^(n-j) (x) sigma01 (x) sigma10^(j-1)``; summed over j this is the decrement shift."""
    return kron_all([I2] * (n - j) + [SIGMA01] + [SIGMA10] * (j - 1))


def s_plus(n: int, j: int) -> np.ndarray:
    return s_minus(n, j).conj().T


def shift_minus(n: int) -> np.ndarray:
    """Superdiagonal ones: maps basis state k to k-1."""
    return np.eye(2 ** n, k=1, dtype=complex)


def shift_plus(n: int) -> np.ndarray:
    return np.eye(2 ** n, k=-1, dtype=complex)


def proj_all(n: int, bit: int) -> np.ndarray:
    """``sigma00^(n)`` for bit 0 and ``sigma11^(n)`` for bit 1."""
    return kron_all([SIGMA00 if bit == 0 else SIGMA11] * n)


def corner(n: int, lam: float = 0.0) -> np.ndarray:
    """``e^{i lam} sigma10^(n) + e^{-i lam} sigma01^(n)``."""
    up = kron_all([SIGMA10] * n)
    return np.exp(1j * lam) * up + np.exp(-1j * lam) * up.conj().T


def ladder_term(n: int, j: int, lam: float) -> np.ndarray:
    """Hermitian generator ``e^{i lam} s_j^- + e^{-i lam} s_j^+`` of ``W_j``."""
    sm = s_minus(n, j)
    return np.exp(1j * lam) * sm + np.exp(-1j * lam) * sm.conj().T


def h1(n: int, lam: float) -> np.ndarray:
    return ladder_term(n, 1, lam)


def h2(n: int, lam: float) -> np.ndarray:
    out = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for j in range(2, n + 1):
        out += ladder_term(n, j, lam)
    return out


def h3(n: int, lam: float) -> np.ndarray:
    return corner(n, lam)


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i t h)`` for Hermitian ``h`` by eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


# ----------------------------------------------------------------------------- builders

def _q(offset: int, j: int) -> int:
    return offset + j - 1


def _circuit(n: int, offset: int, num_qubits: int | None, label: str) -> Circuit:
    return Circuit(num_qubits if num_qubits is not None else offset + n, label=label)


def _check_j(n: int, j: int) -> None:
    if not 1 <= j <= n:
        raise IndexError(f"ladder index {j} outside 1..{n}")


def build_Qj(n: int, j: int, lam: float, offset: int = 0, num_qubits: int | None = None) -> Circuit:
    """Basis change ``(prod_m CNOT_m^j) P_j(lam) H_j`` in application order H, P, CNOTs."""
    _check_j(n, j)
    c = _circuit(n, offset, num_qubits, f"Q{j}")
    t = _q(offset, j)
    c.append(hadamard(t)).append(phase(t, lam))
    for m in range(1, j):
        c.append(cnot(t, _q(offset, m)))
    return c


def build_Wj(n: int, j: int, theta: float, lam: float, offset: int = 0,
             num_qubits: int | None = None) -> Circuit:
    """``exp(-i theta (e^{i lam} s_j^- + e^{-i lam} s_j^+))`` as ``Q_j(-lam) CRZ(2 theta) Q_j(-lam)^dag``."""
    _check_j(n, j)
    q = build_Qj(n, j, -lam, offset, num_qubits)
    c = q.inverse()
    c.append(mc_rz([_q(offset, m) for m in range(1, j)], _q(offset, j), 2.0 * theta))
    c.extend(q)
    c.label = f"W{j}"
    c.blocks = [("W", j, 0)]
    return c


def build_Sn1(n: int, theta: float, offset: int = 0, num_qubits: int | None = None) -> Circuit:
    """``exp(-i theta sigma11^(n))``: a phase ``-theta`` on ``|1...1>``."""
    c = _circuit(n, offset, num_qubits, "S1")
    c.append(mc_phase([_q(offset, m) for m in range(1, n)], _q(offset, n), -theta))
    c.blocks = [("S1", n, 0)]
    return c


def build_Sn0(n: int, theta: float, offset: int = 0, num_qubits: int | None = None) -> Circuit:
    """``exp(-i theta sigma00^(n))`` by conjugating the all-ones phase with ``X`` on every qubit."""
    c = _circuit(n, offset, num_qubits, "S0")
    flips = [pauli_x(_q(offset, m)) for m in range(1, n + 1)]
    c.extend(flips)
    c.append(mc_phase([_q(offset, m) for m in range(1, n)], _q(offset, n), -theta))
    c.extend(flips)
    c.blocks = [("S0", n, 0)]
    return c


def build_Vn(n: int, theta: float, lam: float, offset: int = 0, num_qubits: int | None = None) -> Circuit:
    """``exp(-i theta (e^{i lam} sigma10^(n) + e^{-i lam} sigma01^(n)))`` coupling ``|0..0>`` and ``|1..1>``."""
    if n < 2:
        raise ValueError("V_n needs at least two qubits")
    q = build_Qj(n, n, lam, offset, num_qubits)
    flips = [pauli_x(_q(offset, m)) for m in range(1, n)]
    c = q.inverse()
    c.extend(flips)
    c.append(mc_rz([_q(offset, m) for m in range(1, n)], _q(offset, n), 2.0 * theta))
    c.extend(flips)
    c.extend(q)
    c.label = "V"
    c.blocks = [("V", n, 0)]
    return c


def build_global_phase(theta: float, num_qubits: int) -> Circuit:
    c = Circuit(num_qubits, label="G")
    c.append(global_phase(theta))
    c.blocks = [("G", 0, 0)]
    return c


def power_select(base: Circuit | Callable[[int], Circuit], ancillas: Sequence[int]) -> Circuit:
    """``sum_j |j><j| (x) U^j`` with ancilla ``ancillas[i]`` controlling ``U^(2^i)``.

    ``base`` is either a circuit for ``U`` (repeated ``2^i`` times) or a callable
    returning the circuit for ``U^k`` directly, which for the angle-parameterised
    blocks is the same block with its angle multiplied by ``k``.
    """
    ancillas = list(ancillas)
    if callable(base) and not isinstance(base, Circuit):
        make = base
    else:
        def make(k: int) -> Circuit:
            out = Circuit(base.num_qubits, label=f"{base.label}^{k}")
            for _ in range(k):
                out.extend(base)
            return out
    width = max(ancillas, default=-1) + 1
    parts = []
    for i, a in enumerate(ancillas):
        body = make(2 ** i)
        if a < body.num_qubits and a in {q for g in body.gates for q in g.qubits()}:
            raise ValueError(f"ancilla {a} overlaps the target register")
        parts.append(controlled(body, a))
        width = max(width, parts[-1].num_qubits)
    out = Circuit(width, label="select")
    for p in parts:
        out.num_qubits = max(out.num_qubits, p.num_qubits)
        out.extend(p)
    return out


def dense_select(unitaries: Sequence[np.ndarray]) -> np.ndarray:
    """Block diagonal ``sum_j |j><j| (x) U_j`` with the index register above the system."""
    dim = unitaries[0].shape[0]
    out = np.zeros((len(unitaries) * dim,) * 2, dtype=complex)
    for j, u in enumerate(unitaries):
        out[j * dim:(j + 1) * dim, j * dim:(j + 1) * dim] = u
    return out
