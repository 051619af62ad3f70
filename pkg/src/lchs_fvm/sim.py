"""Dense state-vector simulation for the small gate alphabet used by the select oracles.

Qubit 0 is the least-significant bit of a basis index.  A tensor factor written
leftmost in a Kronecker product therefore sits on the highest qubit index.
Multi-controlled gates are applied natively by slicing the amplitude tensor on
the control axes, so no decomposition into elementary gates happens here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_UNITARY_QUBITS = 12

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
_KINDS = ("U", "H", "X", "P", "RZ", "GPHASE")


@dataclass(frozen=True)
class Gate:
    """One gate of the alphabet.

    ``kind`` is one of ``U`` (arbitrary 2x2 unitary), ``H``, ``X``, ``P`` (phase
    ``e^{i angle}`` on |1>), ``RZ`` (``diag(e^{-i angle/2}, e^{i angle/2})``) or
    ``GPHASE`` (``e^{i angle}`` on every amplitude, no target).  Every kind except
    ``GPHASE`` accepts any number of controls, so a CNOT is an ``X`` with one
    control and a multi-controlled phase is a ``P`` with several.
    """

    kind: str
    target: int | None = None
    controls: tuple[int, ...] = ()
    angle: float = 0.0
    matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "GPHASE":
            if self.target is not None or self.controls:
                raise ValueError("a global phase has neither target nor controls")
            return
        if self.target is None:
            raise ValueError(f"{self.kind} gate needs a target")
        if self.target in self.controls:
            raise ValueError("control and target qubits must differ")
        if len(set(self.controls)) != len(self.controls):
            raise ValueError("duplicate control qubit")
        if self.kind == "U":
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (2, 2) or not np.allclose(m @ m.conj().T, np.eye(2), atol=1e-12):
                raise ValueError("single-qubit matrix must be a 2x2 unitary")
            object.__setattr__(self, "matrix", m)

    def qubits(self) -> tuple[int, ...]:
        if self.target is None:
            return ()
        return self.controls + (self.target,)

    def with_control(self, q: int) -> "Gate":
        """Return this gate with ``q`` added as a control (global phase becomes a phase on ``q``)."""
        if q in self.qubits():
            raise ValueError(f"qubit {q} already used by gate")
        if self.kind == "GPHASE":
            return Gate("P", target=q, angle=self.angle)
        return Gate(self.kind, self.target, self.controls + (q,), self.angle, self.matrix)

    def adjoint(self) -> "Gate":
        if self.kind in ("H", "X"):
            return self
        if self.kind == "U":
            return Gate("U", self.target, self.controls, 0.0, self.matrix.conj().T)
        return Gate(self.kind, self.target, self.controls, -self.angle)

    def matrix2(self) -> np.ndarray:
        """2x2 action on the target (the global phase returns ``e^{i angle} I``)."""
        if self.kind == "U":
            return self.matrix
        if self.kind == "H":
            return _H
        if self.kind == "X":
            return np.array([[0, 1], [1, 0]], dtype=complex)
        if self.kind == "P":
            return np.diag([1.0, np.exp(1j * self.angle)])
        if self.kind == "RZ":
            return np.diag([np.exp(-0.5j * self.angle), np.exp(0.5j * self.angle)])
        return np.exp(1j * self.angle) * np.eye(2)

    def describe(self) -> str:
        tgt = "-" if self.target is None else str(self.target)
        ctl = ",".join(map(str, self.controls)) or "-"
        return f"{self.kind} {tgt} {ctl} {self.angle:.17g}"


# Convenience constructors mirroring the named gates.
def single_qubit(target: int, matrix: np.ndarray) -> Gate:
    return Gate("U", target, matrix=np.asarray(matrix, dtype=complex))


def hadamard(target: int) -> Gate:
    return Gate("H", target)


def pauli_x(target: int) -> Gate:
    return Gate("X", target)


def cnot(control: int, target: int) -> Gate:
    return Gate("X", target, (control,))


def phase(target: int, lam: float, controls: Sequence[int] = ()) -> Gate:
    return Gate("P", target, tuple(controls), float(lam))


def mc_phase(controls: Sequence[int], target: int, theta: float) -> Gate:
    return Gate("P", target, tuple(controls), float(theta))


def mc_rz(controls: Sequence[int], target: int, theta: float) -> Gate:
    return Gate("RZ", target, tuple(controls), float(theta))


def global_phase(theta: float) -> Gate:
    return Gate("GPHASE", angle=float(theta))


@dataclass
class Circuit:
    """Ordered gate list over a fixed number of qubits, stored in application order.

    ``blocks`` is bookkeeping only: each builder that appends a named primitive
    records ``(name, index, n_controls)`` so gate costs can be tallied per block.
    """

    num_qubits: int
    gates: list[Gate] = field(default_factory=list)
    label: str = ""
    blocks: list[tuple[str, int, int]] = field(default_factory=list)

    def append(self, gate: Gate) -> "Circuit":
        for q in gate.qubits():
            if not 0 <= q < self.num_qubits:
                raise IndexError(f"qubit {q} outside a {self.num_qubits}-qubit circuit")
        self.gates.append(gate)
        return self

    def extend(self, other: "Circuit | Iterable[Gate]") -> "Circuit":
        if isinstance(other, Circuit):
            if other.num_qubits > self.num_qubits:
                raise ValueError("cannot extend with a wider circuit")
            for g in other.gates:
                self.append(g)
            self.blocks.extend(other.blocks)
        else:
            for g in other:
                self.append(g)
        return self

    def inverse(self) -> "Circuit":
        return Circuit(self.num_qubits, [g.adjoint() for g in reversed(self.gates)],
                       self.label + "^dag", list(self.blocks))

    def __len__(self) -> int:
        return len(self.gates)

    def tally(self) -> dict[str, int]:
        """Gate counts keyed by ``kind`` and number of controls, e.g. ``X/c1`` for CNOT."""
        out: dict[str, int] = {}
        for g in self.gates:
            key = f"{g.kind}/c{len(g.controls)}"
            out[key] = out.get(key, 0) + 1
        return dict(sorted(out.items()))

    def dump(self) -> str:
        """One gate per line: ``KIND target controls angle``."""
        return "\n".join(g.describe() for g in self.gates)


def controlled(circuit: Circuit, control_qubit: int) -> Circuit:
    """Add ``control_qubit`` as a control to every gate of ``circuit``."""
    nq = max(circuit.num_qubits, control_qubit + 1)
    out = Circuit(nq, label=f"C[{control_qubit}]{circuit.label}")
    for g in circuit.gates:
        out.append(g.with_control(control_qubit))
    out.blocks = [(name, idx, nc + 1) for name, idx, nc in circuit.blocks]
    return out


@dataclass
class QuantumState:
    """Flat amplitude vector plus named contiguous qubit ranges ``name -> (start, width)``."""

    num_qubits: int
    amplitudes: np.ndarray
    register_map: dict[str, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2 ** self.num_qubits,):
            raise ValueError("amplitude vector length must equal 2**num_qubits")

    @classmethod
    def zero(cls, num_qubits: int, register_map: dict | None = None) -> "QuantumState":
        amps = np.zeros(2 ** num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(num_qubits, amps, dict(register_map or {}))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "QuantumState":
        return QuantumState(self.num_qubits, self.amplitudes.copy(), dict(self.register_map))


def _index(nq: int, fixed: dict[int, int]) -> tuple:
    # Axis 0 of the tensor view is the highest qubit.
    idx: list = [slice(None)] * nq
    for q, v in fixed.items():
        idx[nq - 1 - q] = v
    return tuple(idx)


def _apply_tensor(psi: np.ndarray, nq: int, gate: Gate) -> None:
    """Apply ``gate`` in place to ``psi`` of shape ``(2,)*nq + (batch,)``."""
    if gate.kind == "GPHASE":
        psi *= np.exp(1j * gate.angle)
        return
    ctl = {c: 1 for c in gate.controls}
    t = gate.target
    i0 = _index(nq, {**ctl, t: 0}) + (slice(None),)
    i1 = _index(nq, {**ctl, t: 1}) + (slice(None),)
    if gate.kind == "P":
        psi[i1] *= np.exp(1j * gate.angle)
    elif gate.kind == "RZ":
        psi[i0] *= np.exp(-0.5j * gate.angle)
        psi[i1] *= np.exp(0.5j * gate.angle)
    elif gate.kind == "X":
        tmp = psi[i0].copy()
        psi[i0] = psi[i1]
        psi[i1] = tmp
    else:
        u = gate.matrix2()
        a = psi[i0].copy()
        b = psi[i1]
        psi[i0] = u[0, 0] * a + u[0, 1] * b
        psi[i1] = u[1, 0] * a + u[1, 1] * b


def _check(gate: Gate, nq: int) -> None:
    for q in gate.qubits():
        if not 0 <= q < nq:
            raise IndexError(f"gate qubit {q} out of range for {nq} qubits")


def apply_gate(state: QuantumState, gate: Gate) -> QuantumState:
    """Apply one gate to ``state`` in place and return it."""
    _check(gate, state.num_qubits)
    view = state.amplitudes.reshape((2,) * state.num_qubits + (1,))
    _apply_tensor(view, state.num_qubits, gate)
    return state


def run_circuit(state: QuantumState, circuit: Circuit) -> QuantumState:
    """Apply every gate of ``circuit`` in list order, in place."""
    if circuit.num_qubits != state.num_qubits:
        raise ValueError(f"circuit has {circuit.num_qubits} qubits, state has {state.num_qubits}")
    nq = state.num_qubits
    view = state.amplitudes.reshape((2,) * nq + (1,))
    for g in circuit.gates:
        _check(g, nq)
        _apply_tensor(view, nq, g)
    return state


def run_on_columns(columns: np.ndarray, circuit: Circuit) -> np.ndarray:
    """Apply ``circuit`` to every column of a ``(2**nq, k)`` array and return the result."""
    nq = circuit.num_qubits
    out = np.array(columns, dtype=complex, order="C", copy=True)
    if out.shape[0] != 2 ** nq:
        raise ValueError("column length does not match circuit width")
    view = out.reshape((2,) * nq + (out.shape[1],))
    for g in circuit.gates:
        _check(g, nq)
        _apply_tensor(view, nq, g)
    return out


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense matrix of ``circuit``; column i is the circuit applied to basis state i."""
    if circuit.num_qubits > MAX_UNITARY_QUBITS:
        raise ValueError(f"dense unitary limited to {MAX_UNITARY_QUBITS} qubits")
    return run_on_columns(np.eye(2 ** circuit.num_qubits, dtype=complex), circuit)


def apply_register_unitary(state: QuantumState, unitary: np.ndarray, start: int, width: int) -> QuantumState:
    """Apply a dense ``2**width`` unitary to qubits ``start .. start+width-1`` in place."""
    nq = state.num_qubits
    if start < 0 or start + width > nq:
        raise IndexError("register outside state")
    hi = 2 ** (nq - start - width)
    lo = 2 ** start
    view = state.amplitudes.reshape(hi, 2 ** width, lo)
    view[...] = np.einsum("ab,hbl->hal", unitary, view)
    return state
