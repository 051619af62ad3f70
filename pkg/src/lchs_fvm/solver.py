"""Prepare-select-unprepare pipeline that turns select circuits into PDE solutions.

Amplitude layout follows :class:`lchs_fvm.circuits.Layout`: viewed as an array the
state has shape ``(M_o, M, N)`` with the system index varying fastest.
"""
from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import circuits
from .fvm import PdeProblem, assemble_multi, boundary_source
from .lchs import LchsPlan, OuterPlan, make_outer_plan
from .sim import QuantumState, run_circuit

MAX_QUBITS = 24
P_SUCCESS_FLOOR = 1e-12


# ----------------------------------------------------------------------------- state preparation

@dataclass(frozen=True)
class PrepUnitary:
    """Phase times a Householder reflection whose first column is the normalised target.

    ``U = e^{i phi} (I - 2 w w^dag / |w|^2)`` with ``w = e_0 - e^{-i phi} v`` and
    ``phi = arg v_0``; ``U`` is never formed explicitly unless :meth:`dense` is called.
    """

    target: np.ndarray
    phi: float
    w: np.ndarray
    w_norm2: float

    @property
    def dim(self) -> int:
        return self.target.size

    def _reflect(self, x: np.ndarray, axis: int) -> np.ndarray:
        if self.w_norm2 == 0.0:
            return x
        x = np.moveaxis(x, axis, -1)
        proj = x @ self.w.conj()
        out = x - (2.0 / self.w_norm2) * proj[..., None] * self.w
        return np.moveaxis(out, -1, axis)

    def apply(self, x: np.ndarray, axis: int = -1) -> np.ndarray:
        return np.exp(1j * self.phi) * self._reflect(np.asarray(x, dtype=complex), axis)

    def apply_adjoint(self, x: np.ndarray, axis: int = -1) -> np.ndarray:
        return np.exp(-1j * self.phi) * self._reflect(np.asarray(x, dtype=complex), axis)

    def dense(self) -> np.ndarray:
        return self.apply(np.eye(self.dim, dtype=complex), axis=0)


def prep_unitary(target: np.ndarray) -> PrepUnitary:
    """Unitary mapping ``|0>`` to ``target / |target|``."""
    v = np.asarray(target, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot prepare the zero vector")
    v = v / norm
    phi = float(np.angle(v[0])) if v[0] != 0 else 0.0
    w = -np.exp(-1j * phi) * v
    w[0] += 1.0
    w2 = float(np.vdot(w, w).real)
    if w2 < 1e-30:
        w, w2 = np.zeros_like(w), 0.0
    return PrepUnitary(v, phi, w, w2)


# ----------------------------------------------------------------------------- reports

def relative_errors(u_sim: np.ndarray, u_ref: np.ndarray) -> dict[str, float]:
    u_sim = np.asarray(u_sim)
    u_ref = np.asarray(u_ref)
    if u_sim.shape != u_ref.shape:
        raise ValueError("solution and reference differ in length")
    out = {}
    for key, p in (("L1", 1), ("L2", 2), ("Linf", np.inf)):
        den = np.linalg.norm(u_ref, p)
        if den == 0:
            raise ValueError("reference solution is zero")
        out[key] = float(np.linalg.norm(u_sim - u_ref, p) / den)
    return out


def align_phase(u_sim: np.ndarray, u_ref: np.ndarray) -> tuple[np.ndarray, float]:
    """Rotate ``u_sim`` by the global phase that maximises ``Re <u_ref, u_sim>``; return (real part, angle)."""
    angle = float(np.angle(np.vdot(u_ref, u_sim)))
    return (np.exp(-1j * angle) * u_sim).real, angle


@dataclass
class SolveReport:
    u_sim: np.ndarray
    p_success: float
    errors: dict[str, float] = field(default_factory=dict)
    gate_tally: dict[str, int] = field(default_factory=dict)
    wall_time: float = 0.0
    phase_angle: float = 0.0
    num_qubits: int = 0
    degenerate: bool = False

    def __post_init__(self) -> None:
        if not -1e-12 <= self.p_success <= 1 + 1e-12:
            raise ValueError(f"success probability {self.p_success} outside [0, 1]")

    @property
    def u_real(self) -> np.ndarray:
        return (np.exp(-1j * self.phase_angle) * self.u_sim).real

    def to_dict(self) -> dict:
        return {"p_success": self.p_success, "errors": self.errors, "gate_tally": self.gate_tally,
                "wall_time": self.wall_time, "phase_angle": self.phase_angle,
                "num_qubits": self.num_qubits, "degenerate": self.degenerate,
                "u_sim_real": self.u_real.tolist()}


def _finish(report: SolveReport, reference: np.ndarray | None) -> SolveReport:
    if reference is not None and not report.degenerate:
        _, report.phase_angle = align_phase(report.u_sim, reference)
        report.errors = relative_errors(report.u_real, reference)
    return report


# ----------------------------------------------------------------------------- pipelines

def _check_budget(nq: int) -> None:
    if nq > MAX_QUBITS:
        raise ValueError(f"{nq} qubits exceed the simulation budget of {MAX_QUBITS}")


def _inner_plan(params, plan: LchsPlan | None, c: float) -> LchsPlan | None:
    if circuits.needs_lchs(params, c):
        if plan is None:
            raise ValueError("this operator is dissipative and needs an LCHS plan")
        return plan
    return None


def solve_homogeneous(problem: PdeProblem, plan: LchsPlan | None, T: float, r_steps: int = 1,
                      reference: np.ndarray | None = None) -> SolveReport:
    """``u(T) ~ sum_j c_j U_j u0`` from one post-selected run of the select circuit.

    When the operator has no Hermitian part the select reduces to plain Hamiltonian
    simulation and ``plan`` is ignored.
    """
    start = time.perf_counter()
    params, _ = assemble_multi(problem)
    plan = _inner_plan(params, plan, problem.c)
    u0 = problem.initial_vector()
    u0_norm = float(np.linalg.norm(u0))
    if u0_norm == 0:
        raise ValueError("initial condition is zero; use solve_inhomogeneous")
    spec = circuits.SelectSpec(params, plan, T, r_steps, problem.c, skip_identity=True)
    lay = spec.layout
    _check_budget(lay.num_qubits)
    M, N = 2 ** lay.m, 2 ** lay.n_sys

    amps = np.zeros((M, N), dtype=complex)
    amps[0, 0] = 1.0
    amps = prep_unitary(u0).apply(amps, axis=1)
    if plan is not None:
        amps = prep_unitary(plan.right_amplitudes()).apply(amps, axis=0)
    circuit = circuits.sel_global(spec)
    state = run_circuit(QuantumState(lay.num_qubits, amps.ravel(), lay.register_map()), circuit)
    amps = state.amplitudes.reshape(M, N)
    scale = u0_norm
    if plan is not None:
        amps = prep_unitary(plan.left_amplitudes()).apply_adjoint(amps, axis=0)
        scale *= plan.c_l1
    proj = amps[0]
    p = float(np.vdot(proj, proj).real)
    if p < P_SUCCESS_FLOOR:
        raise RuntimeError(f"post-selection probability {p:.3e} is degenerate")
    report = SolveReport(proj * scale, min(p, 1.0), gate_tally=circuit.tally(), num_qubits=lay.num_qubits)
    report.wall_time = time.perf_counter() - start
    return _finish(report, reference)


def total_source(problem: PdeProblem):
    params, _ = assemble_multi(problem)
    bsrc = boundary_source(params)
    return lambda t: problem.source_vector(t) + bsrc


def solve_inhomogeneous(problem: PdeProblem, plan: LchsPlan | None, T: float, m_o: int, r_steps: int = 1,
                        reference: np.ndarray | None = None) -> SolveReport:
    """Duhamel term ``int_0^T exp(-A (T - s)) f(s) ds`` by the nested quadrature circuit.

    The initial condition is ignored; combine with :func:`solve_homogeneous` or use
    :func:`shift_source` for a nonzero start.
    """
    start = time.perf_counter()
    params, _ = assemble_multi(problem)
    plan = _inner_plan(params, plan, problem.c)
    outer: OuterPlan = make_outer_plan(T, m_o, total_source(problem))
    spec = circuits.SelectSpec(params, plan, T, r_steps, problem.c, m_o=m_o, skip_identity=True)
    lay = spec.layout
    _check_budget(lay.num_qubits)
    N = 2 ** lay.n_sys
    if outer.degenerate:
        report = SolveReport(np.zeros(N, dtype=complex), 0.0, num_qubits=lay.num_qubits, degenerate=True)
        report.wall_time = time.perf_counter() - start
        return report
    M, Mo = 2 ** lay.m, 2 ** m_o

    amps = np.zeros((Mo, M, N), dtype=complex)
    amps[0, 0, 0] = 1.0
    outer_prep = prep_unitary(outer.right_amplitudes())
    amps = outer_prep.apply(amps, axis=0)
    if plan is not None:
        amps = prep_unitary(plan.right_amplitudes()).apply(amps, axis=1)
    for k in range(Mo):
        amps[k] = prep_unitary(outer.states[k]).apply(amps[k], axis=1)
    circuit = circuits.sel_outer(spec, m_o, T)
    state = run_circuit(QuantumState(lay.num_qubits, amps.ravel(), lay.register_map()), circuit)
    amps = state.amplitudes.reshape(Mo, M, N)
    scale = outer.d_l1
    if plan is not None:
        amps = prep_unitary(plan.left_amplitudes()).apply_adjoint(amps, axis=1)
        scale *= plan.c_l1
    amps = outer_prep.apply_adjoint(amps, axis=0)
    proj = amps[0, 0]
    p = float(np.vdot(proj, proj).real)
    if p < P_SUCCESS_FLOOR:
        raise RuntimeError(f"post-selection probability {p:.3e} is degenerate")
    report = SolveReport(proj * scale, min(p, 1.0), gate_tally=circuit.tally(), num_qubits=lay.num_qubits)
    report.wall_time = time.perf_counter() - start
    return _finish(report, reference)


def shift_source(problem: PdeProblem) -> tuple[PdeProblem, np.ndarray]:
    """Rewrite for ``v = u - u0``: zero initial state and source ``f - A u0``.

    Returns the new problem and ``u0`` (as a grid vector) to add back afterwards.
    """
    u0 = problem.initial_vector()
    if not np.any(u0):
        return problem, u0
    _, A = assemble_multi(problem)
    Au0 = A @ u0
    f = problem.f

    def shifted(t, *coords):
        base = 0.0 if f is None else np.asarray(f(t, *coords), dtype=float)
        return base - Au0

    return dataclasses.replace(problem, u0=None, f=shifted), u0
