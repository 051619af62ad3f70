"""Select-oracle synthesis.

Each oracle is first written as a list of factors in operator order (leftmost
factor acts last, products ``prod_{j=1}^m A_j = A_m ... A_1``) and then reversed
into a circuit stored in application order.

Register layout, lowest qubit first: system qubits of the last dimension, ...,
system qubits of dimension 0, the ``m`` inner (node) ancillas, then the ``m_o``
outer (time-node) ancillas.  Inner ancilla ``j`` (1-based) carries weight
``2^(j-1)`` of the node index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import blocks
from .fvm import OperatorParams
from .lchs import LchsPlan
from .sim import Circuit, controlled, phase

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class Layout:
    n: tuple[int, ...]
    m: int = 0
    m_o: int = 0

    @property
    def n_sys(self) -> int:
        return sum(self.n)

    @property
    def num_qubits(self) -> int:
        return self.n_sys + self.m + self.m_o

    def offset(self, p: int) -> int:
        return sum(self.n[p + 1:])

    @property
    def inner(self) -> list[int]:
        return list(range(self.n_sys, self.n_sys + self.m))

    @property
    def outer(self) -> list[int]:
        return list(range(self.n_sys + self.m, self.num_qubits))

    def register_map(self) -> dict[str, tuple[int, int]]:
        return {"system": (0, self.n_sys), "inner": (self.n_sys, self.m), "outer": (self.n_sys + self.m, self.m_o)}


@dataclass
class SelectSpec:
    """Everything needed to emit ``sum_j |j><j| (x) exp(-i (H + r_j L) tau)``.

    ``tau`` is the total evolution time of one select application, split into
    ``r_steps`` identical second-order steps.
    """

    params: Sequence[OperatorParams]
    plan: LchsPlan | None
    tau: float
    r_steps: int = 1
    c_global: float = 0.0
    m_o: int = 0
    skip_identity: bool = False

    def __post_init__(self) -> None:
        if self.r_steps < 1:
            raise ValueError("r_steps must be at least 1")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")

    @property
    def layout(self) -> Layout:
        return Layout(tuple(p.n for p in self.params), self.plan.m if self.plan is not None else 0, self.m_o)


def needs_lchs(params: Sequence[OperatorParams], c_global: float = 0.0) -> bool:
    """False only when every Hermitian part vanishes, so the evolution is already unitary."""
    return c_global != 0 or any(p.alpha != 0 or p.s0 != 0 or p.s1 != 0 for p in params)


class _Emitter:
    """Collects factors in operator order for one dimension and one step."""

    def __init__(self, n: int, offset: int, nq: int, ancillas: Sequence[int], skip: bool):
        self.n, self.off, self.nq, self.anc, self.skip = n, offset, nq, list(ancillas), skip
        self.ops: list[Circuit] = []

    def _keep(self, *angles: float) -> bool:
        return not (self.skip and all(a == 0 for a in angles))

    def W(self, j: int, theta: float, lam: float) -> None:
        if self._keep(theta):
            self.ops.append(blocks.build_Wj(self.n, j, theta, lam, self.off, self.nq))

    def W_rest(self, theta: float, lam: float) -> None:
        """``prod_{k=2}^n W_k``; the factors commute."""
        if self._keep(theta):
            c = Circuit(self.nq, label="prodW")
            for k in range(2, self.n + 1):
                c.extend(blocks.build_Wj(self.n, k, theta, lam, self.off, self.nq))
            self.ops.append(c)

    def S(self, bit: int, theta: float) -> None:
        if self._keep(theta):
            build = blocks.build_Sn0 if bit == 0 else blocks.build_Sn1
            self.ops.append(build(self.n, theta, self.off, self.nq))

    def V(self, theta: float, lam: float) -> None:
        if self._keep(theta):
            self.ops.append(blocks.build_Vn(self.n, theta, lam, self.off, self.nq))

    def G(self, theta: float) -> None:
        if self._keep(theta):
            self.ops.append(blocks.build_global_phase(theta, self.nq))

    def phase_ladder(self, unit: float) -> None:
        """``prod_j P_j(2^(j-1) unit)`` on the inner ancillas."""
        if self._keep(unit) and self.anc:
            c = Circuit(self.nq, label="P-ladder")
            for i, a in enumerate(self.anc):
                c.append(phase(a, 2 ** i * unit))
            c.blocks = [("P", i + 1, 0) for i in range(len(self.anc))]
            self.ops.append(c)

    def select(self, make: Callable[[int], Circuit], unit: float) -> None:
        """``prod_j C[make(2^(j-1))]`` with ancilla j as control."""
        if self._keep(unit) and self.anc:
            self.ops.append(blocks.power_select(make, self.anc))

    def circuit(self) -> Circuit:
        out = Circuit(self.nq, label="step")
        for op in reversed(self.ops):
            out.extend(op)
        return out


def _robin_ops(e: _Emitter, p: OperatorParams, plan: LchsPlan, tau: float) -> None:
    n, al, be, s0, s1 = p.n, p.alpha, p.beta, p.s0, p.s1
    Rt, dr = plan.R_tilde, plan.dr
    off, nq = e.off, e.nq

    def cW1(k: int) -> Circuit:
        return blocks.build_Wj(n, 1, -k * al * dr * tau / 2, 0.0, off, nq)

    def cWrest(k: int) -> Circuit:
        c = Circuit(nq, label="prodW")
        for j in range(2, n + 1):
            c.extend(blocks.build_Wj(n, j, -k * al * dr * tau, 0.0, off, nq))
        return c

    e.W(1, be * tau / 4, HALF_PI)
    e.W_rest(be * tau / 2, HALF_PI)
    e.W(1, be * tau / 4, HALF_PI)
    e.G(2 * al * Rt * tau)
    e.phase_ladder(-2 * al * dr * tau)
    e.W(1, al * Rt * tau / 2, 0.0)
    e.select(cW1, al * dr * tau)
    if n >= 2:
        e.W_rest(al * Rt * tau, 0.0)
        e.select(cWrest, al * dr * tau)
    e.S(0, s0 * Rt * tau)
    e.select(lambda k: blocks.build_Sn0(n, -k * s0 * dr * tau, off, nq), s0 * dr * tau)
    e.S(1, s1 * Rt * tau)
    e.select(lambda k: blocks.build_Sn1(n, -k * s1 * dr * tau, off, nq), s1 * dr * tau)
    e.W(1, al * Rt * tau / 2, 0.0)
    e.select(cW1, al * dr * tau)
    e.W(1, be * tau / 4, HALF_PI)
    e.W_rest(be * tau / 2, HALF_PI)
    e.W(1, be * tau / 4, HALF_PI)


def _robin_alpha0_ops(e: _Emitter, p: OperatorParams, plan: LchsPlan, tau: float) -> None:
    n, be, s0, s1 = p.n, p.beta, p.s0, p.s1
    Rt, dr = plan.R_tilde, plan.dr
    off, nq = e.off, e.nq
    e.W(1, be * tau / 2, HALF_PI)
    e.W_rest(be * tau, HALF_PI)
    e.S(0, s0 * Rt * tau)
    e.select(lambda k: blocks.build_Sn0(n, -k * s0 * dr * tau, off, nq), s0 * dr * tau)
    e.S(1, s1 * Rt * tau)
    e.select(lambda k: blocks.build_Sn1(n, -k * s1 * dr * tau, off, nq), s1 * dr * tau)
    e.W(1, be * tau / 2, HALF_PI)


def _periodic_ops(e: _Emitter, p: OperatorParams, plan: LchsPlan, tau: float) -> None:
    n, al, be = p.n, p.alpha, p.beta
    Rt, dr = plan.R_tilde, plan.dr
    off, nq = e.off, e.nq

    def cW1(k: int) -> Circuit:
        return blocks.build_Wj(n, 1, -k * al * dr * tau / 2, 0.0, off, nq)

    def cWrest(k: int) -> Circuit:
        c = Circuit(nq, label="prodW")
        for j in range(2, n + 1):
            c.extend(blocks.build_Wj(n, j, -k * al * dr * tau, 0.0, off, nq))
        return c

    e.W(1, be * tau / 2, HALF_PI)
    e.W_rest(be * tau, HALF_PI)
    e.V(be * tau, HALF_PI)
    e.W(1, be * tau / 2, HALF_PI)
    e.G(2 * al * Rt * tau)
    e.phase_ladder(-2 * al * dr * tau)
    e.W(1, al * Rt * tau / 2, 0.0)
    e.select(cW1, al * dr * tau)
    e.W_rest(al * Rt * tau, 0.0)
    e.select(cWrest, al * dr * tau)
    e.V(al * Rt * tau, 0.0)
    e.select(lambda k: blocks.build_Vn(n, -k * al * dr * tau, 0.0, off, nq), al * dr * tau)
    e.W(1, al * Rt * tau / 2, 0.0)
    e.select(cW1, al * dr * tau)


def _periodic_alpha0_ops(e: _Emitter, p: OperatorParams, tau: float) -> None:
    n, be = p.n, p.beta
    e.W(1, be * tau / 2, HALF_PI)
    e.W_rest(be * tau, HALF_PI)
    e.V(be * tau, HALF_PI)
    e.W(1, be * tau / 2, HALF_PI)


def variant(p: OperatorParams) -> str:
    if p.form == "periodic":
        return "periodic" if p.alpha != 0 else "periodic_alpha0"
    return "robin" if p.alpha != 0 else "robin_alpha0"


def _dim_step(spec: SelectSpec, p_index: int, tau: float, force: str | None = None) -> Circuit:
    lay = spec.layout
    p = spec.params[p_index]
    kind = force or variant(p)
    if kind == "periodic" and p.n < 2 or kind == "periodic_alpha0" and p.n < 2:
        raise ValueError("periodic circuits need at least two qubits per dimension")
    e = _Emitter(p.n, lay.offset(p_index), lay.num_qubits, lay.inner, spec.skip_identity)
    if kind != "periodic_alpha0" and spec.plan is None:
        raise ValueError(f"{kind} select needs an LCHS plan")
    if kind == "robin":
        _robin_ops(e, p, spec.plan, tau)
    elif kind == "robin_alpha0":
        _robin_alpha0_ops(e, p, spec.plan, tau)
    elif kind == "periodic":
        _periodic_ops(e, p, spec.plan, tau)
    else:
        _periodic_alpha0_ops(e, p, tau)
    c = e.circuit()
    c.label = kind
    return c


def _repeat(step: Circuit, r: int, label: str) -> Circuit:
    out = Circuit(step.num_qubits, label=label)
    for _ in range(r):
        out.extend(step)
    return out


def _single(spec: SelectSpec, expect: set[str], name: str) -> Circuit:
    if len(spec.params) != 1:
        raise ValueError(f"{name} is one-dimensional; use sel_global")
    kind = variant(spec.params[0])
    if kind not in expect:
        raise ValueError(f"{name} does not apply to a {kind} operator")
    tau = spec.tau / spec.r_steps
    return _repeat(_dim_step(spec, 0, tau), spec.r_steps, name)


def sel_robin(spec: SelectSpec) -> Circuit:
    return _single(spec, {"robin"}, "SEL_R")


def sel_robin_alpha0(spec: SelectSpec) -> Circuit:
    return _single(spec, {"robin_alpha0"}, "SEL_R0")


def sel_periodic(spec: SelectSpec) -> Circuit:
    return _single(spec, {"periodic"}, "SEL_P")


def sel_periodic_alpha0(spec: SelectSpec) -> Circuit:
    return _single(spec, {"periodic_alpha0"}, "SEL_P0")


def merge_specs(specs: Sequence[SelectSpec]) -> SelectSpec:
    """Combine one-dimensional specs into a single d-dimensional spec sharing the node register."""
    specs = list(specs)
    if not specs:
        raise ValueError("no dimensions given")
    first = specs[0]
    for s in specs[1:]:
        same_plan = (s.plan is None and first.plan is None) or (
            s.plan is not None and first.plan is not None and s.plan.m == first.plan.m
            and np.array_equal(s.plan.nodes, first.plan.nodes))
        if not same_plan:
            raise ValueError("all dimensions must share one LCHS plan")
        if (s.tau, s.r_steps, s.c_global) != (first.tau, first.r_steps, first.c_global):
            raise ValueError("all dimensions must share tau, r_steps and c_global")
    params = [p for s in specs for p in s.params]
    return SelectSpec(params, first.plan, first.tau, first.r_steps, first.c_global, first.m_o, first.skip_identity)


def sel_global(spec: SelectSpec | Sequence[SelectSpec], tau: float | None = None) -> Circuit:
    """Attenuation phase on the node register followed by every dimension's select, per step.

    ``spec`` is either one spec listing all dimensions or a sequence of per-dimension
    specs, which must share the plan.
    """
    if not isinstance(spec, SelectSpec):
        spec = merge_specs(spec)
    tau = spec.tau if tau is None else tau
    lay = spec.layout
    step_tau = tau / spec.r_steps
    step = Circuit(lay.num_qubits, label="global-step")
    if spec.c_global != 0:
        if spec.plan is None:
            raise ValueError("attenuation needs an LCHS plan")
        e = _Emitter(0, 0, lay.num_qubits, lay.inner, spec.skip_identity)
        e.G(spec.c_global * spec.plan.R_tilde * step_tau)
        e.phase_ladder(-spec.c_global * spec.plan.dr * step_tau)
        step.extend(e.circuit())
    for p in range(len(spec.params)):
        step.extend(_dim_step(spec, p, step_tau))
    return _repeat(step, spec.r_steps, "SEL")


def sel_outer(spec: SelectSpec, m_o: int, T: float) -> Circuit:
    """``prod_k C[SEL(2^(k-1) dt)] . SEL(dt/2)`` with outer ancilla k as control, ``dt = T / 2^m_o``."""
    lay = Layout(spec.layout.n, spec.layout.m, m_o)
    inner_spec = SelectSpec(spec.params, spec.plan, spec.tau, spec.r_steps, spec.c_global, m_o,
                            spec.skip_identity)
    dt = T / 2 ** m_o
    out = Circuit(lay.num_qubits, label="SEL-U")
    out.extend(sel_global(inner_spec, dt / 2))
    for k, q in enumerate(lay.outer):
        out.extend(controlled(sel_global(inner_spec, 2 ** k * dt), q))
    return out


# ----------------------------------------------------------------------------- dense oracles

def exact_node_unitaries(spec: SelectSpec, tau: float | None = None) -> list[np.ndarray]:
    """``exp(-i (H + r_j (L + c)) tau)`` for every node, from the dense operators (small sizes)."""
    from .fvm import kron_sum

    tau = spec.tau if tau is None else tau
    A = kron_sum([p.matrix for p in spec.params], spec.c_global).toarray()
    L = (A + A.conj().T) / 2
    H = (A - A.conj().T) / 2j
    nodes = spec.plan.nodes if spec.plan is not None else np.zeros(1)
    return [blocks.expm_hermitian(H + r * L, tau) for r in nodes]
