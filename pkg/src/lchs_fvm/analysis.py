"""Checks of the analytic machinery: commutator identities, Trotter and quadrature
bounds, the moment integrals ``I_k`` and closed-form gate counts.

Every check returns :class:`BoundReport` records.  An identity check reports the
largest entrywise deviation against a tolerance, a norm equality reports the
absolute gap, and an inequality reports the measured left side against the
right side.  In all three cases ``ratio <= 1`` means the claim holds.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import erfc, exp1

from . import blocks, fvm
from .blocks import I2, SIGMA00, SIGMA01, SIGMA10, SIGMA11, kron_all
from .fvm import OperatorParams
from .lchs import LchsPlan, OuterPlan

IDENTITY_TOL = 1e-12
NORM_TOL = 1e-10
RATIO_SLACK = 1e-9
EULER_GAMMA = 0.5772156649015329
Z = np.diag([1.0, -1.0]).astype(complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class BoundReport:
    name: str
    measured: float
    bound: float

    @property
    def ratio(self) -> float:
        if self.bound == 0:
            return 0.0 if self.measured == 0 else math.inf
        return self.measured / self.bound

    @property
    def ok(self) -> bool:
        return bool(self.ratio <= 1 + RATIO_SLACK)

    def line(self) -> str:
        flag = "PASS" if self.ok else "FAIL"
        return f"{flag} {self.name}: measured={self.measured:.6e} bound={self.bound:.6e} ratio={self.ratio:.4f}"


# Catalog entries whose printed form does not hold.  The suites still evaluate
# them as printed; ``verify`` reports them as known errata rather than failures.
PRINTED_ERRATA: dict[str, str] = {
    "[s11^n,s+_1]": "sign of the sigma11^(n-1) (x) sigma10 term is +",
    "[H2(l1),[s00^n,H1(l2)]]=0": "nonzero; equals -S0^(n-2) (x) flip(l1+l2) (x) S0",
    "[H2(l1),[s11^n,H1(l2)]]=0": "nonzero; equals -S1^(n-2) (x) flip(l1+l2) (x) S1",
    "[H1,[H1,H3]]": "second term enters with a + sign",
    "[L,[L,H]]": "missing boundary term -g1 g2 sum_b s_b edge(l1+l2)",
    "[H,[H,L]]": "missing boundary term +g2^2 sum_b s_b edge(2 l2)",
    "[g1H2+s0P0+s1P1,[.,g1H1]]": "missing boundary term -3 g1^2 sum_b s_b edge(2 l1)",
    "||[L,[L,H]]|| closed form": "inherits the dropped boundary term",
    "||[H,[H,L]]|| closed form": "inherits the dropped boundary term",
    "||[L,[L,H]]|| <= g2(2g1^2+s^2)": "exceeded by up to 29% at n=2 and about 6% at n>=3",
    "||[H,[H,L]]|| <= 2g2^2 sqrt(g1^2+s^2)": "exceeded by up to 44% at n=2 and about 20% at n>=3",
    "L-split second <= 2g1^3(s/g1+g1/s) (|lam|>2)": "exceeded by up to 19% at n=2, a few percent at n=3..5",
    "spec periodic 2nd order = 4sin((k-1)pi/2^(n-1)+2lam)":
        "spectrum is 4sin((k-1)pi/2^(n-2)+2lam), k=1..2^(n-1), each value twice",
}


def is_erratum(report: "BoundReport") -> bool:
    return claim(report) in PRINTED_ERRATA


def spectral_norm(M: np.ndarray) -> float:
    """Largest singular value (dense SVD)."""
    return float(np.linalg.svd(M, compute_uv=False)[0]) if M.size else 0.0


def comm(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


# ----------------------------------------------------------------------------- operator catalog

def _pow(m: np.ndarray, k: int) -> list[np.ndarray]:
    return [m] * k


def _k(*parts) -> np.ndarray:
    """Kronecker product of matrices or ``(matrix, repeat)`` pairs, leftmost most significant."""
    mats: list[np.ndarray] = []
    for p in parts:
        if isinstance(p, tuple):
            mats.extend(_pow(*p))
        else:
            mats.append(p)
    return kron_all(mats)


def _M1(lam: float) -> np.ndarray:
    return np.array([[0, -np.exp(2j * lam)], [1, 0]])


def _M2(lam: float) -> np.ndarray:
    return np.array([[0, 1], [-np.exp(-2j * lam), 0]])


def _flip(lam: float, sign: int = -1) -> np.ndarray:
    """``e^{i lam} sigma01 + sign e^{-i lam} sigma10``."""
    return np.exp(1j * lam) * SIGMA01 + sign * np.exp(-1j * lam) * SIGMA10


def _two_minus_proj(n: int) -> np.ndarray:
    """``2 I^(n-1) - sigma00^(n-1) - sigma11^(n-1)``."""
    return 2 * np.eye(2 ** (n - 1)) - blocks.proj_all(n - 1, 0) - blocks.proj_all(n - 1, 1)


def _ladder_sum(n: int, lead: np.ndarray, tail: np.ndarray, shift: int) -> np.ndarray:
    """``sum_{j=2}^n I^(n-j) (x) lead (x) tail^(j-shift)`` padded on the right to ``n`` qubits by the caller."""
    out = 0
    for j in range(2, n + 1):
        out = out + _k((I2, n - j), lead, (tail, j - shift))
    return out


def _hop_sum(n: int, lead: np.ndarray, tail: np.ndarray) -> np.ndarray:
    """``sum_{j=1}^{n-2} I^(n-2-j) (x) lead (x) tail^(j-1)`` acting on ``n-2`` qubits."""
    out = np.zeros((2 ** (n - 2),) * 2, dtype=complex)
    for j in range(1, n - 1):
        out = out + _k((I2, n - 2 - j), lead, (tail, j - 1))
    return out


def _edge(n: int, S: np.ndarray, phase: float) -> np.ndarray:
    """``S^(n-2) (x) (e^{i phase} sigma01 + e^{-i phase} sigma10) (x) S`` for a projector ``S``."""
    return _k((S, n - 2), np.exp(1j * phase) * SIGMA01 + np.exp(-1j * phase) * SIGMA10, S)


def key_identity(n: int) -> tuple[np.ndarray, np.ndarray]:
    lhs = np.zeros((2 ** (n - 1),) * 2, dtype=complex)
    for j in range(2, n + 1):
        lhs = lhs + _k((I2, n - j), SIGMA00, (SIGMA11, j - 2)) + _k((I2, n - j), SIGMA11, (SIGMA00, j - 2))
    return lhs, _two_minus_proj(n)


def _identities(n: int, l1: float, l2: float) -> list[tuple[str, Callable[[], np.ndarray], Callable[[], np.ndarray]]]:
    """``(name, lhs, rhs)`` triples for the first- and second-order catalog."""
    H1, H2, H3 = blocks.h1, blocks.h2, blocks.h3
    P0, P1 = blocks.proj_all(n, 0), blocks.proj_all(n, 1)
    sm, sp = blocks.s_minus, blocks.s_plus
    up, dn = _k((SIGMA10, n)), _k((SIGMA01, n))
    e = np.exp
    sn = math.sin(l1 - l2)
    cs = math.cos(l1 - l2)
    zero = lambda: np.zeros((2 ** n,) * 2, dtype=complex)  # noqa: E731
    out = []

    def add(name, lhs, rhs, fixed=None):
        out.append((name, lhs, rhs, fixed))

    # shift-operator level
    for j in range(1, n + 1):
        for jp in range(1, n + 1):
            rhs = (lambda j=j: _k((I2, n - j), SIGMA00, (SIGMA11, j - 1)) - _k((I2, n - j), SIGMA11, (SIGMA00, j - 1))) \
                if j == jp else zero
            add(f"[s-_{j},s+_{jp}]", lambda j=j, jp=jp: comm(sm(n, j), sp(n, jp)), rhs)
    for j in range(2, n + 1):
        for jp in range(2, j + 1):
            add(f"[s-_{j},s-_{jp}]=0", lambda j=j, jp=jp: comm(sm(n, j), sm(n, jp)), zero)
            add(f"[s+_{j},s+_{jp}]=0", lambda j=j, jp=jp: comm(sp(n, j), sp(n, jp)), zero)
        add(f"[s-_1,s-_{j}]", lambda j=j: comm(sm(n, 1), sm(n, j)),
            lambda j=j: _k((I2, n - j), SIGMA01, (SIGMA10, j - 2), Z))
        add(f"[s+_1,s+_{j}]", lambda j=j: comm(sp(n, 1), sp(n, j)),
            lambda j=j: -_k((I2, n - j), SIGMA10, (SIGMA01, j - 2), Z))
    add("[s10^n,s01^n]", lambda: comm(up, dn), lambda: P1 - P0)
    add("[s00^n,s11^n]=0", lambda: comm(P0, P1), zero)
    for j in range(1, n + 1):
        d1 = 1 if j == 1 else 0
        add(f"[s-_{j},s01^n]=0", lambda j=j: comm(sm(n, j), dn), zero)
        add(f"[s-_{j},s10^n]", lambda j=j: comm(sm(n, j), up), lambda d1=d1: d1 * _k((SIGMA10, n - 1), Z))
        add(f"[s+_{j},s10^n]=0", lambda j=j: comm(sp(n, j), up), zero)
        add(f"[s+_{j},s01^n]", lambda j=j: comm(sp(n, j), dn), lambda d1=d1: -d1 * _k((SIGMA01, n - 1), Z))
        add(f"[s00^n,s-_{j}]", lambda j=j: comm(P0, sm(n, j)), lambda d1=d1: d1 * _k((SIGMA00, n - 1), SIGMA01))
        add(f"[s00^n,s+_{j}]", lambda j=j: comm(P0, sp(n, j)), lambda d1=d1: -d1 * _k((SIGMA00, n - 1), SIGMA10))
        add(f"[s11^n,s-_{j}]", lambda j=j: comm(P1, sm(n, j)), lambda d1=d1: -d1 * _k((SIGMA11, n - 1), SIGMA01))
        add(f"[s11^n,s+_{j}]", lambda j=j: comm(P1, sp(n, j)), lambda d1=d1: -d1 * _k((SIGMA11, n - 1), SIGMA10),
            lambda d1=d1: d1 * _k((SIGMA11, n - 1), SIGMA10))

    # generator level, first order
    In1 = np.eye(2 ** (n - 1))
    ep, em = e(1j * (l1 + l2)), e(-1j * (l1 + l2))
    g2 = lambda: sum(_k((I2, n - j), ep * _k(SIGMA01, (SIGMA10, j - 2)) - em * _k(SIGMA10, (SIGMA01, j - 2)), Z)  # noqa: E731
                     for j in range(2, n + 1))
    add("[H1(l1),H1(l2)]", lambda: comm(H1(n, l1), H1(n, l2)), lambda: 2j * sn * np.kron(In1, Z))
    add("[H1(l1),H2(l2)]", lambda: comm(H1(n, l1), H2(n, l2)), g2)
    add("[H1(l1),H3(l2)]", lambda: comm(H1(n, l1), H3(n, l2)),
        lambda: np.kron(ep * _k((SIGMA10, n - 1)) - em * _k((SIGMA01, n - 1)), Z))
    add("[H2(l1),H1(l2)]", lambda: comm(H2(n, l1), H1(n, l2)), lambda: -comm(H1(n, l1), H2(n, l2)))
    add("[H2(l1),H2(l2)]", lambda: comm(H2(n, l1), H2(n, l2)),
        lambda: 2j * sn * sum(_k((I2, n - j), SIGMA00, (SIGMA11, j - 1)) - _k((I2, n - j), SIGMA11, (SIGMA00, j - 1))
                              for j in range(2, n + 1)))
    add("[H2(l1),H3(l2)]=0", lambda: comm(H2(n, l1), H3(n, l2)), zero)
    add("[H3(l1),H3(l2)]", lambda: comm(H3(n, l1), H3(n, l2)), lambda: 2j * sn * (P1 - P0))
    add("[s00^n,H1(l1)]", lambda: comm(P0, H1(n, l1)), lambda: _k((SIGMA00, n - 1), _flip(l1)))
    add("[s00^n,H2(l1)]=0", lambda: comm(P0, H2(n, l1)), zero)
    add("[s11^n,H1(l1)]", lambda: comm(P1, H1(n, l1)), lambda: -_k((SIGMA11, n - 1), _flip(l1)))
    add("[s11^n,H2(l1)]=0", lambda: comm(P1, H2(n, l1)), zero)

    # second order, Robin catalog
    a1, a2 = H1(n, l1), H1(n, l2)
    b1, b2 = H2(n, l1), H2(n, l2)

    def r2(la, lb, second):
        return (2 * e(1j * lb) * sum(_k((I2, n - j), SIGMA01, (SIGMA10, j - 2), _M1(la)) for j in range(2, n + 1))
                + 2 * e(-1j * lb) * sum(_k((I2, n - j), SIGMA10, (SIGMA01, j - 2), second) for j in range(2, n + 1)))

    def r10(la, lb):
        T = _two_minus_proj(n)
        out2 = -e(-1j * lb) * np.kron(T, SIGMA10) - e(1j * lb) * np.kron(T, SIGMA01)
        if n >= 3:
            out2 = out2 + 2 * e(1j * (2 * la + lb)) * _k(_hop_sum(n, SIGMA01, SIGMA10), I2, SIGMA10)
            out2 = out2 + 2 * e(-1j * (2 * la + lb)) * _k(_hop_sum(n, SIGMA10, SIGMA01), I2, SIGMA01)
        return out2

    def r9(sign):
        return sign * (4j * sn * e(1j * l1) * sum(_k((I2, n - j), SIGMA01, (SIGMA10, j - 1)) for j in range(2, n + 1))
                       - 4j * sn * e(-1j * l1) * sum(_k((I2, n - j), SIGMA10, (SIGMA01, j - 1)) for j in range(2, n + 1)))

    add("[H1(l1),[H1(l1),H1(l2)]]", lambda: comm(a1, comm(a1, a2)), lambda: -4j * sn * np.kron(In1, _flip(l1)))
    add("[H1(l1),[H1(l1),H2(l2)]]", lambda: comm(a1, comm(a1, b2)), lambda: r2(l1, l2, _M2(l1)))
    add("[H1(l1),[H2(l1),H1(l2)]]", lambda: comm(a1, comm(b1, a2)), lambda: -comm(a1, comm(a1, b2)))
    add("[H1(l1),[H2(l1),H2(l2)]]", lambda: comm(a1, comm(b1, b2)),
        lambda: 2j * sn * np.kron(_two_minus_proj(n), _flip(l1)))
    add("[H1(l1),[s00^n,H1(l2)]]", lambda: comm(a1, comm(P0, a2)), lambda: -2 * cs * _k((SIGMA00, n - 1), Z))
    add("[H1(l1),[s00^n,H2(l2)]]=0", lambda: comm(a1, comm(P0, b2)), zero)
    add("[H1(l1),[s11^n,H1(l2)]]", lambda: comm(a1, comm(P1, a2)), lambda: 2 * cs * _k((SIGMA11, n - 1), Z))
    add("[H1(l1),[s11^n,H2(l2)]]=0", lambda: comm(a1, comm(P1, b2)), zero)
    add("[H2(l1),[H1(l1),H1(l2)]]", lambda: comm(b1, comm(a1, a2)), lambda: r9(1))
    add("[H2(l1),[H1(l1),H2(l2)]]", lambda: comm(b1, comm(a1, b2)), lambda: r10(l1, l2))
    add("[H2(l1),[H2(l1),H1(l2)]]", lambda: comm(b1, comm(b1, a2)), lambda: -comm(b1, comm(a1, b2)))
    add("[H2(l1),[H2(l1),H2(l2)]]", lambda: comm(b1, comm(b1, b2)), lambda: r9(-1))
    for pn, P, S in (("s00^n", P0, SIGMA00), ("s11^n", P1, SIGMA11)):
        add(f"[H2(l1),[{pn},H1(l2)]]=0", lambda P=P: comm(b1, comm(P, a2)), zero,
            lambda S=S: -_edge(n, S, l1 + l2))
        add(f"[H2(l1),[{pn},H2(l2)]]=0", lambda P=P: comm(b1, comm(P, b2)), zero)
    for pn, P, S in (("s00^n", P0, SIGMA00), ("s11^n", P1, SIGMA11)):
        mixed = (lambda S=S: _edge(n, S, l1 + l2))
        add(f"[{pn},[H1(l1),H1(l2)]]=0", lambda P=P: comm(P, comm(a1, a2)), zero)
        add(f"[{pn},[H1(l1),H2(l2)]]", lambda P=P: comm(P, comm(a1, b2)), mixed)
        add(f"[{pn},[H2(l1),H1(l2)]]", lambda P=P: comm(P, comm(b1, a2)), lambda P=P: -comm(P, comm(a1, b2)))
        add(f"[{pn},[H2(l1),H2(l2)]]=0", lambda P=P: comm(P, comm(b1, b2)), zero)
        other = P1 if pn == "s00^n" else P0
        on = "s11^n" if pn == "s00^n" else "s00^n"
        add(f"[{pn},[{pn},H1(l2)]]", lambda P=P: comm(P, comm(P, a2)),
            lambda S=S: _k((S, n - 1), _flip(l2, +1)))
        add(f"[{pn},[{pn},H2(l2)]]=0", lambda P=P: comm(P, comm(P, b2)), zero)
        add(f"[{pn},[{on},H1(l2)]]=0", lambda P=P, o=other: comm(P, comm(o, a2)), zero)
        add(f"[{pn},[{on},H2(l2)]]=0", lambda P=P, o=other: comm(P, comm(o, b2)), zero)

    # second order, periodic catalog (single phase l1)
    h1_, h2_, h3_ = H1(n, l1), H2(n, l1), H3(n, l1)
    e3p, e3m = e(3j * l1), e(-3j * l1)
    p_tail = lambda: -e3p * _k((SIGMA10, n - 2), I2, SIGMA10) - e3m * _k((SIGMA01, n - 2), I2, SIGMA01)  # noqa: E731
    add("[H2,[H3,H1]]", lambda: comm(h2_, comm(h3_, h1_)), p_tail)
    add("[H3,[H2,H1]]", lambda: comm(h3_, comm(h2_, h1_)), p_tail)
    add("[H3,[H3,H1]]", lambda: comm(h3_, comm(h3_, h1_)),
        lambda: np.kron(blocks.proj_all(n - 1, 0) + blocks.proj_all(n - 1, 1), _flip(l1, +1)))
    add("[H1,[H1,H3]]", lambda: comm(h1_, comm(h1_, h3_)),
        lambda: 2 * e(1j * l1) * _k((SIGMA10, n - 1), _M1(l1)) - 2 * e(-1j * l1) * _k((SIGMA01, n - 1), _M2(l1)),
        lambda: 2 * e(1j * l1) * _k((SIGMA10, n - 1), _M1(l1)) + 2 * e(-1j * l1) * _k((SIGMA01, n - 1), _M2(l1)))

    def per1():
        out2 = 2 * e(-1j * l1) * np.kron(In1, SIGMA10) + 2 * e(1j * l1) * np.kron(In1, SIGMA01)
        out2 = out2 - 2 * e3p * _k(_k((SIGMA10, n - 2)) + _hop_sum(n, SIGMA01, SIGMA10), I2, SIGMA10)
        out2 = out2 - 2 * e3m * _k(_k((SIGMA01, n - 2)) + _hop_sum(n, SIGMA10, SIGMA01), I2, SIGMA01)
        return out2

    def per2():
        out2 = (2 * e(1j * l1) * _k(X, (SIGMA10, n - 2), _M1(l1))
                + 2 * e(-1j * l1) * _k(X, (SIGMA01, n - 2), _M2(l1)))
        for j in range(2, n):
            out2 = out2 + 2 * e(1j * l1) * _k((I2, n - j), SIGMA01, (SIGMA10, j - 2), _M1(l1))
            out2 = out2 + 2 * e(-1j * l1) * _k((I2, n - j), SIGMA10, (SIGMA01, j - 2), _M2(l1))
        return out2

    add("[H2+H3,[H2+H3,H1]]", lambda: comm(h2_ + h3_, comm(h2_ + h3_, h1_)), per1)
    add("[H1,[H1,H2+H3]]", lambda: comm(h1_, comm(h1_, h2_ + h3_)), per2)
    add("key identity", lambda: key_identity(n)[0], lambda: key_identity(n)[1])
    return out


def _robin_composites(n: int, l1: float, l2: float, g1: float, g2: float, s0: float, s1: float):
    """Identities and norm claims for ``L = g1 (H1 + H2)(l1) + s0 P0 + s1 P1`` and ``H = g2 (H1 + H2)(l2)``."""
    H1, H2 = blocks.h1, blocks.h2
    P0, P1 = blocks.proj_all(n, 0), blocks.proj_all(n, 1)
    L = g1 * (H1(n, l1) + H2(n, l1)) + s0 * P0 + s1 * P1
    H = g2 * (H1(n, l2) + H2(n, l2))
    s = max(abs(s0), abs(s1))
    sn, cs = math.sin(l1 - l2), math.cos(l1 - l2)
    Pn0, Pn1 = blocks.proj_all(n - 1, 0), blocks.proj_all(n - 1, 1)
    ids, norms = [], []

    lh = sum(_k((I2, n - j), SIGMA00, (SIGMA11, j - 1)) - _k((I2, n - j), SIGMA11, (SIGMA00, j - 1))
             for j in range(1, n + 1))
    edges = [(s0, SIGMA00), (s1, SIGMA11)]
    ids.append(("[L,H]", comm(L, H), 2j * g1 * g2 * sn * lh + g2 * np.kron(s0 * Pn0 - s1 * Pn1, _flip(l2)), None))
    llh = (-2j * g1 ** 2 * g2 * sn * np.kron(Pn0 + Pn1, _flip(l1))
           - 2 * g1 * g2 * s0 * cs * np.kron(Pn0, Z) + 2 * g1 * g2 * s1 * cs * np.kron(Pn1, Z)
           + g2 * s0 ** 2 * np.kron(Pn0, _flip(l2, +1)) + g2 * s1 ** 2 * np.kron(Pn1, _flip(l2, +1)))
    ids.append(("[L,[L,H]]", comm(L, comm(L, H)), llh,
                llh - g1 * g2 * sum(sb * _edge(n, S, l1 + l2) for sb, S in edges)))
    hhl = (2j * g1 * g2 ** 2 * sn * np.kron(Pn0 + Pn1, _flip(l2))
           + 2 * g2 ** 2 * s0 * np.kron(Pn0, Z) - 2 * g2 ** 2 * s1 * np.kron(Pn1, Z))
    ids.append(("[H,[H,L]]", comm(H, comm(H, L)), hhl,
                hhl + g2 ** 2 * sum(sb * _edge(n, S, 2 * l2) for sb, S in edges)))

    n_llh = spectral_norm(comm(L, comm(L, H)))
    norms.append(("||[L,[L,H]]|| closed form", "eq", n_llh,
                  g2 * math.sqrt(4 * g1 ** 4 * sn ** 2 + 4 * g1 ** 2 * s ** 2 + s ** 4)))
    norms.append(("||[L,[L,H]]|| <= g2(2g1^2+s^2)", "le", n_llh, g2 * (2 * g1 ** 2 + s ** 2)))
    n_hhl = spectral_norm(comm(H, comm(H, L)))
    norms.append(("||[H,[H,L]]|| closed form", "eq", n_hhl, 2 * g2 ** 2 * math.sqrt(g1 ** 2 * sn ** 2 + s ** 2)))
    norms.append(("||[H,[H,L]]|| <= 2g2^2 sqrt(g1^2+s^2)", "le", n_hhl, 2 * g2 ** 2 * math.sqrt(g1 ** 2 + s ** 2)))

    # splitting of exp(-iL t) into g1 H1 and the rest
    A = g1 * H1(n, l1)
    Bp = g1 * H2(n, l1) + s0 * P0 + s1 * P1
    first = comm(Bp, comm(Bp, A))
    rhs = (2 * g1 ** 3 * np.exp(-1j * l1) * np.kron(np.eye(2 ** (n - 1)), SIGMA10)
           + 2 * g1 ** 3 * np.exp(1j * l1) * np.kron(np.eye(2 ** (n - 1)), SIGMA01)
           + g1 ** 2 * s0 * _k((SIGMA00, n - 2), np.exp(2j * l1) * SIGMA01 + np.exp(-2j * l1) * SIGMA10, SIGMA00)
           + g1 * (s0 ** 2 - g1 ** 2) * np.kron(Pn0, _flip(l1, +1))
           + g1 ** 2 * s1 * _k((SIGMA11, n - 2), np.exp(2j * l1) * SIGMA01 + np.exp(-2j * l1) * SIGMA10, SIGMA11)
           + g1 * (s1 ** 2 - g1 ** 2) * np.kron(Pn1, _flip(l1, +1)))
    if n >= 3:
        rhs = rhs - 2 * g1 ** 3 * np.exp(3j * l1) * _k(_hop_sum(n, SIGMA01, SIGMA10), I2, SIGMA10)
        rhs = rhs - 2 * g1 ** 3 * np.exp(-3j * l1) * _k(_hop_sum(n, SIGMA10, SIGMA01), I2, SIGMA01)
    ids.append(("[g1H2+s0P0+s1P1,[.,g1H1]]", first, rhs,
                rhs - 3 * g1 ** 2 * sum(sb * _edge(n, S, 2 * l1) for sb, S in edges)))
    second = comm(A, comm(A, Bp))
    rhs2 = (2 * g1 ** 3 * np.exp(1j * l1) * sum(_k((I2, n - j), SIGMA01, (SIGMA10, j - 2), _M1(l1)) for j in range(2, n + 1))
            + 2 * g1 ** 3 * np.exp(-1j * l1) * sum(_k((I2, n - j), SIGMA10, (SIGMA01, j - 2), _M2(l1)) for j in range(2, n + 1))
            + 2 * g1 ** 2 * s0 * np.kron(Pn0, Z) - 2 * g1 ** 2 * s1 * np.kron(Pn1, Z))
    ids.append(("[g1H1,[g1H1,g1H2+s0P0+s1P1]]", second, rhs2, None))

    lam_max = float(np.max(np.abs(np.linalg.eigvalsh(L / g1)))) if g1 else math.inf
    n1, n2 = spectral_norm(first), spectral_norm(second)
    if lam_max <= 2:
        norms.append(("L-split first <= 4g1^3 (|lam|<=2)", "le", n1, 4 * g1 ** 3))
        norms.append(("L-split second <= 4g1^3 (|lam|<=2)", "le", n2, 4 * g1 ** 3))
    else:
        norms.append(("L-split first <= 4g1^3+g1 sqrt(...) (|lam|>2)", "le", n1,
                      4 * g1 ** 3 + g1 * math.sqrt(g1 ** 4 + s ** 4 - g1 ** 2 * s ** 2)))
        norms.append(("L-split second <= 2g1^3(s/g1+g1/s) (|lam|>2)", "le", n2,
                      2 * g1 ** 3 * (s / g1 + g1 / s)))
    return ids, norms


def commutator_suite(n: int, pairs: Sequence[tuple[float, float]] | None = None, seed: int = 7,
                     tol: float = IDENTITY_TOL, corrected: bool = True) -> list[BoundReport]:
    """Evaluate the commutator catalog densely at ``n`` qubits.

    ``pairs`` are the ``(lambda1, lambda2)`` phases; by default three random pairs
    are drawn from ``seed``.  Identity records carry the maximal entrywise
    deviation against ``tol``, norm equalities the absolute gap against
    ``1e-10`` (scaled by the value), and inequalities the dense norm against the
    claimed bound.  Entries listed in :data:`PRINTED_ERRATA` are reported twice:
    once as printed and once, with a ``[corrected]`` suffix, in their repaired form.
    """
    if not 2 <= n <= 6:
        raise ValueError("commutator suite supports 2 <= n <= 6")
    rng = np.random.default_rng(seed)
    if pairs is None:
        pairs = [tuple(rng.uniform(-math.pi, math.pi, 2)) for _ in range(3)]
    reports: list[BoundReport] = []

    def emit(tag, name, lhs, rhs, fixed):
        reports.append(BoundReport(f"{tag} {name}", float(np.max(np.abs(lhs - rhs))), tol))
        if fixed is not None and corrected:
            reports.append(BoundReport(f"{tag} {name} [corrected]", float(np.max(np.abs(lhs - fixed))), tol))

    for idx, (l1, l2) in enumerate(pairs):
        tag = f"n={n} pair{idx}"
        for name, lhs, rhs, fixed in _identities(n, float(l1), float(l2)):
            L = lhs()
            emit(tag, name, L, rhs(), fixed() if fixed is not None else None)
        g1, g2 = rng.uniform(0.2, 2.0, 2)
        s0, s1 = rng.uniform(-2.0, 2.0, 2)
        ids, norms = _robin_composites(n, float(l1), float(l2), float(g1), float(g2), float(s0), float(s1))
        for name, lhs, rhs, fixed in ids:
            emit(tag, name, lhs, rhs, fixed)
        for name, kind, val, ref in norms:
            if kind == "eq":
                reports.append(BoundReport(f"{tag} {name}", abs(val - ref), NORM_TOL * max(1.0, abs(ref))))
            else:
                reports.append(BoundReport(f"{tag} {name}", val, ref))
    reports.extend(norm_claims(n, corrected))
    return reports


def claim(report: BoundReport) -> str:
    """The catalog entry of a suite record, without the ``n=.. pairK`` prefix."""
    parts = report.name.split(" ")
    rest = parts[1:]
    if rest and rest[0].startswith(("pair", "lam=")):
        rest = rest[1:]
    return " ".join(rest)


def norm_claims(n: int, corrected: bool = True) -> list[BoundReport]:
    """Norm equalities and spectra of the single-phase catalog entries."""
    out = []
    lam = math.pi / 2
    h1_, h2_, h3_ = blocks.h1(n, lam), blocks.h2(n, lam), blocks.h3(n, lam)
    if n >= 2:
        out.append(BoundReport(f"n={n} ||[H2,[H2,H1]]|| <= 4", spectral_norm(comm(h2_, comm(h2_, h1_))), 4.0))
        v = spectral_norm(comm(h1_, comm(h1_, h2_)))
        closed = 4 * math.cos(math.pi / (2 ** (n - 1) + 1))
        out.append(BoundReport(f"n={n} ||[H1,[H1,H2]]|| = 4cos(pi/(2^(n-1)+1))", abs(v - closed), NORM_TOL))
        out.append(BoundReport(f"n={n} ||[H1,[H1,H2]]|| <= 4", v, 4.0))
    if n >= 2:
        for l in (0.0, 0.3, lam):
            a, b, c = blocks.h1(n, l), blocks.h2(n, l), blocks.h3(n, l)
            first = comm(b + c, comm(b + c, a))
            second = comm(a, comm(a, b + c))
            out.append(BoundReport(f"n={n} lam={l:.3f} ||[H2+H3,[H2+H3,H1]]|| <= 4", spectral_norm(first), 4.0))
            out.append(BoundReport(f"n={n} lam={l:.3f} ||[H1,[H1,H2+H3]]|| <= 4", spectral_norm(second), 4.0))
            L = a + b + c
            H = blocks.h1(n, lam) + blocks.h2(n, lam) + blocks.h3(n, lam)
            out.append(BoundReport(f"n={n} lam={l:.3f} periodic ||[L,H]|| = 0", spectral_norm(comm(L, H)), IDENTITY_TOL))
            name = f"n={n} lam={l:.3f} spec periodic 2nd order = 4sin((k-1)pi/2^(n-1)+2lam)"
            out.append(BoundReport(name, max(periodic_spectrum_gap(n, l, printed=True)), NORM_TOL))
            if corrected:
                out.append(BoundReport(f"{name} [corrected]", max(periodic_spectrum_gap(n, l)), NORM_TOL))
    return out


def periodic_spectrum_gap(n: int, lam: float, printed: bool = False) -> tuple[float, float]:
    """Largest gap between the dense spectra of the periodic second-order terms and their closed form.

    The closed form is ``4 sin((k-1) pi / 2^(n-2) + 2 lam)``, ``k = 1..2^(n-1)``, each value
    twice.  With ``printed=True`` the catalog form ``4 sin((k-1) pi / 2^(n-1) + 2 lam)``,
    ``k = 1..2^n``, is used instead; it does not reproduce the dense spectrum.
    """
    a, b, c = blocks.h1(n, lam), blocks.h2(n, lam), blocks.h3(n, lam)
    if printed:
        k = np.arange(1, 2 ** n + 1)
        closed = np.sort(4 * np.sin((k - 1) * np.pi / 2 ** (n - 1) + 2 * lam))
    else:
        k = np.arange(1, 2 ** (n - 1) + 1)
        closed = np.sort(np.repeat(4 * np.sin((k - 1) * np.pi / 2 ** (n - 2) + 2 * lam), 2))
    gaps = []
    for M in (comm(b + c, comm(b + c, a)), comm(a, comm(a, b + c))):
        ev = np.sort(np.linalg.eigvals(M).real)
        gaps.append(float(np.max(np.abs(ev - closed))))
    return gaps[0], gaps[1]


# ----------------------------------------------------------------------------- moment integrals

def _upper_gamma(s: float, x: float) -> float:
    """Non-normalised upper incomplete gamma for ``s`` in {1/2, 0, -1/2, -1}."""
    if s == 0.5:
        return math.sqrt(math.pi) * float(erfc(math.sqrt(x)))
    if s == 0.0:
        return float(exp1(x))
    if s == -0.5:
        return 2 * (x ** -0.5 * math.exp(-x) - _upper_gamma(0.5, x))
    if s == -1.0:
        return math.exp(-x) / x - float(exp1(x))
    raise ValueError(f"unsupported order {s}")


def Ik(gamma: float, delta: float, k: int) -> float:
    """``(1/sqrt(2 pi)) int |f(r)| |r|^k dr`` over the real line, in closed form."""
    if k not in (0, 1, 2, 3):
        raise ValueError("k must be 0, 1, 2 or 3")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    x = 1 / (4 * gamma ** 2)
    return math.exp(delta) / math.pi * math.gamma((k + 1) / 2) * _upper_gamma((1 - k) / 2, x)


def Ik_numeric(gamma: float, delta: float, k: int) -> float:
    """Adaptive-quadrature value of the same integral (independent route)."""
    w = 1 / (4 * gamma ** 2)
    val, _ = integrate.quad(lambda r: r ** k / (1 + r * r) * math.exp(-w * r * r), 0, math.inf,
                            epsabs=0, epsrel=1e-12, limit=400)
    return 2 * math.exp(delta - w) / math.pi * val


def Ik_expansion(gamma: float, delta: float, k: int) -> float:
    """Large-``gamma`` forms of ``I_1`` and ``I_3`` with the ``O(gamma^-4)`` remainder dropped."""
    g2 = gamma * gamma
    base = 2 * math.log(gamma) + 1 / (4 * g2) + 2 * math.log(2) - EULER_GAMMA
    if k == 1:
        return math.exp(delta) / math.pi * base
    if k == 3:
        return math.exp(delta) / math.pi * (4 * g2 * math.exp(-1 / (4 * g2)) - base)
    raise ValueError("expansions exist for k = 1 and k = 3")


# ----------------------------------------------------------------------------- Trotter bounds

def _abs_lambda_max_B(mu0: float, mu1: float, N: int) -> float:
    if N <= fvm.DENSE_LIMIT:
        return float(np.max(np.abs(np.linalg.eigvalsh(fvm.matrix_B(mu0, mu1, N)))))
    est = fvm.eig_B(mu0, mu1, N)
    return max(abs(est.lambda_max_B), abs(est.lambda_min_B))


def robin_weights(params: OperatorParams) -> tuple[float, float, float, float]:
    """``(w0, w1, w2, w3)`` of the per-node Robin bound; the ``w3`` branch follows ``|lambda|_max(B)``."""
    al, be = abs(params.alpha), abs(params.beta)
    s = max(abs(params.s0), abs(params.s1))
    w0 = be ** 3 / 8
    w1 = be ** 2 * math.sqrt(al ** 2 + s ** 2) / 12
    w2 = be * (2 * al ** 2 + s ** 2) / 12
    if al == 0:
        return w0, w1, w2, 0.0
    if _abs_lambda_max_B(params.mu0, params.mu1, params.N) <= 2 or s == 0:
        w3 = al ** 3 / 2
    else:
        w3 = (4 * al ** 3 + al * math.sqrt(al ** 4 + s ** 4 - al ** 2 * s ** 2) + al ** 3 * (s / al + al / s)) / 12
    return w0, w1, w2, w3


def node_bounds(params: OperatorParams, nodes: np.ndarray, tau: float, variant: str) -> np.ndarray:
    """Per-node bound ``e_j`` on one second-order step of length ``tau``."""
    r = np.abs(np.asarray(nodes, dtype=float))
    t3 = tau ** 3
    al, be = abs(params.alpha), abs(params.beta)
    if variant == "robin":
        w = robin_weights(params)
        return (w[0] + r * w[1] + r ** 2 * w[2] + r ** 3 * w[3]) * t3
    if variant == "periodic":
        return (al ** 3 * r ** 3 + be ** 3) * t3 / 2
    if variant == "periodic_alpha0":
        return np.full(r.shape, be ** 3 * t3 / 2)
    if variant == "robin_alpha0":
        s = max(abs(params.s0), abs(params.s1))
        out = np.empty(r.shape)
        for i, rj in enumerate(r):
            if be == 0:
                out[i] = 0.0
                continue
            mu0, mu1 = -params.s0 * rj / params.beta, -params.s1 * rj / params.beta
            if s * rj == 0 or _abs_lambda_max_B(mu0, mu1, params.N) <= 2:
                out[i] = be ** 3 * t3 / 2
            else:
                x = s * rj
                out[i] = t3 / 12 * (4 * be ** 3 + be * math.sqrt(be ** 4 + x ** 4 - be ** 2 * x ** 2)
                                    + be ** 3 * (x / be + be / x))
        return out
    raise ValueError(f"unknown variant {variant!r}")


@dataclass(frozen=True)
class TrotterBound:
    per_node: np.ndarray  # e_j for the whole evolution (r steps)
    weighted: float       # sum_j |c_j| e_j
    closed: float         # the I_k form, divided by r^2


def trotter_bound(params: OperatorParams | Sequence[OperatorParams], plan: LchsPlan | None, tau: float,
                  variant: str | Sequence[str] | None = None, r_steps: int = 1) -> TrotterBound:
    """Trotter error bound for evolving ``tau`` in ``r_steps`` second-order steps.

    Several dimensions are combined by adding their per-node bounds.  ``plan`` may
    be ``None`` only for the purely unitary periodic ``alpha = 0`` case.
    """
    from .circuits import variant as _variant

    plist = [params] if isinstance(params, OperatorParams) else list(params)
    if variant is None or isinstance(variant, str):
        variants = [variant or _variant(p) for p in plist]
    else:
        variants = list(variant)
    if r_steps < 1:
        raise ValueError("r_steps must be positive")
    nodes = plan.nodes if plan is not None else np.zeros(1)
    coeffs = np.abs(plan.coeffs) if plan is not None else np.ones(1)
    step = tau / r_steps
    per = sum(node_bounds(p, nodes, step, v) for p, v in zip(plist, variants)) * r_steps
    weighted = float(np.sum(coeffs * per))
    closed = 0.0
    if plan is not None:
        I = [Ik(plan.gamma, plan.delta, k) for k in range(4)]
    for p, v in zip(plist, variants):
        al, be = abs(p.alpha), abs(p.beta)
        s = max(abs(p.s0), abs(p.s1))
        if v == "robin":
            closed += 2 * tau ** 3 * sum(I[k] * w for k, w in enumerate(robin_weights(p)))
        elif v == "periodic":
            closed += I[0] * be ** 3 * tau ** 3 + I[3] * al ** 3 * tau ** 3
        elif v == "robin_alpha0":
            closed += be * tau ** 3 * (be ** 2 * I[0] + be * s / 6 * I[1] + s ** 2 / 6 * I[2])
        else:
            closed += be ** 3 * tau ** 3 / 2 * (I[0] if plan is not None else 1.0)
    return TrotterBound(per, weighted, closed / r_steps ** 2)


# ----------------------------------------------------------------------------- quadrature bounds

def truncation_bound(gamma: float, delta: float) -> float:
    return (2 * math.pi + 1) / (2 * math.pi) * math.exp(delta - delta ** 2 * gamma ** 2)


def discretisation_bound(delta: float, L_norm: float, T: float, dr: float) -> float:
    return 64 / 15 * math.exp(1.5 * delta + 0.5 * L_norm * T - math.pi / dr)


def max_step(eps_quad: float, delta: float, L_norm: float, T: float) -> float:
    """Largest node spacing for which the discretisation bound is guaranteed below ``eps_quad``."""
    if not 0 < eps_quad <= 4 / 15:
        raise ValueError("eps_quad must lie in (0, 4/15]")
    return math.pi / (0.5 * L_norm * T + math.log(64 * math.exp(1.5 * delta) / (15 * eps_quad)))


def outer_midpoint_bound(T: float, M_o: int, C_A: float, B_Af: float) -> float:
    return T ** 3 * C_A / (24 * M_o ** 2) * B_Af


def outer_node_bound(plan: LchsPlan, L_norm: float, T: float, M_o: int, f_sup: float) -> float:
    x = L_norm * T
    if x == 0:
        ratio = float(M_o)
    else:
        ratio = math.expm1(x / 2) / math.expm1(x / (2 * M_o))
    return 64 * T * f_sup / (15 * M_o) * ratio * math.exp(1.5 * plan.delta + x / (4 * M_o) - math.pi / plan.dr)


def quadrature_bounds(plan: LchsPlan, outer_plan: OuterPlan | None, L_norm: float, T: float, f_sup: float = 0.0,
                      *, C_A: float = 1.0, B_Af: float | None = None, eps_circ: float = 0.0,
                      measured: dict[str, float] | None = None) -> list[BoundReport]:
    """Right-hand sides of the inner, outer and inhomogeneous quadrature bounds.

    ``measured`` maps report names to observed errors; reports without one carry
    ``nan`` as the measured value.
    """
    measured = measured or {}
    vals = {
        "truncation": truncation_bound(plan.gamma, plan.delta),
        "discretisation": discretisation_bound(plan.delta, L_norm, T, plan.dr),
    }
    vals["inner total"] = vals["truncation"] + vals["discretisation"]
    if outer_plan is not None:
        M_o = outer_plan.M_o
        if B_Af is not None:
            vals["outer midpoint"] = outer_midpoint_bound(T, M_o, C_A, B_Af)
        vals["outer nodes"] = outer_node_bound(plan, L_norm, T, M_o, f_sup)
        vals["inhomogeneous total"] = (vals.get("outer midpoint", 0.0) + vals["truncation"] * T * f_sup
                                       + vals["outer nodes"]
                                       + (1 / 14 + 3 / (56 * M_o ** 3)) * eps_circ * T * f_sup)
    return [BoundReport(k, measured.get(k, math.nan), v) for k, v in vals.items()]


def circuit_error_bound(params: Sequence[OperatorParams], plan: LchsPlan, T: float, r_steps: int,
                        L_norm: float) -> float:
    """Total homogeneous bound: truncation, node discretisation and Trotter terms."""
    tb = trotter_bound(params, plan, T, r_steps=r_steps)
    return truncation_bound(plan.gamma, plan.delta) + discretisation_bound(plan.delta, L_norm, T, plan.dr) + tb.weighted


# ----------------------------------------------------------------------------- step counts

def step_requirement(problem: fvm.PdeProblem, T: float, eps: float, variant: str = "homogeneous",
                     delta: float = 0.4, R: float | None = None, f_norm: float = 1.0) -> int:
    """Sufficient number of Trotter steps from the asymptotic step-count formulas.

    The diffusive branch is used when any ``b_p > 0``, otherwise the advective one.
    """
    if eps <= 0 or T <= 0 or delta <= 0:
        raise ValueError("eps, T and delta must be positive")
    d = problem.d
    h = min(problem.h(p) for p in range(d))
    b = max(problem.b)
    a = max(abs(v) for v in problem.a)
    coef, hpow = (b, 3.0) if b > 0 else (a, 1.5)
    if variant == "homogeneous":
        if eps >= 1:
            raise ValueError("eps must be below 1 for the homogeneous formula")
        val = math.sqrt(d) * coef ** 1.5 * T ** 1.5 * math.sqrt(math.log(1 / eps)) / (
            math.sqrt(eps) * math.sqrt(delta) * h ** hpow)
    elif variant == "inhomogeneous":
        if R is None:
            raise ValueError("R is required for the inhomogeneous formula")
        val = math.sqrt(d) * math.sqrt(R) * coef ** 1.5 * T ** 2 * math.sqrt(f_norm) / (
            2 * math.sqrt(2) * math.sqrt(eps) * math.sqrt(delta) * h ** hpow)
    else:
        raise ValueError("variant must be 'homogeneous' or 'inhomogeneous'")
    return max(1, math.ceil(val))


def success_probability_estimate(u_T_norm: float, u0_norm: float, delta: float) -> float:
    """Lower estimate ``|u(T)|^2 / (e^{2 delta} |u0|^2)`` of the homogeneous success probability."""
    return (u_T_norm / (math.exp(delta) * u0_norm)) ** 2


# ----------------------------------------------------------------------------- gate counts

@dataclass(frozen=True)
class GateCount:
    """Single-qubit count ``single + sum_k phi[k] * phi(k)`` and CNOT count."""

    single: int
    phi: tuple[tuple[int, int], ...]
    cnot: int

    def single_value(self, phi_model: Callable[[int], float] = lambda j: j * j) -> float:
        return self.single + sum(c * phi_model(k) for k, c in self.phi)

    def __add__(self, other: "GateCount") -> "GateCount":
        ph = Counter(dict(self.phi))
        ph.update(dict(other.phi))
        return GateCount(self.single + other.single, _phi(ph), self.cnot + other.cnot)


def _phi(c: Counter | dict) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((k, v) for k, v in c.items() if v))


def _gc(single: int, cnot: int, **phi: int) -> GateCount:
    return GateCount(single, _phi({int(k[1:]): v for k, v in phi.items()}), cnot)


def block_cost(name: str, idx: int, ncontrols: int, n: int) -> GateCount:
    """Per-block single-qubit and CNOT counts from the decomposition table.

    ``W`` blocks are indexed by ladder position ``j``; ``S0``/``S1``/``V`` by the
    register width ``n``.  The phase ladder ``P`` and the global phase ``G`` cost
    one single-qubit gate or nothing when uncontrolled, and a controlled single-qubit
    unitary (3 single-qubit, 2 CNOT) with one control.
    """
    def phi(k: int, coef: int = 1) -> dict:
        return {k: coef}

    def mk(single: int, cnot: int, ph: dict | None = None) -> GateCount:
        return GateCount(single, _phi(ph or {}), cnot)

    j = idx
    if name == "W":
        if ncontrols == 0:
            fixed = {1: (5, 0), 2: (7, 4), 3: (13, 12), 4: (25, 26)}
            return mk(*fixed[j]) if j in fixed else mk(4, 18 * j - 42, phi(j - 1))
        if ncontrols == 1:
            fixed = {1: (15, 10), 2: (39, 28), 3: (69, 52)}
            return mk(*fixed[j]) if j in fixed else mk(18 * j - 6, 28 * j - 28, phi(j))
        if ncontrols == 2:
            fixed = {1: (45, 40), 2: (99, 92)}
            return mk(*fixed[j]) if j in fixed else mk(42 * j - 6, 56 * j - 16, phi(j + 1))
    elif name == "S1":
        table = {0: (0, 16 * n - 24, n), 1: (0, 16 * n - 8, n + 1), 2: (0, 16 * n + 8, n + 2)}
        if ncontrols in table:
            s, c, p = table[ncontrols]
            return mk(s, c, phi(p))
    elif name == "S0":
        table = {0: (2 * n, 16 * n - 24, n), 1: (0, 18 * n - 8, n + 1), 2: (18 * n, 28 * n + 8, n + 2)}
        if ncontrols in table:
            s, c, p = table[ncontrols]
            return mk(s, c, phi(p))
    elif name == "V":
        table = {0: (2 * n + 2, 18 * n - 42, n - 1), 1: (18 * n - 6, 28 * n - 28, n), 2: (60 * n - 24, 68 * n - 28, n + 1)}
        if ncontrols in table:
            s, c, p = table[ncontrols]
            return mk(s, c, phi(p))
    elif name in ("P", "G"):
        if ncontrols == 0:
            return mk(1 if name == "P" else 0, 0)
        if ncontrols == 1:
            return mk(3, 2)
    raise ValueError(f"no cost entry for {name}{idx} with {ncontrols} controls")


def tally_blocks(block_list: Iterable[tuple[str, int, int]], n: int) -> GateCount:
    total = GateCount(0, (), 0)
    for name, idx, nc in block_list:
        total = total + block_cost(name, idx, nc, n)
    return total


def table2_formula(kind: str, n: int, m: int) -> GateCount:
    """Closed-form select-oracle counts for ``n >= 5``; ``phi`` terms kept symbolic."""
    if n < 5:
        raise ValueError("closed forms hold for n >= 5")
    ph: Counter = Counter()

    def add_sum(coef: int) -> None:
        for j in range(4, n + 1):
            ph[j] += coef

    if kind == "SEL_R":
        single = 9 * m * n * n + (3 * m + 12) * n + 51 * m + 118
        add_sum(m + 3)
        ph[n] -= 1
        ph[n + 1] += 2 * m
        cnot = (14 * m + 27) * n * n + (20 * m - 67) * n + 42
    elif kind == "CSEL_R":
        single = (21 * m + 27) * n * n + (33 * m + 9) * n + 78 * m + 147
        add_sum(m + 3)
        ph[n + 1] += m + 2
        ph[n + 2] += 2 * m
        cnot = (28 * m + 42) * n * n + (56 * m - 8) * n + 54 * m + 34
    elif kind == "SEL_P":
        single = 9 * m * n * n + (21 * m + 12) * n + 43 * m + 83
        add_sum(m + 2)
        ph[n - 1] += 2
        ph[n] += m - 2
        cnot = (14 * m + 18) * n * n + (42 * m - 30) * n - 40 * m - 24
    elif kind == "CSEL_P":
        single = (21 * m + 18) * n * n + (75 * m + 42) * n + 54 * m + 87
        add_sum(m + 2)
        ph[n] += 2
        ph[n + 1] += 2 * m
        cnot = (28 * m + 28) * n * n + (80 * m + 28) * n + 10 * m - 22
    else:
        raise ValueError(f"unknown oracle kind {kind!r}")
    return GateCount(single, _phi(ph), cnot)


def emitted_blocks(kind: str, n: int, m: int) -> list[tuple[str, int, int]]:
    """Block multiset of one step of the oracle as built by the circuits module."""
    from . import circuits
    from .lchs import make_plan
    from .sim import controlled

    plan = make_plan(1e-3, 0.4, m, R=1.0)
    if kind in ("SEL_R", "CSEL_R"):
        A = fvm.unified_matrix(n, 1.0, 0.5, 0.3, -0.2, False)
        p = OperatorParams("robin", 1.0, 0.5, 0.3, -0.2, 1.0, n, np.zeros(2 ** n), A)
        c = circuits.sel_robin(circuits.SelectSpec([p], plan, 0.1))
    elif kind in ("SEL_P", "CSEL_P"):
        A = fvm.unified_matrix(n, 1.0, 0.5, 0.0, 0.0, True)
        p = OperatorParams("periodic", 1.0, 0.5, 0.0, 0.0, 1.0, n, np.zeros(2 ** n), A)
        c = circuits.sel_periodic(circuits.SelectSpec([p], plan, 0.1))
    else:
        raise ValueError(f"unknown oracle kind {kind!r}")
    if kind.startswith("C"):
        c = controlled(c, c.num_qubits)
    return list(c.blocks)


def gate_counts(oracle_kind: str, n: int, m: int) -> dict[str, GateCount]:
    """Counts summed over the emitted block multiset next to the closed form.

    Returns ``{"emitted": ..., "formula": ...}``; raises for ``n < 5``.
    """
    if n < 5:
        raise ValueError("gate-count closed forms hold for n >= 5")
    emitted = tally_blocks(emitted_blocks(oracle_kind, n, m), n)
    return {"emitted": emitted, "formula": table2_formula(oracle_kind, n, m)}


# ----------------------------------------------------------------------------- verification suites

def block_suite(draws: int = 50, seed: int = 11, n_max: int = 5, tol: float = 1e-10) -> list[BoundReport]:
    """Emitted block circuits against dense exponentials of their generators.

    Each draw picks ``n``, ``theta`` and ``lambda`` at random and checks ``W_j``
    for every ``j`` plus ``S0``, ``S1`` and ``V``.  The measured value is the
    spectral norm of the difference between the circuit unitary and ``exp(-i theta G)``.
    """
    from .sim import circuit_unitary

    rng = np.random.default_rng(seed)
    out = []
    for d in range(draws):
        n = int(rng.integers(2, n_max + 1))
        theta, lam = (float(v) for v in rng.uniform(-math.pi, math.pi, 2))
        cases = [(f"W{j}", blocks.build_Wj(n, j, theta, lam), blocks.ladder_term(n, j, lam)) for j in range(1, n + 1)]
        cases += [("S0", blocks.build_Sn0(n, theta), blocks.proj_all(n, 0)),
                  ("S1", blocks.build_Sn1(n, theta), blocks.proj_all(n, 1)),
                  ("V", blocks.build_Vn(n, theta, lam), blocks.corner(n, lam))]
        for name, circ, gen in cases:
            err = spectral_norm(circuit_unitary(circ) - blocks.expm_hermitian(gen, theta))
            out.append(BoundReport(f"draw{d} n={n} {name}", err, tol))
    return out


EIGEN_PERTURBATIVE_PAIRS = ((0.3, -0.5), (0.5, 0.5), (-0.7, 0.2))
EIGEN_HYPERBOLIC_PAIRS = ((3.0, 0.2), (1.5, -2.5), (2.0, 2.5))


def eigen_suite(tol_tab: float = 1e-10, tol_hyp: float = 1e-8, N_hyp: int = 64) -> list[BoundReport]:
    """Closed-form and asymptotic spectra of ``B(mu0, mu1)`` against dense ``eigvalsh``.

    Tabulated pairs must agree to ``tol_tab``.  For trigonometric regimes the
    perturbative extreme eigenvalues must improve by at least a factor 8 when
    ``N`` doubles from 32 to 64, reported as ``8 / ratio`` against 1.
    Hyperbolic regimes must agree to ``tol_hyp`` at ``N_hyp``.
    """
    out = []
    for pair in fvm.TABULATED:
        for N in (8, 37, 64):
            ev = np.linalg.eigvalsh(fvm.matrix_B(*pair, N))
            err = float(np.max(np.abs(ev - np.sort(fvm.tabulated_eigenvalues(*pair, N)))))
            out.append(BoundReport(f"tabulated mu={pair} N={N}", err, tol_tab))
    for pair in EIGEN_PERTURBATIVE_PAIRS:
        errs = {}
        for N in (32, 64):
            ev = np.linalg.eigvalsh(fvm.matrix_B(*pair, N))
            errs[N] = (abs(fvm.perturbative_max(*pair, N) - ev[-1]), abs(fvm.perturbative_min(*pair, N) - ev[0]))
        for k, side in enumerate(("max", "min")):
            ratio = errs[32][k] / errs[64][k] if errs[64][k] > 0 else math.inf
            out.append(BoundReport(f"perturbative {side} mu={pair} 8/(err32/err64)", 8.0, ratio))
    for pair in EIGEN_HYPERBOLIC_PAIRS:
        ev = np.linalg.eigvalsh(fvm.matrix_B(*pair, N_hyp))
        est = fvm.eig_B(*pair, N_hyp)
        if est.regime_max == "hyperbolic":
            out.append(BoundReport(f"hyperbolic max mu={pair} N={N_hyp}", abs(est.lambda_max_B - ev[-1]), tol_hyp))
        if est.regime_min == "hyperbolic":
            out.append(BoundReport(f"hyperbolic min mu={pair} N={N_hyp}", abs(est.lambda_min_B - ev[0]), tol_hyp))
    return out


IK_POINTS = ((6.8261, 0.4), (3.0, 1.0), (10.0, 0.1))


def _random_params(rng: np.random.Generator, kind: str, n: int) -> OperatorParams:
    periodic = kind.startswith("periodic")
    al = 0.0 if kind.endswith("alpha0") else float(rng.uniform(0.1, 3.0))
    be = float(rng.uniform(-3.0, 3.0))
    s0, s1 = (0.0, 0.0) if periodic else (float(v) for v in rng.uniform(-4.0, 4.0, 2))
    A = fvm.unified_matrix(n, al, be, s0, s1, periodic)
    return OperatorParams("periodic" if periodic else "robin", al, be, s0, s1, 1.0, n, np.zeros(2 ** n), A)


def per_node_trotter_errors(params: OperatorParams, plan: LchsPlan | None, tau: float) -> np.ndarray:
    """Spectral-norm error of every diagonal block of the emitted one-step select."""
    from . import circuits
    from .sim import circuit_unitary

    spec = circuits.SelectSpec([params], plan, tau, 1)
    U = circuit_unitary(circuits.sel_global(spec))
    exact = circuits.exact_node_unitaries(spec)
    N = 2 ** params.n
    return np.array([spectral_norm(U[j * N:(j + 1) * N, j * N:(j + 1) * N] - E) for j, E in enumerate(exact)])


def bound_suite(seed: int = 3, draws: int = 12, n: int = 3) -> list[BoundReport]:
    """Moment integrals, per-node Trotter bounds and the scalar quadrature bound.

    The Trotter draws use ``n >= 3``; at ``n = 2`` the ``alpha = 0`` Robin bound
    is known to be exceeded for some parameters.
    """
    from . import circuits
    from .lchs import make_plan

    out = []
    for g, d in IK_POINTS:
        for k in range(4):
            exact, quad = Ik(g, d, k), Ik_numeric(g, d, k)
            out.append(BoundReport(f"I{k}(gamma={g}, delta={d}) closed vs quad", abs(exact - quad), 1e-6 * abs(quad)))
        for k in (1, 3):
            exp_, ref = Ik_expansion(g, d, k), Ik(g, d, k)
            out.append(BoundReport(f"I{k}(gamma={g}, delta={d}) expansion", abs(exp_ - ref), 1e-3 * abs(ref)))
    rng = np.random.default_rng(seed)
    kinds = ("robin", "robin_alpha0", "periodic", "periodic_alpha0")
    for d in range(draws):
        kind = kinds[d % 4]
        p = _random_params(rng, kind, n)
        plan = None if kind == "periodic_alpha0" else make_plan(1e-3, 0.4, 2, R=float(rng.uniform(0.5, 6.0)))
        tau = float(rng.uniform(0.01, 0.5))
        meas = per_node_trotter_errors(p, plan, tau)
        nodes = plan.nodes if plan is not None else np.zeros(1)
        bnd = node_bounds(p, nodes, tau, circuits.variant(p))
        j = int(np.argmax(meas / bnd))
        out.append(BoundReport(f"trotter draw{d} {kind} n={n} node{j}", float(meas[j]), float(bnd[j])))
    for m in (6, 8):
        plan = make_plan(1e-3, 0.4, m)
        for lam in (0.0, 0.5, 2.0):
            err = abs(plan.scalar_response(lam, 1.0) - math.exp(-lam))
            bnd = truncation_bound(plan.gamma, plan.delta) + discretisation_bound(plan.delta, lam, 1.0, plan.dr)
            out.append(BoundReport(f"quadrature m={m} lam={lam}", err, bnd))
    return out
