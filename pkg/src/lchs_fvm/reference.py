"""Classical references: matrix exponentials, Duhamel integrals and closed-form test solutions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .fvm import Periodic, PdeProblem, Robin, dirichlet, neumann
from .lchs import LchsPlan, make_plan

DENSE_LIMIT = 4096
EPS_LCHS = 1e-3
DELTA = 0.4


# ----------------------------------------------------------------------------- time evolution

def _dense(A) -> np.ndarray:
    return A.toarray() if sp.issparse(A) else np.asarray(A)


def expm_apply(A, u0: np.ndarray, T: float, method: str = "pade") -> np.ndarray:
    """``exp(-A T) u0``.

    ``method`` is ``"pade"`` (scaling and squaring), ``"eig"`` (eigendecomposition,
    for diagonalisable ``A``) or ``"krylov"`` (sparse action, no size limit).
    """
    u0 = np.asarray(u0)
    if method == "krylov":
        return expm_multiply(-T * sp.csr_matrix(A), u0)
    if A.shape[0] > DENSE_LIMIT:
        raise ValueError(f"dense exponential limited to {DENSE_LIMIT} unknowns")
    Ad = _dense(A)
    if method == "pade":
        return sla.expm(-T * Ad) @ u0
    if method == "eig":
        w, V = np.linalg.eig(Ad)
        out = V @ (np.exp(-T * w) * np.linalg.solve(V, u0))
        return out.real if np.isrealobj(Ad) and np.isrealobj(u0) else out
    raise ValueError(f"unknown method {method!r}")


def _gauss_panels(A, f: Callable[[float], np.ndarray], T: float, panels: int, order: int) -> np.ndarray:
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, T, panels + 1)
    out = None
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = (hi - lo) / 2
        for xi, wi in zip(x, w):
            s = lo + half * (xi + 1)
            term = wi * half * expm_apply(A, f(s), T - s)
            out = term if out is None else out + term
    return out


def duhamel(A, f: Callable[[float], np.ndarray], T: float, steps: int = 1024, order: int = 8,
            tol: float = 1e-10, max_panels: int = 1 << 12) -> np.ndarray:
    """``int_0^T exp(-A (T - s)) f(s) ds`` by Gauss-Legendre panels, doubled until converged.

    ``steps`` is the minimum number of quadrature nodes; the panel count starts at
    ``steps / order`` and doubles until two successive results agree to ``tol``
    (relative to the larger norm).
    """
    if A.shape[0] > DENSE_LIMIT:
        raise ValueError(f"dense exponential limited to {DENSE_LIMIT} unknowns")
    if T == 0:
        return np.zeros(A.shape[0])
    panels = max(1, math.ceil(steps / order))
    prev = _gauss_panels(A, f, T, panels, order)
    while True:
        panels *= 2
        cur = _gauss_panels(A, f, T, panels, order)
        scale = max(np.linalg.norm(cur), np.linalg.norm(prev), 1e-300)
        if np.linalg.norm(cur - prev) <= tol * scale or np.linalg.norm(cur) == 0:
            return cur
        if panels >= max_panels:
            raise RuntimeError("Duhamel quadrature did not converge")
        prev = cur


def rk4(A, f: Callable[[float], np.ndarray] | None, u0: np.ndarray, T: float, steps: int) -> np.ndarray:
    """Classical fourth-order Runge-Kutta for ``du/dt = -A u + f``; used only to cross-check oracles."""
    A = sp.csr_matrix(A)
    f = f or (lambda t: 0.0)
    dt = T / steps
    u = np.array(u0, dtype=float)
    t = 0.0
    for _ in range(steps):
        k1 = -A @ u + f(t)
        k2 = -A @ (u + dt / 2 * k1) + f(t + dt / 2)
        k3 = -A @ (u + dt / 2 * k2) + f(t + dt / 2)
        k4 = -A @ (u + dt * k3) + f(t + dt)
        u = u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    return u


def classical_cost(d: int, n: int, k: int, T: float, eps: float, a: float, b: float, h: float,
                   s: int = 3) -> float:
    """Operation count ``s 2^(n d) r`` of a k-th order explicit stepper, with ``r`` the larger of the
    accuracy and stability requirements."""
    if min(d, n, k, T, eps, h) <= 0:
        raise ValueError("inputs must be positive")
    r = max(k * T ** ((k + 1) / k) / eps ** (1 / k), abs(a) * T / h, b * T / h ** 2)
    return float(s * 2.0 ** (n * d) * r)


# ----------------------------------------------------------------------------- experiments

@dataclass(frozen=True)
class ExperimentCase:
    """One numerical test: PDE data, closed-form solution and the run parameters."""

    id: int
    name: str
    a: tuple[float, ...]
    b: tuple[float, ...]
    lengths: tuple[float, ...]
    bc: tuple[Robin | Periodic, ...]
    T: float
    r: int
    schemes: tuple[str, ...]
    n: int
    m: int | None
    exact: Callable[..., np.ndarray]
    u0: Callable[..., np.ndarray] | None = None
    f: Callable[..., np.ndarray] | None = None
    c: float = 0.0
    m_o: int | None = None
    R_factor: dict[str, float] = field(default_factory=dict)
    R_fixed: dict[str, float] = field(default_factory=dict)
    m_by_scheme: dict[str, int] = field(default_factory=dict)

    @property
    def d(self) -> int:
        return len(self.a)

    @property
    def inhomogeneous(self) -> bool:
        return self.f is not None

    def problem(self, scheme: str | None = None, n: int | None = None) -> PdeProblem:
        scheme = scheme or self.schemes[0]
        if scheme not in self.schemes:
            raise ValueError(f"experiment {self.id} does not use the {scheme} scheme")
        n = self.n if n is None else n
        return PdeProblem(self.a, self.b, self.lengths, self.bc, scheme, (n,) * self.d, self.c, self.u0, self.f)

    def default_m(self, scheme: str) -> int | None:
        return self.m_by_scheme.get(scheme, self.m)

    def R(self, scheme: str, m: int) -> float | None:
        if scheme in self.R_fixed:
            return self.R_fixed[scheme]
        if scheme in self.R_factor:
            return self.R_factor[scheme] * 2 ** m
        return None

    def plan(self, scheme: str, m: int | None = None) -> LchsPlan | None:
        m = self.default_m(scheme) if m is None else m
        R = self.R(scheme, m) if m is not None else None
        if R is None:
            return None
        return make_plan(EPS_LCHS, DELTA, m, R)

    def reference(self, problem: PdeProblem, t: float | None = None) -> np.ndarray:
        return np.asarray(self.exact(self.T if t is None else t, *problem.grid()), dtype=float)


def _e1(t, x, b=1.0, l=1.0):
    return np.exp(-b * math.pi ** 2 * t / l ** 2) * np.sin(math.pi * x / l)


def _e2(t, x, b=1.0, l=1.0):
    return np.exp(-b * math.pi ** 2 * t / l ** 2) * np.cos(math.pi * x / l)


def _e3(t, x, a=1.0, l=1.0):
    return np.sin(2 * math.pi * (x - a * t) / l)


def _e4(t, x, a=1.0, b=0.5, l=1.0):
    return np.exp(a * x / (2 * b) - (a ** 2 / (4 * b) + math.pi ** 2 * b / l ** 2) * t) * np.sin(math.pi * x / l)


def _e5(t, x, a=1.0, b=0.25, l=1.0):
    return np.exp(-4 * math.pi ** 2 * b * t / l ** 2) * np.sin(2 * math.pi * (x - a * t) / l)


def _e6(t, x, a=1.0, l=1.0):
    return l / (2 * math.pi * a) * (np.sin(2 * math.pi * x / l) - np.sin(2 * math.pi * (x - a * t) / l))


def _f6(t, x, l=1.0):
    return np.cos(2 * math.pi * x / l) + 0.0 * t


def _e7(t, x, a=1.0, b=0.25, l=1.0):
    return (1 - math.exp(-t)) * np.exp(a * x / (2 * b)) * np.sin(math.pi * x / l)


def _f7(t, x, a=1.0, b=0.25, l=1.0):
    k = a ** 2 / (4 * b) + math.pi ** 2 * b / l ** 2
    return np.exp(a * x / (2 * b)) * (math.exp(-t) + (1 - math.exp(-t)) * k) * np.sin(math.pi * x / l)


def _e8(t, x, y, b1=1.0, b2=1.0, l1=1.0, l2=1.0):
    decay = math.exp(-(b1 / (4 * l1 ** 2) + b2 / (4 * l2 ** 2)) * math.pi ** 2 * t)
    return decay * np.cos(math.pi * x / (2 * l1)) * np.cos(math.pi * y / (2 * l2))


def _e10(t, x, y, a1=1.0, a2=1.0, b1=0.25, b2=0.25, l1=1.0, l2=1.0):
    decay = math.exp(-(4 * math.pi ** 2 * b1 / l1 ** 2 + 4 * math.pi ** 2 * b2 / l2 ** 2) * t)
    return decay * np.sin(2 * math.pi * (x - a1 * t) / l1) * np.sin(2 * math.pi * (y - a2 * t) / l2)


_NEUMANN_LEFT_DIRICHLET_RIGHT = Robin(0.0, 1.0, 0.0, 1.0, 0.0, 0.0)

EXPERIMENTS: dict[int, ExperimentCase] = {
    1: ExperimentCase(1, "1D diffusion, Dirichlet", (0.0,), (1.0,), (1.0,), (dirichlet(),), 0.01, 1,
                      ("central",), 8, 4, _e1, u0=lambda x: _e1(0.0, x), R_factor={"central": 0.89375}),
    2: ExperimentCase(2, "1D diffusion, Neumann", (0.0,), (1.0,), (1.0,), (neumann(),), 0.01, 1,
                      ("central",), 8, 4, _e2, u0=lambda x: _e2(0.0, x), R_factor={"central": 0.89375}),
    3: ExperimentCase(3, "1D advection, periodic", (1.0,), (0.0,), (1.0,), (Periodic(),), 0.01, 8,
                      ("central", "upwind"), 8, 4, _e3, u0=lambda x: _e3(0.0, x), R_factor={"upwind": 1.6}),
    4: ExperimentCase(4, "1D advection-diffusion, Dirichlet", (1.0,), (0.5,), (1.0,), (dirichlet(),), 0.01, 1,
                      ("central", "exponential"), 11, 4, _e4, u0=lambda x: _e4(0.0, x),
                      R_factor={"central": 0.7625, "exponential": 0.7625}),
    5: ExperimentCase(5, "1D advection-diffusion, periodic", (1.0,), (0.25,), (1.0,), (Periodic(),), 0.01, 16,
                      ("central", "exponential"), 10, 4, _e5, u0=lambda x: _e5(0.0, x),
                      R_factor={"central": 0.88875, "exponential": 0.88875}),
    6: ExperimentCase(6, "1D advection with source, periodic", (1.0,), (0.0,), (1.0,), (Periodic(),), 0.05, 8,
                      ("central", "upwind"), 8, None, _e6, f=_f6, m_o=4, R_fixed={"upwind": 34.0},
                      m_by_scheme={"upwind": 4}),
    7: ExperimentCase(7, "1D advection-diffusion with source, Dirichlet", (1.0,), (0.25,), (1.0,), (dirichlet(),),
                      0.01, 1, ("central", "exponential"), 11, 4, _e7, f=_f7, m_o=4,
                      R_fixed={"central": 9.6, "exponential": 9.6}),
    8: ExperimentCase(8, "2D diffusion, Neumann/Dirichlet", (0.0, 0.0), (1.0, 1.0), (1.0, 1.0),
                      (_NEUMANN_LEFT_DIRICHLET_RIGHT,) * 2, 0.04, 1, ("central",), 7, 4, _e8,
                      u0=lambda x, y: _e8(0.0, x, y), R_fixed={"central": 17.8}),
    10: ExperimentCase(10, "2D advection-diffusion, periodic", (1.0, 1.0), (0.25, 0.25), (1.0, 1.0),
                       (Periodic(),) * 2, 0.01, 8, ("central", "exponential"), 7, 4, _e10,
                       u0=lambda x, y: _e10(0.0, x, y), R_fixed={"central": 17.61, "exponential": 17.61}),
}


def get_case(case_id: int) -> ExperimentCase:
    try:
        return EXPERIMENTS[int(case_id)]
    except (KeyError, ValueError):
        raise KeyError(f"unknown experiment {case_id!r}; known ids are {sorted(EXPERIMENTS)}") from None


def analytic(case_id: int, t: float, *point) -> np.ndarray:
    """Closed-form solution of experiment ``case_id`` at time ``t`` and coordinates ``point``."""
    case = get_case(case_id)
    if len(point) != case.d:
        raise ValueError(f"experiment {case_id} is {case.d}-dimensional")
    for p, (x, l) in enumerate(zip(point, case.lengths)):
        x = np.asarray(x)
        if np.any(x < 0) or np.any(x > l):
            raise ValueError(f"coordinate {p} outside [0, {l}]")
    return case.exact(t, *point)


@dataclass(frozen=True)
class PaperTable:
    """Relative errors reported for one sweep; ``rows`` maps the swept value to (L1, L2, Linf)."""

    number: int
    experiment: int
    scheme: str
    sweep: str  # "n", "m" or "m_o"
    fixed: dict
    rows: dict[int, tuple[float, float, float]]


PAPER_TABLES: list[PaperTable] = [
    PaperTable(3, 1, "central", "n", {"m": 4}, {8: (2.6835e-3, 2.6835e-3, 2.6835e-3),
                                                9: (2.9274e-3, 2.9274e-3, 2.9274e-3),
                                                10: (3.6440e-3, 3.6440e-3, 3.6439e-3)}),
    PaperTable(4, 1, "central", "m", {"n": 9}, {3: (2.3781e-2, 2.3782e-2, 2.3782e-2),
                                                4: (2.9274e-3, 2.9274e-3, 2.9274e-3),
                                                5: (1.9847e-3, 1.9847e-3, 1.9847e-3)}),
    PaperTable(5, 2, "central", "n", {"m": 4}, {8: (2.6835e-3, 2.6835e-3, 2.6835e-3),
                                                9: (2.9274e-3, 2.9274e-3, 2.9274e-3),
                                                10: (3.6440e-3, 3.6440e-3, 3.6439e-3)}),
    PaperTable(6, 2, "central", "m", {"n": 9}, {3: (2.3781e-2, 2.3782e-2, 2.3782e-2),
                                                4: (2.9274e-3, 2.9274e-3, 2.9274e-3),
                                                5: (1.9847e-3, 1.9847e-3, 1.9847e-3)}),
    PaperTable(7, 3, "central", "n", {}, {7: (9.2580e-5, 9.2565e-5, 9.3085e-5),
                                          8: (2.7457e-4, 2.7456e-4, 2.7571e-4),
                                          9: (1.0690e-3, 1.0690e-3, 1.0713e-3)}),
    PaperTable(8, 3, "upwind", "n", {"m": 4}, {7: (1.3747e-3, 1.3769e-3, 1.4580e-3),
                                               8: (2.4183e-3, 2.4230e-3, 2.5701e-3),
                                               9: (1.1064e-2, 1.1113e-2, 1.2106e-2)}),
    PaperTable(9, 3, "upwind", "m", {"n": 8}, {3: (6.6498e-3, 6.6541e-3, 6.9051e-3),
                                               4: (2.4183e-3, 2.4230e-3, 2.5701e-3),
                                               5: (2.4779e-3, 2.4818e-3, 2.6182e-3)}),
    PaperTable(10, 4, "central", "n", {"m": 4}, {10: (8.4446e-3, 8.3141e-3, 2.1171e-2),
                                                 11: (6.6631e-3, 7.1931e-3, 8.8714e-3),
                                                 12: (4.5424e-3, 4.7422e-3, 4.9266e-3)}),
    PaperTable(11, 4, "central", "m", {"n": 11}, {3: (4.0368e-2, 4.0201e-2, 4.0182e-2),
                                                  4: (6.6631e-3, 7.1931e-3, 8.8714e-3),
                                                  5: (6.1391e-3, 6.0865e-3, 8.7803e-3)}),
    PaperTable(12, 4, "exponential", "n", {"m": 4}, {10: (8.4521e-3, 8.2909e-3, 1.7769e-2),
                                                     11: (6.6630e-3, 7.1940e-3, 8.8713e-3),
                                                     12: (4.5436e-3, 4.7428e-3, 4.9268e-3)}),
    PaperTable(13, 4, "exponential", "m", {"n": 11}, {3: (4.0368e-2, 4.0201e-2, 4.0182e-2),
                                                      4: (6.6630e-3, 7.1940e-3, 8.8713e-3),
                                                      5: (6.1390e-3, 6.0877e-3, 8.7804e-3)}),
    PaperTable(14, 5, "central", "n", {"m": 4}, {9: (3.5575e-3, 3.9240e-3, 5.2133e-3),
                                                 10: (2.7758e-3, 2.9517e-3, 3.7794e-3),
                                                 11: (4.3413e-3, 4.7290e-3, 6.2177e-3)}),
    PaperTable(15, 5, "central", "m", {"n": 10}, {3: (2.5924e-2, 2.5924e-2, 2.5965e-2),
                                                  4: (2.7758e-3, 2.9517e-3, 3.7794e-3),
                                                  5: (3.5250e-3, 3.6027e-3, 4.2693e-3)}),
    PaperTable(16, 5, "exponential", "n", {"m": 4}, {9: (3.4606e-3, 3.8580e-3, 5.1659e-3),
                                                     10: (2.7910e-3, 2.9667e-3, 3.7967e-3),
                                                     11: (4.3402e-3, 4.7065e-3, 6.1612e-3)}),
    PaperTable(17, 5, "exponential", "m", {"n": 10}, {3: (2.5929e-2, 2.5929e-2, 2.5966e-2),
                                                      4: (2.7910e-3, 2.9667e-3, 3.7967e-3),
                                                      5: (3.5381e-3, 3.6158e-3, 4.2835e-3)}),
    PaperTable(18, 6, "central", "m_o", {"n": 8}, {3: (2.4119e-3, 2.4122e-3, 2.4441e-3),
                                                   4: (2.4046e-3, 2.4048e-3, 2.4337e-3),
                                                   5: (2.4035e-3, 2.4035e-3, 2.4315e-3)}),
    PaperTable(19, 6, "upwind", "m_o", {"n": 8, "m": 4}, {3: (3.7480e-3, 3.7580e-3, 4.0244e-3),
                                                          4: (3.7127e-3, 3.7223e-3, 3.9848e-3),
                                                          5: (3.7039e-3, 3.7135e-3, 3.9753e-3)}),
    PaperTable(20, 7, "central", "m_o", {"n": 11, "m": 4}, {3: (9.4449e-3, 1.0019e-2, 2.6340e-2),
                                                            4: (9.4555e-3, 1.0035e-2, 2.6723e-2),
                                                            5: (9.4607e-3, 1.0055e-2, 2.5693e-2)}),
    PaperTable(21, 7, "exponential", "m_o", {"n": 11, "m": 4}, {3: (9.4412e-3, 1.0030e-2, 2.6795e-2),
                                                                4: (9.4519e-3, 1.0044e-2, 2.7187e-2),
                                                                5: (9.4570e-3, 1.0064e-2, 2.5426e-2)}),
    PaperTable(22, 8, "central", "n", {"m": 4}, {7: (1.8134e-3, 1.8133e-3, 1.8132e-3)}),
    PaperTable(23, 10, "central", "n", {"m": 4}, {7: (2.4825e-3, 2.5783e-3, 3.9348e-3)}),
    PaperTable(23, 10, "exponential", "n", {"m": 4}, {7: (2.1343e-3, 2.4494e-3, 4.2411e-3)}),
]


def table_runs(table: PaperTable):
    """Yield ``(n, m, m_o, paper_errors)`` for every row of a table."""
    case = get_case(table.experiment)
    for key, vals in table.rows.items():
        cfg = {"n": case.n, "m": case.default_m(table.scheme), "m_o": case.m_o}
        cfg.update(table.fixed)
        cfg[table.sweep] = key
        yield cfg["n"], cfg["m"], cfg["m_o"], vals
