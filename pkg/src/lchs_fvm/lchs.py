"""Kernel, truncation and quadrature for the Hamiltonian-simulation sum, plus the outer time quadrature.

The dissipative propagator is written as an integral over ``r`` of unitary
evolutions ``exp(-i (H + r L) t)`` weighted by the kernel
``f(r) = sqrt(2/pi) exp(delta - (1 + r^2)/(4 gamma^2) - i r delta) / (1 + r^2)``.
The integral is truncated to ``[-R, R]`` and discretised on ``M = 2^m`` midpoint
nodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import erfc

EPS_MAX = 0.9027


def kernel(r, gamma: float, delta: float):
    """Kernel value at ``r`` (scalar or array)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    r = np.asarray(r, dtype=float)
    val = np.sqrt(2 / np.pi) * np.exp(delta - (1 + r * r) / (4 * gamma ** 2) - 1j * r * delta) / (1 + r * r)
    return val if val.ndim else complex(val)


def select_params(eps_lchs: float, delta: float) -> tuple[float, float]:
    """``(gamma, R)`` that keep the truncation error below ``eps_lchs``."""
    if not 0 < eps_lchs <= EPS_MAX:
        raise ValueError(f"eps_lchs must lie in (0, {EPS_MAX}]")
    if delta <= 0:
        raise ValueError("delta must be positive")
    gamma = math.sqrt(delta + math.log((1 + 1 / (2 * math.pi)) / eps_lchs)) / delta
    return gamma, 2 * delta * gamma ** 2


def kernel_l1(gamma: float, delta: float) -> float:
    """Closed-form ``(1/sqrt(2 pi)) * integral |f(r)| dr`` over the whole line."""
    return math.exp(delta) * float(erfc(1 / (2 * gamma)))


@dataclass(frozen=True)
class LchsPlan:
    eps_lchs: float
    delta: float
    gamma: float
    R: float
    m: int
    nodes: np.ndarray
    coeffs: np.ndarray

    @property
    def M(self) -> int:
        return 2 ** self.m

    @property
    def dr(self) -> float:
        return 2 * self.R / self.M

    @property
    def R_tilde(self) -> float:
        return self.R - self.dr / 2

    @property
    def c_l1(self) -> float:
        return float(np.abs(self.coeffs).sum())

    def right_amplitudes(self) -> np.ndarray:
        """``sqrt(c_j) / sqrt(|c|_1)`` on the principal branch."""
        return np.sqrt(self.coeffs) / math.sqrt(self.c_l1)

    def left_amplitudes(self) -> np.ndarray:
        return np.conj(np.sqrt(self.coeffs)) / math.sqrt(self.c_l1)

    def scalar_response(self, lam: complex, t: float) -> complex:
        """``sum_j c_j exp(-i r_j lam t)``, the quadrature applied to a scalar generator."""
        return complex(np.sum(self.coeffs * np.exp(-1j * self.nodes * lam * t)))


def make_plan(eps_lchs: float, delta: float, m: int, R: float | None = None) -> LchsPlan:
    if m < 1:
        raise ValueError("at least one ancilla qubit is needed")
    gamma, R_default = select_params(eps_lchs, delta)
    R = R_default if R is None else float(R)
    if R <= 0:
        raise ValueError("truncation radius must be positive")
    M = 2 ** m
    dr = 2 * R / M
    # (j - (M-1)/2) is an exact half-integer, so the node set is exactly symmetric.
    nodes = (np.arange(M) - (M - 1) / 2) * dr
    coeffs = dr * kernel(nodes, gamma, delta) / math.sqrt(2 * math.pi)
    return LchsPlan(eps_lchs, delta, gamma, R, m, nodes, coeffs)


@dataclass(frozen=True)
class OuterPlan:
    T: float
    m_o: int
    times: np.ndarray
    weights: np.ndarray
    states: np.ndarray  # shape (M_o, N), unit rows

    @property
    def M_o(self) -> int:
        return 2 ** self.m_o

    @property
    def dt(self) -> float:
        return self.T / self.M_o

    @property
    def d_l1(self) -> float:
        return float(np.sum(self.weights))

    @property
    def degenerate(self) -> bool:
        return self.d_l1 == 0.0

    def right_amplitudes(self) -> np.ndarray:
        return np.sqrt(self.weights / self.d_l1)


def make_outer_plan(T: float, m_o: int, source: Callable[[float], np.ndarray]) -> OuterPlan:
    """Midpoint nodes ``T_k = T - dt/2 - k dt`` with weights ``dt |f(T_k)|``.

    ``source(t)`` returns the discretised source vector.  A node with a zero source
    gets weight zero and the first basis vector as its (irrelevant) direction.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if m_o < 0:
        raise ValueError("m_o must be nonnegative")
    M_o = 2 ** m_o
    dt = T / M_o
    times = T - dt / 2 - dt * np.arange(M_o)
    rows, weights = [], []
    for t in times:
        v = np.asarray(source(float(t)), dtype=complex)
        nrm = float(np.linalg.norm(v))
        if nrm == 0.0:
            e = np.zeros_like(v)
            e[0] = 1.0
            rows.append(e)
        else:
            rows.append(v / nrm)
        weights.append(dt * nrm)
    return OuterPlan(T, m_o, times, np.array(weights), np.array(rows))
