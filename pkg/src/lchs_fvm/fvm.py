"""Finite-volume coefficient matrices for advection-diffusion on a uniform grid.

Every one-dimensional operator is reduced to the unified form

* Robin:    ``A = 2 alpha I - ((alpha+beta) S^- + (alpha-beta) S^+ + s0 P0 + s1 P1)``
* periodic: ``A = 2 alpha I - ((alpha+beta)(S^- + C^-) + (alpha-beta)(S^+ + C^+))``

where ``S^-`` is the superdiagonal shift, ``P0``/``P1`` project onto the first/last
cell and ``C^-``/``C^+`` close the ring.  The semi-discrete system is
``du/dt = -A u + f``.  Boundary ghost cells are eliminated using the reconstruction
that belongs to each flux scheme.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from . import blocks

SCHEMES = ("central", "exponential", "upwind")
DENSE_LIMIT = 4096


@dataclass(frozen=True)
class Robin:
    """``alpha u + beta du/dx = g`` at each end (``beta = 0`` is Dirichlet, ``alpha = 0`` Neumann)."""

    alpha_l: float
    beta_l: float
    g_l: float
    alpha_r: float
    beta_r: float
    g_r: float

    def __post_init__(self) -> None:
        if self.alpha_l == 0 and self.beta_l == 0 or self.alpha_r == 0 and self.beta_r == 0:
            raise ValueError("each Robin condition needs a nonzero alpha or beta")

    @property
    def kind(self) -> str:
        if self.beta_l == 0 and self.beta_r == 0:
            return "dirichlet"
        if self.alpha_l == 0 and self.alpha_r == 0:
            return "neumann"
        return "robin"


@dataclass(frozen=True)
class Periodic:
    kind: str = "periodic"


def dirichlet(g_l: float = 0.0, g_r: float = 0.0) -> Robin:
    return Robin(1.0, 0.0, g_l, 1.0, 0.0, g_r)


def neumann(g_l: float = 0.0, g_r: float = 0.0) -> Robin:
    return Robin(0.0, 1.0, g_l, 0.0, 1.0, g_r)


@dataclass
class PdeProblem:
    """``u_t + sum_p (a_p u - b_p u_{x_p})_{x_p} = -c u + f`` on a box ``prod_p [0, l_p]``.

    ``u0(*coords)`` and ``f(t, *coords)`` are vectorised over coordinate arrays.
    """

    a: Sequence[float]
    b: Sequence[float]
    lengths: Sequence[float]
    bc: Sequence[Robin | Periodic]
    scheme: str
    n: Sequence[int]
    c: float = 0.0
    u0: Callable[..., np.ndarray] | None = None
    f: Callable[..., np.ndarray] | None = None

    def __post_init__(self) -> None:
        self.a = tuple(float(v) for v in self.a)
        self.b = tuple(float(v) for v in self.b)
        self.lengths = tuple(float(v) for v in self.lengths)
        self.n = tuple(int(v) for v in self.n)
        self.bc = tuple(self.bc)
        d = len(self.a)
        if not (len(self.b) == len(self.lengths) == len(self.bc) == len(self.n) == d):
            raise ValueError("per-dimension fields must all have length d")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if any(v < 0 for v in self.b):
            raise ValueError("diffusion coefficients must be nonnegative")
        if self.c < 0:
            raise ValueError("attenuation c must be nonnegative")

    @property
    def d(self) -> int:
        return len(self.a)

    def h(self, p: int) -> float:
        return self.lengths[p] / 2 ** self.n[p]

    def centers(self, p: int) -> np.ndarray:
        return (np.arange(2 ** self.n[p]) + 0.5) * self.h(p)

    def grid(self) -> list[np.ndarray]:
        """Cell-centre coordinate arrays flattened in row-major order (dimension 0 slowest)."""
        mesh = np.meshgrid(*[self.centers(p) for p in range(self.d)], indexing="ij")
        return [m.ravel() for m in mesh]

    def initial_vector(self) -> np.ndarray:
        if self.u0 is None:
            return np.zeros(int(np.prod([2 ** k for k in self.n])))
        return np.asarray(self.u0(*self.grid()), dtype=float)

    def source_vector(self, t: float) -> np.ndarray:
        size = int(np.prod([2 ** k for k in self.n]))
        if self.f is None:
            return np.zeros(size)
        return np.broadcast_to(np.asarray(self.f(t, *self.grid()), dtype=float), (size,)).copy()


@dataclass
class OperatorParams:
    """Unified-form coefficients of one dimension plus the boundary source and a matrix copy."""

    form: str  # "robin" or "periodic"
    alpha: float
    beta: float
    s0: float
    s1: float
    h: float
    n: int
    source: np.ndarray
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def N(self) -> int:
        return 2 ** self.n

    @property
    def dense_A(self) -> np.ndarray:
        if self.N > DENSE_LIMIT:
            raise ValueError("dense copy limited to 4096 cells")
        return self.matrix.toarray()

    @property
    def mu0(self) -> float:
        return self.s0 / self.alpha

    @property
    def mu1(self) -> float:
        return self.s1 / self.alpha


# ----------------------------------------------------------------------------- coefficients

def _reflect(bc: Robin) -> Robin:
    """The same conditions seen from the mirrored coordinate ``x -> l - x``."""
    return Robin(bc.alpha_r, -bc.beta_r, bc.g_r, bc.alpha_l, -bc.beta_l, bc.g_l)


def _exp_robin(a: float, b: float, h: float, bc: Robin) -> tuple[float, float, float, float, float]:
    """Exponential-scheme ``(alpha, s0, s1, f0, f1)`` written in ``q = exp(-lambda h / 2)``.

    Dividing numerator and denominator by the dominant exponential keeps the
    expressions finite when the Peclet number ``|a| h / b`` is huge, which is what
    lets the upwind limit be approached numerically.  Negative ``a`` is handled by
    mirroring the domain, which swaps the two ends.
    """
    if a < 0:
        alpha, s0, s1, f0, f1 = _exp_robin(-a, b, h, _reflect(bc))
        return alpha, s1, s0, f1, f0
    lam = a / b
    q = math.exp(-lam * h / 2)
    omq = -math.expm1(-lam * h / 2)  # 1 - q, accurate near 0
    omq2 = -math.expm1(-lam * h)  # 1 - q^2
    al, bl, gl = bc.alpha_l, bc.beta_l, bc.g_l
    ar, br, gr = bc.alpha_r, bc.beta_r, bc.g_r
    alpha = a * (1 + q * q) / (2 * h * omq2)
    # left denominator beta_l lam - alpha_l (e^{lam h/2} - 1), multiplied by q
    dl_q = bl * lam * q - al * omq
    dr = br * lam + ar * omq
    if (al == 0 and bl == 0) or (al != 0 and math.isclose(bl * lam * q, al * omq, rel_tol=1e-14)) or dr == 0:
        raise ValueError("exponential Robin boundary is singular for this cell width")
    if al == 0:
        s0 = a / (h * omq2)
        f0 = 0.0 if gl == 0 else -a * gl / (h * dl_q)
    else:
        s0 = a * q * (bl * lam + al * omq) / (h * omq2 * dl_q)
        f0 = -a * gl / (h * dl_q)
    s1 = a * q * (br * lam * q - ar * omq) / (h * omq2 * dr)
    f1 = a * q * gr / (h * dr)
    return alpha, s0, s1, f0, f1


def _upwind_robin(a: float, h: float, bc: Robin) -> tuple[float, float, float, float, float]:
    """Vanishing-diffusion limit of :func:`_exp_robin`."""
    if a < 0:
        alpha, s0, s1, f0, f1 = _upwind_robin(-a, h, _reflect(bc))
        return alpha, s1, s0, f1, f0
    alpha = a / (2 * h)
    s0 = s1 = f0 = f1 = 0.0
    if bc.alpha_l == 0:
        if bc.g_l != 0 and a != 0:
            raise ValueError("upwind inflow boundary with a pure flux condition has no finite limit")
        s0 = a / h
    else:
        f0 = a * bc.g_l / (h * bc.alpha_l)
    return alpha, s0, s1, f0, f1


def robin_coefficients(a: float, b: float, h: float, bc: Robin, scheme: str) -> dict[str, float]:
    """Unified-form ``alpha, beta, s0, s1`` and the two boundary source entries."""
    beta = -a / (2 * h)
    if scheme == "central":
        dl = 2 * bc.beta_l - h * bc.alpha_l
        dr = 2 * bc.beta_r + h * bc.alpha_r
        if dl == 0 or dr == 0:
            raise ValueError("central Robin boundary is singular for this cell width")
        alpha = b / h ** 2
        s0 = (2 * b + a * h) * (2 * bc.beta_l + h * bc.alpha_l) / (2 * h ** 2 * dl)
        s1 = (2 * b - a * h) * (2 * bc.beta_r - h * bc.alpha_r) / (2 * h ** 2 * dr)
        f0 = -(a * h + 2 * b) * bc.g_l / (h * dl)
        f1 = -(a * h - 2 * b) * bc.g_r / (h * dr)
    elif scheme == "exponential":
        if b == 0:
            raise ValueError("exponential scheme needs b > 0; use the upwind scheme")
        if a == 0:
            raise ValueError("exponential scheme needs a != 0; use the central scheme")
        alpha, s0, s1, f0, f1 = _exp_robin(a, b, h, bc)
    else:
        alpha, s0, s1, f0, f1 = _upwind_robin(a, h, bc)
    return {"alpha": alpha, "beta": beta, "s0": s0, "s1": s1, "f0": f0, "f1": f1}


def periodic_coefficients(a: float, b: float, h: float, scheme: str) -> dict[str, float]:
    beta = -a / (2 * h)
    if scheme == "central":
        alpha = b / h ** 2
    elif scheme == "exponential":
        if b == 0:
            raise ValueError("exponential scheme needs b > 0; use the upwind scheme")
        if a == 0:
            raise ValueError("exponential scheme needs a != 0; use the central scheme")
        x = abs(a) * h / b
        alpha = abs(a) * (1 + math.exp(-x)) / (2 * h * -math.expm1(-x))
    else:
        alpha = abs(a) / (2 * h)
    return {"alpha": alpha, "beta": beta, "s0": 0.0, "s1": 0.0}


# ----------------------------------------------------------------------------- matrices

def unified_matrix(n: int, alpha: float, beta: float, s0: float = 0.0, s1: float = 0.0,
                   periodic: bool = False) -> sp.csr_matrix:
    """Sparse matrix of the unified operator form."""
    N = 2 ** n
    up = -(alpha + beta)  # entry (i, i+1)
    lo = -(alpha - beta)  # entry (i+1, i)
    A = sp.diags([np.full(N - 1, lo), np.full(N, 2 * alpha), np.full(N - 1, up)], [-1, 0, 1],
                 shape=(N, N), format="lil", dtype=float)
    if periodic:
        if N == 1:
            raise ValueError("periodic grid needs at least two cells")
        A[N - 1, 0] += up
        A[0, N - 1] += lo
    else:
        A[0, 0] -= s0
        A[N - 1, N - 1] -= s1
    return A.tocsr()


def unified_matrix_mpo(n: int, alpha: float, beta: float, s0: float = 0.0, s1: float = 0.0,
                       periodic: bool = False) -> np.ndarray:
    """The same operator rebuilt from shift/projector tensor products (dense oracle, small n)."""
    sm = sum(blocks.s_minus(n, j) for j in range(1, n + 1))
    A = 2 * alpha * np.eye(2 ** n) - (alpha + beta) * sm - (alpha - beta) * sm.conj().T
    if periodic:
        up = blocks.kron_all([blocks.SIGMA10] * n)
        A = A - (alpha + beta) * up - (alpha - beta) * up.T
    else:
        A = A - s0 * blocks.proj_all(n, 0) - s1 * blocks.proj_all(n, 1)
    return A


def assemble_1d(problem: PdeProblem, p: int = 0) -> OperatorParams:
    a, b, h, n, bc = problem.a[p], problem.b[p], problem.h(p), problem.n[p], problem.bc[p]
    N = 2 ** n
    if isinstance(bc, Periodic):
        co = periodic_coefficients(a, b, h, problem.scheme)
        mat = unified_matrix(n, co["alpha"], co["beta"], periodic=True)
        return OperatorParams("periodic", co["alpha"], co["beta"], 0.0, 0.0, h, n, np.zeros(N), mat)
    co = robin_coefficients(a, b, h, bc, problem.scheme)
    src = np.zeros(N)
    src[0] += co["f0"]
    src[-1] += co["f1"]
    mat = unified_matrix(n, co["alpha"], co["beta"], co["s0"], co["s1"])
    return OperatorParams("robin", co["alpha"], co["beta"], co["s0"], co["s1"], h, n, src, mat)


def kron_sum(mats: Sequence[sp.spmatrix], c: float = 0.0) -> sp.csr_matrix:
    """``sum_p I (x) .. (x) A_p (x) .. (x) I + c I`` with dimension 0 as the leftmost factor."""
    sizes = [m.shape[0] for m in mats]
    total = int(np.prod(sizes))
    out = sp.csr_matrix((total, total))
    for p, m in enumerate(mats):
        left = sp.identity(int(np.prod(sizes[:p])), format="csr")
        right = sp.identity(int(np.prod(sizes[p + 1:])), format="csr")
        out = out + sp.kron(sp.kron(left, m), right, format="csr")
    if c:
        out = out + c * sp.identity(total, format="csr")
    return out.tocsr()


def assemble_multi(problem: PdeProblem) -> tuple[list[OperatorParams], sp.csr_matrix]:
    """Per-dimension parameters and the global matrix (sparse; call ``.toarray()`` when small)."""
    params = [assemble_1d(problem, p) for p in range(problem.d)]
    return params, kron_sum([q.matrix for q in params], problem.c)


def boundary_source(params: Sequence[OperatorParams]) -> np.ndarray:
    """Global boundary-source vector: each dimension's source spread along the others."""
    sizes = [q.N for q in params]
    out = np.zeros(int(np.prod(sizes)))
    for p, q in enumerate(params):
        shape = [1] * len(sizes)
        shape[p] = sizes[p]
        out += np.broadcast_to(q.source.reshape(shape), sizes).ravel()
    return out


def decompose_LH(params: OperatorParams) -> tuple[dict, dict, np.ndarray, np.ndarray]:
    """Hermitian and anti-Hermitian parts ``A = L + iH`` in structured and dense form."""
    A = params.dense_A
    L = (A + A.conj().T) / 2
    H = (A - A.conj().T) / 2j
    L_par = {"alpha": params.alpha, "s0": params.s0, "s1": params.s1, "form": params.form}
    H_par = {"beta": params.beta, "lambda": math.pi / 2, "form": params.form}
    return L_par, H_par, L, H


def structured_LH(params: OperatorParams) -> tuple[np.ndarray, np.ndarray]:
    """``L`` and ``H`` rebuilt from the ladder generators (dense, small n)."""
    n, al, be = params.n, params.alpha, params.beta
    N = 2 ** n
    lad0 = blocks.h1(n, 0.0) + blocks.h2(n, 0.0)
    lad1 = blocks.h1(n, math.pi / 2) + blocks.h2(n, math.pi / 2)
    if params.form == "periodic":
        lad0 = lad0 + blocks.h3(n, 0.0)
        lad1 = lad1 + blocks.h3(n, math.pi / 2)
        L = 2 * al * np.eye(N) - al * lad0
    else:
        L = 2 * al * np.eye(N) - al * lad0 - params.s0 * blocks.proj_all(n, 0) - params.s1 * blocks.proj_all(n, 1)
    return L, be * lad1


# ----------------------------------------------------------------------------- spectra of B

# (mu0, mu1) -> (M_k as a function of k, L_N as a function of N)
TABULATED = {
    (-1, -1): (lambda k: k, lambda N: N),
    (0, -1): (lambda k: 2 * k, lambda N: 2 * N + 1),
    (0, 0): (lambda k: k, lambda N: N + 1),
    (1, -1): (lambda k: 2 * k - 1, lambda N: 2 * N),
    (1, 0): (lambda k: 2 * k - 1, lambda N: 2 * N + 1),
    (1, 1): (lambda k: k - 1, lambda N: N),
}


@dataclass
class SpectralEstimate:
    """Extreme eigenvalues of ``B = S^- + S^+ + mu0 P0 + mu1 P1``.

    ``lambda_min_L`` is in units of ``alpha``: ``lambda_min(L) = alpha * lambda_min_L``.
    """

    lambda_max_B: float
    lambda_min_B: float
    lambda_min_L: float
    regime_max: str
    regime_min: str
    eigenvalues: np.ndarray | None = None

    @property
    def regime(self) -> str:
        return self.regime_max


def matrix_B(mu0: float, mu1: float, N: int, phi: float = 0.0) -> np.ndarray:
    B = np.diag(np.full(N - 1, np.exp(1j * phi)), 1) + np.diag(np.full(N - 1, np.exp(-1j * phi)), -1)
    B[0, 0] += mu0
    B[-1, -1] += mu1
    return B if phi else B.real


def tabulated_eigenvalues(mu0: float, mu1: float, N: int) -> np.ndarray | None:
    key = (mu0, mu1) if (mu0, mu1) in TABULATED else (mu1, mu0)
    if key not in TABULATED:
        return None
    mk, ln = TABULATED[key]
    k = np.arange(1, N + 1)
    return np.sort(2 * np.cos(mk(k) * np.pi / ln(N)))


def lambda2_curve(mu0: float, N: int) -> float:
    """``mu1`` on the curve where ``lambda_max(B) = 2``."""
    return ((N + 1) - N * mu0) / (N - (N - 1) * mu0)


def lambda_minus2_curve(mu0: float, N: int) -> float:
    return -((N + 1) + N * mu0) / (N + (N - 1) * mu0)


def _regime_max(mu0: float, mu1: float, N: int) -> str:
    # 2I - B is positive definite iff all leading minors (k+1) - k mu0 (k < N) and the
    # full determinant are positive; the determinant test is the curve comparison.
    if mu0 >= N / (N - 1):
        return "hyperbolic"
    det = (N + 1) - N * (mu0 + mu1) + (N - 1) * mu0 * mu1
    if abs(det) <= 1e-12 * (N + 1):
        return "polynomial"
    return "hyperbolic" if mu1 > lambda2_curve(mu0, N) else "trigonometric"


def _regime_min(mu0: float, mu1: float, N: int) -> str:
    if mu0 <= -N / (N - 1):
        return "hyperbolic"
    det = (N + 1) + N * (mu0 + mu1) + (N - 1) * mu0 * mu1
    if abs(det) <= 1e-12 * (N + 1):
        return "polynomial"
    return "hyperbolic" if mu1 < lambda_minus2_curve(mu0, N) else "trigonometric"


def _inv(x: float) -> float:
    return math.inf if x == 0 else 1.0 / x


def perturbative_max(mu0: float, mu1: float, N: int) -> float:
    return 2 * math.cos(math.pi / (N - 1 + _inv(1 - mu0) + _inv(1 - mu1)))


def perturbative_min(mu0: float, mu1: float, N: int) -> float:
    return -2 * math.cos(math.pi / (N - 1 + _inv(1 + mu0) + _inv(1 + mu1)))


def eig_B(mu0: float, mu1: float, N: int) -> SpectralEstimate:
    """Closed-form or asymptotic extreme eigenvalues of ``B`` by regime."""
    if N < 2:
        raise ValueError("N must be at least 2")
    rmax, rmin = _regime_max(mu0, mu1, N), _regime_min(mu0, mu1, N)
    exact = tabulated_eigenvalues(mu0, mu1, N)
    if exact is not None:
        lmax, lmin = float(exact[-1]), float(exact[0])
    else:
        if rmax == "hyperbolic":
            mu = max(mu0, mu1)
            lmax = mu + 1 / mu
        elif rmax == "polynomial":
            lmax = 2.0
        else:
            lmax = perturbative_max(mu0, mu1, N)
        if rmin == "hyperbolic":
            nu = min(mu0, mu1)
            lmin = nu + 1 / nu
        elif rmin == "polynomial":
            lmin = -2.0
        else:
            lmin = perturbative_min(mu0, mu1, N)
    return SpectralEstimate(lmax, lmin, 2 - lmax, rmax, rmin, exact)


def lambda_min_L(params: OperatorParams) -> tuple[float, float | None]:
    """Closed-form/asymptotic ``lambda_min(L)`` and, for ``N <= 4096``, the dense value."""
    if params.form == "periodic":
        closed = 0.0
    elif params.alpha == 0:
        closed = -max(params.s0, params.s1, 0.0)
    else:
        closed = params.alpha * eig_B(params.mu0, params.mu1, params.N).lambda_min_L
    dense = None
    if params.N <= DENSE_LIMIT:
        A = params.dense_A
        dense = float(np.linalg.eigvalsh((A + A.T) / 2)[0])
    return closed, dense
