"""Operator-space norms of sums a_i (x) G_i over a truncated deformed Fock scene."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .certificate import Certificate, residual
from .fock import FockError, FockScene, field_operator, vacuum_expectation

logger = logging.getLogger(__name__)

POWER_TOL = 1e-10
POWER_MAXITER = 20_000
TENSOR_BUDGET = 4_000_000


@dataclass
class CoefficientTuple:
    mats: list[np.ndarray]

    def __post_init__(self):
        self.mats = [np.asarray(a, dtype=complex) for a in self.mats]
        if not self.mats:
            raise ValueError("empty coefficient tuple")
        shape = self.mats[0].shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ValueError(f"coefficients must be square, got {shape}")
        if any(a.shape != shape for a in self.mats):
            raise ValueError("coefficients must share one shape")

    @property
    def aux_dim(self) -> int:
        return self.mats[0].shape[0]

    def __len__(self):
        return len(self.mats)

    @classmethod
    def gaussian(cls, rng: np.random.Generator, n: int, aux_dim: int) -> "CoefficientTuple":
        """Independent standard complex Gaussian entries."""
        shape = (n, aux_dim, aux_dim)
        z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
        return cls(list(z))


@dataclass
class SandwichReport:
    lower: float
    middle: float
    upper: float
    seed: int
    trial: int
    tol: float
    caveat: str = "middle is the norm on a truncated Fock space, a lower bound of the true norm"

    @property
    def passed(self) -> bool:
        return self.lower <= self.middle + self.tol and self.middle <= self.upper + self.tol

    def certificates(self) -> list[Certificate]:
        ctx = dict(seed=self.seed, trial=self.trial)
        return [
            residual(f"trial {self.trial}: max norm <= |sum a_i (x) G_i|",
                     self.lower - self.middle, self.tol, **ctx),
            residual(f"trial {self.trial}: |sum a_i (x) G_i| <= 2/sqrt(1-q) max norm",
                     self.middle - self.upper, self.tol, **ctx),
        ]


def max_norm(t: CoefficientTuple) -> float:
    row = sum(a @ a.conj().T for a in t.mats)
    col = sum(a.conj().T @ a for a in t.mats)
    return float(np.sqrt(max(np.linalg.norm(row, 2), np.linalg.norm(col, 2))))


def power_norm(matvec: Callable[[np.ndarray], np.ndarray],
               rmatvec: Callable[[np.ndarray], np.ndarray], dim: int, seed: int = 0,
               tol: float = POWER_TOL, maxiter: int = POWER_MAXITER) -> float:
    """Largest singular value of X by power iteration on X* X from a seeded start.

    Stops once the Rayleigh quotient moves by less than `tol` (relative) and the
    eigen-residual |X*X x - lam x| is below sqrt(tol) * lam.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    x /= np.linalg.norm(x)
    est = 0.0
    for it in range(maxiter):
        y = rmatvec(matvec(x))
        lam = float(np.vdot(x, y).real)
        if lam <= 0:
            return 0.0
        res = np.linalg.norm(y - lam * x)
        x = y / np.linalg.norm(y)
        if it and abs(lam - est) <= tol * lam and res <= np.sqrt(tol) * lam:
            est = lam
            break
        est = lam
    else:
        logger.warning("power iteration hit the cap of %d iterations", maxiter)
    return float(np.sqrt(max(est, 0.0)))


def operator_norm(matvec: Callable[[np.ndarray], np.ndarray],
                  rmatvec: Callable[[np.ndarray], np.ndarray], dim: int, seed: int = 0,
                  tol: float = POWER_TOL) -> float:
    """Largest singular value of X via Lanczos on X* X, matrix-free, seeded start."""
    if dim <= 2:
        cols = np.eye(dim, dtype=complex)
        dense = np.stack([rmatvec(matvec(c)) for c in cols], axis=1)
        return float(np.sqrt(max(np.linalg.eigvalsh(dense)[-1], 0.0)))
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    op = LinearOperator((dim, dim), matvec=lambda v: rmatvec(matvec(v)), dtype=complex)
    lam = eigsh(op, k=1, which="LA", v0=v0, tol=tol, maxiter=POWER_MAXITER,
                return_eigenvectors=False)[0]
    return float(np.sqrt(max(lam, 0.0)))


def t_geometry(scene: FockScene, ops: list[np.ndarray]) -> list[np.ndarray]:
    """Conjugate by the Gram square root so plain norms are T-norms."""
    return [scene.gram_sqrt @ g @ scene.gram_inv_sqrt for g in ops]


def fields(scene: FockScene, n: int) -> list[np.ndarray]:
    if n > scene.d:
        raise FockError(f"{n} coefficients but only {scene.d} fields")
    return t_geometry(scene, [field_operator(scene, i).matrix for i in range(n)])


def embedded_norm(t: CoefficientTuple, scene: FockScene, seed: int = 0) -> float:
    """|sum a_i (x) G_i| on aux (x) truncated Fock space, in the twisted geometry."""
    gs = fields(scene, len(t))
    k, m = t.aux_dim, scene.dim
    if k * m > TENSOR_BUDGET:
        raise MemoryError(f"combined dimension {k * m} exceeds {TENSOR_BUDGET}")
    if all(not np.any(a) for a in t.mats):
        return 0.0

    def mv(v):
        v = v.reshape(k, m)
        return sum(a @ v @ g.T for a, g in zip(t.mats, gs)).ravel()

    def rmv(v):
        v = v.reshape(k, m)
        return sum(a.conj().T @ v @ g.conj() for a, g in zip(t.mats, gs)).ravel()

    return operator_norm(mv, rmv, k * m, seed)


def dense_embedded_norm(t: CoefficientTuple, scene: FockScene) -> float:
    gs = fields(scene, len(t))
    x = sum(np.kron(a, g) for a, g in zip(t.mats, gs))
    return float(np.linalg.norm(x, 2))


def sandwich_check(seed: int, trials: int, aux_dim: int, scene: FockScene,
                   n: int | None = None) -> list[SandwichReport]:
    """Random Gaussian tuples checked against max-norm <= middle <= 2/sqrt(1-q) max-norm."""
    q = scene.tensor.norm_bound
    if q >= 1:
        raise FockError("the sandwich needs |T| < 1")
    n = scene.d if n is None else n
    reports = []
    for k in range(trials):
        rng = np.random.default_rng([seed, k])
        t = CoefficientTuple.gaussian(rng, n, aux_dim)
        lower = max_norm(t)
        upper = 2.0 / np.sqrt(1.0 - q) * lower
        middle = embedded_norm(t, scene, seed=k)
        reports.append(SandwichReport(lower, middle, upper, seed, k, 1e-8 * (1.0 + upper)))
    return reports


@dataclass
class InjectivityReport:
    m: int
    norm: float
    bound: float
    trace_side: float
    q: float
    threshold_m: float = field(init=False)

    def __post_init__(self):
        self.threshold_m = 16.0 / (1.0 - self.q) ** 2


def tensor_square_norm(scene: FockScene, m: int, seed: int = 0) -> float:
    """|sum_{i<=m} G_i (x) conj(G_i)| on the truncated scene squared, never formed densely."""
    gs = fields(scene, m)
    dim = scene.dim
    if dim * dim > TENSOR_BUDGET:
        raise MemoryError(f"tensor-square dimension {dim * dim} exceeds {TENSOR_BUDGET}")
    bars = [g.conj() for g in gs]

    def mv(v):
        v = v.reshape(dim, dim)
        return sum(g @ v @ b.T for g, b in zip(gs, bars)).ravel()

    def rmv(v):
        v = v.reshape(dim, dim)
        return sum(g.conj().T @ v @ b.conj() for g, b in zip(gs, bars)).ravel()

    return operator_norm(mv, rmv, dim * dim, seed)


def injectivity_witness(m: int, scene: FockScene, tol: float = 1e-6,
                        seed: int = 0) -> tuple[InjectivityReport, list[Certificate]]:
    """The two sides of the non-injectivity argument for sum G_i (x) conj(G_i)."""
    q = scene.tensor.norm_bound
    if q >= 1:
        raise FockError("the estimate needs |T| < 1")
    if scene.N < 1:
        raise FockError("need a level cap of at least 1")
    norm = tensor_square_norm(scene, m, seed)
    trace = sum(vacuum_expectation(scene, (i, i)) for i in range(1, m + 1))
    bound = 4.0 / (1.0 - q) * np.sqrt(m)
    rep = InjectivityReport(m, norm, bound, float(trace.real), q)
    certs = [
        residual(f"|sum G_i (x) conj G_i| <= 4 sqrt(m)/(1-q), m={m}", norm, bound + tol,
                 q=q, N=scene.N, contradiction_needs_m_above=rep.threshold_m),
        residual(f"eps(sum G_i G_i) = m, m={m}", abs(trace - m), 1e-12, trace=complex(trace)),
    ]
    return rep, certs
