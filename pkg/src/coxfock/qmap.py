"""Operator-valued quasi-multiplicative maps on a finite Coxeter group.

Given Hermitian contractions T_1..T_n obeying the braid relations of a Coxeter
matrix, phi(w) is the product of the T's along any reduced word of w. This
module builds phi, the sums P(A) over subsets of the group, and the
certificates for positivity and complete positivity of phi.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .certificate import Certificate, lower_bound, residual
from .coxeter import CoxeterSystem, validate_matrix

PSD_TOL = 1e-8
CP_MAX_ROWS = 12_000


class FamilyError(ValueError):
    pass


def validation_tol(norm: float) -> float:
    return 1e-9 * (1.0 + norm)


def opnorm(a: np.ndarray) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def alternating_product(a: np.ndarray, b: np.ndarray, k: int) -> np.ndarray:
    """a b a b ... with k factors."""
    out = np.eye(len(a), dtype=np.result_type(a, b))
    for j in range(k):
        out = out @ (a if j % 2 == 0 else b)
    return out


@dataclass
class OperatorFamily:
    """Matrices T_1..T_n on a common space, one per Coxeter generator."""

    ops: list[np.ndarray]
    cox: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        self.cox = validate_matrix(self.cox)
        self.ops = [np.asarray(t, dtype=complex) for t in self.ops]
        if len(self.ops) != len(self.cox):
            raise FamilyError(f"{len(self.ops)} operators for {len(self.cox)} generators")
        if not self.ops:
            raise FamilyError("empty family")
        self.dim = self.ops[0].shape[0]
        for t in self.ops:
            if t.shape != (self.dim, self.dim):
                raise FamilyError(f"operator of shape {t.shape}, expected {(self.dim, self.dim)}")

    @classmethod
    def scalar(cls, cox, values: float | Sequence[float]) -> "OperatorFamily":
        n = len(np.asarray(cox))
        values = [values] * n if np.isscalar(values) else list(values)
        return cls([np.array([[v]]) for v in values], cox)

    def scaled(self, t: float) -> "OperatorFamily":
        return OperatorFamily([t * a for a in self.ops], self.cox)

    def norms(self) -> list[float]:
        return [opnorm(t) for t in self.ops]


def validate_family(fam: OperatorFamily) -> list[Certificate]:
    certs = []
    norms = fam.norms()
    for i, (t, nrm) in enumerate(zip(fam.ops, norms), start=1):
        tol = validation_tol(nrm)
        certs.append(residual(f"hermitian T{i}", opnorm(t - t.conj().T), tol))
        certs.append(residual(f"contraction T{i}", nrm, 1.0 + tol, strict=nrm < 1.0 - tol))
    tol = validation_tol(max(norms))
    for i, j in itertools.combinations(range(len(fam.ops)), 2):
        k = int(fam.cox[i, j])
        a, b = fam.ops[i], fam.ops[j]
        res = opnorm(alternating_product(a, b, k) - alternating_product(b, a, k))
        certs.append(residual(f"braid T{i + 1},T{j + 1} (m={k})", res, tol))
    return certs


def _check_family(sys: CoxeterSystem, fam: OperatorFamily):
    if not np.array_equal(sys.matrix, fam.cox):
        raise FamilyError("family and group have different Coxeter matrices")


def phi(sys: CoxeterSystem, fam: OperatorFamily, a) -> np.ndarray:
    _check_family(sys, fam)
    return word_product(fam, sys.element(a).word)


def word_product(fam: OperatorFamily, word: Sequence[int]) -> np.ndarray:
    out = np.eye(fam.dim, dtype=complex)
    for s in word:
        out = out @ fam.ops[s - 1]
    return out


def phi_table(sys: CoxeterSystem, fam: OperatorFamily) -> np.ndarray:
    """phi(w) for every element, indexed by element id."""
    _check_family(sys, fam)
    table = np.empty((sys.order, fam.dim, fam.dim), dtype=complex)
    table[0] = np.eye(fam.dim)
    for g in range(1, sys.order):
        p, s = sys.parent(g)
        table[g] = table[p] @ fam.ops[s - 1]
    return table


def tree_sum(mats) -> np.ndarray:
    """Pairwise sum in the given order; fixed association for reproducible rounding."""
    items = list(mats)
    if not items:
        raise ValueError("empty sum")
    while len(items) > 1:
        items = [items[k] + items[k + 1] if k + 1 < len(items) else items[k]
                 for k in range(0, len(items), 2)]
    return items[0]


def p_of(sys: CoxeterSystem, fam: OperatorFamily, subset=None, table=None) -> np.ndarray:
    """P(A) = sum of phi over A (default: the whole group)."""
    if table is None:
        table = phi_table(sys, fam)
    ids = range(sys.order) if subset is None else sorted({int(sys._id(a)) for a in subset})
    ids = list(ids)
    if not ids:
        return np.zeros((fam.dim, fam.dim), dtype=complex)
    return tree_sum(table[g] for g in ids)


def factorization_check(sys: CoxeterSystem, fam: OperatorFamily, J, tol=None,
                        table=None) -> Certificate:
    """P(W) against P(D_J) P(W_J)."""
    if table is None:
        table = phi_table(sys, fam)
    J = frozenset(J)
    full = p_of(sys, fam, table=table)
    _, embed, _ = sys.parabolic(J)
    prod = p_of(sys, fam, sys.coset_minima(J), table) @ p_of(sys, fam, embed, table)
    if tol is None:
        tol = 1e-10 * max(1.0, opnorm(full))
    return residual(f"P(W) = P(D_J)P(W_J), J={sorted(J)}", opnorm(full - prod), tol,
                    J=sorted(J))


def alternating_sum_check(sys: CoxeterSystem, fam: OperatorFamily, tol=None,
                          table=None) -> Certificate:
    """Alternating sum over J of P(D_J) against phi of the longest element."""
    if table is None:
        table = phi_table(sys, fam)
    total = np.zeros((fam.dim, fam.dim), dtype=complex)
    gens = sorted(sys.generators)
    for k in range(len(gens) + 1):
        for J in itertools.combinations(gens, k):
            total = total + (-1) ** k * p_of(sys, fam, sys.coset_minima(J), table)
    res = opnorm(total - table[sys.sigma0])
    if tol is None:
        tol = 1e-10 * max(1.0, opnorm(p_of(sys, fam, table=table)))
    return residual("alternating sum of P(D_J) = phi(longest)", res, tol)


def min_eig(h: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(h)[0])


def positivity_certificate(P: np.ndarray, psd_tol: float = PSD_TOL, strict_contractions=False,
                           label: str = "P >= 0") -> Certificate:
    """Minimal eigenvalue of a Hermitian matrix against -psd_tol * max(1, |P|).

    ``context['strict']`` records strict positivity, which is only claimed when
    the generating family consists of strict contractions.
    """
    P = np.asarray(P)
    nrm = opnorm(P)
    if opnorm(P - P.conj().T) > validation_tol(nrm):
        raise FamilyError("positivity certificate needs a Hermitian matrix")
    m0 = min_eig((P + P.conj().T) / 2)
    return lower_bound(label, m0, -psd_tol * max(1.0, nrm),
                       strict=bool(strict_contractions and m0 > psd_tol), norm=nrm)


def gram_matrix(sys: CoxeterSystem, table: np.ndarray) -> np.ndarray:
    """Block matrix with (rho, sigma) block phi(rho^-1 sigma)."""
    d = table.shape[1]
    rows = sys.order * d
    if rows > CP_MAX_ROWS:
        raise MemoryError(f"block Gram of {rows} rows exceeds the limit of {CP_MAX_ROWS}")
    mult = sys.multiplication_table()
    idx = mult[sys.inverse_table()]
    blocks = table[idx]
    return blocks.transpose(0, 2, 1, 3).reshape(rows, rows)


def cp_gram_certificate(sys: CoxeterSystem, fam_or_table, psd_tol: float = PSD_TOL,
                        label: str = "block Gram [phi(r^-1 s)] >= 0") -> Certificate:
    if isinstance(fam_or_table, OperatorFamily):
        table = phi_table(sys, fam_or_table)
    else:
        table = np.asarray(fam_or_table)
    K = gram_matrix(sys, table)
    nrm = opnorm(K)
    m0 = min_eig((K + K.conj().T) / 2)
    return lower_bound(label, m0, -psd_tol * max(1.0, nrm), norm=nrm, rows=len(K))


def scaling_curve(sys: CoxeterSystem, fam: OperatorFamily, ts) -> list[float]:
    """Minimal eigenvalue of P(W) for the family scaled by each t."""
    return [min_eig(p_of(sys, fam.scaled(t))) for t in ts]


# Block length

def validate_blocklength_family(fam: OperatorFamily, tol: float | None = None) -> list[Certificate]:
    certs = []
    for i, t in enumerate(fam.ops, start=1):
        eps = validation_tol(opnorm(t)) if tol is None else tol
        certs.append(residual(f"hermitian T{i}", opnorm(t - t.conj().T), eps))
        ev = np.linalg.eigvalsh((t + t.conj().T) / 2)
        certs.append(lower_bound(f"T{i} >= 0", ev[0], -eps))
        certs.append(residual(f"T{i} <= 1", ev[-1], 1.0 + eps))
    for i, j in itertools.combinations(range(len(fam.ops)), 2):
        a, b = fam.ops[i], fam.ops[j]
        eps = validation_tol(max(opnorm(a), opnorm(b))) if tol is None else tol
        certs.append(residual(f"[T{i + 1},T{j + 1}] = 0", opnorm(a @ b - b @ a), eps))
    return certs


def blocklength_phi(sys: CoxeterSystem, fam: OperatorFamily, a) -> np.ndarray:
    """Product of T_i over the generators i appearing in a reduced word of a."""
    _check_family(sys, fam)
    out = np.eye(fam.dim, dtype=complex)
    for s in sorted(sys.block_set(a)):
        out = out @ fam.ops[s - 1]
    return out


def blocklength_table(sys: CoxeterSystem, fam: OperatorFamily) -> np.ndarray:
    return np.stack([blocklength_phi(sys, fam, g) for g in range(sys.order)])


def blocklength_cp(sys: CoxeterSystem, fam: OperatorFamily, check: bool = True) -> Certificate:
    if check:
        bad = [c.label for c in validate_blocklength_family(fam) if not c.passed]
        if bad:
            raise FamilyError(f"block-length family must be commuting with 0 <= T <= 1: {bad}")
    return cp_gram_certificate(sys, blocklength_table(sys, fam),
                               label="block-length Gram >= 0")


def scalar_blocklength_min_eig(sys: CoxeterSystem, q: float) -> float:
    bl = np.array([sys.block_length(g) for g in range(sys.order)])
    vals = np.array([q ** k if k else 1.0 for k in range(sys.rank + 1)])
    table = vals[bl][:, None, None]
    return min_eig(gram_matrix(sys, table))


def blocklength_threshold(sys: CoxeterSystem, lo: float = -1.0, hi: float = 0.0,
                          tol: float = 1e-10, psd_tol: float = PSD_TOL) -> float:
    """Bisect for the most negative q where the kernel q^{block length} stays PSD.

    Requires the kernel to be PSD at `hi` and not at `lo`.
    """
    def ok(q):
        return scalar_blocklength_min_eig(sys, q) >= -psd_tol

    if not ok(hi) or ok(lo):
        raise ValueError(f"threshold not bracketed by [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
