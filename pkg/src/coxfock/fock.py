"""Truncated Fock space deformed by a braided self-adjoint contraction T on H (x) H.

Level n is H^{(x)n} with the twisted inner product <x, P^(n) y>, where P^(n)
is the sum of phi over the symmetric group S_n for phi(pi_i) = T acting on
tensor slots (i, i+1). Annihilation is l(f) R^(n), creation is plain
prepending. When P^(n) has a kernel it is divided out: every level carries an
orthonormal basis B_n of the range of P^(n) and all operators are expressed in
those quotient coordinates (B_n is the identity when P^(n) is definite).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .certificate import Certificate, residual
from .coxeter import build_system, coxeter_matrix
from .qmap import OperatorFamily, opnorm, p_of, validation_tol

KERNEL_CUTOFF = 1e-10
LEVEL_BUDGET = 200_000


class FockError(ValueError):
    pass


@dataclass(frozen=True)
class QSpec:
    """Coefficients q_ij of the relations d_i d_j* - q_ij d_j* d_i = delta_ij."""

    q: np.ndarray

    def __post_init__(self):
        q = np.atleast_2d(np.asarray(self.q, dtype=complex))
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise FockError(f"q must be a square matrix, got shape {q.shape}")
        tol = 1e-12 * (1 + np.abs(q).max())
        if np.abs(q - q.conj().T).max() > tol:
            raise FockError("q must satisfy conj(q_ij) = q_ji (Hermitian symmetry)")
        if np.abs(q).max() > 1 + tol:
            raise FockError(f"max |q_ij| = {np.abs(q).max():.6g} exceeds 1")
        object.__setattr__(self, "q", q)

    @property
    def d(self) -> int:
        return len(self.q)

    @property
    def bound(self) -> float:
        return float(np.abs(self.q).max())


@dataclass(frozen=True, eq=False)
class DeformationTensor:
    """T on H (x) H with T e_a(x)e_b = sum t^{dc}_{ab} e_d(x)e_c, i.e. t[(d,c),(a,b)]."""

    t: np.ndarray
    qspec: QSpec | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=complex)
        d = int(round(np.sqrt(t.shape[0]))) if t.ndim == 2 else 0
        if t.ndim != 2 or t.shape[0] != t.shape[1] or d * d != t.shape[0]:
            raise FockError(f"tensor must be a square d^2 x d^2 matrix, got shape {t.shape}")
        object.__setattr__(self, "t", t)

    @property
    def d(self) -> int:
        return int(round(np.sqrt(self.t.shape[0])))

    @cached_property
    def norm_bound(self) -> float:
        return opnorm(self.t)

    def coeff(self, d: int, c: int, a: int, b: int) -> complex:
        """t^{dc}_{ab}, indices from 0."""
        n = self.d
        return self.t[d * n + c, a * n + b]


def from_q(spec: QSpec | np.ndarray) -> DeformationTensor:
    """T = Q o flip: T e_a (x) e_b = q_ba e_b (x) e_a."""
    if not isinstance(spec, QSpec):
        spec = QSpec(spec)
    d = spec.d
    t = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            t[b * d + a, a * d + b] = spec.q[b, a]
    return DeformationTensor(t, spec)


def braid_residual(tensor: DeformationTensor) -> float:
    d = tensor.d
    one = np.eye(d)
    left = np.kron(tensor.t, one)
    right = np.kron(one, tensor.t)
    return opnorm(right @ left @ right - left @ right @ left)


def validate(tensor: DeformationTensor) -> list[Certificate]:
    t = tensor.t
    nrm = tensor.norm_bound
    tol = validation_tol(nrm)
    return [
        residual("tensor hermitian", opnorm(t - t.conj().T), tol),
        residual("tensor contraction", nrm, 1.0 + tol),
        residual("braid relation (YBE)", braid_residual(tensor), tol),
    ]


def amplify(tensor: DeformationTensor, i: int, n: int) -> np.ndarray:
    """T acting on slots (i, i+1) of H^{(x)n}, slots numbered from 1."""
    if not 1 <= i <= n - 1:
        raise FockError(f"slot {i} invalid for {n} tensor factors")
    d = tensor.d
    return np.kron(np.kron(np.eye(d ** (i - 1)), tensor.t), np.eye(d ** (n - i - 1)))


def family(tensor: DeformationTensor, n: int) -> OperatorFamily:
    """T_1..T_{n-1} on H^{(x)n} as a family over S_n."""
    if n < 2:
        raise FockError("need at least two tensor factors")
    return OperatorFamily([amplify(tensor, i, n) for i in range(1, n)],
                          coxeter_matrix(f"A{n - 1}"))


def _check_budget(d: int, n: int):
    if d ** n > LEVEL_BUDGET:
        raise FockError(f"level dimension {d}^{n} exceeds budget {LEVEL_BUDGET}")


def build_rn(tensor: DeformationTensor, n: int) -> np.ndarray:
    """R^(n) = 1 + T_1 + T_1 T_2 + ... + T_1...T_{n-1} on H^{(x)n}."""
    d = tensor.d
    _check_budget(d, n)
    out = np.eye(d ** n, dtype=complex)
    term = np.eye(d ** n, dtype=complex)
    for i in range(1, n):
        term = term @ amplify(tensor, i, n)
        out = out + term
    return out


def build_pn(tensor: DeformationTensor, n: int) -> np.ndarray:
    """P^(n) as the sum of phi over all of S_n."""
    d = tensor.d
    _check_budget(d, n)
    if n <= 1:
        return np.eye(d ** n, dtype=complex)
    fam = family(tensor, n)
    return p_of(build_system(fam.cox), fam)


def build_pn_recursive(tensor: DeformationTensor, n_max: int) -> list[np.ndarray]:
    """P^(0..n_max) from P^(n+1) = (1 (x) P^(n)) R^(n+1)."""
    d = tensor.d
    out = [np.eye(1, dtype=complex)]
    for n in range(1, n_max + 1):
        _check_budget(d, n)
        p = np.kron(np.eye(d), out[-1]) @ build_rn(tensor, n)
        out.append((p + p.conj().T) / 2)
    return out


def free_creation(f: np.ndarray, n: int) -> np.ndarray:
    """l*(f): H^{(x)n} -> H^{(x)(n+1)}, x -> f (x) x."""
    f = np.asarray(f, dtype=complex)
    return np.kron(f[:, None], np.eye(len(f) ** n))


def free_annihilation(f: np.ndarray, n: int) -> np.ndarray:
    """l(f): H^{(x)n} -> H^{(x)(n-1)}, contracting the first slot with f (antilinear in f)."""
    f = np.asarray(f, dtype=complex)
    return np.kron(f.conj()[None, :], np.eye(len(f) ** (n - 1)))


def q_annihilation_block(q: np.ndarray, i: int, n: int) -> np.ndarray:
    """Annihilation d(e_i) on level n, written out term by term for T = Q o flip.

    d(e_i) e_{j1}..e_{jn} = sum_k q_{jk,j(k-1)} ... q_{jk,j1} delta_{i,jk} (e_{jk} removed).
    Independent of R^(n); used to cross-check it.
    """
    q = np.asarray(q)
    d = len(q)
    out = np.zeros((d ** (n - 1), d ** n), dtype=complex)
    for col, idx in enumerate(itertools.product(range(d), repeat=n)):
        for k in range(n):
            if idx[k] != i:
                continue
            coeff = 1.0 + 0j
            for j in range(k):
                coeff *= q[idx[k], idx[j]]
            rest = idx[:k] + idx[k + 1:]
            row = 0
            for r in rest:
                row = row * d + r
            out[row, col] += coeff
    return out


def _psd_sqrt(g: np.ndarray, inverse: bool = False) -> np.ndarray:
    w, v = np.linalg.eigh((g + g.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    if inverse:
        if np.any(w <= 0):
            raise FockError("singular Gram block; use quotient coordinates")
        w = 1.0 / w
    return (v * np.sqrt(w)) @ v.conj().T


@dataclass(eq=False)
class FockScene:
    """Levels 0..N of the deformed Fock space, with Gram blocks and quotient bases."""

    tensor: DeformationTensor
    N: int
    raw_gram: list[np.ndarray]
    basis: list[np.ndarray]
    gram: list[np.ndarray]
    rn: list[np.ndarray] = field(repr=False)

    @property
    def d(self) -> int:
        return self.tensor.d

    @property
    def level_dims(self) -> list[int]:
        return [self.d ** n for n in range(self.N + 1)]

    @property
    def quotient_dims(self) -> list[int]:
        return [b.shape[1] for b in self.basis]

    @property
    def has_kernel(self) -> bool:
        return any(q < r for q, r in zip(self.quotient_dims, self.level_dims))

    @cached_property
    def offsets(self) -> list[int]:
        return [0, *np.cumsum(self.quotient_dims).tolist()]

    @cached_property
    def raw_offsets(self) -> list[int]:
        return [0, *np.cumsum(self.level_dims).tolist()]

    @property
    def dim(self) -> int:
        return self.offsets[-1]

    def level_slice(self, n: int, raw: bool = False) -> slice:
        off = self.raw_offsets if raw else self.offsets
        return slice(off[n], off[n + 1])

    def levels_slice(self, lo: int, hi: int, raw: bool = False) -> slice:
        """Levels lo..hi inclusive."""
        off = self.raw_offsets if raw else self.offsets
        return slice(off[lo], off[hi + 1])

    @cached_property
    def gram_dense(self) -> np.ndarray:
        return _block_diag(self.gram)

    @cached_property
    def gram_sqrt(self) -> np.ndarray:
        return _block_diag([_psd_sqrt(g) for g in self.gram])

    @cached_property
    def gram_inv_sqrt(self) -> np.ndarray:
        return _block_diag([_psd_sqrt(g, inverse=True) for g in self.gram])

    @property
    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def truncate(self, N: int) -> "FockScene":
        if not 0 <= N <= self.N:
            raise FockError(f"cannot truncate a cap-{self.N} scene to {N}")
        k = N + 1
        return FockScene(self.tensor, N, self.raw_gram[:k], self.basis[:k], self.gram[:k],
                         self.rn[:k])


def _block_diag(blocks) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((size, cols), dtype=complex)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def build_scene(tensor: DeformationTensor, N: int, cutoff: float = KERNEL_CUTOFF) -> FockScene:
    if N < 0:
        raise FockError("level cap must be non-negative")
    d = tensor.d
    if sum(d ** n for n in range(N + 1)) > LEVEL_BUDGET:
        raise FockError(f"total dimension of levels 0..{N} exceeds budget {LEVEL_BUDGET}")
    raw = build_pn_recursive(tensor, N)
    basis, gram = [], []
    for p in raw:
        w, v = np.linalg.eigh(p)
        keep = w > cutoff * max(w[-1], 0.0)
        if keep.all():
            b = np.eye(len(p), dtype=complex)
            g = p
        else:
            b = v[:, keep]
            g = np.diag(w[keep]).astype(complex)
        basis.append(b)
        gram.append(g)
    rn = [build_rn(tensor, n) for n in range(N + 1)]
    return FockScene(tensor, N, raw, basis, gram, rn)


@dataclass(eq=False)
class FockOperator:
    """Operator on the truncated scene, as a dense matrix in quotient coordinates."""

    scene: FockScene
    matrix: np.ndarray

    def block(self, to: int, frm: int) -> np.ndarray:
        return self.matrix[self.scene.level_slice(to), self.scene.level_slice(frm)]

    @property
    def blocks(self) -> dict[tuple[int, int], np.ndarray]:
        n = self.scene.N
        out = {}
        for to, frm in itertools.product(range(n + 1), repeat=2):
            b = self.block(to, frm)
            if b.size and np.any(b):
                out[to, frm] = b
        return out

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.scene, self.matrix @ other.matrix)

    def __add__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.scene, self.matrix + other.matrix)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.scene, self.matrix - other.matrix)

    def __mul__(self, c) -> "FockOperator":
        return FockOperator(self.scene, c * self.matrix)

    __rmul__ = __mul__

    def t_adjoint(self) -> "FockOperator":
        s = self.scene
        ginv = s.gram_inv_sqrt @ s.gram_inv_sqrt
        return FockOperator(s, ginv @ self.matrix.conj().T @ s.gram_dense)


def _assemble(scene: FockScene, raw_blocks: dict[tuple[int, int], np.ndarray],
              raw: bool = False) -> np.ndarray:
    size = scene.raw_offsets[-1] if raw else scene.dim
    out = np.zeros((size, size), dtype=complex)
    for (to, frm), blk in raw_blocks.items():
        if not raw:
            blk = scene.basis[to].conj().T @ blk @ scene.basis[frm]
        out[scene.level_slice(to, raw), scene.level_slice(frm, raw)] = blk
    return out


def _vector(scene: FockScene, f) -> np.ndarray:
    f = np.asarray(f, dtype=complex)
    if f.shape != (scene.d,):
        raise FockError(f"vector of shape {f.shape} does not live in H of dimension {scene.d}")
    return f


def creation_blocks(scene: FockScene, f) -> dict:
    f = _vector(scene, f)
    return {(n + 1, n): free_creation(f, n) for n in range(scene.N)}


def annihilation_blocks(scene: FockScene, f) -> dict:
    f = _vector(scene, f)
    return {(n - 1, n): free_annihilation(f, n) @ scene.rn[n] for n in range(1, scene.N + 1)}


def creation(scene: FockScene, f, raw: bool = False) -> FockOperator:
    """d*(f) = l*(f); the top level maps to zero."""
    return FockOperator(scene, _assemble(scene, creation_blocks(scene, f), raw))


def annihilation(scene: FockScene, f, raw: bool = False) -> FockOperator:
    """d(f) = l(f) R^(n) on level n."""
    return FockOperator(scene, _assemble(scene, annihilation_blocks(scene, f), raw))


def basis_vector(d: int, i: int) -> np.ndarray:
    e = np.zeros(d, dtype=complex)
    e[i] = 1.0
    return e


def field_operator(scene: FockScene, i: int, raw: bool = False) -> FockOperator:
    """G_i = d_i + d_i* for the basis vector e_i (i from 0)."""
    e = basis_vector(scene.d, i)
    return annihilation(scene, e, raw) + creation(scene, e, raw)


def r_operator(scene: FockScene) -> FockOperator:
    return FockOperator(scene, _assemble(scene, {(n, n): scene.rn[n] for n in range(scene.N + 1)}))


def t_norm(scene: FockScene, X: FockOperator | np.ndarray) -> float:
    """Operator norm in the twisted inner product: |G^{1/2} X G^{-1/2}|."""
    m = X.matrix if isinstance(X, FockOperator) else np.asarray(X)
    return opnorm(scene.gram_sqrt @ m @ scene.gram_inv_sqrt)


def adjointness_residual(scene: FockScene, f, tol: float = 1e-10) -> Certificate:
    """max_n |Gram_{n+1} C_n - A_{n+1}^H Gram_n| over n < N."""
    c = creation(scene, f)
    a = annihilation(scene, f)
    worst = 0.0
    for n in range(scene.N):
        lhs = scene.gram[n + 1] @ c.block(n + 1, n)
        rhs = a.block(n, n + 1).conj().T @ scene.gram[n]
        worst = max(worst, opnorm(lhs - rhs))
    return residual("<d*(f)x, y>_T = <x, d(f)y>_T", worst, tol, N=scene.N)


def relation_operator(scene: FockScene, i: int, j: int) -> np.ndarray:
    """d_i d_j* - sum_{r,s} t^{ir}_{js} d_r* d_s - delta_ij restricted to levels < N."""
    d = scene.d
    ann = [annihilation(scene, basis_vector(d, k)).matrix for k in range(d)]
    cre = [creation(scene, basis_vector(d, k)).matrix for k in range(d)]
    x = ann[i] @ cre[j]
    for r in range(d):
        for s in range(d):
            t = scene.tensor.coeff(i, r, j, s)
            if t != 0:
                x = x - t * (cre[r] @ ann[s])
    if i == j:
        x = x - np.eye(scene.dim)
    sl = scene.levels_slice(0, scene.N - 1)
    return x[sl, sl]


def relation_residual(scene: FockScene, i: int, j: int, tol: float = 1e-10) -> Certificate:
    if scene.N < 1:
        raise FockError("relations need a level cap of at least 1")
    res = opnorm(relation_operator(scene, i, j))
    return residual(f"Wick relation (i={i + 1}, j={j + 1})", res, tol, N=scene.N)


def sum_rule_residual(scene: FockScene) -> float:
    """|sum_i d_i* d_i - (1 - P_Omega) R| on all levels."""
    d = scene.d
    total = np.zeros((scene.dim, scene.dim), dtype=complex)
    for k in range(d):
        e = basis_vector(d, k)
        total += creation(scene, e).matrix @ annihilation(scene, e).matrix
    rhs = r_operator(scene).matrix.copy()
    rhs[0, :] = 0
    rhs[:, 0] = 0
    return opnorm(total - rhs)


def domination_min_eig(scene: FockScene) -> list[float]:
    """min eig of (1 (x) P^(n))/(1-q) - P^(n+1) for each n < N."""
    q = scene.tensor.norm_bound
    if q >= 1:
        raise FockError("domination needs |T| < 1")
    out = []
    for n in range(scene.N):
        diff = np.kron(np.eye(scene.d), scene.raw_gram[n]) / (1 - q) - scene.raw_gram[n + 1]
        out.append(float(np.linalg.eigvalsh((diff + diff.conj().T) / 2)[0]))
    return out


def diag_norm_bound(qii: float) -> float:
    if qii < 0:
        return 1.0
    if qii >= 1:
        return np.inf
    return 1.0 / np.sqrt(1.0 - qii)


def norm_suite(scene: FockScene, tol: float = 1e-8) -> list[Certificate]:
    """|d_i|_T (truncated) against its exact value, and monotonicity in the cap."""
    spec = scene.tensor.qspec
    if spec is None:
        raise FockError("norm suite needs a scene built from q coefficients")
    certs = []
    smaller = scene.truncate(scene.N - 1) if scene.N >= 1 else scene
    for i in range(scene.d):
        e = basis_vector(scene.d, i)
        qii = float(spec.q[i, i].real)
        bound = diag_norm_bound(qii)
        val = t_norm(scene, annihilation(scene, e))
        certs.append(residual(f"|d_{i + 1}|_T <= bound(q_ii)", val, bound + tol,
                              q_ii=qii, bound=bound, N=scene.N))
        prev = t_norm(smaller, annihilation(smaller, e))
        certs.append(residual(f"|d_{i + 1}|_T nondecreasing in cap", prev - val, tol,
                              caps=[smaller.N, scene.N]))
    return certs


def r_norm_certificate(scene: FockScene, tol: float = 1e-8) -> Certificate:
    q = scene.tensor.norm_bound
    bound = 1.0 / (1.0 - q) if q < 1 else np.inf
    return residual("|R|_T <= 1/(1-q)", t_norm(scene, r_operator(scene)), bound + tol, q=q)


def creation_norm_certificate(scene: FockScene, f, tol: float = 1e-8) -> Certificate:
    q = scene.tensor.norm_bound
    f = np.asarray(f, dtype=complex)
    bound = np.linalg.norm(f) / np.sqrt(1.0 - q) if q < 1 else np.inf
    return residual("|d*(f)|_T <= |f|/sqrt(1-q)", t_norm(scene, creation(scene, f)),
                    bound + tol, q=q)


def reversal(scene: FockScene) -> np.ndarray:
    """Permutation reversing tensor factors on every raw level."""
    size = scene.raw_offsets[-1]
    rev = np.zeros((size, size))
    d = scene.d
    for n in range(scene.N + 1):
        off = scene.raw_offsets[n]
        for col, idx in enumerate(itertools.product(range(d), repeat=n)):
            row = 0
            for r in reversed(idx):
                row = row * d + r
            rev[off + row, off + col] = 1.0
    return rev


def right_commutant_check(scene: FockScene, tol: float = 1e-9) -> Certificate:
    """max_ij |[G_i, J G_j J]| on levels <= N-2, J = reversal composed with conjugation."""
    if scene.N < 2:
        return residual("[G_i, J G_j J] = 0", 0.0, tol, note="cap below 2, nothing to test")
    rev = reversal(scene)
    gs = [field_operator(scene, i, raw=True).matrix for i in range(scene.d)]
    rights = [rev @ g.conj() @ rev for g in gs]
    cols = scene.levels_slice(0, scene.N - 2, raw=True)
    worst = 0.0
    for g in gs:
        for h in rights:
            worst = max(worst, opnorm((g @ h - h @ g)[:, cols]))
    return residual("[G_i, J G_j J] = 0", worst, tol, N=scene.N)


def vacuum_expectation(scene: FockScene, word) -> complex:
    """<Omega, G_{w1} ... G_{wm} Omega>_T with letters from 1."""
    if len(word) > 2 * scene.N:
        raise FockError(f"word of length {len(word)} needs a level cap of {(len(word) + 1) // 2}")
    gs = {}
    v = scene.vacuum
    for letter in reversed(list(word)):
        if letter not in gs:
            gs[letter] = field_operator(scene, letter - 1).matrix
        v = gs[letter] @ v
    return complex(v[0])

