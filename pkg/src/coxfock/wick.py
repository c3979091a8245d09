"""Pair partitions, crossings and vacuum moments of G_i = d_i + d_i* for q_ij relations."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .certificate import Certificate, residual
from .fock import FockError, FockScene, QSpec, build_scene, from_q, vacuum_expectation

MAX_WORD = 16


@dataclass(frozen=True)
class PairPartition:
    """Pairs (a_k, z_k) with a_k < z_k, sorted by opener, covering 1..2r."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(a), int(z)) for a, z in self.pairs)
        if any(a >= z for a, z in pairs):
            raise ValueError("every pair must have a < z")
        if list(pairs) != sorted(pairs):
            raise ValueError("pairs must be sorted by their opening point")
        points = sorted(p for pair in pairs for p in pair)
        if points != list(range(1, 2 * len(pairs) + 1)):
            raise ValueError(f"pairs do not partition 1..{2 * len(pairs)}")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self):
        return len(self.pairs)


def _pairings(points: list[int]) -> Iterator[list[tuple[int, int]]]:
    if not points:
        yield []
        return
    first, rest = points[0], points[1:]
    for k, partner in enumerate(rest):
        for tail in _pairings(rest[:k] + rest[k + 1:]):
            yield [(first, partner)] + tail


def pair_partitions(m: int) -> list[PairPartition]:
    """All pairings of 1..m: smallest open point first, partners ascending."""
    if m % 2:
        raise ValueError(f"no pair partitions of an odd number of points ({m})")
    if m > MAX_WORD:
        raise ValueError(f"{m} points exceed the enumeration limit {MAX_WORD}")
    return [PairPartition(tuple(sorted(p))) for p in _pairings(list(range(1, m + 1)))]


def double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2))


def crossings(v: PairPartition) -> list[tuple[int, int]]:
    """Index pairs (k, l), from 1, with a_k < a_l < z_k < z_l."""
    out = []
    for (k, (ak, zk)), (l, (al, zl)) in itertools.permutations(enumerate(v.pairs, 1), 2):
        if ak < al < zk < zl:
            out.append((k, l))
    return sorted(out)


def q_weight(v: PairPartition, word: Sequence[int], q: np.ndarray) -> complex:
    """Contribution of one pairing to the vacuum moment of G_{w1}...G_{wm}.

    Zero unless both ends of every pair carry the same letter; otherwise the
    product over crossings (k, l) of q[w(a_l), w(a_k)]. For symmetric q the
    index order is immaterial; for complex Hermitian q this is the order the
    operator computation produces.
    """
    q = np.asarray(q)
    if len(word) != 2 * len(v):
        raise ValueError("word length must equal the number of paired points")
    w = [None, *word]
    if any(w[a] != w[z] for a, z in v.pairs):
        return 0j
    out = 1 + 0j
    for k, l in crossings(v):
        out *= q[w[v.pairs[l - 1][0]] - 1, w[v.pairs[k - 1][0]] - 1]
    return out


@dataclass(frozen=True)
class MomentQuery:
    word: tuple[int, ...]
    spec: QSpec

    def __post_init__(self):
        word = tuple(int(x) for x in self.word)
        if any(not 1 <= x <= self.spec.d for x in word):
            raise ValueError(f"letters must lie in 1..{self.spec.d}")
        object.__setattr__(self, "word", word)


def moment(query: MomentQuery) -> complex:
    """Sum of q_weight over all pairings, with pairings of unequal letters pruned early."""
    word = query.word
    m = len(word)
    if m % 2:
        return 0j
    if m > MAX_WORD:
        raise ValueError(f"word of length {m} exceeds the limit {MAX_WORD}")
    q = query.spec.q

    def rec(open_pairs: list[tuple[int, int]], free: list[int]) -> complex:
        if not free:
            return 1 + 0j
        a, rest = free[0], free[1:]
        total = 0j
        for k, z in enumerate(rest):
            if word[a] != word[z]:
                continue
            weight = 1 + 0j
            for ak, zk in open_pairs:
                if ak < a < zk < z:
                    weight *= q[word[a] - 1, word[ak] - 1]
            if weight != 0:
                total += weight * rec(open_pairs + [(a, z)], rest[:k] + rest[k + 1:])
        return total

    return rec([], list(range(m)))


def moment_matrix(query: MomentQuery, scene: FockScene | None = None) -> complex:
    """The same moment from matrix products in a truncated scene (cap >= m/2)."""
    m = len(query.word)
    if scene is None:
        scene = build_scene(from_q(query.spec), max(1, (m + 1) // 2))
    if scene.N < (m + 1) // 2:
        raise FockError(f"level cap {scene.N} too small for a word of length {m}")
    return vacuum_expectation(scene, query.word)


def compare(query: MomentQuery, scene: FockScene | None = None, tol: float = 1e-10) -> Certificate:
    diag = moment(query)
    mat = moment_matrix(query, scene)
    return residual(f"moment {''.join(map(str, query.word))}: diagram vs matrix",
                    abs(diag - mat), tol, diagram=complex(diag), matrix=complex(mat))


def cyclic_residual(tensor) -> float:
    """max |t^{dc}_{ab} - t^{cb}_{da}| over all index quadruples."""
    n = tensor.d
    t = tensor.t.reshape(n, n, n, n)  # t[d, c, a, b]
    worst = 0.0
    for a, b, c, d in itertools.product(range(n), repeat=4):
        worst = max(worst, abs(t[d, c, a, b] - t[c, b, d, a]))
    return worst


def trace_witness(scene: FockScene, max_degree: int = 6) -> tuple[float, tuple, tuple]:
    """Largest |eps(AB) - eps(BA)| over monomials A, B of total degree <= max_degree."""
    d = scene.d
    best = (0.0, (), ())
    cache: dict[tuple, complex] = {}

    def eps(word):
        if word not in cache:
            cache[word] = vacuum_expectation(scene, word) if len(word) % 2 == 0 else 0j
        return cache[word]

    for m in range(2, max_degree + 1, 2):
        for word in itertools.product(range(1, d + 1), repeat=m):
            for cut in range(1, m):
                a, b = word[:cut], word[cut:]
                gap = abs(eps(a + b) - eps(b + a))
                if gap > best[0]:
                    best = (gap, a, b)
    return best


def traciality_check(tensor_or_spec, max_degree: int = 6, tol: float = 1e-10) -> list[Certificate]:
    """Structural cyclicity of t plus an empirical search for eps(AB) != eps(BA)."""
    tensor = from_q(tensor_or_spec) if isinstance(tensor_or_spec, (QSpec, np.ndarray)) \
        else tensor_or_spec
    structural = cyclic_residual(tensor)
    scene = build_scene(tensor, max(1, max_degree // 2))
    gap, a, b = trace_witness(scene, max_degree)
    return [
        residual("t^{dc}_{ab} = t^{cb}_{da}", structural, tol),
        residual("eps(AB) = eps(BA)", gap, tol, A=list(a), B=list(b), max_degree=max_degree),
    ]
