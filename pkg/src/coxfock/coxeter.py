"""Finite Coxeter groups as enumerated element tables.

Elements are numbered in ShortLex order of their canonical reduced words, so
element 0 is always the identity. Generators are labelled 1..n everywhere in
the public API (words, generator subsets); arrays are indexed from 0.
"""

from __future__ import annotations

import itertools
import operator
import re
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

DEFAULT_BUDGET = 50_000
FINGERPRINT_SCALE = 1e9


class CoxeterError(ValueError):
    """Invalid Coxeter data or a group that cannot be enumerated."""


@dataclass(frozen=True)
class Element:
    id: int
    word: tuple[int, ...]
    length: int

    def __index__(self) -> int:
        return self.id


def validate_matrix(m) -> np.ndarray:
    """Return `m` as an integer array after checking the Coxeter matrix axioms."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise CoxeterError(f"Coxeter matrix must be square and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise CoxeterError("infinite bonds are not supported")
    if not np.array_equal(arr, arr.T):
        raise CoxeterError("Coxeter matrix must be symmetric")
    if not np.all(arr == np.round(arr)):
        raise CoxeterError("Coxeter matrix entries must be integers")
    n = arr.shape[0]
    if not np.all(np.diag(arr) == 1):
        raise CoxeterError("Coxeter matrix must have ones on the diagonal")
    off = arr[~np.eye(n, dtype=bool)]
    if np.any(off < 2):
        raise CoxeterError("off-diagonal Coxeter entries must be >= 2")
    return arr.astype(int)


def coxeter_matrix(name: str) -> np.ndarray:
    """Standard Coxeter matrix by name: ``A3``, ``B_4``, ``D5``, ``I2(5)``.

    Labelling: A_n is the path 1-2-...-n. B_n has the 4-bond between 1 and 2.
    D_n has generators 1 and 2 both attached to 3, then the path 3-4-...-n.
    """
    s = name.replace(" ", "").upper()
    if mt := re.fullmatch(r"I_?2\((\d+)\)", s):
        k = int(mt.group(1))
        if k < 2:
            raise CoxeterError(f"I2(m) needs m >= 2, got {k}")
        return np.array([[1, k], [k, 1]])
    mt = re.fullmatch(r"([ABD])_?(\d+)", s)
    if not mt:
        raise CoxeterError(f"unknown group name {name!r}")
    kind, n = mt.group(1), int(mt.group(2))
    if n < 1 or (kind == "B" and n < 2) or (kind == "D" and n < 2):
        raise CoxeterError(f"rank {n} not valid for type {kind}")
    m = np.full((n, n), 2, dtype=int)
    np.fill_diagonal(m, 1)
    if kind == "D":
        for i in range(2, n - 1):
            m[i, i + 1] = m[i + 1, i] = 3
        if n >= 3:
            m[0, 2] = m[2, 0] = m[1, 2] = m[2, 1] = 3
        return m
    for i in range(n - 1):
        m[i, i + 1] = m[i + 1, i] = 3
    if kind == "B":
        m[0, 1] = m[1, 0] = 4
    return m


def bilinear_form(m) -> np.ndarray:
    m = np.asarray(m)
    return -np.cos(np.pi / m)


def reflection_matrices(m) -> list[np.ndarray]:
    """Generators of the geometric representation, s_i(a_j) = a_j - 2 B_ij a_i."""
    b = bilinear_form(m)
    n = len(b)
    mats = []
    for i in range(n):
        s = np.eye(n)
        s[i, :] -= 2 * b[i, :]
        mats.append(s)
    return mats


# Exact models: a key for the identity plus a right action key * s_i.

def _perm_model(n: int):
    def act(key, i):
        k = list(key)
        k[i], k[i + 1] = k[i + 1], k[i]
        return tuple(k)

    return tuple(range(1, n + 2)), act


def _signed_perm_model(n: int, kind: str):
    def act(key, i):
        k = list(key)
        if i == 0:
            if kind == "B":
                k[0] = -k[0]
            else:
                k[0], k[1] = -k[1], -k[0]
        else:
            k[i - 1], k[i] = k[i], k[i - 1]
        return tuple(k)

    return tuple(range(1, n + 1)), act


def exact_model(m):
    """Permutation model for matrices equal to the standard A_n, B_n or D_n, else None."""
    m = np.asarray(m)
    n = len(m)
    if np.array_equal(m, coxeter_matrix(f"A{n}")):
        return _perm_model(n)
    if n >= 2 and np.array_equal(m, coxeter_matrix(f"B{n}")):
        return _signed_perm_model(n, "B")
    if n >= 4 and np.array_equal(m, coxeter_matrix(f"D{n}")):
        return _signed_perm_model(n, "D")
    return None


def geometric_model(m):
    gens = reflection_matrices(m)

    def key_of(mat):
        return np.rint(mat * FINGERPRINT_SCALE).astype(np.int64).tobytes()

    def act(state, i):
        return state @ gens[i]

    return np.eye(len(gens)), act, key_of


def _enumerate(n: int, start, act: Callable, key_of: Callable[[object], Hashable], budget: int):
    """BFS over right multiplication. Returns canonical words, lengths, Cayley table."""
    keys = {key_of(start): 0}
    states = [start]
    words: list[tuple[int, ...]] = [()]
    lengths = [0]
    cayley: list[list[int]] = [[-1] * n]
    layer = [0]
    while layer:
        nxt = []
        for idx in layer:
            for i in range(n):
                if cayley[idx][i] >= 0:
                    continue
                st = act(states[idx], i)
                k = key_of(st)
                j = keys.get(k)
                if j is None:
                    j = len(states)
                    if j >= budget:
                        raise CoxeterError(
                            f"enumeration exceeded budget of {budget} elements "
                            "(group infinite or too large)"
                        )
                    keys[k] = j
                    states.append(st)
                    words.append(words[idx] + (i + 1,))
                    lengths.append(lengths[idx] + 1)
                    cayley.append([-1] * n)
                    nxt.append(j)
                cayley[idx][i] = j
                cayley[j][i] = idx
        layer = nxt
    return words, np.array(lengths), np.array(cayley), states


class CoxeterSystem:
    """A finite Coxeter group with its full element table.

    The object is immutable after construction. ``cayley[g, i-1]`` is the id of
    g * s_i; ``words[g]`` is the ShortLex-minimal reduced word of g.
    """

    def __init__(self, matrix, words, lengths, cayley, model: str):
        self.matrix = matrix
        self.words: list[tuple[int, ...]] = words
        self.lengths: np.ndarray = lengths
        self.cayley: np.ndarray = cayley
        self.model = model
        self.sigma0 = int(np.argmax(lengths))
        for arr in (self.matrix, self.lengths, self.cayley):
            arr.setflags(write=False)
        self._inverse: np.ndarray | None = None

    def __repr__(self):
        return f"CoxeterSystem(rank={self.rank}, order={self.order}, model={self.model!r})"

    @property
    def rank(self) -> int:
        return len(self.matrix)

    @property
    def order(self) -> int:
        return len(self.words)

    @property
    def generators(self) -> frozenset[int]:
        return frozenset(range(1, self.rank + 1))

    def _id(self, a) -> int:
        i = operator.index(a)
        if not 0 <= i < self.order:
            raise IndexError(f"element id {i} out of range for group of order {self.order}")
        return i

    def element(self, a) -> Element:
        i = self._id(a)
        return Element(i, self.words[i], int(self.lengths[i]))

    def elements(self) -> list[Element]:
        return [self.element(i) for i in range(self.order)]

    @property
    def identity(self) -> Element:
        return self.element(0)

    @property
    def longest(self) -> Element:
        return self.element(self.sigma0)

    def _check_word(self, word: Iterable[int]) -> tuple[int, ...]:
        word = tuple(int(s) for s in word)
        for s in word:
            if not 1 <= s <= self.rank:
                raise CoxeterError(f"generator index {s} outside 1..{self.rank}")
        return word

    def from_word(self, word: Iterable[int]) -> Element:
        """Element represented by an arbitrary (not necessarily reduced) word."""
        g = 0
        for s in self._check_word(word):
            g = int(self.cayley[g, s - 1])
        return self.element(g)

    def multiply(self, a, b) -> Element:
        g = self._id(a)
        for s in self.words[self._id(b)]:
            g = int(self.cayley[g, s - 1])
        return self.element(g)

    def inverse(self, a) -> Element:
        return self.from_word(reversed(self.words[self._id(a)]))

    def inverse_table(self) -> np.ndarray:
        if self._inverse is None:
            inv = np.array([self.inverse(g).id for g in range(self.order)])
            inv.setflags(write=False)
            self._inverse = inv
        return self._inverse

    def parent(self, a) -> tuple[int, int]:
        """(id of the canonical word minus its last letter, that last letter)."""
        g = self._id(a)
        if g == 0:
            raise CoxeterError("the identity has no parent")
        s = self.words[g][-1]
        return int(self.cayley[g, s - 1]), s

    def multiplication_table(self) -> np.ndarray:
        """``table[x, y]`` is the id of x * y."""
        table = np.empty((self.order, self.order), dtype=np.int64)
        table[:, 0] = np.arange(self.order)
        for g in range(1, self.order):
            p, s = self.parent(g)
            table[:, g] = self.cayley[table[:, p], s - 1]
        return table

    def length(self, a) -> int:
        return int(self.lengths[self._id(a)])

    def block_set(self, a) -> frozenset[int]:
        return frozenset(self.words[self._id(a)])

    def block_length(self, a) -> int:
        return len(self.block_set(a))

    def descent_complement(self, a) -> frozenset[int]:
        """Generators s with |a s| = |a| + 1."""
        g = self._id(a)
        ln = self.lengths
        return frozenset(i + 1 for i in range(self.rank) if ln[self.cayley[g, i]] == ln[g] + 1)

    def _subset(self, J) -> frozenset[int]:
        J = frozenset(int(s) for s in J)
        if not J <= self.generators:
            raise CoxeterError(f"{sorted(J)} is not a subset of the generators 1..{self.rank}")
        return J

    def coset_minima(self, J) -> list[Element]:
        """Minimal-length representatives of the left cosets w W_J."""
        J = self._subset(J)
        return [self.element(g) for g in range(self.order) if J <= self.descent_complement(g)]

    def coset_factor(self, a, J) -> tuple[Element, Element]:
        """Split a = tau * w with tau minimal in a W_J and w in W_J."""
        J = self._subset(J)
        g = self._id(a)
        tail: list[int] = []
        moved = True
        while moved:
            moved = False
            for s in sorted(J):
                h = int(self.cayley[g, s - 1])
                if self.lengths[h] < self.lengths[g]:
                    g = h
                    tail.append(s)
                    moved = True
                    break
        return self.element(g), self.from_word(reversed(tail))

    def euler_solomon(self, a) -> int:
        jset = sorted(self.descent_complement(a))
        return sum(
            (-1) ** k * sum(1 for _ in itertools.combinations(jset, k))
            for k in range(len(jset) + 1)
        )

    def parabolic(self, J) -> tuple["CoxeterSystem", np.ndarray, tuple[int, ...]]:
        """The parabolic subgroup W_J.

        Returns ``(sub, embed, labels)`` where sub is W_J as its own Coxeter
        system, ``embed[k]`` is the id in this group of sub-element k, and
        ``labels[j-1]`` is the generator of this group playing the role of the
        sub-group's generator j.
        """
        labels = tuple(sorted(self._subset(J)))
        if not labels:
            sub = CoxeterSystem(
                np.ones((0, 0), dtype=int), [()], np.array([0]), np.zeros((1, 0), dtype=int),
                "trivial",
            )
            return sub, np.array([0]), labels
        idx = [s - 1 for s in labels]
        sub = build_system(self.matrix[np.ix_(idx, idx)], budget=self.order + 1)
        embed = np.array([self.from_word(labels[s - 1] for s in w).id for w in sub.words])
        return sub, embed, labels

    def poincare_coefficients(self) -> list[int]:
        return [int(c) for c in np.bincount(self.lengths)]

    def all_block_sets(self) -> list[set[frozenset[int]]]:
        """For each element, the set of letter sets over *all* of its reduced words."""
        sets: list[set[frozenset[int]]] = [set() for _ in range(self.order)]
        sets[0].add(frozenset())
        for g in np.argsort(self.lengths, kind="stable"):
            for i in range(self.rank):
                h = int(self.cayley[g, i])
                if self.lengths[h] == self.lengths[g] + 1:
                    sets[h].update(b | {i + 1} for b in sets[g])
        return sets


def build_system(m, budget: int = DEFAULT_BUDGET, model: str = "auto") -> CoxeterSystem:
    """Enumerate the finite Coxeter group presented by the Coxeter matrix `m`.

    model: ``"auto"`` uses an exact permutation model for the standard A/B/D
    matrices and the geometric representation otherwise; ``"geometric"`` and
    ``"exact"`` force one or the other.
    """
    m = validate_matrix(m)
    n = len(m)
    if np.linalg.eigvalsh(bilinear_form(m)).min() <= 1e-12:
        raise CoxeterError("Coxeter matrix presents an infinite group")
    exact = exact_model(m) if model in ("auto", "exact") else None
    if model == "exact" and exact is None:
        raise CoxeterError("no exact model for this Coxeter matrix")
    if exact is not None:
        start, act = exact
        words, lengths, cayley, _ = _enumerate(n, start, act, lambda k: k, budget)
        return CoxeterSystem(m, words, lengths, cayley, "exact")
    start, act, key_of = geometric_model(m)
    words, lengths, cayley, _ = _enumerate(n, start, act, key_of, budget)
    return CoxeterSystem(m, words, lengths, cayley, "geometric")


def braid_moves(word: Sequence[int], m) -> list[tuple[int, ...]]:
    """All words obtained from `word` by one braid move s t s.. -> t s t.. (m_st letters)."""
    m = np.asarray(m)
    word = tuple(word)
    out = []
    for pos in range(len(word)):
        s = word[pos]
        for t in range(1, len(m) + 1):
            if t == s:
                continue
            k = int(m[s - 1, t - 1])
            seg = tuple(s if j % 2 == 0 else t for j in range(k))
            if word[pos:pos + k] == seg:
                swapped = tuple(t if j % 2 == 0 else s for j in range(k))
                out.append(word[:pos] + swapped + word[pos + k:])
    return out


def random_reduced_word(word: Sequence[int], m, rng: np.random.Generator, steps: int = 30):
    """Random walk on reduced words of one element via braid moves."""
    word = tuple(word)
    for _ in range(steps):
        moves = braid_moves(word, m)
        if not moves:
            break
        word = moves[rng.integers(len(moves))]
    return word


def q_integer_poly(k: int) -> list[int]:
    return [1] * k


def poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def symmetric_poincare(n: int) -> list[int]:
    """Coefficients of prod_{k<=n} [k]_q, the length generating function of S_n."""
    out = [1]
    for k in range(1, n + 1):
        out = poly_mul(out, q_integer_poly(k))
    return out
