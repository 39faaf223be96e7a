"""Method of types: types, type classes, typical sets, the conditional codeword sampler.

Letters are integers 0..k-1 and sequences are tuples or 1-D integer arrays.
A type is a tuple of counts that sums to the block length.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from numpy.typing import NDArray

from cqlab.entropy import shannon

logger = logging.getLogger(__name__)

TypeVec = tuple[int, ...]

# float slack when comparing empirical frequencies with p_i δ
_TYPICAL_SLACK = 1e-12


class EmptyTypicalSetError(ValueError):
    """No sequence satisfies the typicality constraint at the requested (n, δ)."""


def as_distribution(p: Sequence[float], tol: float = 1e-12) -> NDArray[np.float64]:
    """Validate an input distribution (entries ≥ 0, sum 1 within ``tol``)."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("distribution must be a non-empty vector")
    if np.any(arr < 0):
        raise ValueError(f"distribution has negative entries: {arr.tolist()}")
    if abs(arr.sum() - 1.0) > tol:
        raise ValueError(f"distribution sums to {arr.sum():.15g}, expected 1")
    return arr


def zeta(n: int, k: float) -> float:
    """ζ_n(k) = (k/n)·log₂(n+1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return k / n * math.log2(n + 1)


# ── 타입과 타입 클래스 ─────────────────────────────────────

def enumerate_types(n: int, k: int) -> list[TypeVec]:
    """All compositions of n into k nonnegative parts, first count descending."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")

    def _rec(remaining: int, slots: int) -> Iterator[TypeVec]:
        if slots == 1:
            yield (remaining,)
            return
        for first in range(remaining, -1, -1):
            for rest in _rec(remaining - first, slots - 1):
                yield (first,) + rest

    return list(_rec(n, k))


def multinomial(q: TypeVec) -> int:
    """|T(q)| = n! / Π q_i!."""
    total, out = 0, 1
    for c in q:
        total += c
        out *= math.comb(total, c)
    return out


def type_of(x: Sequence[int], k: int) -> TypeVec:
    counts = np.bincount(np.asarray(x, dtype=np.intp), minlength=k)
    if counts.size > k:
        raise ValueError(f"sequence uses letters outside 0..{k - 1}")
    return tuple(int(c) for c in counts)


def type_class(q: TypeVec) -> Iterator[tuple[int, ...]]:
    """Lazily yield every sequence of type q in lexicographic order."""
    counts = list(q)
    n = sum(counts)
    seq: list[int] = []

    def _rec() -> Iterator[tuple[int, ...]]:
        if len(seq) == n:
            yield tuple(seq)
            return
        for letter, c in enumerate(counts):
            if c == 0:
                continue
            counts[letter] -= 1
            seq.append(letter)
            yield from _rec()
            seq.pop()
            counts[letter] += 1

    return _rec()


def type_class_bounds(q: TypeVec) -> tuple[float, float]:
    """2^{n[H(q) − ζ_n(k)]} ≤ |T(q)| ≤ 2^{nH(q)}."""
    n = sum(q)
    h = shannon(np.asarray(q, dtype=float) / n)
    return pow2(n * (h - zeta(n, len(q)))), pow2(n * h)


def is_typical_type(q: TypeVec, p: NDArray[np.float64], delta: float) -> bool:
    """|q_i/n − p_i| ≤ p_i δ for every letter (forces q_i = 0 where p_i = 0)."""
    n = sum(q)
    freq = np.asarray(q, dtype=float) / n
    return bool(np.all(np.abs(freq - p) <= p * delta + _TYPICAL_SLACK * (p > 0)))


# ── 순서 표현 ──────────────────────────────────────────────

def ordered_rep(x: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Return (x_o, s): the sorted sequence and the permutation with x = s·x_o.

    s[j] is the position in x of the j-th letter of x_o (stable sort).
    """
    arr = np.asarray(x, dtype=np.intp)
    order = np.argsort(arr, kind="stable")
    return tuple(int(v) for v in arr[order]), tuple(int(j) for j in order)


def apply_permutation(s: Sequence[int], x: Sequence[int]) -> tuple[int, ...]:
    """(s·x)[s[j]] = x[j]."""
    out = [0] * len(x)
    for j, target in enumerate(s):
        out[target] = int(x[j])
    return tuple(out)


# ── 전형 집합 ──────────────────────────────────────────────

@dataclass(frozen=True)
class TypicalSet:
    """The δ-typical sequences of p at length n, with their product probabilities."""
    p: NDArray[np.float64]
    n: int
    delta: float
    sequences: NDArray[np.intp]          # (N, n)
    probs: NDArray[np.float64]           # p^n of each row
    q_n: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "q_n", float(self.probs.sum()))

    def __len__(self) -> int:
        return int(self.sequences.shape[0])

    @property
    def conditional(self) -> NDArray[np.float64]:
        """p'^n = p^n / Q_n on the set."""
        return self.probs / self.q_n

    def index_of(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(v) for v in row): i for i, row in enumerate(self.sequences)}


def typical_set(p: Sequence[float], n: int, delta: float) -> TypicalSet:
    """Enumerate T^n_{p,δ} type by type; Q_n is the p^n mass of the set."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    p = as_distribution(p)
    k = p.size
    logp = np.where(p > 0, np.log(np.where(p > 0, p, 1.0)), -np.inf)

    rows: list[tuple[int, ...]] = []
    probs: list[float] = []
    for q in enumerate_types(n, k):
        if not is_typical_type(q, p, delta):
            continue
        prob = float(np.exp(sum(c * logp[i] for i, c in enumerate(q) if c)))
        for seq in type_class(q):
            rows.append(seq)
            probs.append(prob)

    seqs = np.array(rows, dtype=np.intp).reshape(len(rows), n)
    return TypicalSet(p=p, n=n, delta=delta, sequences=seqs, probs=np.array(probs, dtype=np.float64))


def typical_prob_bounds(p: Sequence[float], n: int, delta: float, c: float | None = None) -> tuple[float, float]:
    """2^{−n[H(p)+cδ]} ≤ p^n(x) ≤ 2^{−n[H(p)−cδ]} for typical x; c defaults to H(p)."""
    h = shannon(p)
    c = h if c is None else c
    return pow2(-n * (h + c * delta)), pow2(-n * (h - c * delta))


def typical_size_bound(p: Sequence[float], n: int, delta: float, c: float | None = None) -> float:
    h = shannon(p)
    c = h if c is None else c
    return pow2(n * (h + c * delta))


class TypicalSampler:
    """Draws i.i.d. sequences from p^n/Q_n on the typical set.

    Owns its generator; not meant to be shared across threads.
    """

    def __init__(self, typ: TypicalSet, rng: np.random.Generator | int | None = None):
        if len(typ) == 0:
            raise EmptyTypicalSetError(
                f"typical set is empty for n={typ.n}, delta={typ.delta}, p={typ.p.tolist()}")
        self.typ = typ
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self._cdf = np.cumsum(typ.conditional)
        self._cdf[-1] = 1.0

    def draw_indices(self, size: int) -> NDArray[np.intp]:
        u = self.rng.random(size)
        return np.searchsorted(self._cdf, u, side="right").astype(np.intp)

    def draw(self, size: int) -> NDArray[np.intp]:
        """(size, n) array of sequences."""
        return self.typ.sequences[self.draw_indices(size)]

    def sample(self) -> tuple[int, ...]:
        return tuple(int(v) for v in self.draw(1)[0])


def conditional_sampler(p: Sequence[float], n: int, delta: float, seed: int | None) -> TypicalSampler:
    return TypicalSampler(typical_set(p, n, delta), seed)


def pow2(x: float) -> float:
    """2**x that saturates to inf instead of raising OverflowError."""
    return math.inf if x > 1023 else 2.0 ** x
