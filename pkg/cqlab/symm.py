"""Channel-independent operators: I_q, Ĩ_q, τ_q, τ_n, ω_{x^n} and δ-typical projectors.

Ĩ_q = span{U^⊗n|y^n⟩ : U ∈ U(d), y^n ∈ T(q)} is computed numerically by
orbit sampling until the rank stops growing. Results are cached per
(q, d, seed) and handed out as read-only arrays.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.linalg as la
from numpy.typing import NDArray

from cqlab import config, qmat
from cqlab.entropy import kl, shannon
from cqlab.qmat import Op
from cqlab.seqtypes import TypeVec, enumerate_types, ordered_rep, type_of

logger = logging.getLogger(__name__)

# Gram–Schmidt residual below which a vector adds no rank
GS_TOL = 1e-9
# consecutive unitaries without rank growth before the orbit is declared saturated
STALL_LIMIT = 3
# eigenvalues closer than this share one spectral letter in typical_projector
DEGENERACY_TOL = 1e-10


class SaturationError(RuntimeError):
    """Orbit sampling hit the unitary cap before the rank stabilised."""


@dataclass(frozen=True)
class TypeProjector:
    q: TypeVec
    proj: Op

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.proj).real))


@dataclass(frozen=True)
class InvariantProjector:
    q: TypeVec
    proj: Op
    rank: int
    unitaries: int          # orbit samples consumed, identity included


@dataclass(frozen=True)
class UniversalState:
    n: int
    d: int
    op: Op


def _frozen(a: NDArray) -> NDArray:
    a.setflags(write=False)
    return a


def _check_type(q: Sequence[int], d: int) -> TypeVec:
    q = tuple(int(c) for c in q)
    if len(q) != d:
        raise ValueError(f"type {q} has {len(q)} entries, expected d={d}")
    if any(c < 0 for c in q) or sum(q) < 1:
        raise ValueError(f"invalid type {q}")
    return q


def _class_digits(q: TypeVec, d: int) -> NDArray[np.intp]:
    """(m, n) array of the basis sequences of type q."""
    n = sum(q)
    digits = np.array(np.unravel_index(np.arange(d ** n), (d,) * n)).T
    counts = np.stack([(digits == y).sum(axis=1) for y in range(d)], axis=1)
    return digits[np.all(counts == np.asarray(q), axis=1)]


# ── I_q ────────────────────────────────────────────────────

def projector_Iq(q: Sequence[int], d: int) -> TypeProjector:
    """Σ_{y^n ∈ T(q)} |y^n⟩⟨y^n| in the computational basis."""
    q = _check_type(q, d)
    n = sum(q)
    idx = np.ravel_multi_index(tuple(_class_digits(q, d).T), (d,) * n)
    diag = np.zeros(d ** n, dtype=np.complex128)
    diag[idx] = 1.0
    return TypeProjector(q, _frozen(np.diag(diag)))


# ── Ĩ_q (orbit rank saturation) ────────────────────────────

def _orbit_vectors(u: Op, digits: NDArray[np.intp]) -> Op:
    """Columns u[:, y₁] ⊗ … ⊗ u[:, y_n] for every row y of ``digits``."""
    m, n = digits.shape
    vecs = u[:, digits[:, 0]]
    for i in range(1, n):
        vecs = (vecs[:, None, :] * u[:, digits[:, i]][None, :, :]).reshape(-1, m)
    return vecs


def _extend_basis(acc: Op, vecs: Op) -> Op:
    """Append the new directions of ``vecs`` to the orthonormal columns ``acc``."""
    cols = [acc[:, j] for j in range(acc.shape[1])]
    basis = acc
    for v in vecs.T:
        # two projection passes keep the accumulated basis orthonormal to round-off
        for _ in range(2):
            v = v - basis @ (basis.conj().T @ v)
        nrm = np.linalg.norm(v)
        if nrm > GS_TOL:
            cols.append(v / nrm)
            basis = np.stack(cols, axis=1)
    return basis


def _saturate(q: TypeVec, d: int, seed: int, basis: Op | None) -> InvariantProjector:
    n = sum(q)
    size = d ** n
    digits = _class_digits(q, d)
    rng = np.random.default_rng(seed)
    start = np.eye(d, dtype=np.complex128) if basis is None else qmat.as_operator(basis)

    acc = np.zeros((size, 0), dtype=np.complex128)
    stall, used = 0, 0
    while True:
        u = start if used == 0 else qmat.haar_unitary(d, rng) @ start
        before = acc.shape[1]
        acc = _extend_basis(acc, _orbit_vectors(u, digits))
        used += 1
        if acc.shape[1] == size:
            break
        stall = stall + 1 if acc.shape[1] == before else 0
        if stall >= STALL_LIMIT:
            break
        if used >= config.ORBIT_MAX_UNITARIES:
            raise SaturationError(
                f"rank of orbit span for q={q}, d={d} still growing after {used} unitaries "
                f"(rank {acc.shape[1]})")

    rank = acc.shape[1]
    logger.debug("orbit saturated: q=%s d=%d rank=%d unitaries=%d", q, d, rank, used)
    proj = qmat.hermitize(acc @ acc.conj().T)
    return InvariantProjector(q, _frozen(proj), rank, used)


@lru_cache(maxsize=None)
def _invariant_cached(q: TypeVec, d: int, seed: int) -> InvariantProjector:
    return _saturate(q, d, seed, None)


def projector_tildeIq(q: Sequence[int], d: int, seed: int | None = None,
                      basis: Op | None = None) -> InvariantProjector:
    """Projector onto the unitary orbit span of the type class K_q.

    ``basis`` replaces the computational basis by the columns of a unitary V
    (the orbit then starts from V^⊗n|y^n⟩); such calls bypass the cache.
    """
    q = _check_type(q, d)
    seed = config.ORBIT_SEED if seed is None else seed
    if basis is not None:
        return _saturate(q, d, seed, basis)
    return _invariant_cached(q, d, seed)


def tau_q(q: Sequence[int], d: int, seed: int | None = None, basis: Op | None = None) -> Op:
    inv = projector_tildeIq(q, d, seed, basis)
    return inv.proj / inv.rank


def _tau_n(n: int, d: int, seed: int | None, basis: Op | None) -> Op:
    types = enumerate_types(n, d)
    return sum(tau_q(q, d, seed, basis) for q in types) / len(types)


@lru_cache(maxsize=None)
def _tau_n_cached(n: int, d: int, seed: int | None) -> UniversalState:
    return UniversalState(n, d, _frozen(_tau_n(n, d, seed, None)))


def tau_n(n: int, d: int, seed: int | None = None, basis: Op | None = None) -> UniversalState:
    """τ_n = |P^n|⁻¹ Σ_q τ_q."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if basis is not None:
        return UniversalState(n, d, _tau_n(n, d, seed, basis))
    return _tau_n_cached(n, d, seed)


@lru_cache(maxsize=None)
def _omega_blocks(counts: tuple[int, ...], d: int, seed: int | None) -> Op:
    return _frozen(qmat.kron(*[tau_n(m, d, seed).op for m in counts]))


def omega(x: Sequence[int], d: int, seed: int | None = None) -> Op:
    """ω_{x^n} = U_s (τ_{m₁} ⊗ … ⊗ τ_{m_k}) U_s† for x^n = s·x_o^n.

    Only the block product is cached, once per letter-count composition;
    U_s acts as a relabelling of basis states.
    """
    x = tuple(int(v) for v in x)
    if not x:
        raise ValueError("empty sequence")
    x_o, s = ordered_rep(x)
    counts = tuple(c for c in type_of(x_o, max(x_o) + 1) if c > 0)
    back = np.argsort(qmat.permutation_indices(s, d))
    return _omega_blocks(counts, d, seed)[np.ix_(back, back)]


# ── 전형 사영 연산자 ───────────────────────────────────────

def typical_projector(sigma: Op, n: int, delta: float) -> Op:
    """Π^n_{σ,δ}: span of eigenbasis sequences whose spectral type is δ-typical.

    Eigenvalues equal within DEGENERACY_TOL form one spectral letter whose
    probability is their sum, so the projector depends on σ alone.
    """
    if delta <= 0:
        raise ValueError("delta must be > 0")
    w, v = qmat.eigh(sigma)
    w, v = np.clip(w[::-1], 0.0, None), v[:, ::-1]
    d = w.size

    group = np.zeros(d, dtype=np.intp)
    for i in range(1, d):
        group[i] = group[i - 1] + (abs(w[i] - w[i - 1]) > DEGENERACY_TOL)
    probs = np.bincount(group, weights=w)

    digits = np.array(np.unravel_index(np.arange(d ** n), (d,) * n))
    letters = group[digits]
    counts = np.stack([(letters == g).sum(axis=0) for g in range(probs.size)])
    freq = counts / n
    slack = 1e-12 * (probs > 0)
    ok = np.all(np.abs(freq - probs[:, None]) <= (probs * delta + slack)[:, None], axis=0)

    vn = qmat.kron_power(v, n)
    keep = vn[:, ok]
    return qmat.hermitize(keep @ keep.conj().T)


# ── 보조정리 점검용 ────────────────────────────────────────

def lemma1_gap(sigma: Op, n: int, seed: int | None = None) -> float:
    """min eig[(n+1)^{d²+d} τ_n − σ^⊗n]; nonnegative when σ^⊗n is dominated."""
    d = sigma.shape[0]
    bound = (n + 1) ** (d * d + d) * tau_n(n, d, seed).op
    return float(la.eigvalsh(qmat.hermitize(bound - qmat.kron_power(sigma, n)))[0])


def sigma_type_weight(q: Sequence[int], lam: Sequence[float]) -> float:
    """2^{−n[D(q/n‖λ) + H(q/n)]}: the eigenvalue of σ^⊗n on K_q in σ's eigenbasis."""
    q = np.asarray(q, dtype=float)
    n = q.sum()
    freq = q / n
    div = kl(freq, lam)
    if div == np.inf:
        return 0.0
    return float(2.0 ** (-n * (div + shannon(freq))))
