"""Dense Hermitian matrix kernel — 텐서곱, 부분 대각합, 스펙트럼 함수, 연산자 비교.

Every routine is a pure function of its arguments. Matrices are plain
``numpy`` complex arrays; the helpers below only validate and transform.
"""
import logging
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as la
from numpy.typing import NDArray

logger = logging.getLogger(__name__)

Op = NDArray[np.complex128]

# {A >= B} keeps eigenvalues in [-TOL_EIG, 0) as nonnegative
TOL_EIG = 1e-10
# support / pseudo-inverse cut, relative to the largest |eigenvalue|
TOL_SUPPORT = 1e-10
# hermiticity, trace and positivity checks on user-supplied states
TOL_STATE = 1e-8


class OperatorError(ValueError):
    """Matrix fails a structural check (shape, hermiticity, positivity, trace)."""


# ── 기본 변환 ──────────────────────────────────────────────

def as_operator(a) -> Op:
    """Coerce to a square complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise OperatorError(f"expected a square matrix, got shape {m.shape}")
    return m


def dagger(a: Op) -> Op:
    return a.conj().T


def hermitize(a: Op) -> Op:
    """Symmetrize away round-off: (A + A†)/2."""
    return (a + a.conj().T) / 2


def is_hermitian(a: Op, tol: float = TOL_STATE) -> bool:
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def check_density(rho, tol: float = TOL_STATE, name: str = "state") -> Op:
    """Validate a density operator (Hermitian, PSD, unit trace) and return it as an array."""
    m = as_operator(rho)
    if not is_hermitian(m, tol):
        raise OperatorError(f"{name} is not Hermitian")
    tr = np.trace(m).real
    if abs(tr - 1.0) > tol:
        raise OperatorError(f"{name} has trace {tr:.12g}, expected 1")
    w = la.eigvalsh(hermitize(m))
    if w[0] < -tol:
        raise OperatorError(f"{name} is not positive semidefinite (min eigenvalue {w[0]:.3g})")
    return hermitize(m)


def eigh(a: Op) -> tuple[NDArray[np.float64], Op]:
    """Eigendecomposition of the Hermitian part, ascending eigenvalues."""
    return la.eigh(hermitize(a))


def from_eig(w: NDArray[np.float64], v: Op) -> Op:
    return (v * w) @ v.conj().T


def support_mask(w: NDArray[np.float64]) -> NDArray[np.bool_]:
    """Eigenvalues counted as nonzero under the relative threshold."""
    scale = np.max(np.abs(w), initial=0.0)
    if scale == 0.0:
        return np.zeros(w.shape, dtype=bool)
    return w > TOL_SUPPORT * scale


# ── 텐서 구조 ──────────────────────────────────────────────

def kron(*ops: Op) -> Op:
    """A₁ ⊗ A₂ ⊗ … (left factor is the most significant index)."""
    if not ops:
        return np.ones((1, 1), dtype=np.complex128)
    return reduce(np.kron, ops)


def kron_power(a: Op, n: int) -> Op:
    return kron(*([a] * n))


def partial_trace(m: Op, dims: Sequence[int], keep: Iterable[int]) -> Op:
    """Trace out every factor not listed in ``keep`` (0-based factor indices)."""
    dims = list(dims)
    keep = sorted(set(keep))
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise OperatorError(f"matrix shape {m.shape} does not match dims {dims}")
    if any(i < 0 or i >= len(dims) for i in keep):
        raise OperatorError(f"keep indices {keep} out of range for {len(dims)} factors")

    t = m.reshape(dims + dims)
    for idx in sorted(set(range(len(dims))) - set(keep), reverse=True):
        half = t.ndim // 2
        t = np.trace(t, axis1=idx, axis2=idx + half)
    d = int(np.prod([dims[i] for i in keep]))
    return t.reshape(d, d)


def permutation_indices(s: Sequence[int], d: int) -> NDArray[np.intp]:
    """Basis relabelling of U_s: U_s|i⟩ = |out[i]⟩ (see permutation_unitary)."""
    s = np.asarray(s, dtype=np.intp)
    n = len(s)
    if sorted(s.tolist()) != list(range(n)):
        raise ValueError(f"not a permutation: {s.tolist()}")
    idx = np.arange(d ** n)
    if not n:
        return idx
    shape = (d,) * n
    digits = np.array(np.unravel_index(idx, shape))
    return np.ravel_multi_index(tuple(digits[np.argsort(s)]), shape)


def permutation_unitary(s: Sequence[int], d: int) -> Op:
    """U_s for a permutation s of n tensor factors.

    Factor j of the input lands at position s[j], i.e.
    |y₁…y_n⟩ ↦ |y_{s⁻¹(1)}…y_{s⁻¹(n)}⟩, so that U_s U_s' = U_{s∘s'}.
    """
    out = permutation_indices(s, d)
    u = np.zeros((out.size, out.size), dtype=np.complex128)
    u[out, np.arange(out.size)] = 1.0
    return u


# ── 스펙트럼 함수 ───────────────────────────────────────────

def positive_part_projector(a: Op, b: Op) -> Op:
    """{A ≥ B}: projector onto the eigenvectors of A − B with eigenvalue ≥ −TOL_EIG."""
    w, v = eigh(a - b)
    keep = w >= -TOL_EIG
    vk = v[:, keep]
    return vk @ vk.conj().T


def trace_norm(a: Op) -> float:
    return float(np.sum(np.abs(la.eigvalsh(hermitize(a)))))


def frac_power(h: Op, t: float) -> Op:
    """H^t on the support of H (negative round-off eigenvalues are dropped)."""
    w, v = eigh(h)
    mask = support_mask(w) & (w > 0)
    wt = np.zeros_like(w)
    wt[mask] = w[mask] ** t
    return from_eig(wt, v)


def support_projector(a: Op) -> Op:
    w, v = eigh(a)
    vk = v[:, support_mask(w)]
    return vk @ vk.conj().T


def pinv_sqrt(a: Op) -> Op:
    """A^{-1/2} on supp(A), zero on the kernel."""
    return frac_power(a, -0.5)


def psd_margin(a: Op, b: Op) -> float:
    """Smallest eigenvalue of B − A (nonnegative iff A ≤ B)."""
    return float(la.eigvalsh(hermitize(b - a))[0])


def psd_leq(a: Op, b: Op, tol: float = 1e-9) -> bool:
    return psd_margin(a, b) >= -tol


def commutator_norm(a: Op, b: Op) -> float:
    """Max-entry norm of [A, B]."""
    return float(np.max(np.abs(a @ b - b @ a), initial=0.0))


# ── 상태 생성 ──────────────────────────────────────────────

def basis_state(i: int, d: int) -> Op:
    m = np.zeros((d, d), dtype=np.complex128)
    m[i, i] = 1.0
    return m


def pure_state(vec) -> Op:
    v = np.asarray(vec, dtype=np.complex128)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def haar_unitary(d: int, rng: np.random.Generator) -> Op:
    """Haar-random unitary: QR of a complex Ginibre matrix with phase-fixed R diagonal."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = la.qr(z)
    diag = np.diag(r)
    ph = diag / np.abs(diag)
    return q * ph


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> Op:
    """Random density operator G G† / Tr, full rank unless ``rank`` is given."""
    r = d if rank is None else rank
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    rho = g @ g.conj().T
    return hermitize(rho / np.trace(rho).real)


def random_psd(d: int, rng: np.random.Generator, scale: float = 1.0) -> Op:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return hermitize(scale * (g @ g.conj().T) / d)


def random_effect(d: int, rng: np.random.Generator) -> Op:
    """Random 0 ≤ Λ ≤ I with eigenvalues uniform on [0, 1]."""
    u = haar_unitary(d, rng)
    return hermitize(from_eig(rng.uniform(0.0, 1.0, size=d), u))
