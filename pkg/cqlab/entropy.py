"""Entropic functionals of states and ensembles (logarithms base 2)."""
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as la
from scipy.optimize import minimize
from numpy.typing import NDArray

from cqlab import qmat
from cqlab.qmat import Op

logger = logging.getLogger(__name__)

# Pauli matrices for the Bloch-ball parameterisation
_PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=np.complex128)


@dataclass(frozen=True)
class Ensemble:
    """{p_x, σ_x}: one state per letter, common dimension."""
    probs: NDArray[np.float64]
    states: tuple[Op, ...]

    def __post_init__(self):
        if len(self.probs) != len(self.states):
            raise ValueError(f"{len(self.probs)} probabilities for {len(self.states)} states")
        dims = {s.shape for s in self.states}
        if len(dims) != 1:
            raise ValueError(f"ensemble states differ in shape: {sorted(dims)}")

    @classmethod
    def of(cls, probs: Sequence[float], states: Sequence) -> "Ensemble":
        from cqlab.seqtypes import as_distribution

        p = as_distribution(probs)
        checked = tuple(qmat.check_density(s, name=f"state {i}") for i, s in enumerate(states))
        return cls(p, checked)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def average(self) -> Op:
        return sum(px * s for px, s in zip(self.probs, self.states))


# ── 고전 엔트로피 ──────────────────────────────────────────

def shannon(p: Sequence[float]) -> float:
    arr = np.asarray(p, dtype=np.float64)
    nz = arr[arr > 0]
    return float(-np.sum(nz * np.log2(nz)))


def kl(q: Sequence[float], lam: Sequence[float]) -> float:
    """D(q‖λ) in bits; inf when q puts mass where λ has none."""
    q = np.asarray(q, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    pos = q > 0
    if np.any(lam[pos] <= 0):
        return math.inf
    return float(np.sum(q[pos] * np.log2(q[pos] / lam[pos])))


# ── 양자 엔트로피 ──────────────────────────────────────────

def vn_entropy(rho: Op) -> float:
    w = la.eigvalsh(qmat.hermitize(rho))
    w = w[w > qmat.TOL_SUPPORT * max(np.max(np.abs(w)), 1.0)]
    return max(float(-np.sum(w * np.log2(w))), 0.0)


def _log2_on_support(h: Op) -> tuple[Op, Op]:
    """(log₂ H on supp H, projector onto ker H)."""
    w, v = qmat.eigh(h)
    mask = qmat.support_mask(w) & (w > 0)
    lw = np.zeros_like(w)
    lw[mask] = np.log2(w[mask])
    ker = v[:, ~mask]
    return qmat.from_eig(lw, v), ker @ ker.conj().T


def rel_entropy(rho: Op, sigma: Op) -> float:
    """S(ρ‖σ) = Tr ρ log ρ − Tr ρ log σ; inf when supp ρ ⊄ supp σ."""
    log_sigma, ker_sigma = _log2_on_support(sigma)
    if np.trace(rho @ ker_sigma).real > qmat.TOL_SUPPORT:
        return math.inf
    log_rho, _ = _log2_on_support(rho)
    return float(np.trace(rho @ (log_rho - log_sigma)).real)


def renyi_rel_entropy(alpha: float, rho: Op, sigma: Op) -> float:
    """S_α(ρ‖σ) = (1/(α−1)) log₂ Tr(ρ^α σ^{1−α}), α ∈ (0,1)."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    tr = np.trace(qmat.frac_power(rho, alpha) @ qmat.frac_power(sigma, 1 - alpha)).real
    if tr <= 0:
        return math.inf
    return float(math.log2(tr) / (alpha - 1))


def holevo(ens: Ensemble) -> float:
    """χ = S(Σ p σ) − Σ p S(σ)."""
    avg = vn_entropy(ens.average())
    return avg - float(sum(px * vn_entropy(s) for px, s in zip(ens.probs, ens.states) if px > 0))


def cq_state(ens: Ensemble) -> Op:
    """σ_XQ = Σ p_x |x⟩⟨x| ⊗ σ_x (block diagonal)."""
    return la.block_diag(*[px * s for px, s in zip(ens.probs, ens.states)]).astype(np.complex128)


def holevo_relative(ens: Ensemble) -> float:
    """χ computed as S(σ_XQ ‖ σ_X ⊗ σ_Q)."""
    product = qmat.kron(np.diag(ens.probs).astype(np.complex128), ens.average())
    return rel_entropy(cq_state(ens), product)


def alpha_chi(alpha: float, ens: Ensemble) -> float:
    """χ_α closed form: (α/(α−1)) log₂ Tr[(Σ p σ^α)^{1/α}]."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    a = sum(px * qmat.frac_power(s, alpha) for px, s in zip(ens.probs, ens.states) if px > 0)
    tr = np.trace(qmat.frac_power(a, 1 / alpha)).real
    return float(alpha / (alpha - 1) * math.log2(tr))


def alpha_chi_objective(alpha: float, ens: Ensemble, omega: Op) -> float:
    """S_α(σ_XQ ‖ σ_X ⊗ ω), the quantity χ_α minimises over ω."""
    product = qmat.kron(np.diag(ens.probs).astype(np.complex128), omega)
    return renyi_rel_entropy(alpha, cq_state(ens), product)


# ── χ_α 변분 교차검증 (qubit 전용) ──────────────────────────

def _bloch_objective(a_tr: float, a_vec: NDArray[np.float64], beta: float,
                     r: NDArray[np.float64]) -> NDArray[np.float64]:
    """Tr(A ω(r)^β) for Bloch vectors r (shape (..., 3)), vectorised."""
    norm = np.linalg.norm(r, axis=-1)
    safe = np.where(norm > 0, norm, 1.0)
    proj = np.where(norm > 0, (r @ a_vec) / safe, 0.0)
    lp = ((1 + norm) / 2) ** beta
    lm = np.where(norm < 1, ((1 - norm) / 2) ** beta, 0.0)
    return lp * (a_tr + proj) / 2 + lm * (a_tr - proj) / 2


def alpha_chi_variational(alpha: float, ens: Ensemble, step: float = 0.02) -> float:
    """min_ω S_α(σ_XQ‖σ_X⊗ω) over the Bloch ball: grid search, then Nelder–Mead."""
    if ens.dim != 2:
        raise ValueError("variational χ_α is implemented for qubit ensembles only")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    beta = 1 - alpha
    a = sum(px * qmat.frac_power(s, alpha) for px, s in zip(ens.probs, ens.states) if px > 0)
    a_tr = float(np.trace(a).real)
    a_vec = np.array([np.trace(a @ sp).real for sp in _PAULI])

    axis = np.arange(-1.0, 1.0 + step / 2, step)
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    grid = grid[np.linalg.norm(grid, axis=1) <= 1.0]
    values = _bloch_objective(a_tr, a_vec, beta, grid)
    start = grid[int(np.argmax(values))]

    def _neg(r: NDArray[np.float64]) -> float:
        norm = np.linalg.norm(r)
        if norm > 1.0:
            r = r / norm
        return -float(_bloch_objective(a_tr, a_vec, beta, r[None, :])[0])

    res = minimize(_neg, start, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    best = max(-res.fun, float(values.max()))
    # S_α = (1/(α−1)) log₂ Tr(A ω^{1−α}); α−1 < 0 so the max of the trace is the min of S_α
    return float(math.log2(best) / (alpha - 1))
