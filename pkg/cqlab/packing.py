"""Universal c→q channel code: random typical codebooks, Λ-projectors, square-root POVM.

The decoder is built from (codewords, γ_n, d_B) only. No function that
constructs Λ or the POVM accepts a channel, so the same measurement can be
evaluated against any channel with the same output dimension.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from cqlab import qmat, symm
from cqlab.entropy import Ensemble, alpha_chi
from cqlab.qmat import Op
from cqlab.runner import mean_stderr, run_trials
from cqlab.seqtypes import TypicalSampler, pow2, typical_set, zeta

logger = logging.getLogger(__name__)


class ChannelError(ValueError):
    """Channel outputs are inconsistent or a letter is out of range."""


@dataclass(frozen=True)
class CqChannel:
    """Letter x ↦ W(x), a density operator on H_B."""
    outputs: tuple[Op, ...]

    def __post_init__(self):
        if not self.outputs:
            raise ChannelError("channel needs at least one output state")
        shapes = {o.shape for o in self.outputs}
        if len(shapes) != 1:
            raise ChannelError(f"outputs differ in shape: {sorted(shapes)}")

    @classmethod
    def of(cls, outputs: Sequence) -> "CqChannel":
        return cls(tuple(qmat.check_density(o, name=f"letter {i}") for i, o in enumerate(outputs)))

    @property
    def k(self) -> int:
        return len(self.outputs)

    @property
    def d(self) -> int:
        return self.outputs[0].shape[0]

    def ensemble(self, p: Sequence[float]) -> Ensemble:
        return Ensemble(np.asarray(p, dtype=np.float64), self.outputs)

    def average(self, p: Sequence[float]) -> Op:
        return sum(px * o for px, o in zip(p, self.outputs))


def channel_output(w: CqChannel, x: Sequence[int]) -> Op:
    """W(x₁) ⊗ … ⊗ W(x_n)."""
    x = [int(v) for v in x]
    bad = [v for v in x if v < 0 or v >= w.k]
    if bad:
        raise ChannelError(f"letter {bad[0]} out of range for alphabet of size {w.k}")
    return qmat.kron(*[w.outputs[v] for v in x])


# ── 디코더 ────────────────────────────────────────────────

def lambda_projector(x: Sequence[int], gamma_n: float, n: int, d_b: int,
                     seed: int | None = None) -> Op:
    """Λ_{x^n} = {ω_{x^n} − 2^{nγ_n} τ_n ≥ 0}."""
    if len(x) != n:
        raise ValueError(f"sequence length {len(x)} does not match n={n}")
    om = symm.omega(x, d_b, seed)
    tau = symm.tau_n(n, d_b, seed).op
    return qmat.positive_part_projector(om, pow2(n * gamma_n) * tau)


@dataclass(frozen=True)
class PovmSet:
    """Square-root measurement built from projectors Λ_i; the deficiency is the failure outcome."""
    elements: tuple[Op, ...]
    projectors: tuple[Op, ...]

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def deficiency(self) -> Op:
        dim = self.elements[0].shape[0]
        return np.eye(dim, dtype=np.complex128) - sum(self.elements)


def sqrt_povm(projectors: Sequence[Op]) -> PovmSet:
    """Υ_i = S^{-1/2} Λ_i S^{-1/2} with S = Σ_j Λ_j, inverse on supp S."""
    if not projectors:
        raise ValueError("need at least one projector")
    s = sum(projectors)
    r = qmat.pinv_sqrt(s)
    elements = tuple(qmat.hermitize(r @ lam @ r) for lam in projectors)
    return PovmSet(elements, tuple(projectors))


def build_sqrt_povm(codewords: NDArray[np.intp] | Sequence[Sequence[int]], gamma_n: float, d_b: int,
                    seed: int | None = None) -> PovmSet:
    rows = [tuple(int(v) for v in row) for row in codewords]
    if not rows:
        raise ValueError("codebook is empty")
    n = len(rows[0])
    cache: dict[tuple[int, ...], Op] = {}
    for row in rows:
        if row not in cache:
            cache[row] = lambda_projector(row, gamma_n, n, d_b, seed)
    return sqrt_povm([cache[row] for row in rows])


@dataclass(frozen=True)
class CqCode:
    codewords: NDArray[np.intp]      # (M, n), repeats allowed
    povm: PovmSet
    gamma_n: float

    @property
    def size(self) -> int:
        return int(self.codewords.shape[0])

    @property
    def n(self) -> int:
        return int(self.codewords.shape[1])


def make_code(codewords, gamma_n: float, d_b: int, seed: int | None = None) -> CqCode:
    cw = np.asarray(codewords, dtype=np.intp)
    if cw.ndim != 2:
        raise ValueError("codewords must be a 2-D array (M, n)")
    return CqCode(cw, build_sqrt_povm(cw, gamma_n, d_b, seed), gamma_n)


def _outputs(w: CqChannel, codewords: NDArray[np.intp]) -> list[Op]:
    cache: dict[tuple[int, ...], Op] = {}
    out = []
    for row in codewords:
        key = tuple(int(v) for v in row)
        if key not in cache:
            cache[key] = channel_output(w, key)
        out.append(cache[key])
    return out


def avg_error_prob(w: CqChannel, code: CqCode) -> float:
    """(1/M) Σ_i Tr[W(x_i)(I − Υ_i)]; the POVM deficiency counts as an error."""
    if w.d ** code.n != code.povm.elements[0].shape[0]:
        raise ChannelError(f"channel dimension {w.d} does not match the decoder")
    outs = _outputs(w, code.codewords)
    hit = sum(np.trace(o @ ups).real for o, ups in zip(outs, code.povm.elements))
    return float(min(max(1.0 - hit / code.size, 0.0), 1.0))


def hayashi_nagaoka_check(w: CqChannel, code: CqCode) -> tuple[float, float]:
    """(p_e, (2/M)Σ Tr(I−Λ_i)W(x_i) + (4/M)Σ_{i≠j} Tr Λ_j W(x_i))."""
    outs = _outputs(w, code.codewords)
    lams = code.povm.projectors
    total = sum(lams)
    m = code.size
    miss = sum(1.0 - np.trace(lam @ o).real for lam, o in zip(lams, outs))
    cross = sum(np.trace((total - lam) @ o).real for lam, o in zip(lams, outs))
    return avg_error_prob(w, code), float(2 * miss / m + 4 * cross / m)


# ── 부호율 파라미터와 상한 ─────────────────────────────────

@dataclass(frozen=True)
class RateParams:
    R: float
    t: float
    n: int
    M_n: int
    gamma_n: float
    r_t: float
    M_exact: float          # 2^{n[R − ζ_n((k+1)(d²+d))]} before rounding
    chi_ref: float

    @property
    def R_effective(self) -> float:
        return math.log2(self.M_n) / self.n


def rate_params(R: float, t: float, n: int, k: int, d_b: int, chi_ref: float) -> RateParams:
    """M_n, r(t) and γ_n for a target rate R against a reference χ."""
    if not 0 < t < 1:
        raise ValueError(f"t must lie in (0, 1), got {t}")
    dd = d_b * d_b + d_b
    m_exact = pow2(n * (R - zeta(n, (k + 1) * dd)))
    if not math.isfinite(m_exact):
        raise ValueError(f"codebook size 2^{n * R:.1f} is not representable")
    m_n = max(1, int(round(m_exact)))
    r_t = t / (t + 1) * (chi_ref - R)
    if R >= chi_ref:
        logger.warning("rate R=%.4f >= chi_ref=%.4f: r(t)=%.4f <= 0, bound is vacuous", R, chi_ref, r_t)
    gamma = R + r_t - zeta(n, k * dd)
    return RateParams(R, t, n, m_n, gamma, r_t, m_exact, chi_ref)


def error_bound(n: int, k: int, d_b: int, t: float, chi_1mt: float, gamma_n: float,
                M_n: float, eps: float) -> float:
    """ε_n = 2^{−nt[χ_{1−t} − γ_n − ζ_n(k(d²+d))]} + 4(1−ε)⁻¹ M_n 2^{−n(γ_n − ζ_n(d²+d))} + 2ε."""
    dd = d_b * d_b + d_b
    first = pow2(-n * t * (chi_1mt - gamma_n - zeta(n, k * dd)))
    second = 4.0 / (1.0 - eps) * M_n * pow2(-n * (gamma_n - zeta(n, dd)))
    return first + second + 2 * eps


def optimized_error_bound(n: int, R: float, ens: Ensemble, eps: float,
                          ts: Sequence[float] | None = None) -> tuple[float, float]:
    """(1 + 4(1−ε)⁻¹) 2^{−n max_t r(t)} + 2ε, with the maximising t."""
    ts = np.linspace(0.05, 0.95, 19) if ts is None else ts
    best_r, best_t = -math.inf, float(ts[0])
    for t in ts:
        r = t / (t + 1) * (alpha_chi(1 - t, ens) - R)
        if r > best_r:
            best_r, best_t = r, float(t)
    return (1 + 4 / (1 - eps)) * pow2(-n * best_r) + 2 * eps, best_t


@dataclass(frozen=True)
class PackingTerms:
    """Both expectation terms of the union bound, exact and analytic."""
    miss: float             # E Tr[(I − Λ_X) W(X)]
    miss_bound: float
    cross: float            # E Tr[Λ_X' W(X)] for independent X, X'
    cross_bound: float
    eps: float              # 1 − Q_n


def packing_term_bounds(w: CqChannel, p: Sequence[float], n: int, delta: float, gamma_n: float,
                        t: float, seed: int | None = None) -> PackingTerms:
    """Enumerate the typical set to evaluate both terms exactly, next to their bounds."""
    typ = typical_set(p, n, delta)
    if len(typ) == 0:
        raise ValueError("typical set is empty")
    cond = typ.conditional
    eps = 1.0 - typ.q_n
    lams = [lambda_projector(row, gamma_n, n, w.d, seed) for row in typ.sequences]
    outs = [channel_output(w, row) for row in typ.sequences]

    hit = sum(c * np.trace(lam @ o).real for c, lam, o in zip(cond, lams, outs))
    miss = min(max(1.0 - hit, 0.0), 1.0)
    avg_lam = sum(c * lam for c, lam in zip(cond, lams))
    avg_out = sum(c * o for c, o in zip(cond, outs))
    cross = float(np.trace(avg_lam @ avg_out).real)

    dd = w.d * w.d + w.d
    chi = alpha_chi(1 - t, w.ensemble(p))
    miss_bound = pow2(-n * t * (chi - gamma_n - zeta(n, w.k * dd))) + 2 * eps
    cross_bound = pow2(-n * (gamma_n - zeta(n, dd))) / (1 - eps) if eps < 1 else math.inf
    return PackingTerms(float(miss), miss_bound, cross, cross_bound, eps)


# ── Monte Carlo ───────────────────────────────────────────

def expected_error_mc(w: CqChannel, p: Sequence[float], n: int, delta: float, M_n: int,
                      gamma_n: float, trials: int, seed: int,
                      max_concurrent: int | None = None) -> tuple[float, float]:
    """E[p_e] over random typical codebooks; trial i uses the i-th spawned generator."""
    typ = typical_set(p, n, delta)
    TypicalSampler(typ)  # raises EmptyTypicalSetError up front

    def _trial(rng: np.random.Generator) -> float:
        sampler = TypicalSampler(typ, rng)
        code = make_code(sampler.draw(M_n), gamma_n, w.d)
        return avg_error_prob(w, code)

    return mean_stderr(run_trials(_trial, trials, seed, max_concurrent))
