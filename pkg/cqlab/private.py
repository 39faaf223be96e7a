"""Universal private code over a c→qq channel.

A message j is sent as a uniformly chosen member of the covering set S_j.
Bob decodes the pair (j, ℓ) with the universal packing POVM; privacy is
Eve's obfuscation error on each S_j. The code is built from
(p, χ₀, χ₁, n, δ, ε, t, seed) and the output dimension d_B only.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from cqlab import qmat
from cqlab.covering import covering_size, eps_prime, obfuscation_error, obfuscation_threshold
from cqlab.entropy import alpha_chi, holevo, shannon, vn_entropy
from cqlab.packing import (CqChannel, CqCode, PovmSet, avg_error_prob, build_sqrt_povm,
                           channel_output, error_bound, rate_params)
from cqlab.qmat import Op
from cqlab.runner import binomial_stderr, run_trials
from cqlab.seqtypes import TypicalSampler, typical_set

logger = logging.getLogger(__name__)

# redraws per colliding codeword in strict-disjoint mode
STRICT_RETRIES = 100


@dataclass(frozen=True)
class BipartiteCqChannel:
    """Letter x ↦ W^{BE}(x) on H_B ⊗ H_E."""
    outputs: tuple[Op, ...]
    d_b: int
    d_e: int

    def __post_init__(self):
        size = self.d_b * self.d_e
        for i, o in enumerate(self.outputs):
            if o.shape != (size, size):
                raise ValueError(f"letter {i}: shape {o.shape} does not match d_B*d_E={size}")

    @classmethod
    def of(cls, outputs: Sequence, d_b: int, d_e: int) -> "BipartiteCqChannel":
        return cls(tuple(qmat.check_density(o, name=f"letter {i}") for i, o in enumerate(outputs)),
                   d_b, d_e)

    @property
    def k(self) -> int:
        return len(self.outputs)


def marginals(w: BipartiteCqChannel) -> tuple[CqChannel, CqChannel]:
    """(W^B, W^E) by partial trace of every output."""
    dims = [w.d_b, w.d_e]
    bob = tuple(qmat.partial_trace(o, dims, [0]) for o in w.outputs)
    eve = tuple(qmat.partial_trace(o, dims, [1]) for o in w.outputs)
    return CqChannel(bob), CqChannel(eve)


def private_rate(p: Sequence[float], w: BipartiteCqChannel) -> float:
    """I_c = χ(p, W^B) − χ(p, W^E); may be negative."""
    bob, eve = marginals(w)
    return holevo(bob.ensemble(p)) - holevo(eve.ensemble(p))


# ── 크기 결정 ────────────────────────────────────────────

@dataclass(frozen=True)
class PrivateSizes:
    M_n: int
    L_n: int
    J_n: int
    gamma_n: float

    def rate(self, n: int) -> float:
        """Private rate log₂(J_n)/n actually realised."""
        return math.log2(self.J_n) / n


def private_sizes(p: Sequence[float], chi0: float, chi1: float, n: int, delta: float, t: float,
                  d_b: int, c: float | None = None, M_n: int | None = None, L_n: int | None = None,
                  gamma_n: float | None = None) -> PrivateSizes:
    """M_n from the packing sizing at R = χ₀, L_n = 2^{n[χ₁+2cδ]}, J_n = ⌊M_n/L_n⌋."""
    k = len(p)
    c = shannon(p) if c is None else c
    rp = rate_params(chi0, t, n, k, d_b, chi_ref=chi0)
    m = rp.M_n if M_n is None else M_n
    size = covering_size(chi1, n, delta, c) if L_n is None else L_n
    if chi0 <= chi1:
        logger.warning("chi0=%.4f <= chi1=%.4f: J_n forced to 1 (zero private rate)", chi0, chi1)
        j = 1
    else:
        j = max(1, m // size)
    return PrivateSizes(m, size, j, rp.gamma_n if gamma_n is None else gamma_n)


# ── 부호 ────────────────────────────────────────────────

@dataclass(frozen=True)
class PrivateCode:
    codewords: NDArray[np.intp]     # (J_n, L_n, n)
    povm: PovmSet                   # over the flattened (j, ℓ) index j·L_n + ℓ
    sizes: PrivateSizes
    eps: float
    t: float
    collisions: int

    @property
    def J_n(self) -> int:
        return int(self.codewords.shape[0])

    @property
    def L_n(self) -> int:
        return int(self.codewords.shape[1])

    @property
    def n(self) -> int:
        return int(self.codewords.shape[2])

    @property
    def covering_sets(self) -> list[NDArray[np.intp]]:
        return [self.codewords[j] for j in range(self.J_n)]

    def flat(self) -> CqCode:
        return CqCode(self.codewords.reshape(-1, self.n), self.povm, self.sizes.gamma_n)

    def tobytes(self) -> bytes:
        return self.codewords.astype(np.int64).tobytes()


def count_collisions(draws: NDArray[np.intp]) -> int:
    """Codewords whose sequence also occurs in a different covering set."""
    owners: dict[int, set[int]] = {}
    for j, row in enumerate(draws):
        for v in row:
            owners.setdefault(int(v), set()).add(j)
    return sum(1 for row in draws for v in row if len(owners[int(v)]) > 1)


def _resample_collisions(draws: NDArray[np.intp], sampler: TypicalSampler) -> None:
    J, L = draws.shape
    for j in range(J):
        others = np.delete(draws, j, axis=0)
        for ell in range(L):
            for _ in range(STRICT_RETRIES):
                if draws[j, ell] not in others:
                    break
                draws[j, ell] = sampler.draw_indices(1)[0]
            else:
                logger.warning("codeword (%d, %d) still collides after %d redraws", j, ell, STRICT_RETRIES)


def build_private_code(p: Sequence[float], chi0: float, chi1: float, n: int, delta: float,
                       eps: float, t: float, seed: int | np.random.Generator, d_b: int,
                       strict_disjoint: bool = False, c: float | None = None,
                       M_n: int | None = None, L_n: int | None = None,
                       gamma_n: float | None = None) -> PrivateCode:
    """Draw J_n·L_n i.i.d. codewords from p'^n, split into covering sets, build Bob's POVM."""
    sizes = private_sizes(p, chi0, chi1, n, delta, t, d_b, c, M_n, L_n, gamma_n)
    typ = typical_set(p, n, delta)
    sampler = TypicalSampler(typ, seed)
    draws = sampler.draw_indices(sizes.J_n * sizes.L_n).reshape(sizes.J_n, sizes.L_n)
    if strict_disjoint and sizes.J_n > 1:
        _resample_collisions(draws, sampler)
    collisions = count_collisions(draws)
    if collisions:
        logger.info("covering sets share sequences: %d colliding codewords", collisions)

    codewords = typ.sequences[draws]
    povm = build_sqrt_povm(codewords.reshape(-1, n), sizes.gamma_n, d_b)
    return PrivateCode(codewords, povm, sizes, eps, t, collisions)


def encode(code: PrivateCode, j: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Send message j as a uniformly chosen member of S_j."""
    if not 0 <= j < code.J_n:
        raise ValueError(f"message {j} out of range for J_n={code.J_n}")
    ell = int(rng.integers(code.L_n))
    return tuple(int(v) for v in code.codewords[j, ell])


def message_error_prob(w_b: CqChannel, code: PrivateCode) -> float:
    """Error of decoding j alone: Υ_j = Σ_ℓ Υ_{j,ℓ}, codeword uniform over S_j."""
    L = code.L_n
    hit = 0.0
    for j in range(code.J_n):
        ups = sum(code.povm.elements[j * L:(j + 1) * L])
        hit += sum(np.trace(channel_output(w_b, x) @ ups).real for x in code.codewords[j])
    return float(min(max(1.0 - hit / (code.J_n * L), 0.0), 1.0))


# ── 평가 ────────────────────────────────────────────────

def analytic_targets(w: BipartiteCqChannel, p: Sequence[float], code: PrivateCode) -> tuple[float, float]:
    """(√ε_n, obfuscation threshold) at the code's parameters."""
    bob, _ = marginals(w)
    chi_1mt = alpha_chi(1 - code.t, bob.ensemble(p))
    eps_n = error_bound(code.n, len(p), w.d_b, code.t, chi_1mt, code.sizes.gamma_n,
                        code.J_n * code.L_n, code.eps)
    return math.sqrt(eps_n), obfuscation_threshold(len(p), code.eps)


@dataclass(frozen=True)
class PrivateVerdict:
    p_e: float                      # over all (j, ℓ)
    p_e_message: float              # over j only
    deltas: tuple[float, ...]
    eps_target: float
    delta_target: float

    @property
    def delta_max(self) -> float:
        return max(self.deltas)

    @property
    def passed(self) -> bool:
        return self.p_e <= self.eps_target and self.delta_max <= self.delta_target


def evaluate_private_code(w: BipartiteCqChannel, p: Sequence[float], code: PrivateCode,
                          eps_target: float | None = None,
                          delta_target: float | None = None) -> PrivateVerdict:
    bob, eve = marginals(w)
    if eps_target is None or delta_target is None:
        a_eps, a_delta = analytic_targets(w, p, code)
        eps_target = a_eps if eps_target is None else eps_target
        delta_target = a_delta if delta_target is None else delta_target
    p_e = avg_error_prob(bob, code.flat())
    deltas = tuple(obfuscation_error(eve, p, s) for s in code.covering_sets)
    return PrivateVerdict(p_e, message_error_prob(bob, code), deltas, eps_target, delta_target)


@dataclass(frozen=True)
class EventRecord:
    trials: int
    J_n: int
    L_n: int
    decoding_freq: float            # Pr{p_e > √ε_n}
    covering_freq: tuple[float, ...]    # Pr{Δ(S_j) ≥ threshold}, per j
    union_freq: float
    union_stderr: float
    sqrt_eps_n: float
    eps_prime_n: float
    union_bound: float              # J_n·ε′_n + √ε_n

    @property
    def passed(self) -> bool:
        if self.union_bound > 1:
            return True
        return self.union_freq <= self.union_bound + 3 * self.union_stderr


def event_analysis(w: BipartiteCqChannel, p: Sequence[float], chi0: float, chi1: float, n: int,
                   delta: float, eps: float, t: float, trials: int, seed: int,
                   c: float | None = None, M_n: int | None = None, L_n: int | None = None,
                   gamma_n: float | None = None, max_concurrent: int | None = None) -> EventRecord:
    """Failure frequencies of the decoding and covering events over random code draws."""
    bob, eve = marginals(w)
    c = shannon(p) if c is None else c
    sizes = private_sizes(p, chi0, chi1, n, delta, t, w.d_b, c, M_n, L_n, gamma_n)
    chi_1mt = alpha_chi(1 - t, bob.ensemble(p))
    sqrt_eps_n = math.sqrt(error_bound(n, len(p), w.d_b, t, chi_1mt, sizes.gamma_n,
                                       sizes.J_n * sizes.L_n, eps))
    chi_e = holevo(eve.ensemble(p))
    eps_p = eps_prime(n, eps, chi1, chi_e, vn_entropy(eve.average(p)), c, delta)
    thr = obfuscation_threshold(len(p), eps)

    def _trial(rng: np.random.Generator) -> tuple[bool, tuple[bool, ...]]:
        code = build_private_code(p, chi0, chi1, n, delta, eps, t, rng, w.d_b, c=c,
                                  M_n=M_n, L_n=L_n, gamma_n=gamma_n)
        p_e = avg_error_prob(bob, code.flat())
        cover = tuple(obfuscation_error(eve, p, s) >= thr for s in code.covering_sets)
        return p_e > sqrt_eps_n, cover

    results = run_trials(_trial, trials, seed, max_concurrent)
    decoding = np.array([r[0] for r in results])
    covering = np.array([r[1] for r in results])
    union = decoding | covering.any(axis=1)
    union_freq = float(union.mean())
    return EventRecord(
        trials=trials, J_n=sizes.J_n, L_n=sizes.L_n,
        decoding_freq=float(decoding.mean()),
        covering_freq=tuple(float(f) for f in covering.mean(axis=0)),
        union_freq=union_freq,
        union_stderr=binomial_stderr(union_freq, trials),
        sqrt_eps_n=sqrt_eps_n, eps_prime_n=eps_p,
        union_bound=sizes.J_n * eps_p + sqrt_eps_n,
    )
