"""Universal covering: conditional typical projectors, the σ→φ→θ→ψ smoothing chain,
obfuscation error and operator-Chernoff checks.

Covering sets are drawn from the input distribution alone. The smoothing
chain and ψ's scale use the channel; they are analysis objects, not part of
the construction.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from cqlab import qmat, symm
from cqlab.entropy import holevo, shannon, vn_entropy
from cqlab.packing import CqChannel, channel_output
from cqlab.qmat import Op
from cqlab.runner import binomial_stderr, mean_stderr, run_trials
from cqlab.seqtypes import TypicalSampler, TypicalSet, ordered_rep, pow2, type_of, typical_set

logger = logging.getLogger(__name__)

# operator Chernoff constant 1/(2 ln²2)
K_C = 1.0 / (2.0 * math.log(2.0) ** 2)

_BOUND_TOL = 1e-9


def obfuscation_threshold(k: int, eps: float) -> float:
    """ε + 4√(kε) + 8√(3ε + 2√(kε))."""
    root = math.sqrt(k * eps)
    return eps + 4 * root + 8 * math.sqrt(3 * eps + 2 * root)


def covering_size(chi1: float, n: int, delta: float, c: float) -> int:
    """L_n = 2^{n[χ₁ + 2cδ]}, rounded and floored at 1."""
    size = pow2(n * (chi1 + 2 * c * delta))
    if not math.isfinite(size):
        raise ValueError("covering set size overflows")
    return max(1, int(round(size)))


def eps_prime(n: int, eps: float, chi1: float, chi: float, s_bar: float, c: float, delta: float) -> float:
    """2·2^{−k_c ε³ 2^{n[χ₁−χ]} + n[S(W̄)+cδ]}; decays in n only when χ₁ > χ."""
    if abs(chi1 - chi) <= 1e-12:
        logger.warning("chi1 == chi (%.6f): covering failure bound does not decay with n", chi)
    return 2.0 * pow2(-K_C * eps ** 3 * pow2(n * (chi1 - chi)) + n * (s_bar + c * delta))


def chernoff_cover_bound(L: int, n: int, eps: float, chi: float, trace_pi_bar: float,
                         c: float, delta: float) -> float:
    """2 Tr Π̄ · 2^{−L k_c ε³ 2^{−n[χ+2cδ]}}: window failure bound for L samples."""
    return 2.0 * trace_pi_bar * pow2(-L * K_C * eps ** 3 * pow2(-n * (chi + 2 * c * delta)))


# ── 조건부 전형 사영 ──────────────────────────────────────

def cond_typical_projector(w_e: CqChannel, x: Sequence[int], delta: float) -> Op:
    """U_s (Π^{m₁}_{W(1),δ} ⊗ … ⊗ Π^{m_k}_{W(k),δ}) U_s† for x^n = s·x_o^n."""
    x_o, s = ordered_rep(x)
    counts = type_of(x_o, w_e.k)
    blocks = [symm.typical_projector(w_e.outputs[i], m, delta) for i, m in enumerate(counts) if m > 0]
    u = qmat.permutation_unitary(s, w_e.d)
    return qmat.hermitize(u @ qmat.kron(*blocks) @ u.conj().T)


def obfuscation_error(w_e: CqChannel, p: Sequence[float], sequences) -> float:
    """Δ(S) = ‖(1/|S|) Σ_{x∈S} W(x) − W̄^⊗n‖₁."""
    rows = [tuple(int(v) for v in row) for row in sequences]
    if not rows:
        raise ValueError("covering set is empty")
    n = len(rows[0])
    uniq: dict[tuple[int, ...], int] = {}
    for row in rows:
        uniq[row] = uniq.get(row, 0) + 1
    avg = sum(cnt * channel_output(w_e, row) for row, cnt in uniq.items()) / len(rows)
    target = qmat.kron_power(w_e.average(p), n)
    return qmat.trace_norm(avg - target)


# ── 평활화 사슬 ──────────────────────────────────────────

@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    applies: bool = True

    @property
    def ok(self) -> bool:
        return (not self.applies) or self.lhs <= self.rhs + _BOUND_TOL

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass(frozen=True)
class SmoothingChain:
    x: tuple[int, ...]
    output: Op          # W^{E^n}(x^n)
    sigma: Op           # conditional typical smoothing
    phi: Op             # average-state typical smoothing
    theta: Op           # Chernoff-window smoothing
    psi: Op             # 2^{n[Σ p_i S(W(i)) − cδ]}·θ


class CoveringContext:
    """Shared pieces of the smoothing chain for one (W^E, p, n, δ, ε).

    φ̄ is the exact p'-average of φ over the typical set. ψ, φ and θ use the
    channel outputs; only the covering set itself is drawn without them.
    """

    def __init__(self, w_e: CqChannel, p: Sequence[float], n: int, delta: float, eps: float,
                 c: float | None = None):
        self.w_e = w_e
        self.p = np.asarray(p, dtype=np.float64)
        self.n, self.delta, self.eps = n, delta, eps
        self.c = shannon(self.p) if c is None else c
        self.typ: TypicalSet = typical_set(self.p, n, delta)
        if len(self.typ) == 0:
            TypicalSampler(self.typ)  # raises EmptyTypicalSetError

        self.w_bar = w_e.average(self.p)
        self.s_bar = vn_entropy(self.w_bar)
        self.s_cond = float(sum(px * vn_entropy(o) for px, o in zip(self.p, w_e.outputs) if px > 0))
        self.chi = holevo(w_e.ensemble(self.p))
        self.pi_bar = symm.typical_projector(self.w_bar, n, delta)
        self.rank_pi_bar = float(np.trace(self.pi_bar).real)

        self._sigma: list[Op] = []
        self._phi: list[Op] = []
        for row in self.typ.sequences:
            sig, ph = self._smooth(tuple(int(v) for v in row))
            self._sigma.append(sig)
            self._phi.append(ph)
        self.phi_bar = qmat.hermitize(sum(w * ph for w, ph in zip(self.typ.conditional, self._phi)))

        self.threshold = eps * pow2(-n * (self.s_bar + self.c * delta))
        # threshold > 0, so {φ̄ ≥ thr·I} already lies inside supp φ̄ ⊆ Π̄
        dim = self.phi_bar.shape[0]
        self.pi = qmat.positive_part_projector(self.phi_bar, self.threshold * np.eye(dim))
        self.phi_bar_prime = qmat.hermitize(self.pi @ self.phi_bar @ self.pi)
        self.psi_scale = pow2(n * (self.s_cond - self.c * delta))
        self._index = self.typ.index_of()
        logger.debug("covering context: n=%d |T|=%d rank(Pi_bar)=%.0f thr=%.3g",
                     n, len(self.typ), self.rank_pi_bar, self.threshold)

    def _smooth(self, x: tuple[int, ...]) -> tuple[Op, Op]:
        out = channel_output(self.w_e, x)
        pc = cond_typical_projector(self.w_e, x, self.delta)
        sigma = qmat.hermitize(pc @ out @ pc)
        phi = qmat.hermitize(self.pi_bar @ sigma @ self.pi_bar)
        return sigma, phi

    def chain(self, x: Sequence[int]) -> SmoothingChain:
        key = tuple(int(v) for v in x)
        i = self._index.get(key)
        if i is None:
            sigma, phi = self._smooth(key)
        else:
            sigma, phi = self._sigma[i], self._phi[i]
        theta = qmat.hermitize(self.pi @ phi @ self.pi)
        return SmoothingChain(key, channel_output(self.w_e, key), sigma, phi, theta,
                              self.psi_scale * theta)

    def thetas(self) -> list[Op]:
        """θ for every typical sequence, in typical-set order."""
        return [qmat.hermitize(self.pi @ ph @ self.pi) for ph in self._phi]

    def outputs(self) -> list[Op]:
        return [channel_output(self.w_e, row) for row in self.typ.sequences]

    # ── 점검 ──

    def chain_bounds(self, ch: SmoothingChain) -> list[BoundCheck]:
        k, eps = self.w_e.k, self.eps
        tr_sigma = float(np.trace(ch.sigma).real)
        tr_phi = float(np.trace(ch.phi).real)
        d_sigma = qmat.trace_norm(ch.sigma - ch.output)
        d_phi = qmat.trace_norm(ch.phi - ch.sigma)
        sigma_eps = tr_sigma >= 1 - k * eps
        phi_eps = tr_phi >= 1 - eps - 2 * math.sqrt(k * eps)
        return [
            BoundCheck("trace_order", tr_phi, tr_sigma),
            BoundCheck("trace_sigma_le_1", tr_sigma, 1.0),
            BoundCheck("sigma_gentle", d_sigma, 2 * math.sqrt(max(1 - tr_sigma, 0.0))),
            BoundCheck("phi_gentle", d_phi, 2 * math.sqrt(max(1 - tr_phi, 0.0))),
            BoundCheck("sigma_eps", d_sigma, 2 * math.sqrt(k * eps), sigma_eps),
            BoundCheck("phi_eps", d_phi, 2 * math.sqrt(eps + 2 * math.sqrt(k * eps)), phi_eps),
            BoundCheck("phi_total_eps", qmat.trace_norm(ch.phi - ch.output),
                       2 * math.sqrt(k * eps) + 2 * math.sqrt(eps + 2 * math.sqrt(k * eps)),
                       sigma_eps and phi_eps),
        ]

    def context_bounds(self) -> list[BoundCheck]:
        k, eps = self.w_e.k, self.eps
        tr_bar = float(np.trace(self.phi_bar).real)
        tr_bar_prime = float(np.trace(self.phi_bar_prime).real)
        floor = qmat.psd_margin(self.threshold * self.pi, self.phi_bar_prime)
        rank_ok = self.rank_pi_bar <= pow2(self.n * (self.s_bar + self.c * self.delta))
        bar_ok = tr_bar >= 1 - eps - 2 * math.sqrt(k * eps)
        return [
            BoundCheck("phi_bar_commutes", qmat.commutator_norm(self.phi_bar, self.pi_bar), 1e-9),
            BoundCheck("window_floor", -floor, 0.0),
            BoundCheck("window_trace_loss", tr_bar - tr_bar_prime, self.threshold * self.rank_pi_bar),
            BoundCheck("window_trace_eps", tr_bar - tr_bar_prime, eps, rank_ok),
            BoundCheck("window_trace_total", 1 - tr_bar_prime, 2 * eps + 2 * math.sqrt(k * eps),
                       rank_ok and bar_ok),
        ]


def smoothing_chain(w_e: CqChannel, x: Sequence[int], p: Sequence[float], delta: float, eps: float,
                    c: float | None = None) -> SmoothingChain:
    return CoveringContext(w_e, p, len(x), delta, eps, c).chain(x)


@dataclass(frozen=True)
class ReconstructionTerms:
    """Trace distances along W̄_A → φ̄_A → θ̄_A → φ̄′ → φ̄ → W̄^⊗n for a covering set A."""
    output_to_phi: float
    phi_to_theta: float
    theta_to_window: float
    window_to_phi_bar: float
    phi_bar_to_average: float
    delta: float                    # Δ(A)
    in_window: bool                 # θ̄_A ∈ [1 ± ε] φ̄′

    @property
    def total(self) -> float:
        return (self.output_to_phi + self.phi_to_theta + self.theta_to_window
                + self.window_to_phi_bar + self.phi_bar_to_average)


def _in_window(avg: Op, center: Op, eps: float) -> bool:
    return qmat.psd_leq((1 - eps) * center, avg) and qmat.psd_leq(avg, (1 + eps) * center)


def reconstruction_terms(ctx: CoveringContext, sequences) -> ReconstructionTerms:
    rows = [tuple(int(v) for v in row) for row in sequences]
    chains = [ctx.chain(row) for row in rows]
    m = len(chains)
    out = sum(ch.output for ch in chains) / m
    phi = sum(ch.phi for ch in chains) / m
    theta = sum(ch.theta for ch in chains) / m
    target = qmat.kron_power(ctx.w_bar, ctx.n)
    return ReconstructionTerms(
        output_to_phi=qmat.trace_norm(out - phi),
        phi_to_theta=qmat.trace_norm(phi - theta),
        theta_to_window=qmat.trace_norm(theta - ctx.phi_bar_prime),
        window_to_phi_bar=qmat.trace_norm(ctx.phi_bar_prime - ctx.phi_bar),
        phi_bar_to_average=qmat.trace_norm(ctx.phi_bar - target),
        delta=qmat.trace_norm(out - target),
        in_window=_in_window(theta, ctx.phi_bar_prime, ctx.eps),
    )


# ── 실험 ──────────────────────────────────────────────────

@dataclass(frozen=True)
class CoveringStats:
    n: int
    L_n: int
    delta: float
    eps: float
    deltas: tuple[float, ...]
    mean: float
    stderr: float
    threshold: float                # obfuscation threshold
    exceed_freq: float              # Pr{Δ ≥ threshold}
    eps_prime: float
    window_fail_freq: float         # Pr{θ̄_A ∉ [1±ε]φ̄′}
    chernoff_bound: float
    exhaustive: bool = False
    extra: dict = field(default_factory=dict)


def covering_experiment(w_e: CqChannel, p: Sequence[float], n: int, delta: float, eps: float,
                        L_n: int, trials: int, seed: int, chi1: float | None = None,
                        c: float | None = None, max_concurrent: int | None = None) -> CoveringStats:
    """Draw ``trials`` covering sets of size L_n from p'^n and record Δ for each.

    When L_n reaches the size of the typical set, every trial uses the whole
    set once, so all trials coincide.
    """
    if L_n < 1:
        raise ValueError("L_n must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ctx = CoveringContext(w_e, p, n, delta, eps, c)
    size = len(ctx.typ)
    outs = np.stack(ctx.outputs())
    thetas = np.stack(ctx.thetas())
    target = qmat.kron_power(ctx.w_bar, n)
    exhaustive = L_n >= size
    if exhaustive:
        logger.info("L_n=%d >= |typical set|=%d: using the whole set", L_n, size)

    def _trial(rng: np.random.Generator) -> tuple[float, bool]:
        if exhaustive:
            weights = np.full(size, 1.0 / size)
        else:
            idx = TypicalSampler(ctx.typ, rng).draw_indices(L_n)
            weights = np.bincount(idx, minlength=size) / L_n
        avg = np.tensordot(weights, outs, axes=1)
        avg_theta = np.tensordot(weights, thetas, axes=1)
        return qmat.trace_norm(avg - target), _in_window(avg_theta, ctx.phi_bar_prime, eps)

    if exhaustive:
        # one deterministic evaluation stands for every trial
        results = [_trial(np.random.default_rng(seed))] * trials
        deltas = tuple(r[0] for r in results)
        mean, stderr = deltas[0], 0.0
    else:
        results = run_trials(_trial, trials, seed, max_concurrent)
        deltas = tuple(r[0] for r in results)
        mean, stderr = mean_stderr(deltas)
    thr = obfuscation_threshold(w_e.k, eps)
    chi1 = ctx.chi if chi1 is None else chi1
    return CoveringStats(
        n=n, L_n=L_n, delta=delta, eps=eps, deltas=deltas, mean=mean, stderr=stderr,
        threshold=thr,
        exceed_freq=float(np.mean([d >= thr for d in deltas])),
        eps_prime=eps_prime(n, eps, chi1, ctx.chi, ctx.s_bar, ctx.c, delta),
        window_fail_freq=float(np.mean([not r[1] for r in results])),
        chernoff_bound=chernoff_cover_bound(L_n, n, eps, ctx.chi, ctx.rank_pi_bar, ctx.c, delta),
        exhaustive=exhaustive,
        extra={"chi": ctx.chi, "chi1": chi1, "s_bar": ctx.s_bar, "typical_size": size},
    )


# ── 연산자 Chernoff ──────────────────────────────────────

@dataclass(frozen=True)
class ChernoffResult:
    empirical: float
    bound: float
    stderr: float
    t_thresh: float

    @property
    def holds(self) -> bool:
        return self.empirical <= self.bound + 3 * self.stderr


def chernoff_check(ops: Sequence[Op], probs: Sequence[float], N: int, eps: float, trials: int,
                   seed: int, t_thresh: float | None = None,
                   max_concurrent: int | None = None) -> ChernoffResult:
    """Pr{(1/N)Σσ_m ∉ [1±ε]Ω} for i.i.d. σ_m, against 2·dim·2^{−N k_c ε² t}."""
    if not 0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    stack = np.stack([qmat.as_operator(o) for o in ops])
    probs = np.asarray(probs, dtype=np.float64)
    dim = stack.shape[1]
    eye = np.eye(dim)
    for i, o in enumerate(stack):
        if not (qmat.psd_leq(np.zeros_like(o), o) and qmat.psd_leq(o, eye)):
            raise ValueError(f"operator {i} is not between 0 and I")
    omega = np.tensordot(probs, stack, axes=1)
    t = qmat.psd_margin(np.zeros_like(omega), omega) if t_thresh is None else t_thresh
    if not 0 < t <= 1 or not qmat.psd_leq(t * eye, omega):
        raise ValueError(f"mean operator is not bounded below by t={t:.6g}")

    def _trial(rng: np.random.Generator) -> bool:
        idx = rng.choice(len(stack), size=N, p=probs)
        avg = np.tensordot(np.bincount(idx, minlength=len(stack)) / N, stack, axes=1)
        return not _in_window(avg, omega, eps)

    fails = run_trials(_trial, trials, seed, max_concurrent)
    freq = float(np.mean(fails))
    bound = 2.0 * dim * pow2(-N * K_C * eps ** 2 * t)
    return ChernoffResult(freq, bound, binomial_stderr(freq, trials), t)
